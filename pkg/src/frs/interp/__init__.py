"""Tree-walking evaluation of desugared programs."""

from .machine import Interpreter, format_template, run_program
from .values import UNIT, display

__all__ = ["Interpreter", "UNIT", "display", "format_template", "run_program"]
