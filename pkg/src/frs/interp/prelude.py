"""Items every program sees unless it defines an item of the same name."""

PRELUDE_SOURCE = """
trait PartialEq {
    fn eq(&self, other: &Self) -> bool;
    fn ne(&self, other: &Self) -> bool { !self.eq(other) }
}

enum Option<T> {
    None,
    Some(T)
}
"""

_cache = None


def prelude_items() -> list:
    """Parsed and desugared prelude items (cached; treat as read-only)."""
    global _cache
    if _cache is None:
        from ..desugar import desugar_program
        from ..syntax.parser import parse
        _cache = desugar_program(parse(PRELUDE_SOURCE, "<prelude>")).items
    return _cache
