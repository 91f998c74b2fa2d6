# byzfed/contexts/__init__.py
from .in_memory import InMemoryContext
from .local import LocalContext

__all__ = [
    "InMemoryContext",
    "LocalContext",
]
