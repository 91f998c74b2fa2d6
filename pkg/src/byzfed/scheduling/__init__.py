# byzfed/scheduling/__init__.py
from .clients import RoundSchedule, RoundScheduler, draw_client_set
from .masks import MaskCursor, MaskSchedule, SelectionMask, draw_selection_mask

__all__ = [
    "MaskCursor",
    "MaskSchedule",
    "RoundSchedule",
    "RoundScheduler",
    "SelectionMask",
    "draw_client_set",
    "draw_selection_mask",
]
