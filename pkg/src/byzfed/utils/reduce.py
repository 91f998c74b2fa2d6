# byzfed/utils/reduce.py
from collections.abc import Callable, Sequence
from typing import TypeVar

T = TypeVar("T")


def pairwise_reduce(items: Sequence[T], combine: Callable[[T, T], T]) -> T:
    """
    Reduces items with a fixed binary tree: (0+1)+(2+3), ... .

    The tree shape depends only on len(items), so floating-point sums are
    reproducible for a given ordering of the inputs.
    """
    if len(items) == 0:
        raise ValueError("cannot reduce an empty sequence")
    level = list(items)
    while len(level) > 1:
        paired = [combine(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2 == 1:
            paired.append(level[-1])
        level = paired
    return level[0]


__all__ = [
    "pairwise_reduce",
]
