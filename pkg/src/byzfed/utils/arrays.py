# byzfed/utils/arrays.py
"""
Pydantic-friendly numpy array annotations.

Runtime state (models, masks, traces) is carried as float64 / bool ndarrays
inside pydantic models; these annotations coerce lists on the way in and
emit plain lists on the way out so the models still dump to JSON.
"""

from typing import Annotated, Any

import numpy as np
from pydantic import BeforeValidator, PlainSerializer


def as_float_array(value: Any) -> np.ndarray:
    array = np.asarray(value, dtype=np.float64)
    if array.ndim == 0:
        raise ValueError(f"expected an array, got scalar {value!r}")
    return array


def as_bool_array(value: Any) -> np.ndarray:
    array = np.asarray(value)
    if array.dtype != np.bool_:
        if not np.isin(array, (0, 1)).all():
            raise ValueError("boolean array may only contain 0 and 1")
        array = array.astype(np.bool_)
    return array


def _to_list(array: np.ndarray) -> list:
    return array.tolist()


FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(as_float_array),
    PlainSerializer(_to_list, return_type=list),
]

BoolArray = Annotated[
    np.ndarray,
    BeforeValidator(as_bool_array),
    PlainSerializer(_to_list, return_type=list),
]


__all__ = [
    "BoolArray",
    "FloatArray",
    "as_bool_array",
    "as_float_array",
]
