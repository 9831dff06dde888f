"""Input checks shared by the estimator wrappers and the CLI."""

from __future__ import annotations

import math
import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .model import Family, ModelParams


def check_positive(name: str, value, allow_zero: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value!r}")
    return value


def check_finite(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def check_family(value) -> Family:
    try:
        return Family(value)
    except ValueError:
        names = ", ".join(f.value for f in Family)
        raise ValueError(f"family must be one of {names}, got {value!r}") from None


def check_params(family, a, b, I, d, eps, v_reset) -> ModelParams:  # noqa: E741
    return ModelParams(
        check_family(family),
        check_finite("a", a),
        check_positive("b", b),
        check_finite("I", I),
        check_positive("d", d, allow_zero=True),
        check_positive("eps", eps),
        check_finite("v_reset", v_reset),
    )


def check_column(X, name: str = "X") -> np.ndarray:
    """Accept a 1-D array or a single-column 2-D array; return it flat."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, dtype=np.float64, ensure_all_finite=True, input_name=name)
    if arr.shape[1] != 1:
        raise ValueError(f"{name} must have exactly one column, got {arr.shape[1]}")
    return arr[:, 0]
