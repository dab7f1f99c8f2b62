"""Small input-validation helpers shared by the public entry points."""

from __future__ import annotations

import numbers

import numpy as np


class SpecError(ValueError):
    """A measure or profile specification violates a required constraint."""


def check_positive(name, value, *, strict=True, allow_inf=False):
    if not isinstance(value, numbers.Real):
        raise SpecError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if np.isnan(value) or (np.isinf(value) and not allow_inf):
        raise SpecError(f"{name} must be finite, got {value}")
    if (strict and value <= 0) or (not strict and value < 0):
        bound = "> 0" if strict else ">= 0"
        raise SpecError(f"{name} must be {bound}, got {value}")
    return value


def check_in_range(name, value, lo, hi, *, lo_open=False, hi_open=False):
    value = float(value)
    bad = (value < lo or value > hi or (lo_open and value == lo) or (hi_open and value == hi)
           or np.isnan(value))
    if bad:
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        raise SpecError(f"{name}={value} outside {lb}{lo}, {hi}{rb}")
    return value


def as_float_array(x, name="x", *, ndim=None):
    arr = np.asarray(x, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_points(x, dimension):
    """Coerce ``x`` to an ``(n, d)`` array of points."""
    arr = np.asarray(x, dtype=float)
    if dimension == 1 and arr.ndim <= 1:
        return arr.reshape(-1, 1)
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != dimension:
        raise ValueError(f"points must have trailing dimension {dimension}, got {arr.shape}")
    return arr.reshape(-1, dimension)
