"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

import numbers
from typing import Sequence

import numpy as np

from .algorithms import DEFAULT_OMEGA_OFFSET, RegParams
from .tensor_core import as_tensor


def check_tensor(X, min_order: int = 3) -> np.ndarray:
    """Return ``X`` as a finite, Fortran-ordered float64 tensor of order >= ``min_order``."""
    return as_tensor(X, min_order=min_order)


def check_omega(omega, shape: Sequence[int]) -> RegParams:
    """Turn an omega specification into :class:`RegParams` for ``shape``.

    Accepts ``"default"`` (``1/sqrt(n_j) - 1e-5``), a single nonnegative
    number used for every mode, a sequence of one number per mode, or an
    existing :class:`RegParams`.
    """
    if isinstance(omega, RegParams):
        params = omega
    elif isinstance(omega, str):
        if omega != "default":
            raise ValueError(f"unknown omega rule {omega!r}; expected 'default' or numbers")
        params = RegParams.default(shape, DEFAULT_OMEGA_OFFSET)
    elif isinstance(omega, numbers.Real):
        params = RegParams((float(omega),) * len(shape))
    else:
        params = RegParams(tuple(float(w) for w in omega))
    params.check_shape(shape)
    return params


def parse_omega(text: str, shape: Sequence[int]) -> RegParams:
    """Parse ``"default"``, ``"0.1"`` or ``"0.1,0.2,0.3"`` from the command line."""
    text = text.strip()
    if text == "default":
        return check_omega("default", shape)
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"cannot parse omega list {text!r}") from None
    if len(values) == 1:
        return check_omega(values[0], shape)
    return check_omega(values, shape)
