"""Approximation algorithms V1 (SVD extraction) and V2 (max-energy extraction).

Both algorithms walk the unfolding chain

    A_1 = reshape(T, n_1, n_2 ... n_d)
    A_j = reshape(A_{j-1}^T x_{j-1}, n_j, n_{j+1} ... n_d),   j = 2 .. d-1

extract a dense unit candidate from each ``A_j``, sparsify it with
:func:`~l1rank1.sparsify.sphere_l1_maximize`, and finish with the
normalised vector ``A_{d-1}^T x_{d-1}``.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import DEFAULT_MAX_ITER, DEFAULT_TOL, leading_singular_pair
from .sparsify import sphere_l1_maximize
from .tensor_core import as_tensor, mode_unfolding, multilinear_value, reshape_to_matrix

__all__ = [
    "Variant",
    "ZeroTensorError",
    "RegParams",
    "Rank1Solution",
    "AlgoReport",
    "default_omegas",
    "algorithm_v1",
    "algorithm_v2",
    "run_algorithm",
    "objective_value",
    "bound_ratio_v1",
    "bound_ratio_v2",
    "upper_bound_vub",
    "sparsity_ratio",
]

DEFAULT_OMEGA_OFFSET = 1e-5


class ZeroTensorError(ValueError):
    """The input tensor has no nonzero entry."""


class Variant(str, enum.Enum):
    V1 = "v1"
    V2 = "v2"


def default_omegas(shape: Sequence[int], offset: float = DEFAULT_OMEGA_OFFSET) -> tuple[float, ...]:
    """``omega_j = 1/sqrt(n_j) - offset`` for every mode."""
    return tuple(1.0 / math.sqrt(n) - offset for n in shape)


@dataclass(frozen=True)
class RegParams:
    """Per-mode regularisation weights ``omega_1 .. omega_d``."""

    omegas: tuple[float, ...]

    def __post_init__(self):
        omegas = tuple(float(w) for w in self.omegas)
        if any(not math.isfinite(w) or w < 0 for w in omegas):
            raise ValueError(f"regularisation weights must be finite and nonnegative, got {omegas}")
        object.__setattr__(self, "omegas", omegas)

    @classmethod
    def default(cls, shape: Sequence[int], offset: float = DEFAULT_OMEGA_OFFSET) -> "RegParams":
        return cls(default_omegas(shape, offset))

    @classmethod
    def scaled(cls, shape: Sequence[int], c: float) -> "RegParams":
        """``omega_j = c / sqrt(n_j)``."""
        return cls(tuple(c / math.sqrt(n) for n in shape))

    def check_shape(self, shape: Sequence[int]) -> None:
        if len(self.omegas) != len(shape):
            raise ValueError(f"got {len(self.omegas)} weights for an order-{len(shape)} tensor")

    def validity(self, shape: Sequence[int]) -> tuple[bool, ...]:
        """Per-mode flags ``omega_j < 1/sqrt(n_j)``."""
        self.check_shape(shape)
        return tuple(w < 1.0 / math.sqrt(n) for w, n in zip(self.omegas, shape))

    def is_valid(self, shape: Sequence[int]) -> bool:
        return all(self.validity(shape))


def sparsity_ratio(v) -> float:
    """Fraction of entries that are exactly zero."""
    v = np.asarray(v)
    if v.size == 0:
        raise ValueError("sparsity ratio of an empty array is undefined")
    return float(np.count_nonzero(v == 0)) / v.size


def objective_value(t, xs: Sequence[np.ndarray], params: RegParams) -> float:
    """``<T, x_1 o ... o x_d> - sum_j omega_j ||x_j||_1``."""
    t = np.asarray(t, dtype=np.float64)
    params.check_shape(t.shape)
    penalty = sum(w * float(np.abs(x).sum()) for w, x in zip(params.omegas, xs))
    return multilinear_value(t, xs) - penalty


@dataclass(frozen=True)
class Rank1Solution:
    """Unit factors with their multilinear value ``lam`` and penalised objective."""

    xs: tuple[np.ndarray, ...]
    lam: float
    objective: float
    sparsity_ratios: tuple[float, ...]

    @classmethod
    def from_factors(cls, t, xs: Sequence[np.ndarray], params: RegParams,
                     lam: float | None = None) -> "Rank1Solution":
        xs = tuple(np.asarray(x, dtype=np.float64) for x in xs)
        if lam is None:
            lam = multilinear_value(t, xs)
        penalty = sum(w * float(np.abs(x).sum()) for w, x in zip(params.omegas, xs))
        return cls(xs, float(lam), float(lam) - penalty, tuple(sparsity_ratio(x) for x in xs))


@dataclass(frozen=True)
class AlgoReport:
    """One run of V1 or V2.

    ``bound_ratio`` is ``None`` when some ``omega_j >= 1/sqrt(n_j)``; the run
    is still well defined but carries no guarantee. ``lower_bound_reference``
    is ``lambda_max(A_1)`` for V1 and ``||T||_F`` for V2, so that
    ``solution.lam >= bound_ratio * lower_bound_reference`` whenever the
    ratio is defined.
    """

    variant: Variant
    solution: Rank1Solution
    bound_ratio: float | None
    lower_bound_reference: float
    upper_bound: float | None
    wall_time: float
    converged: bool = True
    sigmas: tuple[float, ...] = field(default=(), repr=False)


def _product(values) -> int:
    out = 1
    for v in values:
        out *= int(v)
    return out


def _ratio_numerator(shape: Sequence[int], params: RegParams) -> float:
    if len(shape) < 3:
        raise ValueError("bound ratios are defined for order >= 3")
    if not params.is_valid(shape):
        raise ValueError("bound ratios require omega_j < 1/sqrt(n_j) for every mode")
    return math.prod(1.0 - w * math.sqrt(n) + w for w, n in zip(params.omegas, shape))


def bound_ratio_v1(shape: Sequence[int], params: RegParams) -> float:
    """``prod_j (1 - omega_j sqrt(n_j) + omega_j) / sqrt(n_2 ... n_{d-1})``."""
    return _ratio_numerator(shape, params) / math.sqrt(_product(shape[1:-1]))


def bound_ratio_v2(shape: Sequence[int], params: RegParams) -> float:
    """Same numerator as :func:`bound_ratio_v1`, denominator ``sqrt(n_1 ... n_{d-1})``."""
    return _ratio_numerator(shape, params) / math.sqrt(_product(shape[:-1]))


def upper_bound_vub(t, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """Minimum over modes of the largest singular value of the mode unfolding."""
    t = as_tensor(t)
    if not np.any(t):
        raise ZeroTensorError("tensor is zero")
    return min(leading_singular_pair(mode_unfolding(t, j), tol, max_iter).sigma
               for j in range(t.ndim))


def _orient(x: np.ndarray) -> np.ndarray:
    # largest-magnitude entry positive; first index wins ties
    i = int(np.argmax(np.abs(x)))
    return -x if x[i] < 0 else x


def _check_input(t, params: RegParams) -> np.ndarray:
    t = as_tensor(t)
    if t.ndim < 3:
        raise ValueError(f"algorithms require a tensor of order >= 3, got order {t.ndim}")
    params.check_shape(t.shape)
    if not np.any(t):
        raise ZeroTensorError("tensor is zero")
    return t


def _relaxation_chain(t: np.ndarray, params: RegParams, variant: Variant, tol: float,
                      max_iter: int):
    """Steps 1-3 of V1/V2 on an already validated tensor.

    Returns ``(xs, lam, sigmas, converged)`` where ``sigmas[0]`` is the
    extracted scale of ``A_1`` (``lambda_max(A_1)`` for V1).
    """
    shape = t.shape
    d = len(shape)
    A = reshape_to_matrix(t, shape[0], t.size // shape[0])
    xs = []
    sigmas = []
    converged = True
    v = None
    for j in range(d - 1):
        if variant is Variant.V1:
            if j and not A.any():
                raise RuntimeError(f"degenerate contraction at mode {j}: A_j is zero")
            pair = leading_singular_pair(A, tol, max_iter)
            converged &= pair.converged
            sigmas.append(pair.sigma)
            x_star = pair.x
        else:
            energies = np.einsum("ij,ij->i", A, A)
            row = A[int(np.argmax(energies))]
            Ay = A @ row
            nAy = math.sqrt(float(Ay @ Ay))
            if nAy == 0.0:
                raise RuntimeError(f"degenerate contraction at mode {j}: A_j is zero")
            sigmas.append(nAy / math.sqrt(float(row @ row)))
            x_star = Ay / nAy
        xj = sphere_l1_maximize(_orient(x_star), params.omegas[j]).x_star
        xs.append(xj)
        v = A.T @ xj
        if j < d - 2:
            n = shape[j + 1]
            A = v.reshape((n, v.size // n), order="F")
    nv = math.sqrt(float(v @ v))
    if nv == 0.0:
        raise RuntimeError(f"degenerate contraction at mode {d - 1}: A_j^T x_j is zero")
    xd = sphere_l1_maximize(v / nv, params.omegas[-1]).x_star
    xs.append(xd)
    lam = float(v @ xd)
    return xs, lam, sigmas, converged


def run_algorithm(t, params: RegParams, variant: Variant | str = Variant.V1, *,
                  prescale: bool = True, compute_upper_bound: bool = True,
                  tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> AlgoReport:
    """Run V1 or V2 and assemble an :class:`AlgoReport`.

    With ``prescale`` the chain runs on ``T / max|T|`` and ``lam`` is scaled
    back; the factors do not depend on the scale. ``wall_time`` covers the
    algorithm only, not the upper bound.
    """
    variant = Variant(variant)
    t = _check_input(t, params)
    start = time.perf_counter()
    scale = max(float(t.max()), -float(t.min())) if prescale else 1.0
    work = t / scale if prescale else t
    xs, lam, sigmas, converged = _relaxation_chain(work, params, variant, tol, max_iter)
    lam *= scale
    wall = time.perf_counter() - start

    solution = Rank1Solution.from_factors(t, xs, params, lam=lam)
    valid = params.is_valid(t.shape)
    if variant is Variant.V1:
        ratio = bound_ratio_v1(t.shape, params) if valid else None
        reference = sigmas[0] * scale
    else:
        ratio = bound_ratio_v2(t.shape, params) if valid else None
        reference = float(np.linalg.norm(t))
    vub = upper_bound_vub(t, tol, max_iter) if compute_upper_bound else None
    return AlgoReport(variant, solution, ratio, reference, vub, wall, converged,
                      tuple(s * scale for s in sigmas))


def algorithm_v1(t, params: RegParams, **kwargs) -> AlgoReport:
    """Sparse rank-1 approximation with dominant-singular-pair extraction."""
    return run_algorithm(t, params, Variant.V1, **kwargs)


def algorithm_v2(t, params: RegParams, **kwargs) -> AlgoReport:
    """Sparse rank-1 approximation with max-energy-row extraction; linear in the tensor size."""
    return run_algorithm(t, params, Variant.V2, **kwargs)
