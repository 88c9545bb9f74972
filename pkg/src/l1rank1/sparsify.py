"""Soft thresholding and the l1-penalised maximiser over the unit sphere."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Branch",
    "SparsifyResult",
    "soft_threshold",
    "sphere_l1_maximize",
    "xi_lower_bound",
    "xi_empirical",
]


class Branch(str, enum.Enum):
    SOFT_THRESHOLD_NORMALIZED = "soft_threshold_normalized"
    STANDARD_BASIS_FALLBACK = "standard_basis_fallback"


@dataclass(frozen=True)
class SparsifyResult:
    """Maximiser of ``<a, x> - omega * ||x||_1`` subject to ``||x|| = 1``.

    Attributes
    ----------
    x_star : ndarray
        Unit-norm maximiser.
    value : float
        Optimal value.
    branch : Branch
        Which closed form produced ``x_star``.
    """

    x_star: np.ndarray
    value: float
    branch: Branch


def soft_threshold(a, omega: float) -> np.ndarray:
    """Entrywise ``sign(a) * max(|a| - omega, 0)``."""
    if omega < 0:
        raise ValueError(f"omega must be nonnegative, got {omega}")
    a = np.asarray(a, dtype=np.float64)
    return np.sign(a) * np.maximum(np.abs(a) - omega, 0.0)


def sphere_l1_maximize(a, omega: float) -> SparsifyResult:
    """Solve ``max <a, x> - omega ||x||_1`` over the unit sphere in closed form.

    If soft thresholding leaves a nonzero vector, the maximiser is that
    vector normalised. Otherwise it is ``sign(a_i) e_i`` for the first index
    of largest magnitude (sign of zero taken as +1).
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("a must be a nonempty vector")
    if omega < 0:
        raise ValueError(f"omega must be nonnegative, got {omega}")
    mag = np.abs(a) - omega
    np.maximum(mag, 0.0, out=mag)
    norm = math.sqrt(float(mag @ mag))
    if norm == 0.0 and np.any(mag):
        # squares underflowed; normalise by the largest entry first
        peak = float(mag.max())
        mag /= peak
        norm = math.sqrt(float(mag @ mag))
        x = np.copysign(mag, a)
        x /= norm
        return SparsifyResult(x, norm * peak, Branch.SOFT_THRESHOLD_NORMALIZED)
    if norm != 0.0:
        x = np.copysign(mag, a)
        x /= norm
        return SparsifyResult(x, norm, Branch.SOFT_THRESHOLD_NORMALIZED)
    i = int(np.argmax(np.abs(a)))
    if a[i] == 0.0:
        raise ValueError("a must be nonzero")
    x = np.zeros_like(a)
    x[i] = -1.0 if a[i] < 0 else 1.0
    return SparsifyResult(x, float(abs(a[i]) - omega), Branch.STANDARD_BASIS_FALLBACK)


def _check_xi_domain(n: int, omega: float) -> None:
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not 0.0 < omega < 1.0 / math.sqrt(n):
        raise ValueError(f"omega must lie in (0, 1/sqrt(n)) = (0, {1 / math.sqrt(n):.6g}), got {omega}")


def xi_lower_bound(n: int, omega: float) -> float:
    """Lower bound ``n * (1/sqrt(n) - omega)**2`` on ``min sum((|x_i| - omega)_+^2)`` over the unit sphere."""
    _check_xi_domain(n, omega)
    return n * (1.0 / math.sqrt(n) - omega) ** 2


def xi_empirical(n: int, omega: float, trials: int = 100, seed: int = 0,
                 iters: int = 500) -> float:
    """Smallest ``sum((|x_i| - omega)_+^2)`` found by multi-start projected gradient descent.

    Every returned value is attained at a unit vector, so it can never fall
    below the true minimum. Used by the tests as an empirical check of
    :func:`xi_lower_bound`.
    """
    _check_xi_domain(n, omega)
    if n == 1:
        return (1.0 - omega) ** 2
    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(trials):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        step = 0.25
        f = float(np.sum(np.maximum(np.abs(x) - omega, 0.0) ** 2))
        for _ in range(iters):
            grad = 2.0 * np.sign(x) * np.maximum(np.abs(x) - omega, 0.0)
            y = x - step * grad
            ny = np.linalg.norm(y)
            if ny == 0.0:
                break
            y /= ny
            fy = float(np.sum(np.maximum(np.abs(y) - omega, 0.0) ** 2))
            if fy <= f:
                x, f = y, fy
            else:
                step *= 0.5
                if step < 1e-14:
                    break
        best = min(best, f)
    return best
