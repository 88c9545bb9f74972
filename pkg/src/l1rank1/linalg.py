"""Dominant singular pair by power iteration, and max-energy row selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SingularPair", "leading_singular_pair", "max_energy_row"]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 2000

# Above this size the Gram matrix of the short side is not formed and the
# iteration alternates on the matrix itself.
_GRAM_LIMIT = 2048


@dataclass(frozen=True)
class SingularPair:
    """Unit vectors ``x``, ``y`` and ``sigma`` with ``M y ~ sigma x`` and ``M.T x ~ sigma y``.

    ``history`` holds the sigma estimate after every iteration.
    """

    x: np.ndarray
    y: np.ndarray
    sigma: float
    iterations: int
    converged: bool
    history: tuple[float, ...] = field(repr=False, default=())


def max_energy_row(M: np.ndarray) -> tuple[int, np.ndarray]:
    """Return ``(k, M[k])`` for the row of largest Euclidean norm (first one on ties)."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {M.shape}")
    energies = np.einsum("ij,ij->i", M, M)
    k = int(np.argmax(energies))
    if energies[k] == 0.0:
        raise ValueError("matrix is zero")
    return k, M[k].copy()


def _gram_power(G: np.ndarray, v: np.ndarray, tol: float, max_iter: int):
    """Power iteration on a symmetric PSD matrix; stops on a relative eigen-residual below ``tol``."""
    history = []
    rho = float(v @ G @ v)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = G @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            break
        v = w / nw
        Gv = G @ v
        rho = float(v @ Gv)
        history.append(math.sqrt(max(rho, 0.0)))
        if np.linalg.norm(Gv - rho * v) <= tol * rho:
            converged = True
            break
    return v, history, it, converged


def leading_singular_pair(M: np.ndarray, tol: float = DEFAULT_TOL,
                          max_iter: int = DEFAULT_MAX_ITER) -> SingularPair:
    """Dominant singular triple of ``M`` by power iteration.

    The iteration starts from the direction of the max-energy row, so the
    result is deterministic. For a matrix with a short side of at most a few
    thousand, the iteration ``x <- M M^T x`` runs on the small Gram matrix,
    which is the same sequence as alternating ``y <- M^T x``, ``x <- M y``
    at a fraction of the cost. Convergence is declared once
    ``||M y - sigma x|| <= tol * sigma`` (up to rounding); otherwise the last
    iterate is returned with ``converged=False``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = np.asarray(M, dtype=np.float64)
    k, row = max_energy_row(M)
    rows, cols = M.shape
    y0 = row / np.linalg.norm(row)
    x0 = M @ y0
    x0 /= np.linalg.norm(x0)

    if min(rows, cols) <= _GRAM_LIMIT:
        if rows <= cols:
            x, history, it, converged = _gram_power(M @ M.T, x0, tol, max_iter)
            y = M.T @ x
            sigma = float(np.linalg.norm(y))
            y /= sigma
        else:
            y, history, it, converged = _gram_power(M.T @ M, y0, tol, max_iter)
            x = M @ y
            sigma = float(np.linalg.norm(x))
            x /= sigma
        return SingularPair(x, y, sigma, it, converged, tuple(history))

    # alternating iteration directly on M
    x = x0
    history = []
    converged = False
    sigma = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        y = M.T @ x
        y /= np.linalg.norm(y)
        Mx = M @ y
        sigma = float(np.linalg.norm(Mx))
        x = Mx / sigma
        history.append(sigma)
        resid = np.linalg.norm(M.T @ x - sigma * y)
        if resid <= tol * sigma:
            converged = True
            break
    y = M.T @ x
    sigma = float(np.linalg.norm(y))
    y /= sigma
    return SingularPair(x, y, sigma, it, converged, tuple(history))
