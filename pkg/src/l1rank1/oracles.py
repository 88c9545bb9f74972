"""Slow, independent reference computations used to check the fast paths.

Nothing here calls into the rest of the package: values come from explicit
index loops, scalar arithmetic or brute-force search, so that a bug in the reshape
chain, the power iteration or the closed-form sparsifier cannot hide
behind a matching bug in its reference.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "OracleReport",
    "oracle_multilinear",
    "oracle_lambda_max",
    "jacobi_eigenvalues",
    "oracle_sphere_l1",
    "oracle_xi",
]


@dataclass(frozen=True)
class OracleReport:
    value: float
    argopt: tuple[float, ...]
    starts_used: int
    iterations: int


def _entry(t, idx):
    # works for nested lists and numpy arrays alike
    return float(t[idx]) if hasattr(t, "shape") else _nested(t, idx)


def _nested(t, idx):
    for i in idx:
        t = t[i]
    return float(t)


def oracle_multilinear(t, xs) -> float:
    """Sum over every index tuple of ``t[i_1, ..., i_d] * prod_j xs[j][i_j]``."""
    shape = tuple(len(x) for x in xs)
    if hasattr(t, "shape") and tuple(t.shape) != shape:
        raise ValueError(f"tensor shape {tuple(t.shape)} does not match vectors {shape}")
    terms = []
    for idx in itertools.product(*(range(n) for n in shape)):
        p = _entry(t, idx)
        for j, i in enumerate(idx):
            p *= float(xs[j][i])
        terms.append(p)
    return math.fsum(terms)


def jacobi_eigenvalues(S, tol: float = 1e-13, max_sweeps: int = 100) -> list[float]:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Stops once the off-diagonal Frobenius norm drops below ``tol`` times the
    Frobenius norm of the input.
    """
    n = len(S)
    A = [[float(S[i][k]) for k in range(n)] for i in range(n)]
    scale = math.sqrt(sum(A[i][k] ** 2 for i in range(n) for k in range(n))) or 1.0
    for _ in range(max_sweeps):
        off = math.sqrt(sum(A[i][k] ** 2 for i in range(n) for k in range(n) if i != k))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p][q]
                if apq == 0.0:
                    continue
                theta = (A[q][q] - A[p][p]) / (2.0 * apq)
                sgn = 1.0 if theta >= 0 else -1.0
                tan = sgn / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(tan * tan + 1.0)
                s = tan * c
                for k in range(n):
                    akp, akq = A[k][p], A[k][q]
                    A[k][p] = c * akp - s * akq
                    A[k][q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = A[p][k], A[q][k]
                    A[p][k] = c * apk - s * aqk
                    A[q][k] = s * apk + c * aqk
    return [A[i][i] for i in range(n)]


def oracle_lambda_max(M) -> float:
    """Largest singular value via Jacobi on the Gram matrix of the shorter side."""
    rows = [[float(v) for v in r] for r in M]
    if len(rows) > len(rows[0]):
        rows = [list(col) for col in zip(*rows)]
    n = len(rows)
    G = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for k in range(i, n):
            G[i][k] = G[k][i] = math.fsum(a * b for a, b in zip(rows[i], rows[k]))
    return math.sqrt(max(0.0, max(jacobi_eigenvalues(G))))


def _objectives(a, omega, X):
    # one objective value per row of X
    return X @ a - omega * np.abs(X).sum(axis=1)


def _polish(a, omega, X, rel=1e-3):
    """Best point sharing each row's sign pattern on its significant support."""
    signs = np.where(X >= 0, 1.0, -1.0)
    support = np.abs(X) > rel * np.abs(X).max(axis=1, keepdims=True)
    # with signs fixed the objective is linear in |x| on the support
    c = np.where(support, signs * a - omega, -np.inf)
    pos = np.where(c > 0, c, 0.0)
    norms = np.sqrt((pos ** 2).sum(axis=1, keepdims=True))
    Z = np.where(norms > 0, signs * pos / np.where(norms > 0, norms, 1.0), 0.0)
    empty = norms[:, 0] == 0
    if np.any(empty):
        rows = np.flatnonzero(empty)
        cols = np.argmax(c[rows], axis=1)
        Z[rows, cols] = signs[rows, cols]
    return Z


def oracle_sphere_l1(a, omega: float, starts: int = 200, seed: int = 0,
                     iters: int = 200) -> OracleReport:
    """Multi-start projected subgradient ascent of ``<a, x> - omega ||x||_1`` on the unit sphere.

    All starts advance together with diminishing steps ``1/sqrt(k)``. The
    best iterate of every start is then polished on its sign pattern and the
    best value over all starts is returned.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.size
    if n == 1:
        x = 1.0 if a[0] >= 0 else -1.0
        return OracleReport(float(abs(a[0]) - omega), (x,), 1, 0)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((starts, n))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    best = _objectives(a, omega, X)
    best_X = X.copy()
    for k in range(1, iters + 1):
        step = 1.0 / math.sqrt(k)
        Y = X + step * a
        Y -= (step * omega) * np.sign(X)
        norms = np.sqrt(np.einsum("ij,ij->i", Y, Y))[:, None]
        ok = norms[:, 0] > 0
        if ok.all():
            X = Y / norms
        else:
            X[ok] = Y[ok] / norms[ok]
        vals = _objectives(a, omega, X)
        better = vals > best
        if better.any():
            best[better] = vals[better]
            best_X[better] = X[better]
    cands = np.vstack([best_X, _polish(a, omega, best_X), _polish(a, omega, best_X, rel=0.0)])
    vals = _objectives(a, omega, cands)
    i = int(np.argmax(vals))
    x, value = _local_search(a, omega, cands[i], float(vals[i]))
    return OracleReport(value, tuple(x), starts, starts * iters)


def _local_search(a, omega, x, value):
    """Greedy moves on the sign pattern: add, drop or flip one coordinate at a time."""
    pattern = np.sign(x)
    while True:
        trials = []
        for i in range(a.size):
            for s in (-1.0, 0.0, 1.0):
                if s != pattern[i]:
                    p = pattern.copy()
                    p[i] = s
                    if np.any(p):
                        trials.append(p)
        if not trials:
            return x, value
        P = np.array(trials)
        Z = _polish(a, omega, P, rel=0.0)
        Z[P == 0] = 0.0
        vals = _objectives(a, omega, Z)
        k = int(np.argmax(vals))
        if vals[k] <= value:
            return x, value
        x, value, pattern = Z[k], float(vals[k]), np.sign(Z[k])


def oracle_xi(n: int, omega: float) -> float:
    """``min_k k * ((1/sqrt(k) - omega)_+)**2`` over support sizes ``k = 1..n``.

    Minimisers of ``sum((|x_i| - omega)_+^2)`` on the sphere have ``k`` equal
    nonzero magnitudes ``1/sqrt(k)``, and when ``omega >= 1/sqrt(n)`` the
    all-equal point gives zero.
    """
    if n < 1 or omega < 0:
        raise ValueError("need n >= 1 and omega >= 0")
    return min(k * max(1.0 / math.sqrt(k) - omega, 0.0) ** 2 for k in range(1, n + 1))
