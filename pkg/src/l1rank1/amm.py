"""Alternating maximisation of the l1-penalised multilinear objective.

Each block update fixes all factors but one and solves the remaining
subproblem exactly with :func:`~l1rank1.sparsify.sphere_l1_maximize`, so the
objective never decreases from sweep to sweep.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algorithms import RegParams, Rank1Solution, Variant, _check_input, _relaxation_chain
from .linalg import DEFAULT_MAX_ITER, DEFAULT_TOL
from .sparsify import sphere_l1_maximize
from .tensor_core import contract_except, multilinear_value

__all__ = [
    "AmmConfig",
    "AmmTrace",
    "DegenerateBlockError",
    "amm_block_update",
    "amm_solve",
    "random_init",
]

INITS = ("v1", "v2", "random")


class DegenerateBlockError(RuntimeError):
    """The contraction feeding a block update is the zero vector."""


@dataclass(frozen=True)
class AmmConfig:
    stop_tol: float = 1e-6
    max_sweeps: int = 200
    init: str = "v1"
    seed: int = 0
    prescale: bool = True

    def __post_init__(self):
        if not self.stop_tol > 0:
            raise ValueError("stop_tol must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}, got {self.init!r}")


@dataclass(frozen=True)
class AmmTrace:
    """Result of :func:`amm_solve`.

    ``objective_per_sweep`` is measured on the (prescaled) tensor the sweeps
    actually ran on; ``final`` reports ``lam`` and ``objective`` for the
    original tensor. ``init_time`` and ``amm_time`` are in seconds.
    """

    objective_per_sweep: tuple[float, ...]
    sweeps: int
    converged: bool
    final: Rank1Solution
    initial: Rank1Solution
    degenerate: bool = False
    init_time: float = 0.0
    amm_time: float = 0.0
    movement: tuple[float, ...] = field(default=(), repr=False)


def amm_block_update(t, xs: Sequence[np.ndarray], mode: int, omega: float) -> np.ndarray:
    """Exact maximiser over the unit sphere of the objective in block ``mode``."""
    a = contract_except(t, xs, mode)
    if not np.any(a):
        raise DegenerateBlockError(f"contraction for mode {mode} is zero")
    return sphere_l1_maximize(a, omega).x_star


def random_init(shape: Sequence[int], params: RegParams, seed: int) -> list[np.ndarray]:
    """Sparse random start: ``N(x/||x||, omega_j)`` with ``x`` standard normal, per mode."""
    params.check_shape(shape)
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for n, w in zip(shape, params.omegas):
        x = rng.standard_normal(n)
        while not np.any(x):
            x = rng.standard_normal(n)
        out.append(sphere_l1_maximize(x / np.linalg.norm(x), w).x_star)
    return out


def _penalised(t, xs, omegas) -> float:
    return multilinear_value(t, xs) - sum(w * float(np.abs(x).sum()) for w, x in zip(omegas, xs))


def amm_solve(t, params: RegParams, config: AmmConfig = AmmConfig(),
              init_xs: Sequence[np.ndarray] | None = None, *,
              tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> AmmTrace:
    """Run cyclic block updates (modes in order) until every block moves less than ``stop_tol``.

    The starting point is ``init_xs`` when given, else the output of V1, V2
    or :func:`random_init` according to ``config.init``. A zero contraction
    stops the run early with ``degenerate=True`` and the last iterate.
    """
    t = _check_input(t, params)
    start = time.perf_counter()
    scale = max(float(t.max()), -float(t.min())) if config.prescale else 1.0
    work = t / scale if config.prescale else t

    if init_xs is not None:
        xs = [np.asarray(x, dtype=np.float64).copy() for x in init_xs]
        params.check_shape([x.shape[0] for x in xs])
    elif config.init == "random":
        xs = random_init(t.shape, params, config.seed)
    else:
        xs, _, _, _ = _relaxation_chain(work, params, Variant(config.init), tol, max_iter)
    initial = Rank1Solution.from_factors(t, xs, params)
    init_done = time.perf_counter()

    objectives = []
    movement = []
    converged = False
    degenerate = False
    sweeps = 0
    omegas = params.omegas
    while sweeps < config.max_sweeps:
        moved = 0.0
        try:
            for j in range(t.ndim):
                new = amm_block_update(work, xs, j, omegas[j])
                moved = max(moved, float(np.linalg.norm(new - xs[j])))
                xs[j] = new
        except DegenerateBlockError:
            degenerate = True
            break
        sweeps += 1
        objectives.append(_penalised(work, xs, omegas))
        movement.append(moved)
        if moved < config.stop_tol:
            converged = True
            break
    end = time.perf_counter()
    final = Rank1Solution.from_factors(t, xs, params)
    return AmmTrace(tuple(objectives), sweeps, converged, final, initial, degenerate,
                    init_done - start, end - init_done, tuple(movement))
