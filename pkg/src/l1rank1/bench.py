"""Synthetic instances and the experiment drivers (vary sparsity, vary size, AMM inits).

Random numbers come from numpy's PCG64 bit generator (128-bit state, 128-bit
increment), which produces the same stream on every platform. Per-record
seeds are derived from a master seed with SplitMix64, so a record does not
depend on which other records were run.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .algorithms import RegParams, Variant, run_algorithm, sparsity_ratio, upper_bound_vub
from .amm import AmmConfig, amm_solve

__all__ = [
    "InstanceSpec",
    "Record",
    "ExperimentResult",
    "splitmix64",
    "derive_seed",
    "generate_instance",
    "sparsity_ratio",
    "experiment_vary_sr",
    "experiment_vary_n",
    "experiment_amm",
    "PRESETS",
]

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
MAX_RETRIES = 10


def splitmix64(x: int) -> int:
    """One SplitMix64 output for state ``x``."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *indices: int) -> int:
    s = master & _MASK64
    for i in indices:
        s = splitmix64(s ^ splitmix64(i & _MASK64))
    return s


@dataclass(frozen=True)
class InstanceSpec:
    """Everything needed to regenerate one synthetic tensor."""

    shape: tuple[int, ...]
    num_terms: int = 10
    sparsity_ratio: float = 0.7
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        if not self.shape or any(n < 1 for n in self.shape):
            raise ValueError(f"invalid shape {self.shape}")
        if self.num_terms < 1:
            raise ValueError("num_terms must be >= 1")
        if not 0.0 <= self.sparsity_ratio <= 1.0:
            raise ValueError("sparsity_ratio must lie in [0, 1]")


def _draw_factors(spec: InstanceSpec, rng: np.random.Generator) -> list[np.ndarray]:
    factors = []
    for n in spec.shape:
        U = rng.standard_normal((n, spec.num_terms))
        U[rng.random((n, spec.num_terms)) < spec.sparsity_ratio] = 0.0
        factors.append(U)
    return factors


def _cp_to_tensor(factors: Sequence[np.ndarray]) -> np.ndarray:
    shape = tuple(U.shape[0] for U in factors)
    R = factors[0].shape[1]
    # column-major Khatri-Rao of the trailing factors
    right = factors[-1]
    for U in reversed(factors[1:-1]):
        right = (right[:, None, :] * U[None, :, :]).reshape(-1, R)
    mat = factors[0] @ right.T
    return np.asfortranarray(np.reshape(mat, shape, order="F"))


def generate_instance(spec: InstanceSpec, return_factors: bool = False):
    """Sum of ``num_terms`` rank-1 terms with Gaussian factors zeroed i.i.d. with probability ``sparsity_ratio``.

    An all-zero draw is redrawn up to 10 times before ``ValueError``.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    for _ in range(MAX_RETRIES + 1):
        factors = _draw_factors(spec, rng)
        t = _cp_to_tensor(factors)
        if np.any(t):
            return (t, factors) if return_factors else t
    raise ValueError(f"instance {spec} is zero after {MAX_RETRIES} redraws")


def factor_sparsity(factors: Sequence[np.ndarray]) -> float:
    """Realised fraction of zero entries over all factor vectors."""
    zeros = sum(int(np.count_nonzero(U == 0)) for U in factors)
    return zeros / sum(U.size for U in factors)


@dataclass
class Record:
    variant: str
    shape: tuple[int, ...]
    sr_target: float
    sr_tensor: float
    sr_factor: float
    seed: int
    lam: float
    objective: float
    vub: float
    bound_ratio: float | None
    sparsity_out: tuple[float, ...]
    time_ms: float
    sweeps: int | None = None
    error: str | None = None

    @property
    def d(self) -> int:
        return len(self.shape)


CSV_BASE_COLUMNS = ["variant", "d", "dims", "sr_target", "sr_tensor", "seed", "lambda",
                    "objective", "vub", "bound_ratio"]


def csv_header(d: int) -> list[str]:
    return CSV_BASE_COLUMNS + [f"sparsity_out_{j}" for j in range(1, d + 1)] + ["time_ms", "sweeps"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class ExperimentResult:
    kind: str
    d: int
    records: list[Record] = field(default_factory=list)
    group_key: str = "sr_target"

    def aggregates(self) -> list[dict]:
        """Means over instances for each (grid point, variant), in first-seen order."""
        groups: dict[tuple, list[Record]] = {}
        for r in self.records:
            if r.error is None:
                key = (r.sr_target if self.group_key == "sr_target" else r.shape, r.variant)
                groups.setdefault(key, []).append(r)
        out = []
        for (point, variant), rs in groups.items():
            out.append({
                "variant": variant,
                self.group_key: list(point) if isinstance(point, tuple) else point,
                "instances": len(rs),
                "lambda": _mean(r.lam for r in rs),
                "objective": _mean(r.objective for r in rs),
                "vub": _mean(r.vub for r in rs),
                "sr_tensor": _mean(r.sr_tensor for r in rs),
                "sr_factor": _mean(r.sr_factor for r in rs),
                "sparsity_out": _mean(_mean(r.sparsity_out) for r in rs),
                "time_ms": _mean(r.time_ms for r in rs),
                "sweeps": _mean(r.sweeps for r in rs) if rs[0].sweeps is not None else None,
            })
        return out

    def mean(self, variant: str, attr: str, point=None) -> float:
        vals = []
        for r in self.records:
            if r.variant != variant or r.error is not None:
                continue
            key = r.sr_target if self.group_key == "sr_target" else r.shape
            if point is not None and key != point:
                continue
            value = getattr(r, attr)
            vals.append(_mean(value) if isinstance(value, tuple) else value)
        return _mean(vals)

    def to_csv(self, include_timing: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(csv_header(self.d))
        for r in self.records:
            writer.writerow(
                [r.variant, r.d, "x".join(str(n) for n in r.shape), _fmt(r.sr_target),
                 _fmt(r.sr_tensor), r.seed, _fmt(r.lam), _fmt(r.objective), _fmt(r.vub),
                 _fmt(r.bound_ratio)]
                + [_fmt(s) for s in r.sparsity_out]
                + [_fmt(r.time_ms) if include_timing else "", _fmt(r.sweeps)]
            )
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "schema_version": 1,
            "kind": self.kind,
            "d": self.d,
            "records": len(self.records),
            "errors": [{"seed": r.seed, "variant": r.variant, "error": r.error}
                       for r in self.records if r.error is not None],
            "aggregates": self.aggregates(),
        }

    def write(self, out_dir, include_timing: bool = True) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{self.kind}.csv"
        json_path = out_dir / f"{self.kind}_summary.json"
        csv_path.write_text(self.to_csv(include_timing))
        json_path.write_text(json.dumps(self.summary(), indent=2) + "\n")
        return csv_path, json_path


def _mean(values: Iterable[float]) -> float:
    values = list(values)
    return math.fsum(values) / len(values) if values else math.nan


def _error_record(variant, spec: InstanceSpec, exc: Exception) -> Record:
    return Record(variant, spec.shape, spec.sparsity_ratio, math.nan, math.nan, spec.seed,
                  math.nan, math.nan, math.nan, None, (math.nan,) * len(spec.shape), math.nan,
                  error=f"{type(exc).__name__}: {exc}")


def _algorithm_records(spec: InstanceSpec, variants: Sequence[str], timing_repeats: int,
                       omega_offset: float, min_timing_ms: float = 0.0) -> list[Record]:
    try:
        t, factors = generate_instance(spec, return_factors=True)
    except ValueError as exc:
        logger.warning("instance %s failed: %s", spec, exc)
        return [_error_record(v, spec, exc) for v in variants]
    params = RegParams.default(t.shape, omega_offset)
    vub = upper_bound_vub(t)
    sr_tensor = sparsity_ratio(t)
    sr_factor = factor_sparsity(factors)
    records = []
    for v in variants:
        try:
            # at least timing_repeats runs and min_timing_ms in total; keep the fastest
            times = []
            while len(times) < timing_repeats or 1e3 * sum(times) < min_timing_ms:
                rep = run_algorithm(t, params, v, compute_upper_bound=False)
                times.append(rep.wall_time)
        except (ValueError, RuntimeError) as exc:
            records.append(_error_record(v, spec, exc))
            continue
        sol = rep.solution
        records.append(Record(v, spec.shape, spec.sparsity_ratio, sr_tensor, sr_factor,
                              spec.seed, sol.lam, sol.objective, vub, rep.bound_ratio,
                              sol.sparsity_ratios, 1e3 * min(times)))
    return records


def _grid_specs(shapes_and_srs, instances: int, num_terms: int, seed: int):
    for p, (shape, sr) in enumerate(shapes_and_srs):
        for i in range(instances):
            yield InstanceSpec(shape, num_terms, sr, derive_seed(seed, p, i))


def experiment_vary_sr(dims: Sequence[int], sr_grid: Sequence[float], instances: int = 10,
                       seed: int = 0, num_terms: int = 10, timing_repeats: int = 1,
                       omega_offset: float = 1e-5, min_timing_ms: float = 0.0) -> ExperimentResult:
    """V1 and V2 on ``instances`` random tensors per sparsity level.

    ``time_ms`` is the fastest of at least ``timing_repeats`` runs, repeated
    until ``min_timing_ms`` of total run time has accumulated.
    """
    dims = tuple(dims)
    result = ExperimentResult("vary_sr", len(dims), group_key="sr_target")
    for spec in _grid_specs([(dims, sr) for sr in sr_grid], instances, num_terms, seed):
        result.records.extend(_algorithm_records(spec, ("v1", "v2"), timing_repeats, omega_offset,
                                                 min_timing_ms))
    return result


def experiment_vary_n(sr: float, n_grid: Sequence[int], instances: int = 5, seed: int = 0,
                      d: int = 4, num_terms: int = 10, timing_repeats: int = 1,
                      omega_offset: float = 1e-5, min_timing_ms: float = 0.0) -> ExperimentResult:
    """V1 and V2 on cubical tensors of side ``n`` for each ``n`` in the grid, with timings."""
    result = ExperimentResult("vary_n", d, group_key="shape")
    for spec in _grid_specs([((n,) * d, sr) for n in n_grid], instances, num_terms, seed):
        result.records.extend(_algorithm_records(spec, ("v1", "v2"), timing_repeats, omega_offset,
                                                 min_timing_ms))
    return result


AMM_VARIANTS = {"amm_v1": "v1", "amm_v2": "v2", "amm_random": "random"}


def experiment_amm(sr: float, n_grid: Sequence[int], instances: int = 5, seed: int = 0,
                   d: int = 4, num_terms: int = 10, stop_tol: float = 1e-6,
                   max_sweeps: int = 200, omega_offset: float = 1e-5) -> ExperimentResult:
    """AMM started from V1, V2 and a random sparse point; time includes the initialisation."""
    result = ExperimentResult("amm", d, group_key="shape")
    for spec in _grid_specs([((n,) * d, sr) for n in n_grid], instances, num_terms, seed):
        try:
            t, factors = generate_instance(spec, return_factors=True)
        except ValueError as exc:
            result.records.extend(_error_record(v, spec, exc) for v in AMM_VARIANTS)
            continue
        params = RegParams.default(t.shape, omega_offset)
        vub = upper_bound_vub(t)
        sr_tensor = sparsity_ratio(t)
        sr_factor = factor_sparsity(factors)
        for name, init in AMM_VARIANTS.items():
            config = AmmConfig(stop_tol=stop_tol, max_sweeps=max_sweeps, init=init,
                               seed=derive_seed(spec.seed, 1))
            try:
                trace = amm_solve(t, params, config)
            except (ValueError, RuntimeError) as exc:
                result.records.append(_error_record(name, spec, exc))
                continue
            sol = trace.final
            result.records.append(Record(
                name, spec.shape, sr, sr_tensor, sr_factor, spec.seed, sol.lam, sol.objective,
                vub, None, sol.sparsity_ratios, 1e3 * (trace.init_time + trace.amm_time),
                trace.sweeps))
    return result


PRESETS = {
    "desk": {
        "vary_sr": {"dims": [20, 20, 20, 20], "sr_grid": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
                    "instances": 10},
        "vary_n": {"sr": 0.7, "n_grid": [10, 14, 20, 28, 40], "instances": 5,
                   "timing_repeats": 7, "min_timing_ms": 25.0},
        "amm": {"sr": 0.7, "n_grid": [10, 14, 20], "instances": 20},
    },
    "full": {
        "vary_sr": {"dims": [50, 50, 50, 50], "sr_grid": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
                    "instances": 50},
        "vary_n": {"sr": 0.7, "n_grid": [20, 40, 60, 80, 100], "instances": 50,
                   "timing_repeats": 7, "min_timing_ms": 25.0},
        "amm": {"sr": 0.7, "n_grid": [20, 40, 60, 80, 100], "instances": 50},
    },
}

DRIVERS = {"vary_sr": experiment_vary_sr, "vary_n": experiment_vary_n, "amm": experiment_amm}


def record_as_dict(r: Record) -> dict:
    return asdict(r)
