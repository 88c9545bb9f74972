"""Acceptance criteria 1-11.

Each test prints one ``PASS``/``FAIL`` line (also collected into the
terminal summary) and then asserts the criterion at its stated tolerance.
Run just this module with ``pytest -m acceptance -s``.
"""

import math
import time
from collections import Counter

import numpy as np
import pytest

from l1rank1.algorithms import RegParams, run_algorithm, upper_bound_vub
from l1rank1.amm import AmmConfig, amm_solve
from l1rank1.bench import (
    PRESETS,
    InstanceSpec,
    derive_seed,
    experiment_amm,
    experiment_vary_n,
    experiment_vary_sr,
    generate_instance,
)
from l1rank1.oracles import oracle_lambda_max, oracle_sphere_l1, oracle_xi
from l1rank1.sparsify import sphere_l1_maximize, xi_lower_bound
from l1rank1.tensor_core import reshape_to_matrix

pytestmark = pytest.mark.acceptance

DESK = PRESETS["desk"]


def _verdict(log, tag, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} {tag}: {detail}"
    print(line)
    log.append(line)
    assert ok, line


def _bound_family():
    """100 instances: d in {3, 4}, n_j in [4, 12], omega_j = c / sqrt(n_j), c in {0.1, 0.5, 0.9}.

    Even indices are dense Gaussian tensors, odd ones come from the sparse CP generator.
    """
    rng = np.random.default_rng(derive_seed(2024, 3))
    family = []
    for i in range(100):
        d = 3 if i % 4 < 2 else 4
        shape = tuple(int(n) for n in rng.integers(4, 13, size=d))
        c = (0.1, 0.5, 0.9)[i % 3]
        if i % 2 == 0:
            t = rng.standard_normal(shape)
        else:
            sr = float(rng.choice([0.3, 0.5, 0.7]))
            t = generate_instance(InstanceSpec(shape, 10, sr, derive_seed(2024, i)))
        family.append((t, RegParams.scaled(shape, c)))
    return family


@pytest.fixture(scope="module")
def bound_runs():
    runs = []
    for t, params in _bound_family():
        reps = {v: run_algorithm(t, params, v) for v in ("v1", "v2")}
        runs.append((t, params, reps))
    return runs


@pytest.fixture(scope="module")
def desk_suite():
    start = time.perf_counter()
    vary_sr = experiment_vary_sr(**DESK["vary_sr"], seed=0)
    t_sr = time.perf_counter() - start
    vary_n = experiment_vary_n(**DESK["vary_n"], seed=0)
    amm = experiment_amm(**DESK["amm"], seed=0)
    return {"vary_sr": vary_sr, "vary_n": vary_n, "amm": amm, "vary_sr_seconds": t_sr}


def test_c01_sphere_maximizer_matches_oracle(acceptance_log):
    rng = np.random.default_rng(derive_seed(2024, 1))
    start = time.perf_counter()
    lo_gap = hi_gap = 0.0
    bad = 0
    for i in range(500):
        n = int(rng.integers(2, 9))
        a = rng.standard_normal(n)
        omega = float(rng.uniform(0.0, 1.2 * np.abs(a).max()))
        ours = sphere_l1_maximize(a, omega).value
        ref = oracle_sphere_l1(a, omega, starts=200, seed=i).value
        lo_gap = max(lo_gap, ref - ours)
        hi_gap = max(hi_gap, ours - ref)
        bad += not (ref - 1e-6 <= ours <= ref + 1e-9)
    elapsed = time.perf_counter() - start
    _verdict(acceptance_log, "C1", bad == 0 and elapsed < 10,
             f"500 pairs, {bad} outside [oracle-1e-6, oracle+1e-9], "
             f"max below {lo_gap:.2e}, max above {hi_gap:.2e}, {elapsed:.2f}s (<10s)")


def test_c02_xi_lower_bound(acceptance_log):
    start = time.perf_counter()
    below = unequal = 0
    for n in range(2, 51):
        for omega in np.linspace(0, 1 / math.sqrt(n), 22)[1:-1]:
            ref, lb = oracle_xi(n, float(omega)), xi_lower_bound(n, float(omega))
            below += ref < lb - 1e-12
            unequal += abs(ref - lb) > 1e-12
    elapsed = time.perf_counter() - start
    _verdict(acceptance_log, "C2", below == 0 and unequal == 0 and elapsed < 1,
             f"49x20 points, {below} below bound, {unequal} not equal within 1e-12, {elapsed:.3f}s (<1s)")


def test_c03_v1_ratio(acceptance_log, bound_runs):
    start = time.perf_counter()
    violations = 0
    worst = math.inf
    for t, params, reps in bound_runs:
        rep = reps["v1"]
        lam1 = oracle_lambda_max(reshape_to_matrix(t, t.shape[0], t.size // t.shape[0]))
        fro = float(np.linalg.norm(t))
        slack = rep.solution.lam - rep.bound_ratio * lam1
        worst = min(worst, slack / fro)
        violations += slack < -1e-8 * fro
    elapsed = time.perf_counter() - start + sum(r["v1"].wall_time for _, _, r in bound_runs)
    _verdict(acceptance_log, "C3", violations == 0 and elapsed < 30,
             f"100 instances, {violations} violations, min (lam - ratio*lam_max)/||t|| = {worst:.3e}, "
             f"{elapsed:.2f}s (<30s)")


def test_c04_v2_ratio(acceptance_log, bound_runs):
    start = time.perf_counter()
    violations = 0
    worst = math.inf
    for t, params, reps in bound_runs:
        rep = reps["v2"]
        fro = math.sqrt(math.fsum(float(v) ** 2 for v in t.ravel()))
        slack = rep.solution.lam - rep.bound_ratio * fro
        worst = min(worst, slack / fro)
        violations += slack < -1e-8 * fro
    elapsed = time.perf_counter() - start + sum(r["v2"].wall_time for _, _, r in bound_runs)
    _verdict(acceptance_log, "C4", violations == 0 and elapsed < 30,
             f"100 instances, {violations} violations, min (lam - ratio*||t||)/||t|| = {worst:.3e}, "
             f"{elapsed:.2f}s (<30s)")


def test_c05_upper_bound(acceptance_log, bound_runs):
    violations = checked = 0
    for t, params, reps in bound_runs:
        vub = upper_bound_vub(t)
        fro = float(np.linalg.norm(t))
        lams = [r.solution.lam for r in reps.values()]
        lams.append(amm_solve(t, params, AmmConfig(init="v1")).final.lam)
        for lam in lams:
            checked += 1
            violations += lam > vub + 1e-8 * fro
    _verdict(acceptance_log, "C5", violations == 0,
             f"{checked} outputs (V1, V2, AMM) on 100 instances, {violations} above vub + 1e-8*||t||")


def test_c06_amm_monotone(acceptance_log):
    inits = ("v1", "v2", "random")
    dips = unconverged = 0
    sweeps = Counter()
    for i in range(100):
        n = (10, 14, 20)[i % 3]
        init = inits[(i // 3) % 3]
        t = generate_instance(InstanceSpec((n,) * 4, 10, 0.7, derive_seed(6, i)))
        trace = amm_solve(t, RegParams.default(t.shape),
                          AmmConfig(stop_tol=1e-6, max_sweeps=200, init=init, seed=derive_seed(6, i, 1)))
        obj = trace.objective_per_sweep
        dips += any(b < a - 1e-12 for a, b in zip(obj, obj[1:]))
        unconverged += not (trace.converged and trace.sweeps <= 50)
        sweeps[trace.sweeps] += 1
    in_band = sum(c for s, c in sweeps.items() if 3 <= s <= 10)
    median = sorted(sweeps.elements())[50]
    ok = dips == 0 and unconverged == 0 and in_band >= 80 and 3 <= median <= 10
    _verdict(acceptance_log, "C6", ok,
             f"100 runs, {dips} non-monotone, {unconverged} not converged within 50 sweeps, "
             f"{in_band}% in [3, 10], median {median}, distribution {dict(sorted(sweeps.items()))}")


def test_c07_vary_sr(acceptance_log, desk_suite):
    res = desk_suite["vary_sr"]
    elapsed = desk_suite["vary_sr_seconds"]
    lam_fail, spars_fail, rows = [], [], []
    for sr in DESK["vary_sr"]["sr_grid"]:
        l1, l2 = res.mean("v1", "lam", sr), res.mean("v2", "lam", sr)
        fac = res.mean("v1", "sr_factor", sr)
        s1, s2 = res.mean("v1", "sparsity_out", sr), res.mean("v2", "sparsity_out", sr)
        if l1 < l2:
            lam_fail.append(sr)
        if abs(s1 - fac) > 0.15 or abs(s2 - fac) > 0.15:
            spars_fail.append(sr)
        rows.append(f"sr={sr}: lam {l1:.2f}/{l2:.2f} out {s1:.2f}/{s2:.2f} factor {fac:.2f}")
    print("\n".join(rows))
    ok_a, ok_b = not lam_fail, not spars_fail
    detail = (f"(a) V1>=V2 mean lambda at every sr: {ok_a} (fails at {lam_fail}); "
              f"(b) output sparsity within 15 pts of factor sparsity: {ok_b} (fails at {spars_fail}); "
              f"{elapsed:.1f}s (<300s)")
    _verdict(acceptance_log, "C7", ok_a and ok_b and elapsed < 300, detail)


def test_c08_vary_n_timing(acceptance_log, desk_suite):
    res = desk_suite["vary_n"]
    sizes, t1, t2 = [], [], []
    for n in DESK["vary_n"]["n_grid"]:
        shape = (n,) * 4
        sizes.append(float(n) ** 4)
        t1.append(res.mean("v1", "time_ms", shape))
        t2.append(res.mean("v2", "time_ms", shape))
    slope = float(np.polyfit(np.log(sizes), np.log(t2), 1)[0])
    faster = all(b < a for a, b in zip(t1, t2))
    times = ", ".join(f"n={n}: {a:.2f}/{b:.2f}ms" for n, a, b in zip(DESK["vary_n"]["n_grid"], t1, t2))
    _verdict(acceptance_log, "C8", 0.8 <= slope <= 1.2 and faster,
             f"V2 log-log slope {slope:.3f} (in [0.8, 1.2]), V2 faster at every n: {faster} ({times})")


def test_c09_amm_init_ordering(acceptance_log, desk_suite):
    res = desk_suite["amm"]
    m1, m2, mr = (res.mean(v, "objective") for v in ("amm_v1", "amm_v2", "amm_random"))
    seeds = len({r.seed for r in res.records})
    margin = 0.05 * abs(mr)
    ok = seeds >= 20 and m1 >= mr + margin and m2 >= mr + margin and m1 >= m2 - 0.01 * abs(m2)
    _verdict(acceptance_log, "C9", ok,
             f"{seeds} instances, mean final objective v1 {m1:.4f}, v2 {m2:.4f}, random {mr:.4f}")


def _sparse_unit(rng, n):
    v = rng.standard_normal(n)
    v[rng.random(n) < 0.5] = 0.0
    if not v.any():
        v[int(rng.integers(n))] = 1.0
    return v / np.linalg.norm(v)


def test_c10_exact_rank1_recovery(acceptance_log):
    rng = np.random.default_rng(derive_seed(2024, 10))
    worst_lam = worst_fac = 0.0
    cases = 0
    for shape in [(5, 6, 7), (8, 8, 8), (4, 5, 6, 7), (10, 3, 9, 4)]:
        for _ in range(5):
            fs = [_sparse_unit(rng, n) for n in shape]
            lam = float(rng.uniform(0.5, 50.0))
            t = lam * fs[0]
            for f in fs[1:]:
                t = np.multiply.outer(t, f)
            for v in ("v1", "v2"):
                sol = run_algorithm(t, RegParams((0.0,) * len(shape)), v).solution
                cases += 1
                worst_lam = max(worst_lam, abs(sol.lam - lam) / lam)
                for x, f in zip(sol.xs, fs):
                    x = x if x @ f >= 0 else -x
                    worst_fac = max(worst_fac, float(np.abs(x - f).max()))
    _verdict(acceptance_log, "C10", worst_lam <= 1e-8 and worst_fac <= 1e-6,
             f"{cases} runs, max relative lambda error {worst_lam:.2e} (<=1e-8), "
             f"max factor error {worst_fac:.2e} (<=1e-6)")


def test_c11_determinism(acceptance_log, desk_suite):
    rerun = {
        "vary_sr": experiment_vary_sr(**DESK["vary_sr"], seed=0),
        "vary_n": experiment_vary_n(**DESK["vary_n"], seed=0),
        "amm": experiment_amm(**DESK["amm"], seed=0),
    }
    same = {k: desk_suite[k].to_csv(include_timing=False).encode() == rerun[k].to_csv(include_timing=False).encode()
            for k in rerun}
    _verdict(acceptance_log, "C11", all(same.values()),
             f"byte-identical CSV (time_ms column blank) per experiment: {same}")
