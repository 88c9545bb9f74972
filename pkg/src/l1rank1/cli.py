"""Command line front end.

Exit codes: 0 success, 1 I/O error, 2 invalid arguments or input,
3 numerical failure (zero tensor, power iteration not converged,
degenerate AMM block).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .algorithms import (
    AlgoReport,
    RegParams,
    ZeroTensorError,
    bound_ratio_v1,
    bound_ratio_v2,
    run_algorithm,
)
from .amm import AmmConfig, AmmTrace, amm_solve
from .bench import DRIVERS, PRESETS, InstanceSpec, generate_instance
from .tensor_core import read_dten, read_dten_binary, write_dten, write_dten_binary
from .validation import parse_omega

logger = logging.getLogger("l1rank1")

SCHEMA_VERSION = 1

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def parse_gen_spec(text: str) -> InstanceSpec:
    """Parse ``"d=4,n=20,terms=10,sr=0.7,seed=1"``; ``dims=20x30x40`` replaces ``d``/``n``."""
    fields = {}
    for part in text.split(","):
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise UsageError(f"malformed generator field {part!r}")
        fields[key.strip()] = value.strip()
    unknown = set(fields) - {"d", "n", "dims", "terms", "sr", "seed"}
    if unknown:
        raise UsageError(f"unknown generator fields: {sorted(unknown)}")
    try:
        if "dims" in fields:
            shape = tuple(int(v) for v in fields["dims"].split("x"))
        else:
            shape = (int(fields.get("n", 20)),) * int(fields.get("d", 4))
        return InstanceSpec(shape, int(fields.get("terms", 10)), float(fields.get("sr", 0.7)),
                            int(fields.get("seed", 0)))
    except ValueError as exc:
        raise UsageError(f"invalid generator spec {text!r}: {exc}") from None


def load_tensor(path) -> np.ndarray:
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(4)
    if head == b"DTEN":
        return read_dten_binary(path)
    return read_dten(path)


def _input_tensor(args) -> np.ndarray:
    if args.input is not None:
        try:
            return load_tensor(args.input)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return generate_instance(parse_gen_spec(args.gen))


def _finite(v):
    return None if v is None or (isinstance(v, float) and not math.isfinite(v)) else v


def report_to_dict(report: AlgoReport, params: RegParams, shape) -> dict:
    sol = report.solution
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "algorithm",
        "variant": report.variant.value,
        "shape": list(shape),
        "omegas": list(params.omegas),
        "omega_valid": params.is_valid(shape),
        "lambda": sol.lam,
        "objective": sol.objective,
        "bound_ratio": report.bound_ratio,
        "lower_bound_reference": report.lower_bound_reference,
        "vub": _finite(report.upper_bound),
        "wall_time_s": report.wall_time,
        "converged": report.converged,
        "sparsity_ratios": list(sol.sparsity_ratios),
        "factors": [x.tolist() for x in sol.xs],
    }


def trace_to_dict(trace: AmmTrace, params: RegParams, shape, config: AmmConfig,
                  include_timing: bool = True) -> dict:
    sol = trace.final
    out = {
        "schema_version": SCHEMA_VERSION,
        "kind": "amm",
        "init": config.init,
        "seed": config.seed,
        "stop_tol": config.stop_tol,
        "shape": list(shape),
        "omegas": list(params.omegas),
        "sweeps": trace.sweeps,
        "converged": trace.converged,
        "degenerate": trace.degenerate,
        "objective_per_sweep": list(trace.objective_per_sweep),
        "initial_lambda": trace.initial.lam,
        "lambda": sol.lam,
        "objective": sol.objective,
        "sparsity_ratios": list(sol.sparsity_ratios),
        "factors": [x.tolist() for x in sol.xs],
    }
    if include_timing:
        out["init_time_s"] = trace.init_time
        out["amm_time_s"] = trace.amm_time
    return out


def _emit(payload: dict, out: str) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_run(args) -> int:
    t = _input_tensor(args)
    params = parse_omega(args.omega, t.shape)
    report = run_algorithm(t, params, args.variant, prescale=not args.no_prescale,
                           tol=args.tol, max_iter=args.max_iter)
    _emit(report_to_dict(report, params, t.shape), args.out)
    if not report.converged:
        logger.error("power iteration did not converge within %d iterations", args.max_iter)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_amm(args) -> int:
    t = _input_tensor(args)
    params = parse_omega(args.omega, t.shape)
    config = AmmConfig(stop_tol=args.tol, max_sweeps=args.max_sweeps, init=args.init,
                       seed=args.seed, prescale=not args.no_prescale)
    trace = amm_solve(t, params, config)
    _emit(trace_to_dict(trace, params, t.shape, config, include_timing=args.timing), args.out)
    if trace.degenerate:
        logger.error("AMM stopped on a degenerate block after %d sweeps", trace.sweeps)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_experiment(args) -> int:
    kind = args.kind.replace("-", "_")
    if kind not in DRIVERS:
        raise UsageError(f"unknown experiment kind {args.kind!r}; choose from vary-sr, vary-n, amm")
    config = dict(PRESETS[args.preset][kind])
    if args.config is not None:
        try:
            config.update(json.loads(Path(args.config).read_text()))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: {exc}") from None
    config["seed"] = args.seed
    try:
        result = DRIVERS[kind](**config)
    except TypeError as exc:
        raise UsageError(f"bad experiment configuration: {exc}") from None
    csv_path, json_path = result.write(args.out_dir, include_timing=args.timing)
    logger.info("wrote %s and %s", csv_path, json_path)
    return EXIT_OK


def cmd_gen(args) -> int:
    t = generate_instance(parse_gen_spec(args.gen))
    if args.binary:
        write_dten_binary(args.out, t)
    else:
        write_dten(args.out, t)
    return EXIT_OK


def cmd_bounds(args) -> int:
    try:
        shape = tuple(int(v) for v in args.dims.replace("x", ",").split(",") if v.strip())
    except ValueError:
        raise UsageError(f"cannot parse dims {args.dims!r}") from None
    if len(shape) < 3 or any(n < 1 for n in shape):
        raise UsageError("bounds need at least three positive dimensions")
    params = parse_omega(args.omega, shape)
    valid = params.is_valid(shape)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "shape": list(shape),
        "omegas": list(params.omegas),
        "valid": valid,
        "valid_per_mode": list(params.validity(shape)),
        "ratio_v1": bound_ratio_v1(shape, params) if valid else None,
        "ratio_v2": bound_ratio_v2(shape, params) if valid else None,
    }
    _emit(payload, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    """Cross-check the fast paths against the brute-force oracles on one small tensor."""
    from . import oracles
    from .tensor_core import multilinear_value, reshape_to_matrix

    t = _input_tensor(args)
    if t.size > 20000:
        raise UsageError("verify is limited to tensors with at most 20000 entries")
    params = parse_omega(args.omega, t.shape)
    checks = {}
    for variant in ("v1", "v2"):
        report = run_algorithm(t, params, variant)
        xs = report.solution.xs
        brute = oracles.oracle_multilinear(t, xs)
        checks[f"{variant}_lambda_vs_bruteforce"] = abs(report.solution.lam - brute) <= 1e-10 * max(1.0, abs(brute))
        checks[f"{variant}_lambda_matches_chain"] = abs(multilinear_value(t, xs) - brute) <= 1e-10 * max(1.0, abs(brute))
        if report.bound_ratio is not None:
            slack = 1e-8 * float(np.linalg.norm(t))
            if variant == "v1":
                lam1 = oracles.oracle_lambda_max(reshape_to_matrix(t, t.shape[0], t.size // t.shape[0]))
            else:
                lam1 = float(np.linalg.norm(t))
            checks[f"{variant}_lower_bound"] = report.solution.lam >= report.bound_ratio * lam1 - slack
    _emit({"schema_version": SCHEMA_VERSION, "checks": checks, "ok": all(checks.values())}, args.out)
    return EXIT_OK if all(checks.values()) else EXIT_NUMERIC


def _add_input(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="tensor file (.dten text or binary)")
    src.add_argument("--gen", help='generator spec, e.g. "d=4,n=20,terms=10,sr=0.7,seed=1"')
    p.add_argument("--omega", default="default",
                   help="'default' (1/sqrt(n_j) - 1e-5), one value, or a comma list per mode")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l1rank1", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("run", help="run approximation algorithm V1 or V2")
    _add_input(p)
    p.add_argument("--variant", choices=["v1", "v2"], default="v1")
    p.add_argument("--tol", type=float, default=1e-10, help="power iteration tolerance")
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--no-prescale", action="store_true", help="skip division by max|T|")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("amm", help="alternating maximisation from a V1, V2 or random start")
    _add_input(p)
    p.add_argument("--init", choices=["v1", "v2", "random"], default="v1")
    p.add_argument("--tol", type=float, default=1e-6, help="AMM stopping distance")
    p.add_argument("--max-sweeps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0, help="seed for --init random")
    p.add_argument("--no-prescale", action="store_true")
    p.add_argument("--timing", action="store_true",
                   help="include wall times (reruns are then no longer byte-identical)")
    p.set_defaults(func=cmd_amm)

    p = sub.add_parser("experiment", help="run an experiment sweep, write CSV + JSON summary")
    p.add_argument("--kind", required=True, help="vary-sr, vary-n or amm")
    p.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    p.add_argument("--config", help="JSON file overriding preset fields")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--no-timing", dest="timing", action="store_false",
                   help="leave time_ms empty so reruns are byte-identical")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("gen", help="write a synthetic instance to a .dten file")
    p.add_argument("--gen", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--binary", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bounds", help="approximation ratios for given dims and omegas")
    p.add_argument("--dims", required=True, help="e.g. 20,20,20 or 20x20x20")
    p.add_argument("--omega", default="default")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bounds)

    # field debugging only; not listed in --help
    p = sub.add_parser("verify")
    _add_input(p)
    p.set_defaults(func=cmd_verify)
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "verify"]
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ZeroTensorError, RuntimeError) as exc:
        logger.error("%s", exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
