"""Command-line entry point: ``riscomp run | sweep | gradcheck``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import report
from .channel import ChannelRealization
from .config import ConfigError, load_config, normalize
from .harness import ScenarioSpec, run_scenario, sweep
from .optim import gradient_error
from .rng import Purpose, RandomStream, trial_stream_id

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _spec_from_args(args) -> ScenarioSpec:
    params = load_config(args.config, args.paper_scale) if args.config else normalize({}, args.paper_scale)
    if args.seed is not None:
        params["seed"] = args.seed
    if args.trials is not None:
        params["trials"] = args.trials
    return ScenarioSpec.from_params(params, trace=args.trace)


def _parse_values(text: str) -> list:
    try:
        return [json.loads(v) for v in text.split(",") if v.strip()]
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--values must be comma-separated numbers: {exc.msg}", "values") from exc


def cmd_run(args) -> int:
    spec = _spec_from_args(args)
    result = run_scenario(spec, args.jobs)
    n = report.write_csv(args.out, report.TRIAL_HEADER, report.trial_rows(result))
    if args.trace:
        report.write_csv(report.sibling(args.out, "_trace"), report.TRACE_HEADER, report.trace_rows(result))
    for label, st in result.stats.items():
        print(f"{label:>20s}  mean relative rate {st.mean:.4f} +/- {st.stderr:.4f}  (n={st.count})")
    if result.n_degenerate:
        print(f"skipped {result.n_degenerate} degenerate trial(s)", file=sys.stderr)
    print(f"wrote {n} rows to {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _spec_from_args(args)
    values = _parse_values(args.values)
    if not values:
        raise ConfigError("--values is empty", "values")
    results = sweep(spec, args.axis, values, args.jobs)
    n = report.write_csv(args.out, report.SWEEP_HEADER, report.sweep_rows(args.axis, results))
    report.write_csv(report.sibling(args.out, "_trials"), report.TRIAL_HEADER,
                     (row for _, res in results for row in report.trial_rows(res)))
    for value, res in results:
        cells = "  ".join(f"{lab}={st.mean:.4f}" for lab, st in res.stats.items())
        print(f"{args.axis}={value}: {cells}")
    print(f"wrote {n} aggregate rows to {args.out}")
    return EXIT_OK


def random_instance(n: int, k: int, s: RandomStream):
    """Dense random channel, unit-modulus configuration and compensation phases."""
    h_d = s.complex_normal(k)
    V = s.complex_normal((n, k))
    omega = np.exp(1j * s.uniform(-np.pi, np.pi, n))
    theta = s.uniform(-np.pi, np.pi, n)
    return ChannelRealization(h_d, V, k), omega, theta


def cmd_gradcheck(args) -> int:
    if not (1 <= args.n <= 64 and 1 <= args.k <= 64):
        raise ConfigError("gradcheck needs 1 <= n, k <= 64", "n" if not 1 <= args.n <= 64 else "k")
    worst = 0.0
    for i in range(args.instances):
        s = RandomStream(args.seed, trial_stream_id(i, Purpose.GRADCHECK))
        worst = max(worst, gradient_error(*random_instance(args.n, args.k, s), step=args.step))
    ok = worst <= args.tol
    print(f"max relative gradient error {worst:.6e} over {args.instances} instance(s) "
          f"(n={args.n}, k={args.k}, tol={args.tol:g}): {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_RUNTIME


def _add_scenario_flags(p):
    p.add_argument("--config", help="scenario JSON file (defaults when omitted)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--trials", type=int, help="override the number of Monte Carlo trials")
    p.add_argument("--trace", action="store_true", help="also write per-iteration traces")
    p.add_argument("--paper-scale", action="store_true", help="K=700, L_a=101, L_b=51, L_d=100")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riscomp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Monte Carlo run, one CSV row per (trial, label)")
    _add_scenario_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one parameter, one CSV row per (value, label)")
    _add_scenario_flags(p)
    p.add_argument("--axis", required=True, help="config key to vary, e.g. n_reflectors or epsilon")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gradcheck", help="compare the analytic gradient to central differences")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--instances", type=int, default=10)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        where = f" [key: {exc.key}]" if exc.key else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
