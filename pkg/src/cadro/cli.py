"""Command-line entry point.

Subcommands: ``generate`` writes a facility instance, ``run`` performs one
estimation, ``experiment`` sweeps methods over sample sizes and writes CSV, and
``coverage`` audits the out-of-sample guarantee of the cost-aware estimator.

Exit codes: 0 success, 2 invalid input, 3 failed coverage check.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bounds import MeanBoundSpec
from .core import expected_cost, sample_dataset
from .facility import FacilityInstance, FacilityModel, generate_instance
from .harness import (
    ALL_METHODS,
    DEFAULT_M_GRID,
    SUMMARY_HEADER,
    ExperimentSpec,
    coverage_audit,
    data_stream,
    run_experiment,
    summarize,
    write_csv,
)
from .pipeline import Method, PipelineConfig, run_method

EXIT_VALIDATION = 2
EXIT_CHECK_FAILED = 3

log = logging.getLogger("cadro")


class ValidationError(Exception):
    pass


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _int_list(s: str) -> list[int]:
    return [int(t) for t in s.replace(",", " ").split()]


def _config(args) -> PipelineConfig:
    bound = MeanBoundSpec(kind=args.bound, beta=args.beta, gamma_mode=args.gamma_mode)
    return PipelineConfig(beta=args.beta, bound=bound)


def _load(path) -> FacilityInstance:
    try:
        return FacilityInstance.load(path)
    except (OSError, ValueError, KeyError) as e:
        raise ValidationError(f"cannot read instance {path}: {e}") from e


def cmd_generate(args) -> int:
    inst = generate_instance(args.seed, args.n, args.n_x)
    try:
        inst.save(args.out)
    except OSError as e:
        raise ValidationError(f"cannot write {args.out}: {e}") from e
    print(f"{args.out} seed={args.seed}")
    return 0


def cmd_run(args) -> int:
    if args.m < 2:
        raise ValidationError("m must be >= 2")
    inst = _load(args.instance)
    cfg = _config(args)
    cfg = PipelineConfig(beta=cfg.beta, bound=cfg.bound, method=args.method)
    model = FacilityModel(inst)
    data = sample_dataset(inst.p_star, args.m, data_stream(args.seed, args.m, 0).generator())
    res = run_method(data, model, cfg, cost=inst.transport_costs())
    res.v_oos = expected_cost(res.x_hat, inst.p_star, model)
    out = res.to_dict()
    out.pop("diagnostics")
    out.update(m=args.m, beta=args.beta, seed=args.seed)
    print(json.dumps(out, indent=1))
    return 0


def cmd_experiment(args) -> int:
    inst = _load(args.instance)
    try:
        spec = ExperimentSpec(
            methods=tuple(args.methods.split(",")),
            m_grid=tuple(args.m_grid),
            reps=args.reps,
            master_seed=args.seed,
            timing=args.timing,
        )
    except ValueError as e:
        raise ValidationError(str(e)) from e
    rows = run_experiment(inst, spec, _config(args), jobs=args.jobs)
    out = Path(args.out)
    summary = Path(args.summary) if args.summary else out.with_name(out.stem + "_summary.csv")
    try:
        write_csv(rows, out)
        write_csv(summarize(rows), summary, SUMMARY_HEADER)
    except OSError as e:
        raise ValidationError(f"cannot write results: {e}") from e
    print(f"{out} ({len(rows)} rows)\n{summary}")
    return 0


def cmd_coverage(args) -> int:
    inst = _load(args.instance)
    if args.m < 2:
        raise ValidationError("m must be >= 2")
    report = coverage_audit(inst, args.m, args.reps, _config(args), args.seed)
    text = json.dumps(report, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0 if report["passed"] else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cadro", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def stats_opts(p, beta=0.01):
        p.add_argument("--beta", type=float, default=beta)
        p.add_argument("--bound", choices=["ordered", "hoeffding"], default="ordered")
        p.add_argument("--gamma-mode", choices=["exact_ks", "asymptotic"], default="exact_ks")
        p.add_argument("--seed", type=int, default=0, help="master seed for data streams")

    p = sub.add_parser("generate", help="write a random facility instance (JSON)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=_positive_int, default=50)
    p.add_argument("--n-x", type=_positive_int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="one estimation on a freshly drawn dataset")
    p.add_argument("--instance", required=True)
    p.add_argument("--method", choices=ALL_METHODS, default=Method.CADRO.value)
    p.add_argument("--m", type=int, required=True)
    stats_opts(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="sweep methods and sample sizes, write CSV")
    p.add_argument("--instance", required=True)
    p.add_argument("--methods", default=",".join(ALL_METHODS))
    p.add_argument("--m-grid", type=_int_list, default=list(DEFAULT_M_GRID))
    p.add_argument("--reps", type=_positive_int, default=100)
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="summary CSV path (default: <out>_summary.csv)")
    p.add_argument("--timing", action="store_true", help="record wall times (output no longer byte-reproducible)")
    p.add_argument("--jobs", type=_positive_int, default=1)
    stats_opts(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("coverage", help="Monte-Carlo audit of the out-of-sample guarantee")
    p.add_argument("--instance", required=True)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--reps", type=_positive_int, default=500)
    p.add_argument("--out")
    stats_opts(p, beta=0.1)
    p.set_defaults(func=cmd_coverage)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
