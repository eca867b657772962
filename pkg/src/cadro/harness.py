"""Seeded Monte-Carlo replications over a facility instance.

Each ``(m, rep)`` pair gets its own data stream derived from the master seed,
so every method sees the same dataset for a given replication and adding or
removing methods leaves the other rows unchanged.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .ambiguity import CadroSet, contains
from .core import RngStream, empirical_distribution, expected_cost, sample_dataset, stream_id
from .facility import FacilityInstance, FacilityModel
from .pipeline import (
    Method,
    PipelineConfig,
    cadro_run,
    d_dro_run,
    robust_run,
    saa_certified_run,
    train_direction,
)
from .solver import minimize_expected

CSV_HEADER = ["method", "m", "rep", "seed", "v_hat", "v_oos", "v_star_saa", "alpha_bound", "tau", "wall_time_ms"]
SUMMARY_HEADER = [
    "method", "m", "reps",
    "v_hat_mean", "v_hat_q05", "v_hat_q95", "v_hat_min", "v_hat_max",
    "v_oos_mean", "v_oos_q05", "v_oos_q95", "v_oos_min", "v_oos_max",
]
DEFAULT_M_GRID = (25, 50, 100, 200, 400, 800)
ALL_METHODS = tuple(m.value for m in Method)


@dataclass(frozen=True)
class ExperimentSpec:
    methods: tuple[str, ...] = ALL_METHODS
    m_grid: tuple[int, ...] = DEFAULT_M_GRID
    reps: int = 100
    master_seed: int = 0
    timing: bool = False

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        grid = tuple(int(m) for m in self.m_grid)
        if not grid or any(m < 2 for m in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("m_grid must be strictly increasing with every entry >= 2")
        methods = tuple(Method(m).value for m in self.methods)
        object.__setattr__(self, "m_grid", grid)
        object.__setattr__(self, "methods", methods)


def data_stream(master_seed: int, m: int, rep: int) -> RngStream:
    return RngStream(master_seed, stream_id("data", m, rep))


def replication(
    inst: FacilityInstance,
    m: int,
    rep: int,
    methods,
    cfg: PipelineConfig,
    master_seed: int,
    robust=None,
    timing: bool = False,
) -> list[dict]:
    """Run every requested method on the dataset of replication ``rep``.

    ``v_star_saa`` is the SAA optimum on the calibration part (split methods)
    or on the full sample (ball methods and robust).
    """
    model = FacilityModel(inst)
    stream = data_stream(master_seed, m, rep)
    data = sample_dataset(inst.p_star, m, stream.generator())
    methods = [Method(x) for x in methods]
    rows = []

    tr = None
    v_star_calib = math.nan
    if Method.CADRO in methods or Method.SAA in methods:
        mcfg = replace(cfg, method=Method.CADRO)
        tr = train_direction(data, model, mcfg)
        _, v_star_calib = minimize_expected(model, empirical_distribution(tr.calib), cfg.solver)
    v_star_full = math.nan
    if any(x in methods for x in (Method.TV, Method.KL, Method.W, Method.ROBUST)):
        _, v_star_full = minimize_expected(model, empirical_distribution(data), cfg.solver)

    K = inst.transport_costs() if Method.W in methods else None
    for meth in methods:
        if meth is Method.CADRO:
            res, v_star = cadro_run(data, model, cfg, tr), v_star_calib
        elif meth is Method.SAA:
            res, v_star = saa_certified_run(data, model, cfg, tr), v_star_calib
        elif meth is Method.ROBUST:
            res, v_star = robust if robust is not None else robust_run(model, cfg), v_star_full
        else:
            res, v_star = d_dro_run(data, model, cfg, meth, cost=K), v_star_full
        rows.append({
            "method": meth.value,
            "m": m,
            "rep": rep,
            "seed": stream.stream_id,
            "v_hat": res.v_hat,
            "v_oos": expected_cost(res.x_hat, inst.p_star, model),
            "v_star_saa": v_star,
            "alpha_bound": res.alpha_bound,
            "tau": res.tau,
            "wall_time_ms": res.wall_time_ms if timing else math.nan,
        })
    return rows


def _replication_job(args):
    return replication(*args)


def run_experiment(inst: FacilityInstance, spec: ExperimentSpec, cfg: PipelineConfig, jobs: int = 1) -> list[dict]:
    """All ``(method, m, rep)`` rows, sorted by method, then ``m``, then ``rep``."""
    robust = robust_run(FacilityModel(inst), cfg) if Method.ROBUST.value in spec.methods else None
    tasks = [
        (inst, m, rep, spec.methods, cfg, spec.master_seed, robust, spec.timing)
        for m in spec.m_grid
        for rep in range(spec.reps)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            chunks = list(pool.map(_replication_job, tasks, chunksize=4))
    else:
        chunks = [_replication_job(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r["method"], r["m"], r["rep"]))
    return rows


def summarize(rows: list[dict]) -> list[dict]:
    """Mean, 5%/95% quantiles, min and max of ``v_hat`` and ``v_oos`` per ``(method, m)``."""
    groups: dict[tuple[str, int], list[dict]] = {}
    for r in rows:
        groups.setdefault((r["method"], r["m"]), []).append(r)
    out = []
    for (meth, m), rs in sorted(groups.items()):
        row = {"method": meth, "m": m, "reps": len(rs)}
        for key in ("v_hat", "v_oos"):
            a = np.array([r[key] for r in rs], dtype=float)
            row[f"{key}_mean"] = float(a.mean())
            row[f"{key}_q05"] = float(np.quantile(a, 0.05))
            row[f"{key}_q95"] = float(np.quantile(a, 0.95))
            row[f"{key}_min"] = float(a.min())
            row[f"{key}_max"] = float(a.max())
        out.append(row)
    return out


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def rows_to_csv(rows: list[dict], header=CSV_HEADER) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[h]) for h in header])
    return buf.getvalue()


def write_csv(rows: list[dict], path, header=CSV_HEADER) -> None:
    Path(path).write_text(rows_to_csv(rows, header), encoding="utf-8")


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    for r in rows:
        for k, v in r.items():
            if k == "method":
                continue
            r[k] = int(v) if k in ("m", "rep", "seed", "tau", "reps") else float(v)
    return rows


def binomial_slack(beta: float, reps: int) -> float:
    return 3.0 * math.sqrt(beta * (1.0 - beta) / reps)


def coverage_audit(
    inst: FacilityInstance,
    m: int,
    reps: int,
    cfg: PipelineConfig,
    master_seed: int = 0,
    rel_tol: float = 1e-3,
) -> dict:
    """Repeated cost-aware DRO runs against the known demand distribution.

    Counts runs where the true cost of ``x_hat`` exceeds ``v_hat``, runs where
    the ambiguity set contains ``p_star``, runs where containment held but the
    bound still failed (should never happen), and violations of the ordering
    ``V*(calibration SAA) <= v_hat <= alpha`` at relative tolerance ``rel_tol``.
    """
    model = FacilityModel(inst)
    violations = members = implication_failures = sandwich_failures = 0
    for rep in range(reps):
        stream = data_stream(master_seed, m, rep)
        data = sample_dataset(inst.p_star, m, stream.generator())
        tr = train_direction(data, model, cfg)
        res = cadro_run(data, model, cfg, tr)
        v_oos = expected_cost(res.x_hat, inst.p_star, model)
        inside = contains(CadroSet(tr.v, tr.alpha), inst.p_star)
        _, v_saa = minimize_expected(model, empirical_distribution(tr.calib), cfg.solver)
        violations += v_oos > res.v_hat
        members += inside
        implication_failures += inside and v_oos > res.v_hat + 1e-6
        scale = max(1.0, abs(res.v_hat))
        sandwich_failures += (v_saa > res.v_hat + rel_tol * scale) or (res.v_hat > tr.alpha + rel_tol * scale)
    slack = binomial_slack(cfg.beta, reps)
    frac = violations / reps
    return {
        "m": m,
        "reps": reps,
        "beta": cfg.beta,
        "bound": cfg.bound.kind.value,
        "violation_fraction": frac,
        "membership_fraction": members / reps,
        "implication_failures": int(implication_failures),
        "sandwich_failures": int(sandwich_failures),
        "threshold": cfg.beta + slack,
        "passed": frac <= cfg.beta + slack,
    }
