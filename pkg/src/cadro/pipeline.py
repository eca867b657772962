"""End-to-end estimators: cost-aware DRO, certified SAA and the ball-based baselines.

Every runner takes a dataset, a cost model and a :class:`PipelineConfig`, and
returns a :class:`~cadro.core.RunResult` whose ``v_hat`` is meant to upper
bound the out-of-sample cost of ``x_hat`` with probability ``1 - beta``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .ambiguity import (
    CadroSet,
    KlBall,
    TvBall,
    WBall,
    kl_radius,
    tv_radius,
    w_radius,
)
from .bounds import MeanBoundSpec, mean_bound
from .core import (
    CostModel,
    Dataset,
    ProbVector,
    RunResult,
    empirical_distribution,
    split_dataset,
)
from .solver import SolverConfig, minimize_dro, minimize_expected, minimize_robust

KL_SMOOTHING = 1e-6


class Method(str, Enum):
    CADRO = "cadro"
    SAA = "saa"
    TV = "tv"
    KL = "kl"
    W = "w"
    ROBUST = "robust"


@dataclass(frozen=True)
class PipelineConfig:
    beta: float = 0.01
    mu: float = 0.01
    nu: float = 0.8
    bound: MeanBoundSpec | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    method: Method = Method.CADRO

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if not (0.0 < self.mu < 1.0 and 0.0 < self.nu < 1.0):
            raise ValueError("mu and nu must lie in (0, 1)")
        object.__setattr__(self, "method", Method(self.method))
        if self.bound is None:
            object.__setattr__(self, "bound", MeanBoundSpec(beta=self.beta))
        elif self.bound.beta != self.beta:
            object.__setattr__(self, "bound", replace(self.bound, beta=self.beta))


def tau(m: int, mu: float = 0.01, nu: float = 0.8) -> int:
    """Training-set size ``floor(mu*nu*m(m+1)/(mu*m + nu))`` clamped to ``[1, m-1]``.

    The ratio ``tau/m`` moves from ``mu`` for small ``m`` to ``nu`` for large ``m``.
    """
    if m < 2:
        raise ValueError("need at least two samples to split")
    raw = math.floor(mu * nu * m * (m + 1) / (mu * m + nu))
    return min(max(raw, 1), m - 1)


@dataclass
class Training:
    """Outcome of the training half of a split run."""

    tau: int
    train: Dataset
    calib: Dataset
    x_bar: np.ndarray
    v: np.ndarray
    train_value: float
    alpha: float


def train_direction(data: Dataset, model: CostModel, cfg: PipelineConfig) -> Training:
    """Split, fit SAA on the training part and calibrate the mean bound along ``L(x_bar)``."""
    if data.m < 2:
        raise ValueError("need at least two samples")
    if data.n != model.n:
        raise ValueError("dataset support does not match the cost model")
    t = tau(data.m, cfg.mu, cfg.nu)
    d_train, d_calib = split_dataset(data, t)
    x_bar, train_value = minimize_expected(model, empirical_distribution(d_train), cfg.solver)
    v = model.eval(x_bar)
    alpha = mean_bound(cfg.bound, d_calib, v)
    return Training(t, d_train, d_calib, x_bar, v, train_value, alpha)


def cadro_run(data: Dataset, model: CostModel, cfg: PipelineConfig, training: Training | None = None) -> RunResult:
    """Cost-aware DRO: constrain ``<p, L(x_bar)>`` by the calibrated mean bound.

    The outer solve starts from ``x_bar``, whose worst-case cost is at most the
    bound, so the returned estimate never exceeds ``alpha``.
    """
    t0 = time.perf_counter()
    tr = training or train_direction(data, model, cfg)
    amb = CadroSet(tr.v, tr.alpha)
    x_hat, v_hat, p_worst = minimize_dro(model, amb, cfg.solver, x0=tr.x_bar)
    return RunResult(
        v_hat=v_hat,
        x_hat=x_hat,
        tau=tr.tau,
        method=Method.CADRO.value,
        alpha_bound=tr.alpha,
        wall_time_ms=1e3 * (time.perf_counter() - t0),
        diagnostics={
            "bound": cfg.bound.kind.value,
            "x_bar": tr.x_bar,
            "train_value": tr.train_value,
            "worst_p": p_worst.weights,
        },
    )


def saa_certified_run(data: Dataset, model: CostModel, cfg: PipelineConfig, training: Training | None = None) -> RunResult:
    """SAA decision from the training part, certified by the mean bound on the rest."""
    t0 = time.perf_counter()
    tr = training or train_direction(data, model, cfg)
    return RunResult(
        v_hat=tr.alpha,
        x_hat=tr.x_bar,
        tau=tr.tau,
        method=Method.SAA.value,
        alpha_bound=tr.alpha,
        wall_time_ms=1e3 * (time.perf_counter() - t0),
        diagnostics={"bound": cfg.bound.kind.value, "train_value": tr.train_value},
    )


def smoothed_empirical(data: Dataset, eps: float = KL_SMOOTHING) -> ProbVector:
    """Additively smoothed pmf ``(count + eps) / (m + n*eps)``; strictly positive."""
    return ProbVector((data.counts() + eps) / (data.m + data.n * eps))


def d_dro_set(data: Dataset, kind: Method | str, beta: float, cost: np.ndarray | None = None, radius: float | None = None):
    """Ball around the full-data empirical distribution with its calibrated radius."""
    kind = Method(kind)
    n, m = data.n, data.m
    if kind is Method.TV:
        r = tv_radius(n, m, beta) if radius is None else radius
        return TvBall(empirical_distribution(data), r)
    if kind is Method.KL:
        r = kl_radius(n, m, beta) if radius is None else radius
        return KlBall(smoothed_empirical(data), r)
    if kind is Method.W:
        if cost is None:
            raise ValueError("Wasserstein ball needs a transport cost matrix")
        r = w_radius(cost, n, m, beta) if radius is None else radius
        return WBall(empirical_distribution(data), cost, r)
    raise ValueError(f"{kind.value!r} is not a ball-based method")


def d_dro_run(
    data: Dataset,
    model: CostModel,
    cfg: PipelineConfig,
    kind: Method | str,
    cost: np.ndarray | None = None,
    radius: float | None = None,
) -> RunResult:
    """Ball-based DRO on the full dataset (no split needed for its guarantee).

    ``radius`` overrides the calibrated radius.
    """
    t0 = time.perf_counter()
    amb = d_dro_set(data, kind, cfg.beta, cost, radius)
    x_hat, v_hat, p_worst = minimize_dro(model, amb, cfg.solver)
    diag = {"radius": amb.radius, "worst_p": p_worst.weights}
    if isinstance(amb, KlBall):
        diag["smoothing"] = KL_SMOOTHING
    return RunResult(
        v_hat=v_hat,
        x_hat=x_hat,
        tau=0,
        method=Method(kind).value,
        wall_time_ms=1e3 * (time.perf_counter() - t0),
        diagnostics=diag,
    )


def robust_run(model: CostModel, cfg: PipelineConfig) -> RunResult:
    """Worst realization over the full simplex; ignores data."""
    t0 = time.perf_counter()
    x, val = minimize_robust(model, cfg.solver)
    return RunResult(
        v_hat=val,
        x_hat=x,
        tau=0,
        method=Method.ROBUST.value,
        wall_time_ms=1e3 * (time.perf_counter() - t0),
    )


def run_method(
    data: Dataset,
    model: CostModel,
    cfg: PipelineConfig,
    cost: np.ndarray | None = None,
) -> RunResult:
    """Dispatch on ``cfg.method``."""
    if cfg.method is Method.CADRO:
        return cadro_run(data, model, cfg)
    if cfg.method is Method.SAA:
        return saa_certified_run(data, model, cfg)
    if cfg.method is Method.ROBUST:
        return robust_run(model, cfg)
    return d_dro_run(data, model, cfg, cfg.method, cost)

