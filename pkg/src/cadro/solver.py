"""Outer minimization over a box.

Every objective here is convex in ``x`` and comes with an oracle returning
its value plus one or more supporting linear pieces. Two engines consume
those oracles:

* ``cutting_plane`` (default): Kelley's method. Linear pieces are collected
  into an LP whose optimum is a lower bound, so the stopping rule is a
  certified relative gap. Suited to the low-dimensional decisions here.
* ``subgradient``: normalized projected steps ``c * diam / sqrt(t)`` along
  ``-g / ||g||`` with best-iterate tracking. No gap certificate, but memory
  stays constant.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import linprog

from .ambiguity import CadroSet, FullSimplex, cadro_dual_value, worst_case_arrays
from .core import CostModel, ProbVector

log = logging.getLogger(__name__)

LAMBDA_MAX = 1e6
ENGINES = ("cutting_plane", "subgradient")

# An oracle maps x to (f, G, vals): f = f(x), and every row j gives the
# global minorant y -> vals[j] + G[j] @ (y - x), with max(vals) == f.
Oracle = Callable[[np.ndarray], "tuple[float, np.ndarray, np.ndarray]"]


class NonFiniteCostError(FloatingPointError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls.

    ``tol`` is the relative gap target for cutting planes, and the stall
    threshold for the subgradient engine (best value improving by less than
    ``tol * max(1, |best|)`` over ``patience`` iterations). ``averaging``
    picks the subgradient output: best iterate, last one, or running average.
    """

    engine: str = "cutting_plane"
    tol: float = 1e-7
    max_cuts: int = 500
    max_iters: int = 20000
    step_c: float = 1.0
    patience: int = 500
    averaging: str = "best"

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if (self.max_iters < 1 or self.max_cuts < 1 or self.step_c <= 0
                or self.tol <= 0 or self.patience < 1):
            raise ValueError("invalid solver configuration")
        if self.averaging not in ("best", "last", "average"):
            raise ValueError(f"unknown averaging mode {self.averaging!r}")


@dataclass
class SolveInfo:
    iterations: int
    converged: bool
    gap: float = math.nan


def cutting_plane(
    oracle: Oracle,
    lower: np.ndarray,
    upper: np.ndarray,
    x0: np.ndarray,
    cfg: SolverConfig,
) -> tuple[np.ndarray, float, SolveInfo]:
    """Kelley's method on the box ``[lower, upper]``."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = lower.size
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    c = np.append(np.zeros(d), 1.0)
    bounds = list(zip(lower, upper)) + [(None, None)]
    rows, rhs = [], []
    best_x, best_f, gap = x, math.inf, math.inf
    k = 0
    for k in range(1, cfg.max_cuts + 1):
        f, G, vals = oracle(x)
        if not (math.isfinite(f) and np.all(np.isfinite(G))):
            raise NonFiniteCostError(f"non-finite objective at round {k}")
        if f < best_f:
            best_f, best_x = f, x
        G = np.atleast_2d(G)
        # vals_j + G_j (y - x) <= t
        rows.append(np.hstack([G, -np.ones((G.shape[0], 1))]))
        rhs.append(G @ x - np.atleast_1d(vals))
        res = linprog(c, A_ub=np.vstack(rows), b_ub=np.concatenate(rhs), bounds=bounds, method="highs")
        if res.status != 0:
            raise RuntimeError(f"cutting-plane LP failed: {res.message}")
        gap = best_f - res.fun
        if gap <= cfg.tol * max(1.0, abs(best_f)):
            return best_x, best_f, SolveInfo(k, True, max(gap, 0.0))
        x = np.clip(res.x[:d], lower, upper)
    warnings.warn(f"cutting planes stopped after {k} rounds with gap {gap:.3g}")
    return best_x, best_f, SolveInfo(k, False, gap)


def projected_subgradient(
    oracle: Callable[[np.ndarray], tuple[float, np.ndarray]],
    project: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    cfg: SolverConfig,
    scale: np.ndarray | float = 1.0,
) -> tuple[np.ndarray, float, SolveInfo]:
    """Minimize a convex function given by ``oracle`` (value, subgradient) over the set ``project`` maps onto.

    ``scale`` is the per-coordinate step scale (typically the box widths),
    applied as a diagonal preconditioner before normalizing the step.
    """
    scale = np.broadcast_to(np.asarray(scale, dtype=float), np.shape(x0))
    x = project(np.asarray(x0, dtype=float))
    best_x, best_f = x.copy(), math.inf
    acc = np.zeros_like(x)
    hist_f = best_f
    hist_t = 0
    converged = False
    t = 0
    for t in range(1, cfg.max_iters + 1):
        f, g = oracle(x)
        if not math.isfinite(f):
            raise NonFiniteCostError(f"non-finite objective at iteration {t}")
        if f < best_f:
            best_f, best_x = f, x.copy()
        acc += x
        if t - hist_t >= cfg.patience:
            if hist_f - best_f <= cfg.tol * max(1.0, abs(best_f)):
                converged = True
                break
            hist_f, hist_t = best_f, t
        d = scale * g
        dn = np.linalg.norm(d)
        if dn == 0.0:
            converged = True
            break
        x_new = project(x - (cfg.step_c / math.sqrt(t)) * scale * d / dn)
        if np.array_equal(x_new, x):
            # projected step is a fixed point: stationary on the box
            converged = True
            break
        x = x_new
    info = SolveInfo(t, converged)
    if cfg.averaging == "last":
        f, _ = oracle(x)
        return x, f, info
    if cfg.averaging == "average":
        xa = project(acc / t)
        f, _ = oracle(xa)
        return xa, f, info
    return best_x, best_f, info


def _box_scale(lower, upper) -> np.ndarray:
    w = np.asarray(upper, dtype=float) - np.asarray(lower, dtype=float)
    return np.where(np.isfinite(w) & (w > 0), w, 1.0)


def _minimize(oracle: Oracle, lower, upper, x0, cfg: SolverConfig) -> tuple[np.ndarray, float, SolveInfo]:
    if cfg.engine == "cutting_plane":
        x, f, info = cutting_plane(oracle, lower, upper, x0, cfg)
    else:
        def first_order(x):
            f, G, vals = oracle(x)
            G = np.atleast_2d(G)
            return f, G[int(np.argmax(vals))]

        x, f, info = projected_subgradient(
            first_order, lambda y: np.clip(y, lower, upper), x0, cfg, _box_scale(lower, upper)
        )
    log.debug("%s: %d rounds, converged=%s, gap=%.3g", cfg.engine, info.iterations, info.converged, info.gap)
    return x, f, info


def minimize_expected(
    model: CostModel,
    p: ProbVector,
    cfg: SolverConfig = SolverConfig(),
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """``argmin_x <p, L(x)>`` over the feasible box."""
    if p.n != model.n:
        raise ValueError("dimension mismatch between p and model")
    w = p.weights

    def oracle(x):
        L, J = model.eval_and_jacobian(x)
        f = float(w @ L)
        return f, w @ J, [f]

    x, f, _ = _minimize(oracle, model.lower, model.upper, model.center() if x0 is None else x0, cfg)
    return x, f


def minimize_robust(
    model: CostModel, cfg: SolverConfig = SolverConfig(), x0: np.ndarray | None = None
) -> tuple[np.ndarray, float]:
    """``argmin_x max_i l_i(x)``; every realization contributes its own linear piece."""

    def oracle(x):
        L, J = model.eval_and_jacobian(x)
        return float(L.max()), J, L

    x, f, _ = _minimize(oracle, model.lower, model.upper, model.center() if x0 is None else x0, cfg)
    return x, f


def minimize_dro(
    model: CostModel,
    amb,
    cfg: SolverConfig = SolverConfig(),
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, float, ProbVector]:
    """``argmin_x max_{p in amb} <p, L(x)>``.

    The supporting piece at ``x`` is ``J(x)^T p`` with ``p`` the inner
    maximizer returned by the exact worst-case oracle.
    """
    if amb.n != model.n:
        raise ValueError("dimension mismatch between ambiguity set and model")
    if isinstance(amb, FullSimplex):
        x, f = minimize_robust(model, cfg, x0)
        _, p = worst_case_arrays(amb, model.eval(x))
        return x, f, ProbVector(p)

    def oracle(x):
        L, J = model.eval_and_jacobian(x)
        val, p = worst_case_arrays(amb, L)
        return val, p @ J, [val]

    x, _, _ = _minimize(oracle, model.lower, model.upper, model.center() if x0 is None else x0, cfg)
    val, p = worst_case_arrays(amb, model.eval(x))
    return x, val, ProbVector(p)


def minimize_cadro_joint(
    model: CostModel,
    s: CadroSet,
    cfg: SolverConfig = SolverConfig(),
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, float, float]:
    """Joint minimization over ``(x, lam)`` of ``lam*alpha + max_i (l_i(x) - lam*v_i)``.

    Each realization supplies its own piece, exact in ``lam``. ``lam`` lives
    in ``[0, 1e6]``; ending on the cap triggers a warning (the set is then
    essentially a single face). Returns ``(x, lam, value)``.
    """
    if s.n != model.n:
        raise ValueError("dimension mismatch between ambiguity set and model")
    v, alpha = s.v, s.alpha
    dx = model.dim_x
    xs = model.project(model.center() if x0 is None else np.asarray(x0, dtype=float))
    _, lam0 = cadro_dual_value(v, alpha, model.eval(xs))

    def oracle(y):
        x, lam = y[:dx], y[dx]
        L, J = model.eval_and_jacobian(x)
        vals = lam * alpha + L - lam * v
        G = np.hstack([J, (alpha - v)[:, None]])
        return float(vals.max()), G, vals

    lower = np.append(model.lower, 0.0)
    upper = np.append(model.upper, LAMBDA_MAX)
    y, f, _ = _minimize(oracle, lower, upper, np.append(xs, lam0), cfg)
    if y[dx] >= LAMBDA_MAX * (1 - 1e-12):
        warnings.warn("dual multiplier reached its cap; ambiguity set is (nearly) degenerate")
    return y[:dx], float(y[dx]), f
