"""High-confidence upper bounds on a scalar mean ``<p*, v>``.

Given a fixed direction ``v`` and an i.i.d. calibration sample, each bound here
returns a value that exceeds ``<p*, v>`` with probability at least ``1 - beta``.
Every bound is clamped at ``max(v)``, which upper-bounds ``<p, v>`` for every
distribution on the simplex.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import Dataset


class BoundKind(str, Enum):
    HOEFFDING = "hoeffding"
    ORDERED = "ordered"


class GammaMode(str, Enum):
    ASYMPTOTIC = "asymptotic"
    EXACT_KS = "exact_ks"


@dataclass(frozen=True)
class MeanBoundSpec:
    kind: BoundKind = BoundKind.ORDERED
    beta: float = 0.01
    gamma_mode: GammaMode = GammaMode.EXACT_KS

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        object.__setattr__(self, "kind", BoundKind(self.kind))
        object.__setattr__(self, "gamma_mode", GammaMode(self.gamma_mode))


@dataclass(frozen=True)
class Projections:
    """Sample projected onto ``v``: ``eta[k] = v[xi_k]`` plus the range of ``v``."""

    eta: np.ndarray
    eta_bar: float
    eta_min: float

    @property
    def rg(self) -> float:
        return self.eta_bar - self.eta_min

    @property
    def m(self) -> int:
        return self.eta.size

    def mean(self) -> float:
        return float(self.eta.mean())


def project_sample(data: Dataset, v) -> Projections:
    v = np.asarray(v, dtype=float).ravel()
    if v.size != data.n:
        raise ValueError(f"dimension mismatch: v has {v.size} entries, support is {data.n}")
    return Projections(v[data.outcomes], float(v.max()), float(v.min()))


def hoeffding_radius(m: int, beta: float) -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    return min(1.0, math.sqrt(math.log(1.0 / beta) / (2.0 * m)))


def hoeffding_bound(proj: Projections, p_hat_dot_v: float | None, m: int, beta: float) -> float:
    """Empirical mean plus ``r(m, beta) * rg(v)``, clamped at ``max(v)``."""
    if proj.m == 0:
        raise ValueError("empty calibration set")
    if p_hat_dot_v is None:
        p_hat_dot_v = proj.mean()
    return min(proj.eta_bar, p_hat_dot_v + hoeffding_radius(m, beta) * proj.rg)


def ks_onesided_sf(m: int, d: float) -> float:
    """``P(D_m^+ >= d)`` for the one-sided KS statistic (Birnbaum-Tingey).

    Exact for continuous distributions, conservative for discrete ones.
    """
    if d <= 0.0:
        return 1.0
    if d >= 1.0:
        return 0.0
    j = np.arange(0, int(math.floor(m * (1.0 - d) + 1e-12)) + 1, dtype=float)
    a = 1.0 - d - j / m
    b = d + j / m
    with np.errstate(divide="ignore"):
        log_a = np.where(m - j > 0, (m - j) * np.log(np.clip(a, 0.0, None)), 0.0)
    logs = (
        gammaln(m + 1) - gammaln(j + 1) - gammaln(m - j + 1)
        + log_a
        + (j - 1) * np.log(b)
    )
    return float(min(1.0, d * math.exp(logsumexp(logs))))


@lru_cache(maxsize=4096)
def _gamma_exact_ks(m: int, beta: float, tol: float = 1e-10) -> float:
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ks_onesided_sf(m, mid) <= beta:
            hi = mid
        else:
            lo = mid
    return hi


def gamma_value(m: int, beta: float, mode: GammaMode | str = GammaMode.ASYMPTOTIC) -> float:
    """Mass shifted to ``max(v)`` by the ordered mean bound.

    ``ASYMPTOTIC`` uses ``sqrt(log(1/beta)/(2m))`` capped at 1; ``EXACT_KS``
    bisects the exact one-sided KS tail for the smallest ``gamma`` whose tail
    probability is at most ``beta``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    mode = GammaMode(mode)
    if mode is GammaMode.ASYMPTOTIC:
        return min(1.0, math.sqrt(math.log(1.0 / beta) / (2.0 * m)))
    return _gamma_exact_ks(m, beta)


def ordered_mean_bound(
    proj: Projections,
    m: int,
    beta: float,
    mode: GammaMode | str = GammaMode.ASYMPTOTIC,
    gamma: float | None = None,
) -> float:
    """Ordered (Anderson-type) mean bound.

    Removes mass ``gamma`` from the smallest order statistics and places it at
    ``max(v)``. ``gamma`` overrides the calibrated value when given.
    """
    if proj.m == 0:
        raise ValueError("empty calibration set")
    if gamma is None:
        gamma = gamma_value(m, beta, mode)
    if gamma >= 1.0:
        return proj.eta_bar
    eta = np.sort(proj.eta, kind="stable")
    if gamma <= 0.0:
        return float(eta.mean())
    kappa = max(1, math.ceil(m * gamma - 1e-12))
    value = (kappa / m - gamma) * eta[kappa - 1] + eta[kappa:].sum() / m + gamma * proj.eta_bar
    return float(min(proj.eta_bar, value))


def mean_bound(spec: MeanBoundSpec, data: Dataset, v) -> float:
    """Evaluate the bound selected by ``spec`` on calibration ``data`` along ``v``."""
    proj = project_sample(data, v)
    if spec.kind is BoundKind.HOEFFDING:
        return hoeffding_bound(proj, None, proj.m, spec.beta)
    return ordered_mean_bound(proj, proj.m, spec.beta, spec.gamma_mode)
