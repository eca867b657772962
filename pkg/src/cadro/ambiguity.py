"""Ambiguity sets over the probability simplex and their worst-case oracles.

Each oracle evaluates ``max_{p in A} <p, z>`` exactly and returns a maximizing
distribution. The ``*_arrays`` variants skip ``ProbVector`` validation and are
what the solvers call inside their iteration loops.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import singledispatch

import numpy as np
from scipy.optimize import brentq, linprog

from .core import ProbVector

CONTAINS_TOL = 1e-9


class EmptyAmbiguitySetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CadroSet:
    """``{p in simplex : <p, v> <= alpha}``."""

    v: np.ndarray
    alpha: float

    def __post_init__(self):
        v = np.array(self.v, dtype=float).ravel()
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.alpha < v.min() - 1e-12:
            raise EmptyAmbiguitySetError(
                f"alpha={self.alpha:.6g} below min(v)={v.min():.6g}: set is empty"
            )

    @property
    def n(self) -> int:
        return self.v.size


@dataclass(frozen=True, eq=False)
class TvBall:
    """L1 ball ``||p - center||_1 <= radius`` intersected with the simplex."""

    center: ProbVector
    radius: float

    def __post_init__(self):
        if not 0.0 <= self.radius:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "radius", min(float(self.radius), 2.0))

    @property
    def n(self) -> int:
        return self.center.n


@dataclass(frozen=True, eq=False)
class KlBall:
    """``KL(p || center) <= radius``; needs a strictly positive center when radius > 0."""

    center: ProbVector
    radius: float

    def __post_init__(self):
        if self.radius < 0.0:
            raise ValueError("radius must be nonnegative")
        if self.radius > 0.0 and np.any(self.center.weights <= 0.0):
            raise ValueError("KL ball with positive radius needs a strictly positive center")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self) -> int:
        return self.center.n


@dataclass(frozen=True, eq=False)
class WBall:
    """Optimal-transport ball: mass moved from ``center`` at unit costs ``cost``."""

    center: ProbVector
    cost: np.ndarray
    radius: float

    def __post_init__(self):
        K = np.array(self.cost, dtype=float)
        n = self.center.n
        if K.shape != (n, n):
            raise ValueError(f"cost matrix must be {n}x{n}")
        if np.any(K < 0) or np.any(np.diag(K) != 0):
            raise ValueError("cost matrix must be nonnegative with zero diagonal")
        if self.radius < 0.0:
            raise ValueError("radius must be nonnegative")
        K.setflags(write=False)
        object.__setattr__(self, "cost", K)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self) -> int:
        return self.center.n


@dataclass(frozen=True)
class FullSimplex:
    n: int


AmbiguitySet = CadroSet | TvBall | KlBall | WBall | FullSimplex


# ---------------------------------------------------------------- CADRO

def cadro_worst_case_arrays(v: np.ndarray, alpha: float, z: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact maximizer by enumerating supports of size one and two.

    The feasible region is the simplex cut by one halfspace, so some optimal
    vertex has at most two nonzero entries.
    """
    n = z.size
    single = v <= alpha
    best_val = -np.inf
    p = np.zeros(n)
    if single.any():
        i = int(np.flatnonzero(single)[np.argmax(z[single])])
        best_val = z[i]
        p[i] = 1.0
    lo = np.flatnonzero(v < alpha)
    hi = np.flatnonzero(v > alpha)
    if lo.size and hi.size:
        vi, vj = v[lo][:, None], v[hi][None, :]
        t = (alpha - vi) / (vj - vi)
        vals = z[lo][:, None] + t * (z[hi][None, :] - z[lo][:, None])
        k = int(np.argmax(vals))
        a, b = divmod(k, hi.size)
        if vals[a, b] > best_val:
            best_val = vals[a, b]
            p[:] = 0.0
            p[hi[b]] = t[a, b]
            p[lo[a]] = 1.0 - t[a, b]
    if not np.isfinite(best_val):
        # alpha within rounding of min(v)
        i = int(np.argmin(v))
        best_val = z[i]
        p[i] = 1.0
    return float(best_val), p


def cadro_dual_value(v: np.ndarray, alpha: float, z: np.ndarray) -> tuple[float, float]:
    """``min_{lam >= 0} lam*alpha + max_i (z_i - lam*v_i)`` over all breakpoints.

    Returns ``(value, lam)``. Independent of the primal enumeration; used as a
    cross-check.
    """
    v = np.asarray(v, dtype=float)
    z = np.asarray(z, dtype=float)
    dv = v[:, None] - v[None, :]
    dz = z[:, None] - z[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = dz / dv
    lam = lam[(dv != 0) & np.isfinite(lam) & (lam > 0)]
    cand = np.concatenate([[0.0], np.unique(lam)])
    vals = cand * alpha + np.max(z[None, :] - cand[:, None] * v[None, :], axis=1)
    k = int(np.argmin(vals))
    return float(vals[k]), float(cand[k])


def cadro_worst_case(s: CadroSet, z) -> tuple[float, ProbVector]:
    z = _as_vec(z, s.n)
    val, p = cadro_worst_case_arrays(s.v, s.alpha, z)
    return val, ProbVector(p)


# ---------------------------------------------------------------- TV

def tv_worst_case_arrays(w: np.ndarray, r: float, z: np.ndarray) -> tuple[float, np.ndarray]:
    p = w.copy()
    j = int(np.argmax(z))
    budget = min(0.5 * r, 1.0 - p[j])
    if budget > 0.0:
        for i in np.argsort(z, kind="stable"):
            if i == j or budget <= 0.0:
                continue
            take = min(p[i], budget)
            p[i] -= take
            p[j] += take
            budget -= take
    return float(p @ z), p


def tv_worst_case(s: TvBall, z) -> tuple[float, ProbVector]:
    z = _as_vec(z, s.n)
    val, p = tv_worst_case_arrays(s.center.weights.copy(), s.radius, z)
    return val, ProbVector(p)


# ---------------------------------------------------------------- KL

def _kl(p: np.ndarray, q: np.ndarray) -> float:
    """``KL(p || q)``; infinite when ``p`` puts mass where ``q`` has none."""
    pos = p > 0
    if np.any(q[pos] <= 0):
        return math.inf
    return float(np.sum(p[pos] * np.log(p[pos] / q[pos])))


def _lse(s: np.ndarray) -> float:
    smax = s.max()
    return float(smax + np.log(np.exp(s - smax).sum()))


def _tilt(logw: np.ndarray, zc: np.ndarray, lam: float) -> tuple[np.ndarray, float]:
    """Tilted distribution ``q ~ w exp(z/lam)`` and ``KL(q || w)``."""
    y = zc / lam
    w = np.exp(logw)
    u = y - w @ y
    if np.max(np.abs(u)) < 0.5:
        # centred form keeps KL accurate when it is tiny
        e = np.expm1(u)
        S = float(w @ e)
        q = w * (1.0 + e) / (1.0 + S)
        return q, max(float(q @ u) - math.log1p(S), 0.0)
    s = logw + y
    lse = _lse(s)
    q = np.exp(s - lse)
    return q, max(float(q @ (y - lse)), 0.0)


def kl_worst_case_arrays(w: np.ndarray, r: float, z: np.ndarray) -> tuple[float, np.ndarray]:
    if r <= 0.0:
        return float(w @ z), w.copy()
    zmax = z.max()
    top = z == zmax
    mass_top = w[top].sum()
    if top.all():
        return float(zmax), w.copy()
    if r >= -math.log(mass_top):
        p = np.where(top, w, 0.0) / mass_top
        return float(zmax), p
    logw = np.log(w)
    zc = z - zmax
    scale = zmax - z.min()

    def excess(log_lam):
        return _tilt(logw, zc, math.exp(log_lam))[1] - r

    lo = hi = math.log(scale)
    while excess(lo) <= 0.0:
        lo -= 2.0
    while excess(hi) > 0.0:
        hi += 2.0
        if hi > 700.0:
            # radius below floating resolution: the center is optimal to machine precision
            return float(w @ z), w.copy()
    root = brentq(excess, lo, hi, xtol=1e-12, rtol=1e-14, maxiter=200)
    # stay on the feasible side of the root
    step = 1e-12
    q, kl = _tilt(logw, zc, math.exp(root))
    while kl > r:
        root += step
        step *= 2.0
        q, kl = _tilt(logw, zc, math.exp(root))
    return float(q @ z), q


def kl_dual_objective(w: np.ndarray, r: float, z: np.ndarray, lam: float) -> float:
    """Dual objective ``lam*r + lam*log sum_i w_i exp(z_i/lam)`` (an upper bound)."""
    pos = w > 0
    return float(lam * r + lam * _lse(z[pos] / lam + np.log(w[pos])))


def kl_worst_case(s: KlBall, z) -> tuple[float, ProbVector]:
    z = _as_vec(z, s.n)
    val, p = kl_worst_case_arrays(s.center.weights, s.radius, z)
    return val, ProbVector(p)


# ---------------------------------------------------------------- Wasserstein

def _w_plan(K: np.ndarray, z: np.ndarray, lam: float, right: bool) -> np.ndarray:
    """Per-source argmax of ``z_j - lam*K_ij``.

    Ties go to the cheapest target (``right=True``, the plan active just above
    ``lam``) or the most expensive one (the plan active just below).
    """
    score = z[None, :] - lam * K
    smax = score.max(axis=1, keepdims=True)
    tie = score >= smax - 1e-12 * max(1.0, float(np.abs(smax).max()))
    key = np.where(tie, K if right else -K, np.inf)
    return np.argmin(key, axis=1)


def w_worst_case_arrays(w: np.ndarray, K: np.ndarray, r: float, z: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact worst case over the transport ball via its piecewise-linear dual.

    The dual ``lam*r + sum_i w_i max_j (z_j - lam*K_ij)`` is minimized by a
    1-D cutting-plane walk over its linear pieces, which terminates at the
    breakpoint where the slope changes sign. The maximizing distribution mixes
    the two transport plans active on either side of that breakpoint.
    """
    n = z.size
    src = np.flatnonzero(w > 0)
    ws, Ks = w[src], K[src]
    rows = np.arange(src.size)

    def line(lam, right=True):
        j = _w_plan(Ks, z, lam, right)
        return j, float(ws @ z[j]), float(ws @ Ks[rows, j])

    def marginal(j):
        p = np.zeros(n)
        np.add.at(p, j, ws)
        return p

    ja, Va, Ca = line(0.0)
    if Ca <= r:
        return Va, marginal(ja)
    pos = K[K > 0]
    lam_max = (z.max() - z.min()) / pos.min() + 1.0
    jb, Vb, Cb = line(lam_max)
    for _ in range(10 * n * n):
        lam = (Va - Vb) / (Ca - Cb)
        model = lam * r + Va - lam * Ca
        score = z[None, :] - lam * Ks
        true = lam * r + float(ws @ score.max(axis=1))
        if true <= model + 1e-12 * max(1.0, abs(model)):
            break
        jc, Vc, Cc = line(lam)
        if Cc > r:
            ja, Va, Ca = jc, Vc, Cc
        else:
            jb, Vb, Cb = jc, Vc, Cc
    theta = (r - Cb) / (Ca - Cb)
    p = theta * marginal(ja) + (1.0 - theta) * marginal(jb)
    return float(p @ z), p


def w_worst_case(s: WBall, z) -> tuple[float, ProbVector]:
    z = _as_vec(z, s.n)
    val, p = w_worst_case_arrays(s.center.weights, s.cost, s.radius, z)
    return val, ProbVector(p)


def transport_cost(w: np.ndarray, p: np.ndarray, K: np.ndarray) -> float:
    """Minimal cost of moving ``w`` onto ``p`` at unit costs ``K`` (LP)."""
    n = w.size
    A_eq = np.vstack([np.kron(np.eye(n), np.ones(n)), np.kron(np.ones(n), np.eye(n))])
    b_eq = np.concatenate([w, p])
    res = linprog(K.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(res.fun)


# ---------------------------------------------------------------- radii

def tv_radius(n: int, m: int, beta: float) -> float:
    """L1 deviation radius ``sqrt((2/m) log((2^n - 2)/beta))``, capped at 2."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if n < 2:
        return 0.0
    log_count = n * math.log(2.0) + math.log1p(-2.0 ** (1 - n))
    arg = (2.0 / m) * (log_count - math.log(beta))
    return min(2.0, math.sqrt(max(arg, 0.0)))


def kl_radius(n: int, m: int, beta: float) -> float:
    """Method-of-types radius ``(n log(m+1) + log(1/beta)) / m``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return (n * math.log(m + 1.0) + math.log(1.0 / beta)) / m


def w_radius(K, n: int, m: int, beta: float) -> float:
    return float(np.max(K)) * tv_radius(n, m, beta)


# ---------------------------------------------------------------- dispatch

@singledispatch
def worst_case_arrays(s, z: np.ndarray) -> tuple[float, np.ndarray]:
    raise TypeError(f"unsupported ambiguity set {type(s).__name__}")


@worst_case_arrays.register
def _(s: CadroSet, z):
    return cadro_worst_case_arrays(s.v, s.alpha, z)


@worst_case_arrays.register
def _(s: TvBall, z):
    return tv_worst_case_arrays(s.center.weights.copy(), s.radius, z)


@worst_case_arrays.register
def _(s: KlBall, z):
    return kl_worst_case_arrays(s.center.weights, s.radius, z)


@worst_case_arrays.register
def _(s: WBall, z):
    return w_worst_case_arrays(s.center.weights, s.cost, s.radius, z)


@worst_case_arrays.register
def _(s: FullSimplex, z):
    p = np.zeros(z.size)
    i = int(np.argmax(z))
    p[i] = 1.0
    return float(z[i]), p


def worst_case(s, z) -> tuple[float, ProbVector]:
    """``max_{p in s} <p, z>`` and a maximizer."""
    val, p = worst_case_arrays(s, _as_vec(z, s.n))
    return val, ProbVector(p)


@singledispatch
def contains(s, p: ProbVector) -> bool:
    raise TypeError(f"unsupported ambiguity set {type(s).__name__}")


@contains.register
def _(s: CadroSet, p: ProbVector) -> bool:
    return float(p.weights @ s.v) <= s.alpha + CONTAINS_TOL


@contains.register
def _(s: TvBall, p: ProbVector) -> bool:
    return float(np.abs(p.weights - s.center.weights).sum()) <= s.radius + CONTAINS_TOL


@contains.register
def _(s: KlBall, p: ProbVector) -> bool:
    return _kl(p.weights, s.center.weights) <= s.radius + CONTAINS_TOL


@contains.register
def _(s: WBall, p: ProbVector) -> bool:
    return transport_cost(s.center.weights, p.weights, s.cost) <= s.radius + CONTAINS_TOL


@contains.register
def _(s: FullSimplex, p: ProbVector) -> bool:
    return p.n == s.n


def kl_divergence(p: ProbVector, q: ProbVector) -> float:
    return _kl(p.weights, q.weights)


def _as_vec(z, n: int) -> np.ndarray:
    z = np.asarray(z, dtype=float).ravel()
    if z.size != n:
        raise ValueError(f"dimension mismatch: z has {z.size} entries, set has {n}")
    return z
