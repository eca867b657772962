"""Shared domain types and the elementary evaluation maps.

Outcomes are stored as zero-based indices into the finite support, so a
dataset of size ``m`` over ``n`` realizations is just an integer array with
entries in ``range(n)``. The realization values themselves only matter to the
cost model.
"""
from __future__ import annotations

import hashlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SIMPLEX_TOL = 1e-9
SIMPLEX_REJECT = 1e-6


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class ProbVector:
    """A point on the probability simplex.

    Inputs within ``1e-6`` of the simplex are clipped and renormalized; anything
    farther away raises ``ValueError``.
    """

    __slots__ = ("_w",)

    def __init__(self, weights):
        w = np.array(weights, dtype=float).ravel()
        if w.size < 1:
            raise ValueError("probability vector must have at least one entry")
        if not np.all(np.isfinite(w)):
            raise ValueError("probability vector has non-finite entries")
        if w.min() < -SIMPLEX_REJECT or abs(w.sum() - 1.0) > SIMPLEX_REJECT:
            raise ValueError(
                f"not a probability vector (min={w.min():.3g}, sum={w.sum():.12g})"
            )
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        self._w = _frozen(w)

    @classmethod
    def uniform(cls, n: int) -> "ProbVector":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def vertex(cls, n: int, i: int) -> "ProbVector":
        w = np.zeros(n)
        w[i] = 1.0
        return cls(w)

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def n(self) -> int:
        return self._w.size

    def __array__(self, dtype=None, copy=None):
        return self._w if dtype is None else self._w.astype(dtype)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i):
        return self._w[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbVector):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._w, other._w))

    def __hash__(self):
        return hash(self._w.tobytes())

    def __repr__(self) -> str:
        return f"ProbVector({np.array2string(self._w, precision=6)})"


class Dataset:
    """Ordered i.i.d. sample of outcome indices over a support of size ``n``."""

    __slots__ = ("_outcomes", "_n")

    def __init__(self, outcomes, n: int):
        o = np.asarray(outcomes, dtype=np.int64).ravel().copy()
        if n < 1:
            raise ValueError("support size must be >= 1")
        if o.size and (o.min() < 0 or o.max() >= n):
            raise ValueError(f"outcome indices must lie in [0, {n})")
        self._outcomes = _frozen(o)
        self._n = int(n)

    @property
    def outcomes(self) -> np.ndarray:
        return self._outcomes

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return self._outcomes.size

    def __len__(self) -> int:
        return self.m

    def counts(self) -> np.ndarray:
        return np.bincount(self._outcomes, minlength=self._n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._n == other._n and bool(np.array_equal(self._outcomes, other._outcomes))

    def __repr__(self) -> str:
        return f"Dataset(m={self.m}, n={self.n})"


class CostModel(ABC):
    """Finite family of cost realizations ``x -> L(x) in R^n`` over a box.

    Subclasses provide :meth:`eval` and :meth:`subgrad`; feasibility is the
    axis-aligned box ``[lower, upper]`` and :meth:`project` clips onto it.
    Override :meth:`jacobian` when all subgradients can be formed at once.
    """

    n: int
    lower: np.ndarray
    upper: np.ndarray

    @property
    def dim_x(self) -> int:
        return self.lower.size

    @abstractmethod
    def eval(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def subgrad(self, x: np.ndarray, i: int) -> np.ndarray:
        ...

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Rows are subgradients of each cost realization at ``x``."""
        return np.stack([self.subgrad(x, i) for i in range(self.n)])

    def eval_and_jacobian(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.eval(x), self.jacobian(x)

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)

    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def is_feasible(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(self.project(x) - x) <= tol))


class AffineCostModel(CostModel):
    """``l_i(x) = A[i] @ x + b[i]`` on a box; handy for small analytic cases."""

    def __init__(self, A, b, lower, upper):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = np.asarray(b, dtype=float).ravel()
        self.lower = np.asarray(lower, dtype=float).ravel()
        self.upper = np.asarray(upper, dtype=float).ravel()
        self.n = self.b.size
        if self.A.shape != (self.n, self.lower.size):
            raise ValueError("A must have shape (n, dim_x)")
        if np.any(self.lower > self.upper):
            raise ValueError("empty box")

    def eval(self, x):
        return self.A @ np.asarray(x, dtype=float) + self.b

    def subgrad(self, x, i):
        return self.A[i].copy()

    def jacobian(self, x):
        return self.A.copy()


_MASK64 = (1 << 64) - 1


def stream_id(*keys: Any) -> int:
    """Stable 64-bit id for a tuple of keys (independent of PYTHONHASHSEED)."""
    h = hashlib.blake2b(repr(keys).encode("utf-8"), digest_size=8)
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream addressed by ``(seed, stream_id)``.

    Draws come from PCG64 seeded through ``SeedSequence`` so a given pair gives
    the same sequence on every platform, regardless of which process or thread
    consumes it.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= v <= _MASK64):
                raise ValueError(f"{name} must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *keys: Any) -> "RngStream":
        return RngStream(self.seed, stream_id(self.stream_id, *keys))


@dataclass
class RunResult:
    v_hat: float
    x_hat: np.ndarray
    tau: int
    method: str
    alpha_bound: float = float("nan")
    v_oos: float = float("nan")
    wall_time_ms: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "v_hat": float(self.v_hat),
            "v_oos": float(self.v_oos),
            "alpha_bound": float(self.alpha_bound),
            "tau": int(self.tau),
            "x_hat": [float(t) for t in self.x_hat],
            "wall_time_ms": float(self.wall_time_ms),
            "diagnostics": {k: _jsonable(v) for k, v in self.diagnostics.items()},
        }


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def sample_dataset(p: ProbVector, m: int, rng: np.random.Generator) -> Dataset:
    """Draw ``m`` i.i.d. outcome indices from ``p``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    # inverse-CDF on uniforms: stable across numpy versions unlike Generator.choice internals
    cdf = np.cumsum(p.weights)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(m), side="right")
    return Dataset(np.minimum(idx, p.n - 1), p.n)


def empirical_distribution(data: Dataset) -> ProbVector:
    """Empirical pmf of ``data``; the uniform vector when ``data`` is empty."""
    if data.m == 0:
        return ProbVector.uniform(data.n)
    return ProbVector(data.counts() / data.m)


def expected_cost(x, p: ProbVector, model: CostModel) -> float:
    if p.n != model.n:
        raise ValueError(f"dimension mismatch: p has {p.n} entries, model has {model.n}")
    return float(p.weights @ model.eval(x))


def split_dataset(data: Dataset, tau: int) -> tuple[Dataset, Dataset]:
    """Positional split into the first ``tau`` outcomes and the rest."""
    if not 0 <= tau <= data.m:
        raise ValueError(f"tau={tau} outside [0, {data.m}]")
    o = data.outcomes
    return Dataset(o[:tau], data.n), Dataset(o[tau:], data.n)


def value_range(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(v.max() - v.min())
