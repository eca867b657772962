"""Bike-stall facility location: place ``n_x`` stalls, each in its own box.

A user at point ``z_k`` may have to walk to the farthest stall, so the cost
realization for point ``k`` is ``max_i ||x_i - z_k||_2``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import CostModel, ProbVector, RngStream


@dataclass(frozen=True, eq=False)
class FacilityInstance:
    points: np.ndarray          # (n, 2) points of interest
    box_min: np.ndarray         # (n_x, 2)
    box_max: np.ndarray         # (n_x, 2)
    p_star: ProbVector
    seed: int | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        lo = np.array(self.box_min, dtype=float).reshape(-1, 2)
        hi = np.array(self.box_max, dtype=float).reshape(-1, 2)
        if pts.shape[0] < 1 or lo.shape[0] < 1:
            raise ValueError("need at least one point and one stall")
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError("boxes must satisfy min <= max per axis")
        if self.p_star.n != pts.shape[0]:
            raise ValueError("p_star must have one entry per point")
        for a in (pts, lo, hi):
            a.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "box_min", lo)
        object.__setattr__(self, "box_max", hi)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def n_x(self) -> int:
        return self.box_min.shape[0]

    def transport_costs(self) -> np.ndarray:
        """Pairwise Euclidean distances between points."""
        d = self.points[:, None, :] - self.points[None, :, :]
        return np.linalg.norm(d, axis=2)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "n_x": self.n_x,
            "points": self.points.tolist(),
            "boxes": [{"min": a.tolist(), "max": b.tolist()} for a, b in zip(self.box_min, self.box_max)],
            "p_star": self.p_star.weights.tolist(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FacilityInstance":
        inst = cls(
            points=np.array(d["points"], dtype=float),
            box_min=np.array([b["min"] for b in d["boxes"]], dtype=float),
            box_max=np.array([b["max"] for b in d["boxes"]], dtype=float),
            p_star=ProbVector(d["p_star"]),
            seed=d.get("seed"),
        )
        if inst.n != d["n"] or inst.n_x != d["n_x"]:
            raise ValueError("instance header does not match array sizes")
        return inst

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "FacilityInstance":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _stall_geometry(inst: FacilityInstance, x) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != 2 * inst.n_x:
        raise ValueError(f"x must have {2 * inst.n_x} coordinates, got {x.size}")
    diff = x.reshape(inst.n_x, 2)[None, :, :] - inst.points[:, None, :]
    return diff, np.sqrt(np.einsum("kij,kij->ki", diff, diff))


def facility_cost(inst: FacilityInstance, x) -> np.ndarray:
    _, dist = _stall_geometry(inst, x)
    return dist.max(axis=1)


def _subgrads(inst, diff, dist, rows) -> np.ndarray:
    active = np.argmax(dist[rows], axis=1)  # first maximizer
    d = dist[rows, active]
    u = diff[rows, active] / np.where(d > 0, d, 1.0)[:, None]
    g = np.zeros((rows.size, 2 * inst.n_x))
    r = np.arange(rows.size)
    g[r, 2 * active] = u[:, 0]
    g[r, 2 * active + 1] = u[:, 1]
    return g


def facility_subgrad(inst: FacilityInstance, x, k: int) -> np.ndarray:
    """Unit vector from point ``k`` to its farthest stall, in that stall's block."""
    diff, dist = _stall_geometry(inst, x)
    return _subgrads(inst, diff, dist, np.array([k]))[0]


class FacilityModel(CostModel):
    def __init__(self, inst: FacilityInstance):
        self.inst = inst
        self.n = inst.n
        self.lower = inst.box_min.ravel().copy()
        self.upper = inst.box_max.ravel().copy()

    def eval(self, x):
        return facility_cost(self.inst, x)

    def subgrad(self, x, i):
        return facility_subgrad(self.inst, x, i)

    def eval_and_jacobian(self, x):
        diff, dist = _stall_geometry(self.inst, x)
        return dist.max(axis=1), _subgrads(self.inst, diff, dist, np.arange(self.n))

    def jacobian(self, x):
        return self.eval_and_jacobian(x)[1]


def generate_instance(seed: int, n: int, n_x: int, stream_id: int = 0) -> FacilityInstance:
    """Random instance: points uniform in ``[0,10]^2``, stall boxes with
    centers uniform in ``[2,8]^2`` and half-widths in ``[0.5,1.5]``, and a
    flat-Dirichlet demand distribution."""
    if n < 1 or n_x < 1:
        raise ValueError("n and n_x must be >= 1")
    rng = RngStream(seed, stream_id).generator()
    points = rng.uniform(0.0, 10.0, size=(n, 2))
    centers = rng.uniform(2.0, 8.0, size=(n_x, 2))
    half = rng.uniform(0.5, 1.5, size=(n_x, 2))
    e = rng.exponential(1.0, size=n)
    return FacilityInstance(points, centers - half, centers + half, ProbVector(e / e.sum()), seed)
