"""Point-cloud container, exact fixed-radius neighbor queries and kernels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import EmptyCloud, InvalidArgument, InvalidCoordinate, InvalidRadius

BRUTE_FORCE_BELOW = 256
EXACT_BOUND_MAX_POINTS = 20000

# cKDTree compares squared distances internally; candidates are re-checked
# with the exact distance below, so the query radius is padded slightly.
_QUERY_PAD = 1e-9

KERNEL_FAMILIES = ("truncated-gaussian", "epanechnikov")
_KERNEL_ALIASES = {
    "gauss": "truncated-gaussian",
    "gaussian": "truncated-gaussian",
    "truncated-gaussian": "truncated-gaussian",
    "epan": "epanechnikov",
    "epanechnikov": "epanechnikov",
}


@dataclass(frozen=True)
class Kernel:
    """Weighting kernel supported on [0, 1].

    ``bandwidth`` only affects the truncated Gaussian,
    ``K(u) = exp(-u**2 / (2 * bandwidth**2))`` on [0, 1].
    """

    family: str = "truncated-gaussian"
    bandwidth: float = 1.0

    def __post_init__(self):
        family = _KERNEL_ALIASES.get(self.family)
        if family is None:
            raise InvalidArgument(f"unknown kernel family {self.family!r}")
        object.__setattr__(self, "family", family)
        if family == "truncated-gaussian" and not 0.0 < self.bandwidth <= 1.0:
            raise InvalidArgument(f"bandwidth must lie in (0, 1], got {self.bandwidth}")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "truncated-gaussian":
            values = np.exp(-(u * u) / (2.0 * self.bandwidth**2))
        else:
            values = 1.0 - u * u
        return np.where(u <= 1.0, values, 0.0)


def kernel_eval(kernel: Kernel, u: float) -> float:
    if not u >= 0.0:
        raise InvalidArgument(f"kernel argument must be >= 0, got {u}")
    return float(kernel(u))


@dataclass(frozen=True)
class NeighborSet:
    """Neighbors strictly inside a ball, excluding zero-distance points.

    Entries are ordered by ascending distance, ties broken by index.
    """

    indices: np.ndarray
    distances: np.ndarray

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    delta: float
    index: cKDTree | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return len(self.points)

    def __len__(self):
        return len(self.points)

    def __getstate__(self):
        # the tree is rebuilt on unpickling; cheaper than shipping it
        return {"points": self.points, "delta": self.delta}

    def __setstate__(self, state):
        object.__setattr__(self, "points", state["points"])
        object.__setattr__(self, "delta", state["delta"])
        object.__setattr__(self, "index", _build_index(state["points"]))


def _as_points(points) -> np.ndarray:
    pts = np.array(points, dtype=float)
    if pts.size == 0:
        raise EmptyCloud("point cloud is empty")
    pts = pts.reshape(-1, 3) if pts.ndim == 1 else pts
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise InvalidArgument(f"expected an (m, 3) array of points, got shape {pts.shape}")
    bad = np.flatnonzero(~np.isfinite(pts).all(axis=1))
    if len(bad):
        raise InvalidCoordinate(int(bad[0]))
    return pts


def _build_index(pts: np.ndarray) -> cKDTree | None:
    if len(pts) < BRUTE_FORCE_BELOW:
        return None
    return cKDTree(pts)


def build_cloud(points) -> PointCloud:
    pts = _as_points(points)
    pts.setflags(write=False)
    return PointCloud(points=pts, delta=data_bound(pts), index=_build_index(pts))


def _pairwise_max(pts: np.ndarray, block: int = 2048) -> float:
    best = 0.0
    for start in range(0, len(pts), block):
        chunk = pts[start:start + block]
        diff = chunk[:, None, :] - pts[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        best = max(best, float(d2.max()))
    return float(np.sqrt(best))


def data_bound(points) -> float:
    """Maximum pairwise distance of the points.

    Exact up to ``EXACT_BOUND_MAX_POINTS`` points; beyond that the diagonal
    of the axis-aligned bounding box is returned, an upper bound within a
    factor sqrt(3) of the exact value.
    """
    pts = _as_points(points)
    if len(pts) == 1:
        return 0.0
    if len(pts) > EXACT_BOUND_MAX_POINTS:
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    # the farthest pair is always a pair of hull vertices
    try:
        hull = ConvexHull(pts)
        pts = pts[hull.vertices]
    except (QhullError, ValueError):
        pass
    return _pairwise_max(pts)


def distances_to(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    diff = points - center
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def neighbors_within(cloud: PointCloud, center, radius: float) -> NeighborSet:
    if not radius > 0.0:
        raise InvalidRadius(f"radius must be positive, got {radius}")
    center = np.asarray(center, dtype=float).reshape(3)
    if cloud.index is None:
        candidates = np.arange(cloud.m)
    else:
        candidates = np.asarray(
            cloud.index.query_ball_point(center, radius * (1.0 + _QUERY_PAD)), dtype=np.intp
        )
    dist = distances_to(cloud.points[candidates], center)
    keep = (dist > 0.0) & (dist < radius)
    idx, dist = candidates[keep], dist[keep]
    order = np.lexsort((idx, dist))
    return NeighborSet(indices=idx[order], distances=dist[order])
