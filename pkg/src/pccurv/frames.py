"""Kernel-weighted local PCA: tangent plane and normal at a query point."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateNeighborhood, DegenerateWeights, InsufficientNeighbors
from .geometry import Kernel, PointCloud, neighbors_within

MIN_FRAME_NEIGHBORS = 3
RANK_TOL = 1e-12


@dataclass(frozen=True)
class LocalFrame:
    e1: np.ndarray
    e2: np.ndarray
    n: np.ndarray
    sigma: np.ndarray
    neighbor_count: int

    @property
    def explained_variance(self) -> float:
        s2 = self.sigma**2
        return float((s2[0] + s2[1]) / s2.sum())

    def tangent_projector(self) -> np.ndarray:
        return np.outer(self.e1, self.e1) + np.outer(self.e2, self.e2)


def weighted_offsets(offsets: np.ndarray, distances: np.ndarray, radius: float,
                     kernel: Kernel) -> np.ndarray:
    """Rows ``sqrt(K(d_j / r)) * (x_j - p)``; the transpose of X·D."""
    w = kernel(distances / radius)
    if not np.any(w > 0.0):
        raise DegenerateWeights(f"all kernel weights vanish at radius {radius}")
    return offsets * np.sqrt(w)[:, None]


def orient_normal(frame: LocalFrame, p, neighborhood_centroid) -> LocalFrame:
    """Flip ``n`` so that it points from the neighborhood centroid towards ``p``.

    A zero dot product keeps the sign as it came out of the SVD.
    """
    side = float(np.dot(frame.n, np.asarray(p, float) - np.asarray(neighborhood_centroid, float)))
    if side < 0.0:
        return replace(frame, n=-frame.n)
    return frame


def frame_from_offsets(offsets: np.ndarray, distances: np.ndarray, radius: float,
                       kernel: Kernel) -> LocalFrame:
    count = len(offsets)
    if count < MIN_FRAME_NEIGHBORS:
        raise InsufficientNeighbors(count, MIN_FRAME_NEIGHBORS)
    b = weighted_offsets(offsets, distances, radius, kernel)
    _, sigma, vt = np.linalg.svd(b, full_matrices=False)
    if sigma[1] < RANK_TOL * sigma[0] or sigma[0] == 0.0:
        raise DegenerateNeighborhood(f"rank < 2 neighborhood (sigma={sigma})")
    frame = LocalFrame(e1=vt[0], e2=vt[1], n=vt[2], sigma=sigma, neighbor_count=count)
    # offsets are relative to p, so p - centroid == -mean(offsets)
    return orient_normal(frame, np.zeros(3), offsets.mean(axis=0))


def weighted_local_pca(cloud: PointCloud, p, r: float, kernel: Kernel) -> LocalFrame:
    """Local frame from the SVD of the kernel-weighted neighborhood of ``p``.

    Neighbors are the cloud points with ``0 < |x - p| < r``; each centered
    offset is scaled by ``sqrt(K(|x - p| / r))``.  The normal is oriented
    away from the unweighted neighborhood centroid.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    nb = neighbors_within(cloud, p, r)
    offsets = cloud.points[nb.indices] - p
    return frame_from_offsets(offsets, nb.distances, r, kernel)
