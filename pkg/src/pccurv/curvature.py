"""Principal, Gaussian and mean curvature from directional curvature samples.

For a neighbor ``q`` of ``p`` with offset ``v = q - p`` the directional
curvature is approximated by ``2 (n . v) / |v|**2`` where ``n`` is the local
PCA normal.  The highest and lowest fractions of these samples are
kernel-averaged into the principal curvatures.

Sign convention: a sample is positive when the surface bends towards ``n``.
With the centroid-based orientation ``n`` points away from the concave side,
so a sphere yields negative curvatures of magnitude ``1/R``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateWeights,
    EmptyCloud,
    InsufficientNeighbors,
    InvalidArgument,
    PointFailure,
)
from .frames import LocalFrame, frame_from_offsets
from .geometry import Kernel, PointCloud, neighbors_within
from .scales import (
    ScalePair,
    SweepConfig,
    profile_from_neighbors,
    radius_grid,
    select_scales,
)

_NAN3 = np.full(3, np.nan)


@dataclass(frozen=True)
class CurvatureConfig:
    extreme_fraction: float = 0.2
    kernel: Kernel = field(default_factory=Kernel)
    min_tau_neighbors: int = 10

    def __post_init__(self):
        if not 0.0 < self.extreme_fraction < 1.0:
            raise InvalidArgument(
                f"extreme_fraction must lie in (0, 1), got {self.extreme_fraction}")
        if int(self.min_tau_neighbors) != self.min_tau_neighbors or self.min_tau_neighbors < 1:
            raise InvalidArgument("min_tau_neighbors must be a positive integer")


@dataclass(frozen=True)
class DirectionalSamples:
    """One row per neighbor in the tau-ball: offset, curvature, weight."""

    v: np.ndarray
    kappa: np.ndarray
    w: np.ndarray

    def __len__(self):
        return len(self.kappa)


@dataclass(frozen=True)
class CurvatureResult:
    kappa1: float
    kappa2: float
    gauss: float
    mean: float
    d1: np.ndarray
    d2: np.ndarray
    normal: np.ndarray
    eps_pca: float
    tau: float
    valid: bool
    scale_fallback: bool = False
    direction_fallback: bool = False
    reason: str = ""

    @classmethod
    def invalid(cls, reason: str, scales: ScalePair | None = None) -> "CurvatureResult":
        return cls(
            kappa1=math.nan, kappa2=math.nan, gauss=math.nan, mean=math.nan,
            d1=_NAN3, d2=_NAN3, normal=_NAN3,
            eps_pca=scales.eps_pca if scales else math.nan,
            tau=scales.tau if scales else math.nan,
            valid=False,
            scale_fallback=scales.fallback_used if scales else False,
            reason=reason,
        )


def samples_from_offsets(offsets: np.ndarray, distances: np.ndarray, normal: np.ndarray,
                         tau: float, kernel: Kernel) -> DirectionalSamples:
    kappa = 2.0 * (offsets @ normal) / distances**2
    return DirectionalSamples(v=offsets, kappa=kappa, w=kernel(distances / tau))


def directional_samples(cloud: PointCloud, p, frame: LocalFrame, tau: float, kernel: Kernel,
                        min_neighbors: int = 10) -> DirectionalSamples:
    p = np.asarray(p, dtype=float).reshape(3)
    nb = neighbors_within(cloud, p, tau)
    if len(nb) < min_neighbors:
        raise InsufficientNeighbors(len(nb), min_neighbors)
    offsets = cloud.points[nb.indices] - p
    return samples_from_offsets(offsets, nb.distances, frame.n, tau, kernel)


def _subset_direction(v: np.ndarray, w: np.ndarray, frame: LocalFrame):
    u = v / np.linalg.norm(v, axis=1)[:, None]
    # directions are axial: align everything with the first one
    u = np.where((u @ u[0] >= 0.0)[:, None], u, -u)
    avg = (w[:, None] * u).sum(axis=0)
    tangent = (avg @ frame.e1) * frame.e1 + (avg @ frame.e2) * frame.e2
    norm = np.linalg.norm(tangent)
    if not norm > 0.0:
        return None
    return tangent / norm


def principal_from_samples(samples: DirectionalSamples, config: CurvatureConfig,
                           frame: LocalFrame):
    """Kernel-weighted averages of the top and bottom ``extreme_fraction``.

    Returns ``(kappa1, kappa2, d1, d2, direction_fallback)`` with
    ``kappa1 >= kappa2``; each direction is the weighted axial mean of the
    offsets in the subset that produced that curvature, projected on the
    tangent plane.
    """
    n = len(samples)
    if n == 0:
        raise InsufficientNeighbors(0, 1)
    order = np.argsort(samples.kappa, kind="stable")
    k = max(1, int(math.floor(config.extreme_fraction * n)))
    subsets = {"low": order[:k], "high": order[n - k:]}
    values = {}
    for name, idx in subsets.items():
        w = samples.w[idx]
        total = w.sum()
        if not total > 0.0:
            raise DegenerateWeights(f"zero weight sum in the {name} subset")
        values[name] = float((samples.kappa[idx] * w).sum() / total)

    first, second = ("high", "low") if values["high"] >= values["low"] else ("low", "high")
    fallback = False
    dirs = []
    for name, default in ((first, frame.e1), (second, frame.e2)):
        idx = subsets[name]
        d = _subset_direction(samples.v[idx], samples.w[idx], frame)
        if d is None:
            d, fallback = default.copy(), True
        dirs.append(d)
    return values[first], values[second], dirs[0], dirs[1], fallback


def _estimate_at(cloud: PointCloud, p: np.ndarray, radii: np.ndarray, sweep: SweepConfig,
                 config: CurvatureConfig, flip_normal: bool = False) -> CurvatureResult:
    kernel = config.kernel
    scales = None
    try:
        nb = neighbors_within(cloud, p, radii[-1])
        offsets = cloud.points[nb.indices] - p
        dist = nb.distances
        profile = profile_from_neighbors(offsets, dist, radii, sweep, kernel)
        scales = select_scales(profile, sweep.gamma, sweep.tau_search, sweep.fallback)

        n_eps = int(np.searchsorted(dist, scales.eps_pca, side="left"))
        frame = frame_from_offsets(offsets[:n_eps], dist[:n_eps], scales.eps_pca, kernel)
        if flip_normal:
            frame = replace(frame, n=-frame.n)

        n_tau = int(np.searchsorted(dist, scales.tau, side="left"))
        if n_tau < config.min_tau_neighbors:
            raise InsufficientNeighbors(n_tau, config.min_tau_neighbors)
        samples = samples_from_offsets(offsets[:n_tau], dist[:n_tau], frame.n, scales.tau, kernel)
        k1, k2, d1, d2, dir_fallback = principal_from_samples(samples, config, frame)
    except (PointFailure, np.linalg.LinAlgError) as exc:
        return CurvatureResult.invalid(f"{type(exc).__name__}: {exc}", scales)

    return CurvatureResult(
        kappa1=k1, kappa2=k2, gauss=k1 * k2, mean=k1 + k2,
        d1=d1, d2=d2, normal=frame.n,
        eps_pca=scales.eps_pca, tau=scales.tau, valid=True,
        scale_fallback=scales.fallback_used, direction_fallback=dir_fallback,
    )


def estimate_point(cloud: PointCloud, p, sweep: SweepConfig | None = None,
                   config: CurvatureConfig | None = None, *,
                   flip_normal: bool = False) -> CurvatureResult:
    """Full pipeline at one query point.

    Per-point failures come back as an invalid result with NaN curvatures.
    ``flip_normal`` reverses the oriented normal before sampling; it exists
    for orientation-invariance checks.
    """
    sweep = sweep or SweepConfig()
    config = config or CurvatureConfig()
    p = np.asarray(p, dtype=float).reshape(3)
    if not cloud.delta > 0.0:
        return CurvatureResult.invalid("NoUsableScale: data bound is zero")
    return _estimate_at(cloud, p, radius_grid(cloud.delta, sweep), sweep, config, flip_normal)


def _estimate_range(cloud, start, stop, sweep, config):
    return [estimate_point(cloud, cloud.points[i], sweep, config) for i in range(start, stop)]


_WORKER_STATE: dict = {}


def _worker_init(cloud, sweep, config):
    _WORKER_STATE.update(cloud=cloud, sweep=sweep, config=config)


def _worker_range(bounds):
    s = _WORKER_STATE
    return _estimate_range(s["cloud"], bounds[0], bounds[1], s["sweep"], s["config"])


def default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


def estimate_all(cloud: PointCloud, sweep: SweepConfig | None = None,
                 config: CurvatureConfig | None = None,
                 workers: int | None = None) -> list[CurvatureResult]:
    """Estimate curvature at every cloud point, in input order.

    Each point is computed independently, so the output does not depend on
    ``workers``.
    """
    if cloud is None or cloud.m == 0:
        raise EmptyCloud("point cloud is empty")
    sweep = sweep or SweepConfig()
    config = config or CurvatureConfig()
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or cloud.m < 2 * workers:
        return _estimate_range(cloud, 0, cloud.m, sweep, config)

    chunk = max(1, math.ceil(cloud.m / (4 * workers)))
    bounds = [(s, min(s + chunk, cloud.m)) for s in range(0, cloud.m, chunk)]
    with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                             initargs=(cloud, sweep, config)) as pool:
        parts = list(pool.map(_worker_range, bounds))
    return [r for part in parts for r in part]


def results_arrays(results: list[CurvatureResult]) -> dict[str, np.ndarray]:
    """Column-stack a result list (handy for metrics and CSV output)."""
    out = {
        name: np.array([getattr(r, name) for r in results], dtype=float)
        for name in ("kappa1", "kappa2", "gauss", "mean", "eps_pca", "tau")
    }
    for name in ("d1", "d2", "normal"):
        out[name] = np.array([getattr(r, name) for r in results], dtype=float).reshape(-1, 3)
    out["valid"] = np.array([r.valid for r in results], dtype=bool)
    return out
