"""Per-point radius sweep of the explained-variance ratio and scale selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NoUsableScale
from .frames import MIN_FRAME_NEIGHBORS, RANK_TOL
from .geometry import Kernel, PointCloud, neighbors_within


TAU_SEARCH = ("beyond-eps", "full", "eps")
FALLBACKS = ("argmax", "smallest")


@dataclass(frozen=True)
class SweepConfig:
    gamma: float = 0.99
    grid_size: int = 40
    max_radius_factor: float = 0.2
    min_neighbors: int = 10
    tau_search: str = "beyond-eps"
    fallback: str = "argmax"

    def __post_init__(self):
        if self.tau_search not in TAU_SEARCH:
            raise InvalidArgument(f"tau_search must be one of {TAU_SEARCH}")
        if self.fallback not in FALLBACKS:
            raise InvalidArgument(f"fallback must be one of {FALLBACKS}")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidArgument(f"gamma must lie in (0, 1), got {self.gamma}")
        if int(self.grid_size) != self.grid_size or self.grid_size < 2:
            raise InvalidArgument(f"grid_size must be an integer >= 2, got {self.grid_size}")
        if not 0.0 < self.max_radius_factor <= 1.0:
            raise InvalidArgument(
                f"max_radius_factor must lie in (0, 1], got {self.max_radius_factor}")
        if int(self.min_neighbors) != self.min_neighbors or self.min_neighbors < 0:
            raise InvalidArgument("min_neighbors must be a non-negative integer")

    @property
    def required_neighbors(self) -> int:
        return max(MIN_FRAME_NEIGHBORS, int(self.min_neighbors))


@dataclass(frozen=True)
class VarianceProfile:
    radii: np.ndarray
    rho: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True)
class ScalePair:
    eps_pca: float
    tau: float
    fallback_used: bool = False


def radius_grid(delta: float, config: SweepConfig) -> np.ndarray:
    """Evenly spaced radii ``k * f * delta / G`` for ``k = 1..G``."""
    step = config.max_radius_factor * delta / config.grid_size
    return np.arange(1, config.grid_size + 1) * step


def profile_from_neighbors(offsets: np.ndarray, distances: np.ndarray, radii: np.ndarray,
                           config: SweepConfig, kernel: Kernel) -> VarianceProfile:
    """Explained-variance ratios for neighbors sorted by ascending distance.

    Every radius uses the prefix of neighbors strictly closer than it; the
    weighted matrices are zero-padded to a common height and decomposed in one
    batched SVD (zero rows leave singular values unchanged).
    """
    counts = np.searchsorted(distances, radii, side="left")
    valid = counts >= config.required_neighbors
    rho = np.full(len(radii), np.nan)
    if valid.any():
        sel = np.flatnonzero(valid)
        height = int(counts[sel].max())
        d = distances[:height]
        u = d[None, :] / radii[sel, None]
        w = np.where(np.arange(height)[None, :] < counts[sel, None], kernel(u), 0.0)
        b = offsets[None, :height, :] * np.sqrt(w)[:, :, None]
        sigma = np.linalg.svd(b, compute_uv=False)
        s2 = sigma**2
        good = (sigma[:, 1] >= RANK_TOL * sigma[:, 0]) & (sigma[:, 0] > 0.0)
        good &= w.sum(axis=1) > 0.0
        ratio = (s2[:, 0] + s2[:, 1]) / s2.sum(axis=1)
        rho[sel[good]] = np.clip(ratio[good], 0.0, 1.0)
        valid[sel[~good]] = False
    if not valid.any():
        raise NoUsableScale("no grid radius has a usable neighborhood")
    return VarianceProfile(radii=radii, rho=rho, valid=valid)


def variance_profile(cloud: PointCloud, p, config: SweepConfig, kernel: Kernel) -> VarianceProfile:
    if not cloud.delta > 0.0:
        raise NoUsableScale("data bound is zero")
    p = np.asarray(p, dtype=float).reshape(3)
    radii = radius_grid(cloud.delta, config)
    nb = neighbors_within(cloud, p, radii[-1])
    offsets = cloud.points[nb.indices] - p
    return profile_from_neighbors(offsets, nb.distances, radii, config, kernel)


def select_scales(profile: VarianceProfile, gamma: float, tau_search: str = "beyond-eps",
                  fallback: str = "argmax") -> ScalePair:
    """Pick ``eps_pca`` (largest radius with rho > gamma) and ``tau`` (argmin rho).

    When no radius clears ``gamma``, ``eps_pca`` falls back to the radius with
    the highest ratio (``fallback="argmax"``) or to the smallest valid radius
    (``"smallest"``), and the pair is flagged.

    ``tau_search`` restricts the argmin: ``"beyond-eps"`` searches radii
    >= eps_pca, ``"eps"`` radii <= eps_pca, ``"full"`` the whole grid.  On
    noiseless data the ratio falls with r, so ``"beyond-eps"`` and ``"full"``
    agree; on noisy data the smallest radii are noise dominated and
    ``"full"`` lands there instead of at the bending scale.  Ties go to the
    smallest radius.
    """
    if tau_search not in TAU_SEARCH:
        raise InvalidArgument(f"tau_search must be one of {TAU_SEARCH}")
    valid = np.flatnonzero(profile.valid)
    if len(valid) == 0:
        raise NoUsableScale("profile has no valid entry")
    rho = profile.rho[valid]
    radii = profile.radii[valid]
    above = np.flatnonzero(rho > gamma)
    if len(above):
        eps, used_fallback = radii[above[-1]], False
    elif fallback == "smallest":
        eps, used_fallback = radii[0], True
    else:
        eps, used_fallback = radii[int(np.argmax(rho))], True
    if tau_search == "beyond-eps":
        keep = radii >= eps
    elif tau_search == "eps":
        keep = radii <= eps
    else:
        keep = np.ones(len(radii), dtype=bool)
    tau = radii[keep][int(np.argmin(rho[keep]))]
    return ScalePair(eps_pca=float(eps), tau=float(tau), fallback_used=used_fallback)
