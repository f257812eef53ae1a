"""Accuracy metrics and the synthetic-surface benchmark driver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import CurvatureConfig, estimate_all, results_arrays
from .errors import EmptyInput, InvalidValue, ShapeMismatch, UndefinedCorrelation
from .geometry import build_cloud
from .scales import SweepConfig
from .surfaces import GroundTruth, Surface, add_noise, sample_surface

QUANTITIES = ("gauss", "mean", "mean_half")


def _vector(values, name="input") -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyInput(f"{name} is empty")
    if not np.isfinite(arr).all():
        raise InvalidValue(f"{name} contains non-finite values")
    return arr


def _pair(estimated, truth):
    a, b = _vector(estimated, "estimated"), _vector(truth, "truth")
    if a.shape != b.shape:
        raise ShapeMismatch(f"length mismatch: {a.size} vs {b.size}")
    return a, b


def rmse(estimated, truth) -> float:
    a, b = _pair(estimated, truth)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def _mean_abs_within(x: np.ndarray) -> float:
    """Mean of ``|x_i - x_j|`` over all ordered pairs, diagonal included."""
    s = np.sort(x)
    n = len(s)
    coef = 2.0 * np.arange(n) - (n - 1)
    return float(2.0 * np.dot(coef, s) / (n * n))


def _mean_abs_between(x: np.ndarray, y: np.ndarray) -> float:
    ys = np.sort(y)
    csum = np.concatenate([[0.0], np.cumsum(ys)])
    k = np.searchsorted(ys, x, side="right")
    below = x * k - csum[k]
    above = (csum[-1] - csum[k]) - x * (len(ys) - k)
    return float((below.sum() + above.sum()) / (len(x) * len(ys)))


def energy_distance(sample_a, sample_b) -> float:
    """Squared energy distance (V-statistic) between two 1-D samples.

    ``2 E|A - B| - E|A - A'| - E|B - B'|`` with all pair means taken over
    every ordered pair, clipped at zero.  Computed by sorting in
    O(n log n).
    """
    a, b = _vector(sample_a, "sample_a"), _vector(sample_b, "sample_b")
    d2 = 2.0 * _mean_abs_between(a, b) - _mean_abs_within(a) - _mean_abs_within(b)
    return max(d2, 0.0)


def pearson(estimated, truth) -> float:
    a, b = _pair(estimated, truth)
    if a.size < 2:
        raise UndefinedCorrelation("need at least two values")
    da, db = a - a.mean(), b - b.mean()
    sa, sb = np.sqrt(np.dot(da, da)), np.sqrt(np.dot(db, db))
    if sa == 0.0 or sb == 0.0:
        raise UndefinedCorrelation("correlation with a constant input is undefined")
    return float(np.clip(np.dot(da, db) / (sa * sb), -1.0, 1.0))


@dataclass(frozen=True)
class MetricReport:
    surface: str
    noise_sigma: float
    quantity: str
    rmse: float
    energy_distance: float
    pearson: float
    n_valid: int
    n_total: int
    seed: int | None = None


def comparison_pairs(truth: GroundTruth, estimates: dict) -> dict:
    """Estimated/true value pairs per quantity over the valid points.

    Mean curvature depends on the normal orientation.  Estimates are first
    re-expressed with the normal turned to agree with the true outward
    normal, then negated: the estimator counts bending towards the normal as
    positive, the ground truth counts bending away from it.  ``mean`` is the
    estimator's ``k1 + k2``, ``mean_half`` the conventional ``(k1 + k2) / 2``.
    """
    valid = estimates["valid"]
    side = np.einsum("ij,ij->i", estimates["normal"][valid], truth.normal[valid])
    orient = np.where(side < 0.0, -1.0, 1.0)
    mean_sum = -orient * estimates["mean"][valid]
    return {
        "gauss": (estimates["gauss"][valid], truth.gauss[valid]),
        "mean": (mean_sum, truth.mean[valid]),
        "mean_half": (0.5 * mean_sum, truth.mean[valid]),
    }


def aligned_directions(truth: GroundTruth, estimates: dict):
    """Principal directions re-labelled for the true normal orientation.

    Flipping the normal negates every directional curvature, which swaps the
    roles of the first and second principal direction.
    """
    valid = estimates["valid"]
    side = np.einsum("ij,ij->i", estimates["normal"][valid], truth.normal[valid])
    flip = (side < 0.0)[:, None]
    d1, d2 = estimates["d1"][valid], estimates["d2"][valid]
    return np.where(flip, d2, d1), np.where(flip, d1, d2)


def report(surface: str, sigma: float, quantity: str, est, true, n_total: int,
           seed: int | None = None) -> MetricReport:
    n_valid = len(est)
    r = e = c = math.nan
    if n_valid:
        r, e = rmse(est, true), energy_distance(est, true)
        try:
            c = pearson(est, true)
        except UndefinedCorrelation:
            pass
    return MetricReport(surface=surface, noise_sigma=float(sigma), quantity=quantity, rmse=r,
                        energy_distance=e, pearson=c, n_valid=n_valid, n_total=n_total,
                        seed=seed)


@dataclass
class BenchmarkJob:
    surface: Surface
    sigma: float
    seed: int
    truth: GroundTruth
    estimates: dict
    reports: list = field(default_factory=list)


def run_job(surface: Surface, n: int, sigma: float, seed: int,
            sweep: SweepConfig | None = None, config: CurvatureConfig | None = None,
            workers: int | None = 1, mode: str = "area") -> BenchmarkJob:
    """Sample, corrupt, estimate and score one (surface, noise, seed) combination.

    The clean sample depends on ``seed`` only, so every noise level of a seed
    perturbs the same points.
    """
    truth = add_noise(sample_surface(surface, n, seed, mode=mode), sigma, seed)
    cloud = build_cloud(truth.noisy_position)
    estimates = results_arrays(estimate_all(cloud, sweep, config, workers=workers))
    job = BenchmarkJob(surface=surface, sigma=float(sigma), seed=seed, truth=truth,
                       estimates=estimates)
    for quantity, (est, true) in comparison_pairs(truth, estimates).items():
        job.reports.append(report(surface.kind, sigma, quantity, est, true, len(truth), seed))
    return job


def run_benchmark(surface: Surface, n: int, noise_levels, seeds,
                  sweep: SweepConfig | None = None, config: CurvatureConfig | None = None,
                  workers: int | None = 1, mode: str = "area") -> list[MetricReport]:
    reports = []
    for sigma in noise_levels:
        for seed in seeds:
            reports.extend(run_job(surface, n, sigma, seed, sweep, config, workers, mode).reports)
    return reports


@dataclass(frozen=True)
class SummaryRow:
    surface: str
    noise_sigma: float
    quantity: str
    rmse: float
    rmse_spread: float
    energy_distance: float
    energy_spread: float
    pearson: float
    pearson_spread: float
    n_seeds: int


def _mean_spread(values):
    vals = np.array([v for v in values if not math.isnan(v)])
    if len(vals) == 0:
        return math.nan, math.nan
    spread = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
    return float(vals.mean()), spread


def summarize(reports: list[MetricReport]) -> list[SummaryRow]:
    """Seed-averaged metrics; spread is the sample standard deviation across seeds."""
    groups: dict = {}
    for r in reports:
        groups.setdefault((r.surface, r.noise_sigma, r.quantity), []).append(r)
    rows = []
    for (surface, sigma, quantity), group in groups.items():
        rm, rs = _mean_spread(r.rmse for r in group)
        em, es = _mean_spread(r.energy_distance for r in group)
        pm, ps = _mean_spread(r.pearson for r in group)
        rows.append(SummaryRow(surface, sigma, quantity, rm, rs, em, es, pm, ps, len(group)))
    return rows


def better_mean_convention(rows: list[SummaryRow], surface: str, sigma: float) -> str:
    """The mean-curvature convention with the lower seed-averaged RMSE."""
    by_q = {r.quantity: r for r in rows if r.surface == surface and r.noise_sigma == sigma}
    candidates = [q for q in ("mean", "mean_half") if q in by_q]
    return min(candidates, key=lambda q: (math.isnan(by_q[q].rmse), by_q[q].rmse))
