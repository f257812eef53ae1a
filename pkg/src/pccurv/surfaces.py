"""Benchmark surfaces with area-uniform samplers and closed-form curvature.

Ground-truth curvature convention: principal curvatures are the eigenvalues
of the differential of the unit normal field, with the normal pointing
outward (upward for the graph surfaces).  A sphere of radius R therefore has
Gaussian curvature ``1/R**2`` and mean curvature ``(k1 + k2) / 2 = +1/R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidArgument, InvalidCount, InvalidSurface

SAMPLING_MODES = ("area", "parameter")
_SAMPLE_STREAM = 0
_NOISE_STREAM = 1


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream]))


def _unit_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, 3))
    return g / np.linalg.norm(g, axis=1)[:, None]


def _rejection(rng, n, propose, accept_prob, batch=None):
    """Draw ``n`` proposals and keep each with probability ``accept_prob``."""
    out, have = [], 0
    batch = batch or max(64, 2 * n)
    while have < n:
        cand = propose(batch)
        keep = rng.random(batch) < accept_prob(cand)
        cand = cand[keep]
        out.append(cand)
        have += len(cand)
    return np.concatenate(out)[:n]


class Surface:
    """Base class: a parameterized surface ``X(s, t)`` with closed-form curvature."""

    kind = ""

    def position(self, params: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def curvature(self, params: np.ndarray):
        """Return ``(gauss, mean, outward_normal)`` at the given parameters."""
        raise NotImplementedError

    def implicit(self, points: np.ndarray) -> np.ndarray:
        """Residual of the surface equation; zero on the surface."""
        raise NotImplementedError

    def sample_params(self, rng, n: int, mode: str) -> np.ndarray:
        raise NotImplementedError

    def in_domain(self, params: np.ndarray) -> np.ndarray:
        return np.isfinite(params).all(axis=1)

    def label(self) -> str:
        fields = ",".join(f"{k}={v:g}" for k, v in self.__dict__.items())
        return f"{self.kind}({fields})"


@dataclass(frozen=True)
class Torus(Surface):
    """Parameters ``(u, v)``: ``u`` around the axis, ``v`` around the tube."""

    R: float = 2.0
    r: float = 1.0
    kind = "torus"

    def __post_init__(self):
        if not (self.R > self.r > 0.0):
            raise InvalidSurface(f"torus needs R > r > 0, got R={self.R}, r={self.r}")

    def position(self, params):
        u, v = params[:, 0], params[:, 1]
        rho = self.R + self.r * np.cos(v)
        return np.column_stack([rho * np.cos(u), rho * np.sin(u), self.r * np.sin(v)])

    def curvature(self, params):
        u, v = params[:, 0], params[:, 1]
        cv = np.cos(v)
        rho = self.R + self.r * cv
        gauss = cv / (self.r * rho)
        mean = (self.R + 2.0 * self.r * cv) / (2.0 * self.r * rho)
        normal = np.column_stack([cv * np.cos(u), cv * np.sin(u), np.sin(v)])
        return gauss, mean, normal

    def implicit(self, points):
        x, y, z = points.T
        return (np.hypot(x, y) - self.R) ** 2 + z**2 - self.r**2

    def sample_params(self, rng, n, mode):
        if mode == "parameter":
            return rng.uniform(0.0, 2.0 * math.pi, (n, 2))
        v = _rejection(
            rng, n,
            lambda k: rng.uniform(0.0, 2.0 * math.pi, k),
            lambda v: (self.R + self.r * np.cos(v)) / (self.R + self.r),
        )
        u = rng.uniform(0.0, 2.0 * math.pi, n)
        return np.column_stack([u, v])


@dataclass(frozen=True)
class Ellipsoid(Surface):
    """Parameters ``(theta, phi)``: polar and azimuthal angle."""

    a: float = 3.0
    b: float = 2.0
    c: float = 1.0
    kind = "ellipsoid"

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0.0:
            raise InvalidSurface("ellipsoid semi-axes must be positive")

    def position(self, params):
        th, ph = params[:, 0], params[:, 1]
        st = np.sin(th)
        return np.column_stack([self.a * st * np.cos(ph), self.b * st * np.sin(ph),
                                self.c * np.cos(th)])

    def curvature(self, params):
        x, y, z = self.position(params).T
        a2, b2, c2 = self.a**2, self.b**2, self.c**2
        grad = np.column_stack([x / a2, y / b2, z / c2])
        q = np.einsum("ij,ij->i", grad, grad)
        gauss = 1.0 / (a2 * b2 * c2 * q**2)
        mean = (a2 + b2 + c2 - x * x - y * y - z * z) / (2.0 * a2 * b2 * c2 * q**1.5)
        return gauss, mean, grad / np.sqrt(q)[:, None]

    def implicit(self, points):
        x, y, z = points.T
        return (x / self.a) ** 2 + (y / self.b) ** 2 + (z / self.c) ** 2 - 1.0

    def in_domain(self, params):
        return super().in_domain(params) & (params[:, 0] >= 0.0) & (params[:, 0] <= math.pi)

    def sample_params(self, rng, n, mode):
        if mode == "parameter":
            return np.column_stack([rng.uniform(0.0, math.pi, n),
                                    rng.uniform(0.0, 2.0 * math.pi, n)])
        a, b, c = self.a, self.b, self.c
        # area element of the map unit sphere -> ellipsoid
        s = _rejection(
            rng, n,
            lambda k: _unit_sphere(rng, k),
            lambda s: np.sqrt((b * c * s[:, 0]) ** 2 + (a * c * s[:, 1]) ** 2
                              + (a * b * s[:, 2]) ** 2) / max(a * b, b * c, a * c),
        )
        return np.column_stack([np.arccos(np.clip(s[:, 2], -1.0, 1.0)),
                                np.arctan2(s[:, 1], s[:, 0])])


@dataclass(frozen=True)
class Sphere(Surface):
    """Parameters ``(theta, phi)``: polar and azimuthal angle."""

    R: float = 1.0
    kind = "sphere"

    def __post_init__(self):
        if self.R <= 0.0:
            raise InvalidSurface("sphere radius must be positive")

    def position(self, params):
        th, ph = params[:, 0], params[:, 1]
        st = np.sin(th)
        return self.R * np.column_stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)])

    def curvature(self, params):
        normal = self.position(params) / self.R
        n = len(params)
        return np.full(n, 1.0 / self.R**2), np.full(n, 1.0 / self.R), normal

    def implicit(self, points):
        return np.einsum("ij,ij->i", points, points) - self.R**2

    def in_domain(self, params):
        return super().in_domain(params) & (params[:, 0] >= 0.0) & (params[:, 0] <= math.pi)

    def sample_params(self, rng, n, mode):
        if mode == "parameter":
            return np.column_stack([rng.uniform(0.0, math.pi, n),
                                    rng.uniform(0.0, 2.0 * math.pi, n)])
        s = _unit_sphere(rng, n)
        return np.column_stack([np.arccos(np.clip(s[:, 2], -1.0, 1.0)),
                                np.arctan2(s[:, 1], s[:, 0])])


class _Graph(Surface):
    """Graph surface ``z = f(x, y)`` over ``[-extent, extent]**2``, upward normal."""

    extent: float

    def derivatives(self, x, y):
        """Return ``(f, fx, fy, fxx, fxy, fyy)``."""
        raise NotImplementedError

    def position(self, params):
        x, y = params[:, 0], params[:, 1]
        return np.column_stack([x, y, self.derivatives(x, y)[0]])

    def curvature(self, params):
        x, y = params[:, 0], params[:, 1]
        _, fx, fy, fxx, fxy, fyy = self.derivatives(x, y)
        w2 = 1.0 + fx * fx + fy * fy
        w = np.sqrt(w2)
        gauss = (fxx * fyy - fxy * fxy) / (w2 * w2)
        # the differential of the upward normal is minus the Hessian term
        mean = -((1.0 + fy * fy) * fxx - 2.0 * fx * fy * fxy + (1.0 + fx * fx) * fyy) / (2.0 * w2 * w)
        normal = np.column_stack([-fx, -fy, np.ones_like(x)]) / w[:, None]
        return gauss, mean, normal

    def implicit(self, points):
        x, y, z = points.T
        return z - self.derivatives(x, y)[0]

    def in_domain(self, params):
        return super().in_domain(params) & (np.abs(params) <= self.extent).all(axis=1)

    def _area_factor(self, p):
        _, fx, fy, *_ = self.derivatives(p[:, 0], p[:, 1])
        return np.sqrt(1.0 + fx * fx + fy * fy)

    def sample_params(self, rng, n, mode):
        e = self.extent

        def propose(k):
            return rng.uniform(-e, e, (k, 2))

        if mode == "parameter":
            return propose(n)
        corners = np.array([[e, e], [e, -e], [-e, e], [-e, -e], [e, 0], [0, e], [-e, 0], [0, -e]])
        wmax = self._area_factor(corners).max()
        return _rejection(rng, n, propose, lambda p: self._area_factor(p) / wmax)


@dataclass(frozen=True)
class HyperbolicParaboloid(_Graph):
    """Saddle ``z = x**2 / a**2 - y**2 / b**2``."""

    a: float = 1.0
    b: float = 1.0
    extent: float = 1.0
    kind = "saddle"

    def __post_init__(self):
        if min(self.a, self.b, self.extent) <= 0.0:
            raise InvalidSurface("saddle parameters must be positive")

    def derivatives(self, x, y):
        ia, ib = 1.0 / self.a**2, 1.0 / self.b**2
        f = x * x * ia - y * y * ib
        zero = np.zeros_like(x)
        return f, 2.0 * x * ia, -2.0 * y * ib, zero + 2.0 * ia, zero, zero - 2.0 * ib


@dataclass(frozen=True)
class Plane(_Graph):
    extent: float = 1.0
    kind = "plane"

    def __post_init__(self):
        if self.extent <= 0.0:
            raise InvalidSurface("plane extent must be positive")

    def derivatives(self, x, y):
        zero = np.zeros_like(x)
        return zero, zero, zero, zero, zero, zero


SURFACES = {
    "torus": Torus,
    "ellipsoid": Ellipsoid,
    "saddle": HyperbolicParaboloid,
    "hyperbolic_paraboloid": HyperbolicParaboloid,
    "sphere": Sphere,
    "plane": Plane,
}


def parse_surface(text: str) -> Surface:
    """Parse ``"torus"`` or ``"torus:R=2,r=1"`` into a surface."""
    name, _, rest = text.strip().partition(":")
    cls = SURFACES.get(name.strip().lower())
    if cls is None:
        raise InvalidSurface(f"unknown surface {name!r}; choose from {sorted(SURFACES)}")
    kwargs = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidSurface(f"expected key=value in surface description, got {item!r}")
        try:
            kwargs[key.strip()] = float(value)
        except ValueError:
            raise InvalidSurface(f"non-numeric surface parameter {item!r}") from None
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise InvalidSurface(str(exc)) from None


def surface_to_string(surface: Surface) -> str:
    fields = ",".join(f"{k}={v!r}" for k, v in surface.__dict__.items())
    return f"{surface.kind}:{fields}"


@dataclass(frozen=True)
class GroundTruth:
    """Samples of a surface, one row per point.

    ``gauss``, ``mean`` and ``normal`` belong to the clean ``position``;
    ``noisy_position`` is what an estimator gets to see.
    """

    surface: Surface
    params: np.ndarray
    position: np.ndarray
    gauss: np.ndarray
    mean: np.ndarray
    normal: np.ndarray
    noisy_position: np.ndarray = field(default=None)
    sigma: float = 0.0

    def __post_init__(self):
        if self.noisy_position is None:
            object.__setattr__(self, "noisy_position", self.position.copy())

    def __len__(self):
        return len(self.position)


def analytic_curvature(surface: Surface, params):
    params = np.atleast_2d(np.asarray(params, dtype=float))
    if params.shape[1] != 2:
        raise InvalidArgument("surface parameters must be pairs")
    if not surface.in_domain(params).all():
        raise InvalidArgument(f"parameters outside the domain of {surface.label()}")
    return surface.curvature(params)


def sample_surface(surface: Surface, n: int, seed: int = 0, mode: str = "area") -> GroundTruth:
    """Draw ``n`` points, area-uniform by default.

    ``mode="parameter"`` samples uniformly in the parameter box instead.
    """
    if not isinstance(surface, Surface):
        raise InvalidSurface(f"not a surface: {surface!r}")
    if int(n) != n or n <= 0:
        raise InvalidCount(f"sample count must be a positive integer, got {n}")
    if mode not in SAMPLING_MODES:
        raise InvalidArgument(f"sampling mode must be one of {SAMPLING_MODES}")
    params = surface.sample_params(_rng(seed, _SAMPLE_STREAM), int(n), mode)
    gauss, mean, normal = analytic_curvature(surface, params)
    return GroundTruth(surface=surface, params=params, position=surface.position(params),
                       gauss=gauss, mean=mean, normal=normal)


def add_noise(points, sigma: float, seed: int = 0):
    """Isotropic Gaussian corruption with per-coordinate standard deviation ``sigma``.

    Accepts a ``GroundTruth`` (returns a copy with ``noisy_position`` set from
    the clean positions) or a plain ``(n, 3)`` array.
    """
    if not sigma >= 0.0:
        raise InvalidArgument(f"noise sigma must be >= 0, got {sigma}")
    clean = points.position if isinstance(points, GroundTruth) else np.asarray(points, float)
    if sigma == 0.0:
        noisy = clean.copy()
    else:
        noisy = clean + sigma * _rng(seed, _NOISE_STREAM).standard_normal(clean.shape)
    if isinstance(points, GroundTruth):
        return replace(points, noisy_position=noisy, sigma=float(sigma))
    return noisy
