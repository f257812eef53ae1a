import math

import numpy as np
import pytest
from scipy import stats

from pccurv.errors import InvalidArgument, InvalidCount, InvalidSurface
from pccurv.surfaces import (
    Ellipsoid,
    HyperbolicParaboloid,
    Plane,
    Sphere,
    Torus,
    add_noise,
    analytic_curvature,
    parse_surface,
    sample_surface,
    surface_to_string,
)

from oracles import fd_shape_operator

ALL = [Torus(), Torus(R=3, r=0.5), Ellipsoid(), Ellipsoid(1, 2, 3), Sphere(), Sphere(2.5),
       HyperbolicParaboloid(), HyperbolicParaboloid(1.5, 0.7, 2), Plane()]


@pytest.mark.parametrize("surface", ALL, ids=lambda s: s.label())
def test_samples_lie_on_surface(surface):
    gt = sample_surface(surface, 2000, seed=1)
    assert np.abs(surface.implicit(gt.position)).max() < 1e-10
    assert np.allclose(np.linalg.norm(gt.normal, axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("surface", ALL, ids=lambda s: s.label())
def test_closed_forms_match_finite_differences(surface):
    params = sample_surface(surface, 1000, seed=7).params
    if isinstance(surface, (Sphere, Ellipsoid)):
        # the angular chart is singular at the poles
        params = params[(params[:, 0] > 0.01) & (params[:, 0] < math.pi - 0.01)]
    gauss, mean, normal = analytic_curvature(surface, params)
    fd_gauss, fd_mean, fd_normal = fd_shape_operator(surface, params)
    assert np.abs(gauss - fd_gauss).max() < 1e-6
    assert np.abs(mean - fd_mean).max() < 1e-6
    assert np.abs(normal - fd_normal).max() < 1e-6


def test_sphere_constants():
    gt = sample_surface(Sphere(), 50, seed=0)
    assert np.all(gt.gauss == 1.0) and np.all(gt.mean == 1.0)
    g, m, _ = analytic_curvature(Sphere(2.0), [[0.3, 1.0]])
    assert g[0] == 0.25 and m[0] == 0.5


def test_torus_closed_form_values():
    g, m, n = analytic_curvature(Torus(), [[0.0, 0.0], [0.0, math.pi]])
    assert g[0] == pytest.approx(1 / 3) and g[1] == pytest.approx(-1.0)


def test_saddle_origin():
    g, m, n = analytic_curvature(HyperbolicParaboloid(), [[0.0, 0.0]])
    assert g[0] == -4.0 and m[0] == 0.0
    assert np.array_equal(n[0], [0, 0, 1])


def test_ellipsoid_pole():
    a, b, c = 3.0, 2.0, 1.0
    g, m, n = analytic_curvature(Ellipsoid(a, b, c), [[0.0, 0.0]])
    assert g[0] == pytest.approx(c**2 / (a**2 * b**2), rel=1e-14)
    assert np.allclose(n[0], [0, 0, 1])


def test_plane_is_flat():
    g, m, n = analytic_curvature(Plane(), [[0.2, -0.4]])
    assert (g[0], m[0]) == (0.0, 0.0)
    assert np.array_equal(n[0], [0, 0, 1])


def test_out_of_domain():
    with pytest.raises(InvalidArgument):
        analytic_curvature(HyperbolicParaboloid(), [[2.0, 0.0]])
    with pytest.raises(InvalidArgument):
        analytic_curvature(Sphere(), [[4.0, 0.0]])


def test_torus_tube_angle_is_area_weighted():
    surf = Torus()
    v = sample_surface(surf, 100000, seed=11).params[:, 1] % (2 * math.pi)

    def cdf(x):
        return (x + surf.r / surf.R * np.sin(x)) / (2 * math.pi)

    assert stats.kstest(v, cdf).pvalue > 0.01


def test_saddle_is_area_weighted():
    surf = HyperbolicParaboloid()
    p = sample_surface(surf, 100000, seed=3).params
    # the area element grows away from the origin
    inner = (np.abs(p) < 0.5).all(axis=1).mean()
    uniform = sample_surface(surf, 100000, seed=3, mode="parameter").params
    assert inner < (np.abs(uniform) < 0.5).all(axis=1).mean() - 0.02


def test_sampling_is_deterministic():
    a = sample_surface(Ellipsoid(), 300, seed=9)
    b = sample_surface(Ellipsoid(), 300, seed=9)
    c = sample_surface(Ellipsoid(), 300, seed=10)
    assert np.array_equal(a.position, b.position)
    assert not np.array_equal(a.position, c.position)


def test_noise_model():
    gt = sample_surface(Torus(), 5000, seed=0)
    assert np.array_equal(add_noise(gt, 0.0, 1).noisy_position, gt.position)
    noisy = add_noise(gt, 0.1, seed=1)
    assert np.array_equal(noisy.gauss, gt.gauss)
    sd = (noisy.noisy_position - gt.position).std(axis=0)
    assert np.all(np.abs(sd / 0.1 - 1) < 0.03)
    assert np.array_equal(noisy.noisy_position, add_noise(gt, 0.1, seed=1).noisy_position)


def test_noise_is_unbiased():
    n, sigma = 100000, 0.3
    disp = add_noise(np.zeros((n, 3)), sigma, seed=4)
    assert np.all(np.abs(disp.mean(axis=0)) < 3 * sigma / math.sqrt(n))


def test_errors():
    with pytest.raises(InvalidCount):
        sample_surface(Torus(), 0)
    with pytest.raises(InvalidSurface):
        Torus(R=1, r=2)
    with pytest.raises(InvalidSurface):
        sample_surface("torus", 10)
    with pytest.raises(InvalidArgument):
        add_noise(np.zeros((2, 3)), -1.0)
    with pytest.raises(InvalidSurface):
        parse_surface("cone")
    with pytest.raises(InvalidSurface):
        parse_surface("torus:R")
    with pytest.raises(InvalidSurface):
        parse_surface("torus:q=1")


def test_parse_round_trip():
    for surf in ALL:
        assert parse_surface(surface_to_string(surf)) == surf
    assert parse_surface("saddle") == HyperbolicParaboloid()
    assert parse_surface(" torus : R=3 , r=1 ") == Torus(3.0, 1.0)
