import numpy as np
import pytest

from galilean_elastica.catalog import (default_catalog, make_cylinder, make_entry, make_plane,
                                       random_admissible_curve)
from galilean_elastica.errors import ConstraintViolated, DomainError, LeftDomain
from galilean_elastica.surfaces import (CurveOnSurface, SurfaceChart, christoffel, darboux_along,
                                        first_form, integrate_geodesic, pythagoras_check,
                                        second_form, unit_normal)


@pytest.mark.parametrize("entry", default_catalog(), ids=lambda e: e.name)
def test_fd_jets_match_analytic(entry):
    rng = np.random.default_rng(3)
    u1, u2 = entry.sample_points(rng, 20)
    a, f = entry.chart.evaluate(u1, u2), entry.chart.with_fd_jets().evaluate(u1, u2)
    np.testing.assert_allclose(f.g, a.g, atol=1e-7)
    np.testing.assert_allclose(f.L, a.L, atol=1e-5)
    np.testing.assert_allclose(f.gamma, a.gamma, atol=1e-4)


def test_cylinder_forms():
    chart = make_cylinder(2.0).chart
    g11, g12, g22, X1, X2 = first_form(chart, 0.3, 0.4)
    assert (g11, g12, g22, X1, X2) == (1.0, 0.0, 0.0, 1.0, 0.0)
    L11, L12, L22 = second_form(chart, 0.3, 0.4)
    assert L22 == pytest.approx(0.5)
    np.testing.assert_allclose(christoffel(chart, 0.3, 0.4), 0.0, atol=1e-15)
    n = unit_normal(chart, 0.0, 0.0)
    np.testing.assert_allclose(np.abs(n), [0.0, 1.0, 0.0], atol=1e-15)


def cylinder_curve(R, v):
    """Admissible curve ``u = x`` with ``v(x)`` given as a list of jets."""
    def jet(x):
        return np.array([[x, v[0](x)], [1.0, v[1](x)], [0.0, v[2](x)]])
    return CurveOnSurface.from_function(jet, np.linspace(0, 1, 21))


def test_cylinder_darboux_by_hand():
    R = 2.0
    c = cylinder_curve(R, [lambda x: np.sin(x), np.cos, lambda x: -np.sin(x)])
    d = darboux_along(make_cylinder(R).chart, c)
    np.testing.assert_allclose(d.kappa_n, np.cos(c.x) ** 2 / R, atol=1e-14)
    np.testing.assert_allclose(np.abs(d.kappa_g), np.abs(np.sin(c.x)), atol=1e-14)


def test_constraint_enforced():
    c = CurveOnSurface.from_function(lambda x: np.array([[2 * x, 0.0], [2.0, 0.0], [0.0, 0.0]]),
                                     np.linspace(0, 1, 5))
    with pytest.raises(ConstraintViolated):
        darboux_along(make_cylinder(1.0).chart, c)
    # tol=None skips the check
    darboux_along(make_cylinder(1.0).chart, c, tol=None)


@pytest.mark.parametrize("entry", default_catalog(), ids=lambda e: e.name)
def test_pythagoras_with_fd_jets(entry):
    rng = np.random.default_rng(4)
    c = random_admissible_curve(entry, rng, n=5)
    fd = entry.chart.with_fd_jets()
    assert max(pythagoras_check(fd, c, x) for x in c.x) < 1e-4


def test_geodesic_richardson_and_drift():
    entry = make_entry("helical_i", {})
    c = integrate_geodesic(entry.chart, [0.0, 0.3], [0.2, 1.0 - 0.2], 0.5)
    assert c.meta["richardson"] < 1e-10
    assert c.meta["max_kappa_g2"] < 1e-16
    assert c.meta["constraint_drift"] < 1e-10


def test_geodesic_start_outside_domain():
    chart = SurfaceChart(make_plane().chart.position, domain=((0, 1), (0, 1)), isotropic=True)
    with pytest.raises(DomainError):
        integrate_geodesic(chart, [2.0, 0.5], [1.0, 0.0], 1.0)


def test_geodesic_leaving_domain():
    chart = SurfaceChart(make_plane().chart.position, domain=((0, 1), (0, 1)), isotropic=True)
    with pytest.raises(LeftDomain):
        integrate_geodesic(chart, [0.5, 0.5], [1.0, 0.0], 1.0)


def test_geodesic_rejects_non_unit_start():
    with pytest.raises(ConstraintViolated):
        integrate_geodesic(make_plane().chart, [0.0, 0.0], [2.0, 0.0], 1.0)
