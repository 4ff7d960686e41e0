import numpy as np
import pytest

from galilean_elastica.curves import (ParametricCurve, curvature_arclength,
                                      curvature_torsion_general, frenet_frame, frenet_residuals,
                                      graph_curve, torsion_arclength)
from galilean_elastica.errors import CurvatureVanishes, DegenerateJet, NotAdmissible
from galilean_elastica.galilean import GalileanIsometry, gdot


def twisted_cubic():
    return graph_curve(lambda x: x ** 2, lambda x: x ** 3, lambda x: 2 * x, lambda x: 3 * x ** 2,
                       lambda x: 2.0, lambda x: 6 * x, lambda x: 0.0, lambda x: 6.0)


def helix(a=2.0, b=0.5):
    return graph_curve(lambda x: a * np.cos(x), lambda x: a * np.sin(x),
                       lambda x: -a * np.sin(x), lambda x: a * np.cos(x),
                       lambda x: -a * np.cos(x), lambda x: -a * np.sin(x),
                       lambda x: a * np.sin(x), lambda x: -a * np.cos(x))


def test_twisted_cubic_torsion_at_origin():
    c = twisted_cubic()
    assert curvature_arclength(c, 0.0) == pytest.approx(2.0, abs=1e-14)
    assert torsion_arclength(c, 0.0) == pytest.approx(3.0, abs=1e-12)


def test_twisted_cubic_closed_forms():
    # kappa = sqrt(4 + 36 x^2), tau = 12 / (4 + 36 x^2)
    c = twisted_cubic()
    for x in (-0.8, 0.3, 1.1):
        assert curvature_arclength(c, x) == pytest.approx(np.sqrt(4 + 36 * x * x), rel=1e-13)
        assert torsion_arclength(c, x) == pytest.approx(12 / (4 + 36 * x * x), rel=1e-12)


def test_helix_constant_invariants():
    c = helix(2.0)
    for x in np.linspace(0, 3, 5):
        assert curvature_arclength(c, x) == pytest.approx(2.0)
        assert torsion_arclength(c, x) == pytest.approx(1.0)


def test_frame_orthonormal_in_yz():
    f = frenet_frame(twisted_cubic(), 0.7)
    assert f.T[0] == 1.0
    assert f.N[0] == 0.0 and f.B[0] == 0.0
    assert gdot(f.N, f.N) == pytest.approx(1.0)
    assert gdot(f.B, f.B) == pytest.approx(1.0)
    assert gdot(f.N, f.B) == pytest.approx(0.0, abs=1e-15)


def test_frenet_residuals_decay_quadratically():
    c = twisted_cubic()
    coarse = np.array(frenet_residuals(c, 0.4, 1e-2))
    fine = np.array(frenet_residuals(c, 0.4, 5e-3))
    big = coarse > 1e-10
    assert big.any()
    np.testing.assert_allclose(coarse[big] / fine[big], 4.0, rtol=0.02)


def test_invariants_under_isometries():
    rng = np.random.default_rng(2)
    c = twisted_cubic()
    for _ in range(5):
        m = GalileanIsometry.random(rng)
        cm = c.transformed(m)
        x = rng.uniform(-1, 1)
        # isometries shift the absolute coordinate, so compare general-parameter values
        k0, t0 = curvature_torsion_general(c, x)
        k1, t1 = curvature_torsion_general(cm, x)
        assert k1 == pytest.approx(k0, rel=1e-12)
        assert t1 == pytest.approx(t0, rel=1e-10)


def test_general_parametrization_matches_arclength():
    c = twisted_cubic()
    r = c.reparametrize(lambda t: t ** 3 + t, lambda t: 3 * t ** 2 + 1, lambda t: 6 * t,
                        lambda t: 6.0)
    for t in (-0.5, 0.2, 0.6):
        k, tau = curvature_torsion_general(r, t)
        x = t ** 3 + t
        assert k == pytest.approx(curvature_arclength(c, x), rel=1e-12)
        assert tau == pytest.approx(torsion_arclength(c, x), rel=1e-10)


def test_finite_difference_jets_agree():
    c = twisted_cubic()
    fd = ParametricCurve(c.position)
    assert not fd.analytic
    for x in (0.0, 0.5):
        assert curvature_arclength(fd, x) == pytest.approx(curvature_arclength(c, x), rel=1e-7)
        assert torsion_arclength(fd, x) == pytest.approx(torsion_arclength(c, x), rel=1e-4)


def test_not_admissible():
    c = ParametricCurve(lambda x: np.array([2 * x, x, 0.0]),
                        lambda x: (np.array([2.0, 1, 0]), np.zeros(3), np.zeros(3)))
    with pytest.raises(NotAdmissible):
        curvature_arclength(c, 0.0)


def test_straight_line_has_no_torsion():
    line = graph_curve(lambda x: x, lambda x: 0.0, lambda x: 1.0, lambda x: 0.0,
                       lambda x: 0.0, lambda x: 0.0, lambda x: 0.0, lambda x: 0.0)
    with pytest.raises(CurvatureVanishes):
        torsion_arclength(line, 0.3)
    k, tau = curvature_torsion_general(line, 0.3)
    assert k == 0.0 and np.isnan(tau)


def test_stationary_point_rejected():
    c = ParametricCurve(lambda x: np.array([x ** 3, 0.0, 0.0]),
                        lambda x: (np.array([3 * x * x, 0, 0]), np.array([6 * x, 0, 0]),
                                   np.array([6.0, 0, 0])))
    with pytest.raises(DegenerateJet):
        curvature_torsion_general(c, 0.0)
