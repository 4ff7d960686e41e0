import numpy as np
import pytest
from scipy.integrate import quad

from galilean_elastica.catalog import make_cylinder, make_galilean_sphere, make_helical_isotropic
from galilean_elastica.errors import SingularU2
from galilean_elastica.lagrangian import lagrangian_for
from galilean_elastica.surfaces import CurveOnSurface
from galilean_elastica.variational import (ElasticSolution, Start, VariationalProblem,
                                           boundary_terms, el_residual, energy_K, energy_Kn,
                                           is_geodesic, solve_du1, solve_du2, start_velocity)

R = 2.0


def cylinder_curve(v_jets, n=201):
    """``u = x`` on the cylinder, ``v`` given by its jets up to order 4."""
    def jet(x):
        rows = [[x, v_jets[0](x)], [1.0, v_jets[1](x)]] + [[0.0, f(x)] for f in v_jets[2:]]
        return np.array(rows, float)
    return CurveOnSurface.from_function(jet, np.linspace(0, 1, n))


GENERATOR = [lambda x: 0.3, lambda x: 0.0, lambda x: 0.0, lambda x: 0.0, lambda x: 0.0]
WAVE = [np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x), np.sin]


def test_start_velocity_on_both_chart_types():
    cyl = make_cylinder(R).chart
    du, gi = start_velocity(cyl, Start(0.0, 0.1, du2=0.4, branch=-1))
    assert gi == 1 and du[0] == -1.0
    sph = make_galilean_sphere(1).chart
    du, gi = start_velocity(sph, Start(0.0, 0.1, du1=0.6))
    assert gi == 0 and du[1] == pytest.approx(0.8)
    lag = lagrangian_for(sph)
    assert float(lag.g(np.zeros(2), du)) == pytest.approx(1.0)


def test_helical_isotropic_constraint_solve():
    chart = make_helical_isotropic(1.5).chart
    u = np.array([0.2, 0.4])
    du1 = solve_du1(chart, u, 0.3)
    assert 1.5 * du1 + 0.3 == pytest.approx(1.0)
    du2 = solve_du2(chart, u, 0.1, branch=-1)
    assert 1.5 * 0.1 + du2 == pytest.approx(-1.0)


def test_cylinder_u2_branch_is_singular():
    with pytest.raises(SingularU2):
        solve_du2(make_cylinder(R).chart, np.zeros(2), 1.0)


def test_start_needs_exactly_one_component():
    with pytest.raises(ValueError):
        start_velocity(make_cylinder(R).chart, Start(0.0, 0.0))


def test_energies_against_quadrature():
    chart = make_cylinder(R).chart
    c = cylinder_curve(WAVE)
    Kn = quad(lambda x: np.cos(x) ** 4 / R ** 2, 0, 1)[0]
    K = Kn + quad(lambda x: np.sin(x) ** 2, 0, 1)[0]
    assert energy_Kn(chart, c) == pytest.approx(Kn, rel=1e-9)
    assert energy_K(chart, c) == pytest.approx(K, rel=1e-9)


def test_generator_is_extremal_for_both_kinds():
    chart = make_cylinder(R).chart
    c = cylinder_curve(GENERATOR, n=21)
    for kind in ("incomplete", "complete"):
        res = el_residual(chart, c, 0.0, kind)
        assert max(res.max_norms().values()) < 1e-12
        branch, f = boundary_terms(chart, c, 0.0, 1.0, kind)
        assert branch == "U1"
        assert np.max(np.abs(f)) < 1e-12


def test_wave_is_not_extremal():
    chart = make_cylinder(R).chart
    c = cylinder_curve(WAVE, n=21)
    res = el_residual(chart, c, 0.0, "complete")
    assert res.max_norms()["r2"] > 1e-2


def test_complete_residual_needs_fourth_derivatives():
    chart = make_cylinder(R).chart
    c = CurveOnSurface.from_function(lambda x: np.array([[x, 0.0], [1.0, 0.0], [0.0, 0.0]]),
                                     np.linspace(0, 1, 5))
    with pytest.raises(ValueError):
        el_residual(chart, c, 0.0, "complete")


def test_is_geodesic_flag():
    chart = make_cylinder(R).chart
    problem = VariationalProblem(chart, "complete", 1.0)
    sol = lambda c: ElasticSolution(problem, c, np.zeros(len(c.x)), np.zeros(len(c.x)), 0.0, 0.0,
                                    {}, {}, "test")
    assert is_geodesic(sol(cylinder_curve(GENERATOR, n=11)))
    assert not is_geodesic(sol(cylinder_curve(WAVE, n=11)))


def test_problem_validation():
    chart = make_cylinder(R).chart
    with pytest.raises(ValueError):
        VariationalProblem(chart, "elastic", 1.0)
    with pytest.raises(ValueError):
        VariationalProblem(chart, "complete", 0.0)
