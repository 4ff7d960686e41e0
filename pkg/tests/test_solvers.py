import numpy as np
import pytest

from galilean_elastica.catalog import elastic_problems, make_cylinder
from galilean_elastica.errors import NoConvergence
from galilean_elastica.solvers import SolverOptions, solve, solve_complete, solve_incomplete
from galilean_elastica.variational import (VariationalProblem, boundary_terms_U1,
                                           boundary_terms_U2)


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        SolverOptions(method="simplex")


def test_kind_mismatch_rejected():
    p = elastic_problems("complete")["cylinder_clamped"]
    with pytest.raises(ValueError):
        solve_incomplete(p)


def test_shooting_and_collocation_agree():
    p = elastic_problems("complete")["cylinder_clamped"]
    a = solve_complete(p)
    b = solve_complete(p, method="collocation")
    assert a.method == "shooting" and b.method == "collocation"
    assert b.K == pytest.approx(a.K, rel=1e-8)
    for s in (a, b):
        assert s.el_residual["max"] < 1e-6
        assert s.boundary_residual["max"] < 1e-6
        assert s.constraint_error < 1e-8


def test_clamped_start_is_respected():
    p = elastic_problems("complete")["helical_i_clamped"]
    s = solve(p)
    np.testing.assert_allclose(s.curve.u[0], [0.0, 0.3], atol=1e-12)
    assert s.curve.du[0, 0] == pytest.approx(0.4, abs=1e-10)
    assert s.K > 1e-3        # the clamped direction forces bending


def test_free_branches_tie_under_reversal():
    p = VariationalProblem(make_cylinder(2.0).chart, "incomplete", 1.0)
    s = solve(p, both_branches=True)
    e_plus, e_minus = s.diagnostics["branch_energies"]
    assert abs(e_plus - e_minus) < 1e-12
    assert s.diagnostics["sign"] == 1


def test_missing_minimizer_reports_no_convergence():
    p = elastic_problems("incomplete")["helical_p_clamped"]
    with pytest.raises(NoConvergence) as info:
        solve(p)
    best = info.value.best
    assert best is not None and best.el_residual["max"] > 1e-6
    relaxed = solve(p, raise_on_failure=False)
    assert relaxed.el_residual["max"] == pytest.approx(best.el_residual["max"])


def test_both_boundary_branches_vanish_on_a_free_end():
    # X = (p, 1) on the isotropic helical surface, so both branches are regular
    p = elastic_problems("complete")["helical_i_clamped"]
    s = solve(p)
    lam = s.lam[-1]
    f1 = boundary_terms_U1(p.chart, s.curve, lam, 1.0)
    f2 = boundary_terms_U2(p.chart, s.curve, lam, 1.0)
    assert np.max(np.abs(f1)) < 1e-6 and np.max(np.abs(f2)) < 1e-6


def test_energy_ordering():
    for name, p in elastic_problems("complete").items():
        if name in ("cylinder_clamped", "helical_i_clamped"):
            s = solve(p)
            assert s.K >= s.Kn
