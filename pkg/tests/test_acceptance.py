"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line before asserting; the lines are
printed together at the end of the session (see ``conftest.py``) and when
this file is run as a script.
"""

import time

import numpy as np
import pytest

from galilean_elastica import catalog
from galilean_elastica.catalog import (cylinder_printed_system, default_catalog, elastic_problems,
                                       make_cylinder, make_plane, random_admissible_curve)
from galilean_elastica.curves import frenet_residuals, graph_curve, torsion_arclength
from galilean_elastica.discrete import el_gradient_check
from galilean_elastica.surfaces import (CurveOnSurface, darboux_along, integrate_geodesic,
                                        pythagoras_check)
from galilean_elastica.variational import VariationalProblem, is_geodesic
from galilean_elastica.solvers import solve_complete, solve_discrete, solve_incomplete

RESULTS = {}


def record(n, title, ok, detail):
    RESULTS[n] = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    return ok


def _entries(section):
    return [e for e in default_catalog() if e.section == section]


# ----------------------------------------------------------------------------


def test_01_catalog_coefficients():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    checks = [c for e in default_catalog() for c in catalog.verify_entry(e, rng, n_points=100)]
    elapsed = time.perf_counter() - t0
    failed = [c for c in checks if not c.passed and not c.quarantined]
    quarantined = [c for c in checks if c.quarantined]
    # only helical entries may be quarantined, and each needs an explanation
    stray = [c for c in quarantined
             if not (c.entry.startswith("helical") and c.note
                     and c.note != "unexplained disagreement")]
    worst = max(c.err_analytic for c in checks if c.passed)
    ok = not failed and not stray and elapsed < 5.0
    record(1, "catalog coefficients", ok,
           f"{len(checks)} checks, worst analytic {worst:.1e}, {len(quarantined)} quarantined "
           f"with notes, {len(failed)} failed, {elapsed:.2f} s")
    for c in quarantined:
        print(c.line())
    assert not failed, [c.line() for c in failed]
    assert not stray, [c.line() for c in stray]
    assert elapsed < 5.0


def test_02_darboux_closed_forms_kappa_g():
    """Printed geodesic curvature on the cylinder and on H_p along constrained curves."""
    rng = np.random.default_rng(12)
    errs = {}
    for entry in _entries("cylinder") + _entries("helical_euclidean"):
        worst = 0.0
        for _ in range(50):
            c = random_admissible_curve(entry, rng)
            d = darboux_along(entry.chart, c)
            printed = entry.curve_forms(c.u, c.du, c.ddu)["kappa_g"]
            generic = np.abs(d.kappa_g)
            worst = max(worst, float(np.max(np.abs(generic - printed)
                                            / np.maximum(1.0, np.abs(printed)))))
        errs[entry.name] = worst
    ok = max(errs.values()) < 1e-6
    record(2, "kappa_g closed forms", ok,
           "max rel err " + ", ".join(f"{k} {v:.1e}" for k, v in errs.items()))
    assert ok, errs


def test_03_pythagoras():
    rng = np.random.default_rng(13)
    worst = {}
    for entry in default_catalog():
        w = 0.0
        for _ in range(10):
            c = random_admissible_curve(entry, rng, n=11)
            w = max(w, max(pythagoras_check(entry.chart, c, x) for x in c.x))
        worst[entry.name] = w
    ok = max(worst.values()) < 1e-6
    record(3, "Pythagoras identity", ok,
           f"max |kappa^2 - kappa_g^2 - kappa_n^2| = {max(worst.values()):.1e} "
           f"over {len(worst)} surfaces")
    assert ok, worst


def _line_deviation(x, u):
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, u, rcond=None)
    return float(np.max(np.abs(A @ coef - u)))


def test_04_geodesics():
    rng = np.random.default_rng(14)
    plane = make_plane().chart
    dev_plane = 0.0
    for _ in range(5):
        th = rng.uniform(-np.pi, np.pi)
        c = integrate_geodesic(plane, rng.uniform(-1, 1, 2), [np.cos(th), np.sin(th)], 1.0,
                               h=1e-3)
        dev_plane = max(dev_plane, _line_deviation(c.x, c.u[:, 0]),
                        _line_deviation(c.x, c.u[:, 1]))
    dev_cyl = 0.0
    for R in (1.0, 2.0, 5.0):
        chart = make_cylinder(R).chart
        for _ in range(5):
            sign = rng.choice([-1.0, 1.0])
            u0 = rng.uniform(-1, 1, 2)
            c = integrate_geodesic(chart, u0, [sign, rng.uniform(-1, 1)], 1.0, h=1e-3)
            dev_cyl = max(dev_cyl, float(np.max(np.abs(c.u[:, 0] - (u0[0] + sign * c.x)))))
    ok = dev_plane < 1e-8 and dev_cyl < 1e-8
    record(4, "geodesic suite", ok,
           f"plane line deviation {dev_plane:.1e}, cylinder |u - (b +- x)| {dev_cyl:.1e}")
    assert ok


def test_05_incomplete_cylinder_vertical_generator():
    rng = np.random.default_rng(15)
    chart = make_cylinder(2.0).chart
    rows = []
    for _ in range(4):
        c = rng.uniform(-1, 1, (3, 2))

        def guess(x, c=c):
            return np.column_stack([c[0, 0] + c[1, 0] * x + c[2, 0] * x ** 2,
                                    c[0, 1] + c[1, 1] * x + c[2, 1] * x ** 2])

        t0 = time.perf_counter()
        sol = solve_incomplete(VariationalProblem(chart, "incomplete", 1.0, initial_guess=guess))
        dt = time.perf_counter() - t0
        rows.append((sol.Kn, float(np.max(np.abs(sol.lam))), is_geodesic(sol),
                     float(np.ptp(sol.curve.u[:, 1])), dt))
    Kn, lam, geo, spread, dt = (max(r[i] for r in rows) for i in (0, 1, 3, 3, 4))
    geo = all(r[2] for r in rows)
    # the energy is quartic in v', so the v spread is reported, not bounded
    ok = Kn < 1e-8 and lam < 1e-6 and geo and dt < 10.0
    record(5, "incomplete cylinder", ok,
           f"{len(rows)} random guesses: max Kn {Kn:.1e}, max |lambda| {lam:.1e}, "
           f"geodesic {geo}, v spread {spread:.1e}, slowest {dt:.1f} s")
    assert ok, rows


def test_06_complete_cylinder_system():
    R, b, v0 = 2.0, 0.3, -0.4

    def jet(x):
        x = np.asarray(x, float)
        out = np.zeros((5,) + x.shape + (2,))
        out[0, ..., 0], out[0, ..., 1] = b + x, v0
        out[1, ..., 0] = 1.0
        return out

    x = np.linspace(0, 1, 51)
    generator = CurveOnSurface(x, jet(x), jet)
    res = max(float(np.max(np.abs(r)))
              for kind in ("complete", "incomplete")
              for r in cylinder_printed_system(generator, 0.0, R, kind).values())
    sol = solve_complete(elastic_problems("complete")["cylinder_free"])
    ok = res < 1e-10 and sol.K < 1e-8
    record(6, "complete cylinder system", ok,
           f"printed residuals at the generator {res:.1e}, solve_complete K {sol.K:.1e}")
    assert ok


def test_07_zero_energy_plane_and_sphere():
    out = {}
    for kind in ("incomplete", "complete"):
        probs = elastic_problems(kind)
        for name in ("plane_clamped", "sphere_clamped"):
            for method in ("shooting", "discrete"):
                p = probs[name]
                sol = solve_discrete(p) if method == "discrete" else \
                    (solve_incomplete(p) if kind == "incomplete" else solve_complete(p))
                dev = max(_line_deviation(sol.x, sol.curve.u[:, 0]),
                          _line_deviation(sol.x, sol.curve.u[:, 1]))
                out[(kind, name, method)] = (sol.K, sol.Kn, dev)
    K = max(v[0] for v in out.values())
    Kn = max(v[1] for v in out.values())
    dev = max(v[2] for v in out.values())
    ok = K < 1e-8 and Kn < 1e-8 and dev < 1e-8
    record(7, "plane and sphere zero energy", ok,
           f"{len(out)} solves: max K {K:.1e}, max Kn {Kn:.1e}, line deviation {dev:.1e}")
    assert ok, out


def test_08_complete_vs_discrete():
    gaps = {}
    for name, p in elastic_problems("complete").items():
        a = solve_complete(p)
        d = solve_discrete(p, 256)
        gaps[name] = abs(a.K - d.K) / max(a.K, 1e-12)
    ok = max(gaps.values()) < 1e-3
    record(8, "oracle cross-validation", ok,
           "rel gaps " + ", ".join(f"{k} {v:.1e}" for k, v in gaps.items()))
    assert ok, gaps


def _perturbed_jet(rng, box):
    (a1, b1), (a2, b2) = box
    u0 = np.array([rng.uniform(a1, b1), rng.uniform(a2, b2)]) * 0.3
    d = rng.normal(size=2)
    A = rng.normal(scale=0.2, size=(3, 2))
    fr = rng.uniform(1, 3, 3)

    def jet(x):
        x = np.asarray(x, float)
        out = np.zeros((5,) + x.shape + (2,))
        out[0] = u0 + x[..., None] * d
        out[1] = d
        for j in range(3):
            for k in range(5):
                out[k] += A[j] * (fr[j] ** k * np.sin(fr[j] * x + k * np.pi / 2))[..., None]
        return out

    c = rng.normal(size=2)
    return jet, (lambda x: (c[0] + c[1] * x, c[1] + 0 * x))


def test_09_gradient_el_consistency():
    rng = np.random.default_rng(19)
    worst = 0.0
    n_checks = 0
    for entry in default_catalog():
        for kind in ("incomplete", "complete"):
            for _ in range(20):
                jet, lam = _perturbed_jet(rng, entry.sample_box)
                worst = max(worst, el_gradient_check(entry.chart, kind, jet, lam))
                n_checks += 1
    ok = worst < 1e-4
    record(9, "gradient vs Euler-Lagrange", ok,
           f"{n_checks} perturbed curves, max rel err {worst:.1e}")
    assert ok


def test_10_frenet_suite():
    y, z = np.sin, lambda x: np.exp(x / 2)
    smooth = graph_curve(y, z, np.cos, lambda x: np.exp(x / 2) / 2,
                         lambda x: -np.sin(x), lambda x: np.exp(x / 2) / 4,
                         lambda x: -np.cos(x), lambda x: np.exp(x / 2) / 8)
    ratios = []
    for x in (-0.5, 0.2, 0.9):
        coarse = np.array(frenet_residuals(smooth, x, 2e-3))
        fine = np.array(frenet_residuals(smooth, x, 1e-3))
        ratios += list(coarse / fine)
    cubic = graph_curve(lambda x: x ** 2, lambda x: x ** 3, lambda x: 2 * x,
                        lambda x: 3 * x ** 2, lambda x: 2.0, lambda x: 6 * x,
                        lambda x: 0.0, lambda x: 6.0)
    tau0 = torsion_arclength(cubic, 0.0)
    ok = all(3.5 <= r <= 4.5 for r in ratios) and abs(tau0 - 3.0) < 1e-10
    record(10, "Frenet suite", ok,
           f"step-halving ratios in [{min(ratios):.3f}, {max(ratios):.3f}], "
           f"tau(0) - 3 = {tau0 - 3:.1e}")
    assert ok, ratios


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
