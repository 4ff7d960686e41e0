"""Solvers for the incomplete and complete elastic-line problems.

Three routes share one driver:

* ``"shooting"`` (default): multiple shooting over the normal form, falling
  back to collocation when Newton stalls or the normal form is singular;
* ``"collocation"``: Chebyshev collocation of the momentum system;
* ``"discrete"``: direct minimization of the discretized energy, an
  independent oracle whose Euler-Lagrange residuals are reported but not
  enforced.

Every returned :class:`ElasticSolution` carries its energies, the
Euler-Lagrange, boundary and constraint residuals, and the route taken.
"""

import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import make_interp_spline

from .collocation import polys_to_curve, solve_collocation, state_from_jets
from .discrete import DiscreteProblem, discrete_curve, minimize_discrete
from .errors import NoConvergence, SingularConstraint
from .lagrangian import lagrangian_for
from .shooting import initial_states, solve_shooting
from .surfaces import CONSTRAINT_TOL
from .variational import (SINGULAR_TOL, ElasticSolution, Multiplier, VariationalProblem,
                          boundary_terms, constraint_partials, el_residual, energy_K,
                          energy_Kn, preferred_branch, start_velocity)

METHODS = ("shooting", "collocation", "discrete")
TIE_TOL = 1e-12


@dataclass(frozen=True)
class SolverOptions:
    """Solver settings.

    ``tau_*`` are the acceptance tolerances on the Euler-Lagrange residual,
    the boundary residual and ``|g - 1|``.  On free problems the orientation
    branches ``+`` and ``-`` are exchanged by the reversal ``x -> length - x``,
    which preserves both energies, so the tie rule returns the ``+`` branch;
    ``both_branches=True`` also solves the ``-`` branch from the reversed guess
    as a check.
    """

    method: str = "shooting"
    tau_el: float = 1e-6
    tau_bc: float = 1e-6
    tau_con: float = CONSTRAINT_TOL
    segments: int = 8
    steps: int = 64
    nodes: int = 40
    n_segments: int = 256
    samples: int = 201
    both_branches: bool = False
    raise_on_failure: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")


def _options(opts, overrides):
    opts = opts or SolverOptions()
    return replace(opts, **overrides) if overrides else opts


# ----------------------------------------------------------------------------
# initial guesses


def _chart_center(chart):
    c = []
    for a, b in chart.domain:
        if np.isfinite(a) and np.isfinite(b):
            c.append(0.5 * (a + b))
        elif np.isfinite(a):
            c.append(a + 1.0)
        elif np.isfinite(b):
            c.append(b - 1.0)
        else:
            c.append(0.0)
    return np.array(c)


def _unit_direction(chart, u, d, sign):
    """``d`` scaled to ``g = 1`` and oriented by ``sign``."""
    lag = lagrangian_for(chart)
    g = float(lag.g(np.asarray(u, float), np.asarray(d, float)))
    if g <= SINGULAR_TOL:
        raise SingularConstraint(f"guess direction {d} has g = {g:.3g} at {u}")
    return sign * np.asarray(d, float) / np.sqrt(g)


def _admissible_guess(problem, spl, xs, start_data):
    """Spline of a curve obeying ``g = 1`` whose velocity tracks the guess.

    ``u' = P(u, w(x))`` is integrated, where ``w`` is the guess velocity
    and ``P`` picks the nearest admissible velocity: on non-isotropic charts
    the constraint reads ``X(u) . u' = sigma`` with the orientation
    ``sigma`` frozen at the start, so ``P`` adds the multiple of ``X`` that
    restores it; on isotropic charts ``P`` normalizes ``w``.  A guess that
    turns back in the absolute direction therefore cannot switch branch.
    """
    chart, lag = problem.chart, lagrangian_for(problem.chart)
    dspl = spl.derivative()
    if start_data is not None:
        u0, du0 = np.asarray(start_data[0], float), np.asarray(start_data[1], float)
    else:
        u0, du0 = spl(0.0), dspl(0.0)

    def X(u):
        return chart.evaluate(u[0], u[1]).X

    if chart.isotropic:
        def rhs(x, u):
            w = dspl(x)
            g = float(lag.g(u, w))
            if g <= SINGULAR_TOL:
                raise SingularConstraint(f"guess velocity vanishes at x={x:g}")
            return w / np.sqrt(g)
    else:
        Xa = X(u0)
        sigma = 1.0 if Xa @ du0 >= 0 else -1.0

        def rhs(x, u):
            w, Xu = dspl(x), X(u)
            n2 = Xu @ Xu
            if n2 <= SINGULAR_TOL:
                raise SingularConstraint(f"X vanishes along the guess at x={x:g}")
            return w + (sigma - Xu @ w) * Xu / n2

    sol = solve_ivp(rhs, (xs[0], xs[-1]), u0, t_eval=xs, rtol=1e-10, atol=1e-12)
    if not sol.success:
        raise SingularConstraint(f"guess projection failed: {sol.message}")
    return make_interp_spline(xs, sol.y.T, k=5)


def _guess_jets(problem, sign, start_data):
    """``jets(x) -> (u, du, d2u, d3u)`` for the initial guess."""
    if problem.initial_guess is not None:
        xs = np.linspace(0.0, problem.length, 257)
        samples = np.asarray(problem.initial_guess(xs), float)
        if sign < 0 and start_data is None:
            samples = samples[::-1]
        spl = make_interp_spline(xs, samples, k=5)
        try:
            spl = _admissible_guess(problem, spl, xs, start_data)
        except SingularConstraint:
            pass            # keep the raw guess; the solvers may still recover
        return lambda x: tuple(spl.derivative(k)(x) if k else spl(x) for k in range(4))
    if start_data is not None:
        u0, d, _ = start_data
    else:
        u0 = _chart_center(problem.chart)
        d = None
        for cand in ((0.6, 0.8), (1.0, 0.0), (0.0, 1.0), (0.8, -0.6)):
            try:
                d = _unit_direction(problem.chart, u0, cand, sign)
                break
            except SingularConstraint:
                continue
        if d is None:
            raise SingularConstraint(f"no admissible guess direction at {u0}")

    def jets(x):
        x = np.asarray(x, float)[:, None]
        z = np.zeros((len(x), 2))
        return u0 + x * d, np.broadcast_to(d, z.shape).copy(), z, z

    return jets


def _end_branches(problem, jets):
    out = []
    for x in (0.0, problem.length):
        u, du = (np.asarray(a)[0] for a in jets(np.array([x]))[:2])
        _, gd = constraint_partials(problem.chart, u, du)
        if max(abs(gd[0]), abs(gd[1])) <= SINGULAR_TOL:
            raise SingularConstraint(f"both constraint branches are singular at x={x}")
        out.append(preferred_branch(gd))
    return tuple(out)


# ----------------------------------------------------------------------------
# routes


def _run_shooting(problem, opts, jets, branches, start_data):
    lag = lagrangian_for(problem.chart)
    xs = np.linspace(0.0, problem.length, opts.segments + 1)[:-1]
    u, du, d2u, d3u = jets(xs)
    S0 = initial_states(lag, problem.kind, u, du, d2u, d3u, np.zeros(len(xs)))
    r = solve_shooting(problem, S0, branches, start_data=start_data, M=opts.segments,
                       K=opts.steps)
    return r["curve"], r["lam"], r["dlam"], dict(nfev=r["nfev"], boundary_map=r["residual"],
                                                 kkt_cond=r["kkt_cond"])


def _run_collocation(problem, opts, jets, branches, start_data):
    lag = lagrangian_for(problem.chart)

    def guess(x):
        u, du, d2u, d3u = jets(x)
        return state_from_jets(lag, problem.kind, u, du, d2u, d3u, np.zeros(len(x)))

    r = solve_collocation(problem, guess, branches, N=opts.nodes, start_data=start_data)
    x = np.linspace(0.0, problem.length, opts.samples)
    curve = polys_to_curve(r["polys"], x)
    lam = r["lam_poly"](x)
    dlam = r["lam_poly"].deriv()(x)
    return curve, lam, dlam, dict(nfev=r["nfev"], collocation_residual=r["residual"])


def _run_discrete(problem, opts, jets, start_data):
    dp = DiscreteProblem(problem, opts.n_segments)
    u, du = jets(dp.x)[:2]
    U, dU, info = minimize_discrete(dp, dp.pack(u, du), start_data=start_data)
    curve = discrete_curve(dp.x, U, dU)
    lam = Multiplier(dp.x, info["lam"])
    return curve, lam.values, lam.derivative, dict(
        iterations=info["iterations"], energy_history=info["history"], K_discrete=info["K"],
        Kn_discrete=info["Kn"], discrete_constraint=info["constraint"])


# ----------------------------------------------------------------------------
# assembly


def _boundary_residual(problem, curve, lam):
    ends = [problem.length] if problem.start is not None else [0.0, problem.length]
    out = {}
    for x in ends:
        lam_x = float(np.interp(x, curve.x, lam))
        branch, f = boundary_terms(problem.chart, curve, lam_x, x, kind=problem.kind)
        if problem.kind == "incomplete":
            f = f[1:]            # H_du1, H_du2 up to the U-branch rearrangement
        out[f"x={x:g}"] = float(np.max(np.abs(f)))
        out[f"branch@{x:g}"] = branch
    out["max"] = max(v for k, v in out.items() if not k.startswith("branch"))
    return out


def _assemble(problem, curve, lam, dlam, method, diag, opts):
    mult = Multiplier(curve.x, lam, dlam)
    res = el_residual(problem.chart, curve, mult, problem.kind)
    interior = slice(2, -2) if method == "discrete" else slice(None)
    el = res.max_norms(interior)
    el["max"] = max(el["r1"], el["r2"])
    bc = _boundary_residual(problem, curve, lam)
    # the constraint is checked by _accepts against tau_con, not here
    K = energy_K(problem.chart, curve, tol=None)
    Kn = energy_Kn(problem.chart, curve, tol=None)
    if method == "discrete":
        K, Kn = diag["K_discrete"], diag["Kn_discrete"]
    return ElasticSolution(problem, curve, np.asarray(lam, float), np.asarray(dlam, float),
                           float(K), float(Kn), el, bc, method, diag)


def _accepts(sol, opts):
    return (sol.el_residual["max"] < opts.tau_el and sol.boundary_residual["max"] < opts.tau_bc
            and sol.el_residual["rg"] < opts.tau_con)


def _solve_branch(problem, opts, sign):
    start_data = None
    if problem.start is not None:
        du0, gi = start_velocity(problem.chart, problem.start)
        start_data = (problem.start.point, du0, gi)
    jets = _guess_jets(problem, sign, start_data)
    t0 = time.perf_counter()
    if opts.method == "discrete":
        curve, lam, dlam, diag = _run_discrete(problem, opts, jets, start_data)
        sol = _assemble(problem, curve, lam, dlam, "discrete", diag, opts)
        sol.diagnostics["seconds"] = time.perf_counter() - t0
        return sol
    branches = _end_branches(problem, jets)
    diag = {"branches": "/".join(branches), "sign": sign}
    method = opts.method
    if method == "shooting":
        try:
            curve, lam, dlam, d = _run_shooting(problem, opts, jets, branches, start_data)
        except NoConvergence as exc:
            diag["fallback"] = str(exc)
            method = "collocation"
    if method == "collocation":
        curve, lam, dlam, d = _run_collocation(problem, opts, jets, branches, start_data)
    diag.update(d)
    sol = _assemble(problem, curve, lam, dlam, method, diag, opts)
    if method == "shooting" and not _accepts(sol, opts):
        # Newton met the boundary map but the solution misses the tolerances
        diag["fallback"] = "shooting solution outside tolerances"
        curve, lam, dlam, d = _run_collocation(problem, opts, jets, branches, start_data)
        diag.update(d)
        sol = _assemble(problem, curve, lam, dlam, "collocation", diag, opts)
    sol.diagnostics["seconds"] = time.perf_counter() - t0
    return sol


def _energy(sol):
    return sol.Kn if sol.problem.kind == "incomplete" else sol.K


def _solve(problem, opts):
    if problem.start is not None:
        sols = [_solve_branch(problem, opts, 1)]
    else:
        signs = (1, -1) if opts.both_branches else (1,)
        sols = []
        for s in signs:
            try:
                sols.append(_solve_branch(problem, opts, s))
            except NoConvergence as exc:
                if s == 1 and len(signs) == 1:
                    raise
                sols.append(exc.best)
        sols = [s for s in sols if s is not None]
        if not sols:
            raise NoConvergence("no branch converged")
    best = sols[0]
    for s in sols[1:]:
        # ties go to the + branch, which is solved first
        if _energy(s) < _energy(best) - TIE_TOL * max(1.0, abs(_energy(best))):
            best = s
    best.diagnostics["branch_energies"] = [float(_energy(s)) for s in sols]
    if best.method != "discrete" and opts.raise_on_failure and not _accepts(best, opts):
        raise NoConvergence(
            f"{problem.kind} solve missed tolerances: EL {best.el_residual['max']:.3g}, "
            f"BC {best.boundary_residual['max']:.3g}, |g-1| {best.el_residual['rg']:.3g}",
            best=best)
    return best


def _check_kind(problem, kind):
    if problem.kind != kind:
        raise ValueError(f"expected a {kind} problem, got {problem.kind!r}")


def solve_incomplete(problem: VariationalProblem, opts: SolverOptions = None, **overrides):
    """Minimize ``int kappa_n^2`` subject to ``g = 1``.

    Raises :class:`NoConvergence` (with ``.best``) when the residual
    tolerances are missed, :class:`SingularConstraint` when neither
    constraint branch is regular at an end.
    """
    _check_kind(problem, "incomplete")
    return _solve(problem, _options(opts, overrides))


def solve_complete(problem: VariationalProblem, opts: SolverOptions = None, **overrides):
    """Minimize ``int (kappa_n^2 + kappa_g^2)`` subject to ``g = 1``."""
    _check_kind(problem, "complete")
    return _solve(problem, _options(opts, overrides))


def solve_discrete(problem: VariationalProblem, n_segments: int = 256,
                   opts: SolverOptions = None, **overrides):
    """Direct minimization of the discretized energy on ``n_segments`` segments.

    The returned energies are the discrete sums; Euler-Lagrange residuals of
    the spline through the nodes are reported, not enforced.
    """
    opts = _options(opts, dict(overrides, method="discrete", n_segments=n_segments))
    return _solve(problem, opts)


def solve(problem: VariationalProblem, opts: SolverOptions = None, **overrides):
    """Dispatch on ``problem.kind``."""
    fn = solve_incomplete if problem.kind == "incomplete" else solve_complete
    return fn(problem, opts, **overrides)
