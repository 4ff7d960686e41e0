"""Variational problems for relaxed elastic lines: problem and solution
types, the speed-constraint solves ``U1``/``U2``, energies, Euler-Lagrange
residuals and variational boundary terms.

The solvers live in :mod:`galilean_elastica.solvers`.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import jax
import jax.numpy as jnp
import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import make_interp_spline

from .errors import ConstraintViolated, SingularU1, SingularU2
from .lagrangian import FAST_COMPILE, KINDS, along, lagrangian_for
from .surfaces import CONSTRAINT_TOL, darboux_along

SINGULAR_TOL = 1e-10


@dataclass(frozen=True)
class Start:
    """Clamped initial point and direction.

    Exactly one of ``du1``/``du2`` is given; the other follows from the
    speed constraint on the requested ``branch`` (``+1`` or ``-1``).
    """

    u1: float
    u2: float
    du1: Optional[float] = None
    du2: Optional[float] = None
    branch: int = 1

    @property
    def point(self):
        return np.array([self.u1, self.u2], float)


@dataclass
class VariationalProblem:
    """Elastic-line problem on a chart.

    ``start=None`` leaves both ends free.  ``initial_guess(x)`` returns
    parameter-plane samples of shape ``(len(x), 2)``; by default a straight
    parameter line is used.
    """

    chart: object
    kind: str
    length: float
    start: Optional[Start] = None
    initial_guess: Optional[Callable] = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.length > 0:
            raise ValueError("length must be positive")


@dataclass
class ELResidual:
    """Pointwise Euler-Lagrange residuals along a curve.

    ``r1, r2`` are the differential residuals ``H_u - (H_du)' [+ (H_ddu)'']``,
    ``rg = g - 1``, and ``p1, p2`` the momenta ``H_du [- (H_ddu)']`` whose
    vanishing gives the once-integrated equations with free-end constants.
    """

    r1: np.ndarray
    r2: np.ndarray
    rg: np.ndarray
    p1: np.ndarray
    p2: np.ndarray

    def __iter__(self):
        return iter((self.r1, self.r2, self.rg))

    def max_norms(self, interior=slice(None)):
        return dict(r1=float(np.max(np.abs(self.r1[interior]))),
                    r2=float(np.max(np.abs(self.r2[interior]))),
                    rg=float(np.max(np.abs(self.rg[interior]))))


@dataclass
class ElasticSolution:
    problem: VariationalProblem
    curve: object
    lam: np.ndarray
    dlam: np.ndarray
    K: float
    Kn: float
    el_residual: dict
    boundary_residual: dict
    method: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def x(self):
        return self.curve.x

    @property
    def constraint_error(self):
        return self.el_residual.get("rg", float("nan"))

    def summary(self):
        return dict(method=self.method, K=self.K, Kn=self.Kn,
                    el_residual=self.el_residual, boundary_residual=self.boundary_residual,
                    is_geodesic=is_geodesic(self), **{k: v for k, v in self.diagnostics.items()
                                                     if isinstance(v, (int, float, str, bool))})


# ----------------------------------------------------------------------------
# multiplier samples


class Multiplier:
    """``lambda(x)`` and ``lambda'(x)`` on a grid."""

    def __init__(self, x, values, derivative=None):
        x = np.asarray(x, float)
        values = np.broadcast_to(np.asarray(values, float), x.shape).copy()
        if derivative is None:
            if len(x) > 5:
                derivative = make_interp_spline(x, values, k=5).derivative()(x)
            else:
                derivative = np.gradient(values, x)
        self.x, self.values = x, values
        self.derivative = np.broadcast_to(np.asarray(derivative, float), x.shape).copy()

    @classmethod
    def coerce(cls, lam, x):
        if isinstance(lam, Multiplier):
            return lam
        if callable(lam):
            v, d = lam(np.asarray(x, float))
            return cls(x, v, d)
        lam = np.asarray(lam, float)
        if lam.ndim == 0:
            return cls(x, np.full(len(x), float(lam)), np.zeros(len(x)))
        return cls(x, lam)


# ----------------------------------------------------------------------------
# constraint solves


def constraint_partials(chart, u, du):
    """``(g_u, g_du)`` at one point."""
    lag = lagrangian_for(chart)
    fn = lag.compiled("g_partials", lambda: jax.jit(jax.grad(lag.g, argnums=(0, 1))))
    gu, gd = fn(jnp.asarray(u, float), jnp.asarray(du, float))
    return np.asarray(gu), np.asarray(gd)


def _quadratic_metric(chart, u):
    pt = chart.evaluate(float(u[0]), float(u[1]))
    return np.asarray(pt.g), np.asarray(pt.X), bool(pt.iso)


def _solve_component(chart, u, given, known_index, branch):
    G, X, iso = _quadratic_metric(chart, u)
    other = 1 - known_index
    err = SingularU2 if other == 1 else SingularU1
    if not iso:
        if abs(X[other]) <= SINGULAR_TOL * max(1.0, abs(X[known_index])):
            raise err(f"g does not depend on du{other + 1} at u={u}")
        return (float(np.sign(branch) or 1.0) - X[known_index] * given) / X[other]
    a = G[other, other]
    b = 2 * G[0, 1] * given
    c = G[known_index, known_index] * given ** 2 - 1.0
    disc = b * b - 4 * a * c
    if a <= SINGULAR_TOL or disc < 0:
        raise err(f"no real du{other + 1} with g = 1 at u={u}, du{known_index + 1}={given}")
    return (-b + (1.0 if branch >= 0 else -1.0) * np.sqrt(disc)) / (2 * a)


def solve_du2(chart, u, du1, branch=1):
    """``U2``: the ``du2`` with ``g(u, du1, du2) = 1``.

    On non-isotropic charts ``branch`` is the sign of ``X . du``; on
    isotropic charts it picks the root of the quadratic.
    """
    return float(_solve_component(chart, np.asarray(u, float), float(du1), 0, branch))


def solve_du1(chart, u, du2, branch=1):
    """``U1``: the ``du1`` with ``g(u, du1, du2) = 1``."""
    return float(_solve_component(chart, np.asarray(u, float), float(du2), 1, branch))


def start_velocity(chart, start: Start):
    """Full initial velocity of a clamped start and the index of the given component."""
    if (start.du1 is None) == (start.du2 is None):
        raise ValueError("exactly one of du1, du2 must be given")
    if start.du1 is not None:
        return np.array([start.du1, solve_du2(chart, start.point, start.du1, start.branch)]), 0
    return np.array([solve_du1(chart, start.point, start.du2, start.branch), start.du2]), 1


def U_partials(gu, gd, branch):
    """Partials of ``U2`` (``branch='U2'``) or ``U1`` from the implicit function theorem.

    Returns ``(dU/du1, dU/du2, dU/d(other velocity))``.
    """
    k, o = (1, 0) if branch == "U2" else (0, 1)
    if abs(gd[k]) <= SINGULAR_TOL * max(1.0, abs(gd[o])):
        raise (SingularU2 if branch == "U2" else SingularU1)(
            f"(U{k + 1}) is singular: dg/d(du{k + 1}) = {gd[k]:.3g}")
    return -gu[0] / gd[k], -gu[1] / gd[k], -gd[o] / gd[k]


def preferred_branch(gd):
    return "U2" if abs(gd[1]) >= abs(gd[0]) else "U1"


# ----------------------------------------------------------------------------
# energies


def _quad(x, y):
    x = np.asarray(x, float)
    if len(x) < 3:
        return float(np.trapezoid(y, x)) if len(x) > 1 else 0.0
    return float(simpson(y, x=x))


def energy_Kn(chart, curve, tol=CONSTRAINT_TOL):
    """``int kappa_n^2 dx`` by Simpson's rule on the curve samples."""
    d = darboux_along(chart, curve, tol=tol)
    return _quad(curve.x, d.kappa_n ** 2)


def energy_K(chart, curve, tol=CONSTRAINT_TOL):
    """``int (kappa_n^2 + kappa_g^2) dx`` by Simpson's rule."""
    d = darboux_along(chart, curve, tol=tol)
    return _quad(curve.x, d.kappa_n ** 2 + d.kappa_g2)


# ----------------------------------------------------------------------------
# Euler-Lagrange residuals


def _jets(curve):
    # unused higher orders are zero-filled; they enter only multiplied by zero
    d = curve.derivs
    return [d[k] if k < d.shape[0] else np.zeros_like(d[0]) for k in range(5)]


def _el_fns(chart, kind):
    lag = lagrangian_for(chart)

    def build():
        el = lag.el_pointwise(kind)
        parts = lag.H_parts(kind)

        def one(u, du, d2u, d3u, d4u, lam, dlam):
            r = el(u, du, d2u, d3u, d4u, lam, dlam)
            _, Hd, Hdd = parts(u, du, d2u, lam)
            if kind == "complete":
                def Hdd_fn(a, b, c, l):
                    return parts(a, b, c, l)[2]
                Hd = Hd - along(Hdd_fn, [(u, du, d2u, lam), (du, d2u, d3u, dlam)], 1)
            g = lag.g(u, du) - 1.0
            return r, Hd, g

        return jax.jit(jax.vmap(one), compiler_options=FAST_COMPILE)

    return lag.compiled(f"el_{kind}", build)


def el_residual(chart, curve, lam, kind):
    need = 4 if kind == "complete" else 2
    if curve.order < need:
        raise ValueError(f"{kind} residual needs derivatives up to order {need}")
    u, du, d2u, d3u, d4u = _jets(curve)
    m = Multiplier.coerce(lam, curve.x)
    r, p, g = _el_fns(chart, kind)(u, du, d2u, d3u, d4u, m.values, m.derivative)
    r, p = np.asarray(r), np.asarray(p)
    return ELResidual(r[:, 0], r[:, 1], np.asarray(g), p[:, 0], p[:, 1])


def el_residual_incomplete(chart, curve, lam):
    """Residuals of ``H_u - (H_du)' = 0`` and ``g = 1`` with ``H = kappa_n^2 + lam (g - 1)``."""
    return el_residual(chart, curve, lam, "incomplete")


def el_residual_complete(chart, curve, lam):
    """Residuals of ``H_u - (H_du)' + (H_ddu)'' = 0`` and ``g = 1`` with ``H = kappa^2 + lam (g - 1)``."""
    return el_residual(chart, curve, lam, "complete")


# ----------------------------------------------------------------------------
# boundary terms


def _boundary_fn(chart, kind):
    lag = lagrangian_for(chart)

    def build():
        parts = lag.H_parts(kind)

        def one(u, du, d2u, d3u, lam):
            _, Hd, Hdd = parts(u, du, d2u, lam)

            def Hdd_fn(a, b, c, l):
                return parts(a, b, c, l)[2]
            dHdd = along(Hdd_fn, [(u, du, d2u, lam), (du, d2u, d3u, jnp.zeros_like(lam))], 1)
            gu, gd = jax.grad(lag.g, argnums=(0, 1))(u, du)
            return Hd, Hdd, dHdd, gu, gd

        return jax.jit(one, compiler_options=FAST_COMPILE)

    return lag.compiled(f"boundary_{kind}", build)


def _boundary_terms(chart, curve, lam, x, kind, branch):
    jet = curve.jet(x)
    d3 = jet[3] if jet.shape[0] > 3 else np.zeros(2)
    lam_x = float(np.interp(x, curve.x, Multiplier.coerce(lam, curve.x).values)) \
        if not np.isscalar(lam) else float(lam)
    Hd, Hdd, dHdd, gu, gd = (np.asarray(a) for a in
                             _boundary_fn(chart, kind)(jet[0], jet[1], jet[2], d3, lam_x))
    Ux1, Ux2, Uv = U_partials(gu, gd, branch)
    P = Hd - dHdd
    if branch == "U2":
        return np.array([Hdd[0] + Hdd[1] * Uv, P[0] + Hdd[1] * Ux1, P[1] + Hdd[1] * Ux2])
    return np.array([Hdd[1] + Hdd[0] * Uv, P[1] + Hdd[0] * Ux2, P[0] + Hdd[0] * Ux1])


def boundary_terms_U2(chart, curve, lam, x, kind="complete"):
    """Factors multiplying ``(delta du1, delta u1, delta u2)`` when ``du2 = U2(u1, u2, du1)``.

    ``lam`` is the multiplier (scalar value at ``x`` or samples on the curve
    grid).  Raises :class:`SingularU2` when ``g`` does not depend on ``du2``.
    """
    return _boundary_terms(chart, curve, lam, x, kind, "U2")


def boundary_terms_U1(chart, curve, lam, x, kind="complete"):
    """Factors multiplying ``(delta du2, delta u2, delta u1)`` when ``du1 = U1(u1, u2, du2)``."""
    return _boundary_terms(chart, curve, lam, x, kind, "U1")


def boundary_terms(chart, curve, lam, x, kind="complete"):
    """Boundary factors on whichever branch is regular at ``x`` (``U2`` preferred).

    Returns ``(branch, factors)``.
    """
    jet = curve.jet(x)
    _, gd = constraint_partials(chart, jet[0], jet[1])
    branch = preferred_branch(gd)
    return branch, _boundary_terms(chart, curve, lam, x, kind, branch)


# ----------------------------------------------------------------------------


def is_geodesic(sol, tol=1e-6):
    """True iff ``max kappa_g^2 < tol^2`` over the solution samples."""
    d = darboux_along(sol.problem.chart, sol.curve, tol=None)
    return bool(np.max(d.kappa_g2) < tol ** 2)


def check_solution_constraint(chart, curve, tol=CONSTRAINT_TOL):
    d = darboux_along(chart, curve, tol=None)
    err = float(np.max(np.abs(d.speed - 1.0)))
    if err > tol:
        raise ConstraintViolated(f"max |g - 1| = {err:.3g}")
    return err
