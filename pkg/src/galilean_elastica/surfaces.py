"""Oriented surfaces in G3: frames, fundamental forms, Christoffel symbols,
Darboux invariants along surface curves, and geodesics.

Everything here is vectorized: chart jets have shape ``(..., 3)`` and the
derived coefficients carry the same leading shape.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline, make_interp_spline

from .errors import (BothDenominatorsVanish, ConstraintViolated, DegenerateChart,
                     DomainError, LeftDomain, StepFailure)
from .galilean import ISO_TOL, gcross

W_FLOOR = 1e-12
DENOM_TOL = 1e-12
CONSTRAINT_TOL = 1e-8


def _yz_dot(a, b):
    # products of vectors whose x-components vanish identically
    return a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def fd_surface_jets(position, h1=1e-5, h2=1e-4):
    """Jets ``(psi, psi1, psi2, psi11, psi12, psi22)`` by central differences."""
    def pos(u1, u2):
        return np.stack(np.broadcast_arrays(*[np.asarray(c, float) for c in position(u1, u2)]),
                        axis=-1)

    def jets(u1, u2):
        u1 = np.asarray(u1, float)
        u2 = np.asarray(u2, float)
        p = pos(u1, u2)

        def d1(f, h):
            return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)

        def d2(f, h):
            return (-f(2 * h) + 16 * f(h) - 30 * p + 16 * f(-h) - f(-2 * h)) / (12 * h * h)

        def along1(t):
            return pos(u1 + t, u2)

        def along2(t):
            return pos(u1, u2 + t)

        p12 = (pos(u1 + h2, u2 + h2) - pos(u1 + h2, u2 - h2)
               - pos(u1 - h2, u2 + h2) + pos(u1 - h2, u2 - h2)) / (4 * h2 * h2)
        return p, d1(along1, h1), d1(along2, h1), d2(along1, h2), p12, d2(along2, h2)

    return jets


class SurfaceChart:
    """Parametrization ``psi(u1, u2) = (X, Y, Z)`` of an oriented surface.

    ``position(u1, u2, xp=numpy)`` must be written against the array
    namespace ``xp`` so the variational layer can trace it with JAX.
    ``jets(u1, u2)`` returns analytic ``(psi, psi1, psi2, psi11, psi12,
    psi22)``; without it finite differences are used.
    """

    def __init__(self, position: Callable, jets: Optional[Callable] = None,
                 domain=((-np.inf, np.inf), (-np.inf, np.inf)), name="chart",
                 isotropic=False):
        self.position = position
        self.name = name
        self.domain = tuple(tuple(float(b) for b in d) for d in domain)
        self.isotropic = bool(isotropic)
        self.jet_source = "analytic" if jets is not None else "fd"
        self._jets = jets if jets is not None else fd_surface_jets(position)

    def __repr__(self):
        return f"SurfaceChart({self.name!r}, jets={self.jet_source})"

    def jets(self, u1, u2):
        return tuple(np.asarray(j, dtype=float) for j in self._jets(u1, u2))

    def with_fd_jets(self):
        """Same surface, finite-difference jets."""
        return SurfaceChart(self.position, None, self.domain, self.name + "[fd]", self.isotropic)

    def contains(self, u1, u2):
        (a1, b1), (a2, b2) = self.domain
        return bool(a1 <= u1 <= b1 and a2 <= u2 <= b2)

    def evaluate(self, u1, u2) -> "SurfacePoint":
        return SurfacePoint.from_jets(*self.jets(u1, u2))


@dataclass(frozen=True)
class SurfacePoint:
    """All first- and second-order surface data at one or many chart points.

    ``g`` is the first fundamental form as used by the speed constraint:
    ``X_i X_j`` on non-isotropic tangent planes, the Euclidean ``(y, z)``
    metric on isotropic ones.  ``h`` is always the ``(y, z)`` metric of
    the tangent vectors and measures geodesic curvature.  ``gamma[k, i, j]``
    holds the Christoffel symbol with upper index ``k``.
    """

    psi: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    psi11: np.ndarray
    psi12: np.ndarray
    psi22: np.ndarray
    X: np.ndarray          # (..., 2): X1, X2
    W: np.ndarray
    n: np.ndarray
    Q: np.ndarray
    iso: np.ndarray        # tangent plane isotropic
    g: np.ndarray          # (..., 2, 2)
    h: np.ndarray          # (..., 2, 2)
    g_up: np.ndarray       # (..., 2): g^1 = X2/W, g^2 = -X1/W
    L: np.ndarray          # (..., 2, 2)
    gamma: np.ndarray      # (..., 2, 2, 2)

    @classmethod
    def from_jets(cls, psi, psi1, psi2, psi11, psi12, psi22):
        X1, X2 = psi1[..., 0], psi2[..., 0]
        X = np.stack([X1, X2], axis=-1)
        iso = (np.abs(X1) <= DENOM_TOL) & (np.abs(X2) <= DENOM_TOL)

        cross = gcross(psi1, psi2)
        W = np.hypot(cross[..., 1], cross[..., 2])
        safe_W = np.where(W > W_FLOOR, W, 1.0)
        n = np.where(iso[..., None], np.array([1.0, 0.0, 0.0]), cross / safe_W[..., None])
        Q = (X2[..., None] * psi1 - X1[..., None] * psi2) / safe_W[..., None]

        tang = (psi1, psi2)
        h = np.empty(psi.shape[:-1] + (2, 2))
        for i in range(2):
            for j in range(2):
                h[..., i, j] = _yz_dot(tang[i], tang[j])
        g = np.where(iso[..., None, None], h, X[..., :, None] * X[..., None, :])
        g_up = np.where(iso[..., None], 0.0, np.stack([X2, -X1], axis=-1) / safe_W[..., None])

        second = ((psi11, psi12), (psi12, psi22))
        L = np.empty_like(h)
        gamma = np.empty(psi.shape[:-1] + (2, 2, 2))
        use_x2 = np.abs(X2) >= np.abs(X1)
        safe_X1 = np.where(np.abs(X1) > DENOM_TOL, X1, 1.0)
        safe_X2 = np.where(np.abs(X2) > DENOM_TOL, X2, 1.0)
        h_inv = np.linalg.inv(np.where(iso[..., None, None], h, np.eye(2)))
        for k in range(2):
            for l in range(2):
                p_kl = second[k][l]
                X_kl = p_kl[..., 0]
                # isotropic combinations: first components cancel exactly
                v2 = X2[..., None] * p_kl - X_kl[..., None] * psi2
                v1 = X1[..., None] * p_kl - X_kl[..., None] * psi1
                L_x2 = _yz_dot(v2, n) / safe_X2
                L_x1 = _yz_dot(v1, n) / safe_X1
                L[..., k, l] = np.where(iso, X_kl, np.where(use_x2, L_x2, L_x1))
                g1 = _yz_dot(v2, Q) / safe_W
                g2 = -_yz_dot(v1, Q) / safe_W
                # isotropic tangent plane: intrinsic Euclidean decomposition
                rhs = np.stack([_yz_dot(psi1, p_kl), _yz_dot(psi2, p_kl)], axis=-1)
                gi = np.einsum("...ij,...j->...i", h_inv, rhs)
                gamma[..., 0, k, l] = np.where(iso, gi[..., 0], g1)
                gamma[..., 1, k, l] = np.where(iso, gi[..., 1], g2)
        return cls(psi, psi1, psi2, psi11, psi12, psi22, X, W, n, Q, iso, g, h, g_up, L, gamma)

    def second_form_variants(self):
        """Both printed second-form formulas ``(L via X2, L via X1)``.

        A variant is ``nan`` where its denominator vanishes.
        """
        X1, X2 = self.X[..., 0], self.X[..., 1]
        if np.any((np.abs(X1) <= DENOM_TOL) & (np.abs(X2) <= DENOM_TOL)):
            raise BothDenominatorsVanish("X1 and X2 both vanish")
        second = ((self.psi11, self.psi12), (self.psi12, self.psi22))
        out = np.full((2,) + self.L.shape, np.nan)
        with np.errstate(divide="ignore", invalid="ignore"):
            for k in range(2):
                for l in range(2):
                    p = second[k][l]
                    X_kl = p[..., 0][..., None]
                    out[0][..., k, l] = np.where(
                        np.abs(X2) > DENOM_TOL,
                        _yz_dot(X2[..., None] * p - X_kl * self.psi2, self.n) / X2, np.nan)
                    out[1][..., k, l] = np.where(
                        np.abs(X1) > DENOM_TOL,
                        _yz_dot(X1[..., None] * p - X_kl * self.psi1, self.n) / X1, np.nan)
        return out[0], out[1]


def _regular_point(s, u1, u2):
    pt = s.evaluate(u1, u2)
    if np.any(pt.iso) or np.any(pt.W <= W_FLOOR):
        raise DegenerateChart(f"W={np.min(pt.W):.3g} at ({u1}, {u2}) on {s.name}")
    return pt


def unit_normal(s, u1, u2):
    return _regular_point(s, u1, u2).n


def side_tangential(s, u1, u2):
    return _regular_point(s, u1, u2).Q


def first_form(s, u1, u2):
    """``(g11, g12, g22, g1, g2)``."""
    pt = s.evaluate(u1, u2)
    return pt.g[..., 0, 0], pt.g[..., 0, 1], pt.g[..., 1, 1], pt.X[..., 0], pt.X[..., 1]


def second_form(s, u1, u2):
    """``(L11, L12, L22)``."""
    L = s.evaluate(u1, u2).L
    return L[..., 0, 0], L[..., 0, 1], L[..., 1, 1]


def christoffel(s, u1, u2):
    """Array ``G[k, i, j]`` (upper index first)."""
    pt = s.evaluate(u1, u2)
    if np.any(~pt.iso & (pt.W <= W_FLOOR)):
        raise DegenerateChart(f"W={np.min(pt.W):.3g} on {s.name}")
    return np.moveaxis(pt.gamma, (-3, -2, -1), (0, 1, 2))


# ----------------------------------------------------------------------------
# curves on surfaces


@dataclass
class CurveOnSurface:
    """Parameter-plane curve ``x -> (u1(x), u2(x))`` sampled on ``x``.

    ``derivs[k]`` is the ``k``-th derivative at the samples (``derivs[0]``
    is the curve itself).  ``jet_fn(x)``, when present, returns the same
    stack at arbitrary ``x``.
    """

    x: np.ndarray
    derivs: np.ndarray            # (order + 1, N, 2)
    jet_fn: Optional[Callable] = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_function(cls, jet_fn, x, **meta):
        x = np.asarray(x, float)
        stack = np.stack([np.asarray(jet_fn(xi), float) for xi in x], axis=1)
        return cls(x, stack, jet_fn, dict(meta))

    @classmethod
    def from_samples(cls, x, u, order=4, **meta):
        """Derivatives from a quintic interpolating spline through the samples."""
        x = np.asarray(x, float)
        spl = make_interp_spline(x, np.asarray(u, float), k=5)
        derivs = [spl(x)] + [spl.derivative(k)(x) for k in range(1, order + 1)]

        def jet_fn(t):
            return np.stack([spl(t)] + [spl.derivative(k)(t) for k in range(1, order + 1)])

        return cls(x, np.stack(derivs), jet_fn, dict(meta))

    @classmethod
    def from_jets(cls, x, derivs, **meta):
        """Curve from exact sampled jets; off-grid jets use Hermite interpolation
        of each order with the next order as its slope."""
        x = np.asarray(x, float)
        derivs = np.asarray(derivs, float)
        top = derivs.shape[0] - 1
        splines = [CubicHermiteSpline(x, derivs[k], derivs[k + 1], axis=0) for k in range(top)]
        splines.append(make_interp_spline(x, derivs[top], k=3))

        def jet_fn(t):
            return np.stack([s(t) for s in splines])

        return cls(x, derivs, jet_fn, dict(meta))

    @property
    def u(self):
        return self.derivs[0]

    @property
    def du(self):
        return self.derivs[1]

    @property
    def ddu(self):
        return self.derivs[2]

    @property
    def length(self):
        return float(self.x[-1] - self.x[0])

    @property
    def order(self):
        return self.derivs.shape[0] - 1

    def jet(self, x):
        if self.jet_fn is not None:
            return np.asarray(self.jet_fn(x), float)
        i = int(np.argmin(np.abs(self.x - x)))
        if abs(self.x[i] - x) <= 1e-12 * max(1.0, abs(x)):
            return self.derivs[:, i]
        return np.stack([[np.interp(x, self.x, d[:, c]) for c in range(2)] for d in self.derivs])


@dataclass(frozen=True)
class DarbouxData:
    kappa_n: np.ndarray
    tau_g: np.ndarray
    kappa_g2: np.ndarray
    kappa_g: np.ndarray
    gamma: np.ndarray          # (..., 2): gamma_1, gamma_2
    T: np.ndarray
    Q: np.ndarray
    n: np.ndarray
    speed: np.ndarray          # Galilean norm of T


def tangent_speed(pt, du):
    """Galilean norm of ``T = psi1 du1 + psi2 du2``, with the isotropy test at ISO_TOL."""
    T = pt.psi1 * du[..., 0:1] + pt.psi2 * du[..., 1:2]
    return T, np.where(np.abs(T[..., 0]) > ISO_TOL, np.abs(T[..., 0]),
                       np.hypot(T[..., 1], T[..., 2]))


def darboux_from_point(pt, du, ddu):
    T, speed = tangent_speed(pt, du)
    kn = np.einsum("...i,...ij,...j->...", du, pt.L, du)
    tg = np.einsum("...i,...ij,...j->...", pt.g_up, pt.L, du)
    gam = ddu + np.einsum("...kij,...i,...j->...k", pt.gamma, du, du)
    kg2 = np.einsum("...i,...ij,...j->...", gam, pt.h, gam)
    tan_part = pt.psi1 * gam[..., 0:1] + pt.psi2 * gam[..., 1:2]
    sign = np.where(pt.iso, 1.0, np.sign(_yz_dot(tan_part, pt.Q)))
    sign = np.where(sign == 0, 1.0, sign)
    return DarbouxData(kn, tg, kg2, sign * np.sqrt(np.maximum(kg2, 0.0)), gam, T, pt.Q, pt.n, speed)


def check_constraint(speed, tol=CONSTRAINT_TOL):
    err = np.max(np.abs(np.asarray(speed) - 1.0)) if np.size(speed) else 0.0
    if not err <= tol:
        raise ConstraintViolated(f"max |g - 1| = {err:.3g} exceeds {tol:.1g}")


def darboux_invariants(s, c, x, tol=CONSTRAINT_TOL) -> DarbouxData:
    """Normal curvature, geodesic torsion and geodesic curvature at ``x``."""
    jet = c.jet(x)
    pt = s.evaluate(jet[0, 0], jet[0, 1])
    d = darboux_from_point(pt, jet[1], jet[2])
    check_constraint(d.speed, tol)
    return d


def darboux_along(s, c, tol=CONSTRAINT_TOL) -> DarbouxData:
    """Vectorized :func:`darboux_invariants` over all samples of ``c``."""
    pt = s.evaluate(c.u[:, 0], c.u[:, 1])
    d = darboux_from_point(pt, c.du, c.ddu)
    if tol is not None:
        check_constraint(d.speed, tol)
    return d


def ambient_acceleration(pt, du, ddu):
    """Second derivative of the space curve ``psi(u(x))`` from the chain rule."""
    return (pt.psi11 * (du[..., 0:1] ** 2) + 2 * pt.psi12 * (du[..., 0:1] * du[..., 1:2])
            + pt.psi22 * (du[..., 1:2] ** 2) + pt.psi1 * ddu[..., 0:1] + pt.psi2 * ddu[..., 1:2])


def pythagoras_check(s, c, x):
    """``|kappa^2 - kappa_g^2 - kappa_n^2|`` with ``kappa`` from the ambient curve."""
    jet = c.jet(x)
    pt = s.evaluate(jet[0, 0], jet[0, 1])
    acc = ambient_acceleration(pt, jet[1], jet[2])
    kappa2 = acc[1] ** 2 + acc[2] ** 2
    d = darboux_from_point(pt, jet[1], jet[2])
    return float(abs(kappa2 - d.kappa_g2 - d.kappa_n ** 2))


# ----------------------------------------------------------------------------
# geodesics


def geodesic_ode(s, state):
    """Right-hand side of the first-order geodesic system ``gamma_i = 0``."""
    u1, u2, d1, d2 = state
    pt = s.evaluate(u1, u2)
    if not pt.iso and pt.W <= W_FLOOR:
        raise DegenerateChart(f"W={float(pt.W):.3g} at ({u1}, {u2})")
    du = np.array([d1, d2])
    acc = -np.einsum("kij,i,j->k", pt.gamma, du, du)
    return np.array([d1, d2, acc[0], acc[1]])


def _rk4(s, y0, h, steps):
    ys = np.empty((steps + 1, 4))
    ys[0] = y0
    y = np.asarray(y0, float)
    for k in range(steps):
        k1 = geodesic_ode(s, y)
        k2 = geodesic_ode(s, y + 0.5 * h * k1)
        k3 = geodesic_ode(s, y + 0.5 * h * k2)
        k4 = geodesic_ode(s, y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise StepFailure(f"non-finite state after step {k + 1}")
        if not s.contains(y[0], y[1]):
            raise LeftDomain(f"geodesic left {s.name} at x={(k + 1) * h:.6g}: u={y[:2]}")
        ys[k + 1] = y
    return ys


def integrate_geodesic(s, u0, du0, length, h=1e-3, richardson=True, tol=CONSTRAINT_TOL):
    """Integrate ``gamma_i = 0`` by classical RK4 from ``(u0, du0)`` over ``[0, length]``.

    The step is shrunk so it divides ``length``.  With ``richardson`` the run
    is repeated at half step and the endpoint discrepancy is stored in
    ``curve.meta['richardson']``.
    """
    u0 = np.asarray(u0, float)
    du0 = np.asarray(du0, float)
    if not s.contains(*u0):
        raise DomainError(f"start {u0} outside domain {s.domain} of {s.name}")
    _, speed = tangent_speed(s.evaluate(*u0), du0)
    check_constraint(speed, tol)
    steps = max(int(np.ceil(length / h - 1e-9)), 0)
    x = np.linspace(0.0, length, steps + 1)
    y0 = np.concatenate([u0, du0])
    if steps == 0:
        ys = y0[None, :]
    else:
        ys = _rk4(s, y0, length / steps, steps)
    acc = np.array([geodesic_ode(s, y)[2:] for y in ys])
    curve = CurveOnSurface(x, np.stack([ys[:, :2], ys[:, 2:], acc]))
    if richardson and steps > 0:
        fine = _rk4(s, y0, length / (2 * steps), 2 * steps)
        curve.meta["richardson"] = float(np.max(np.abs(fine[::2] - ys)))
    d = darboux_along(s, curve, tol=None)
    curve.meta["max_kappa_g2"] = float(np.max(d.kappa_g2))
    curve.meta["constraint_drift"] = float(np.max(np.abs(d.speed - 1.0)))
    return curve
