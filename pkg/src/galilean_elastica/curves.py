"""Curves in G3: jets, Frenet apparatus, curvature and torsion."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CurvatureVanishes, DegenerateJet, NotAdmissible
from .galilean import det3, gcross, gnorm

KAPPA_MIN = 1e-12
ADMISSIBLE_TOL = 1e-8

# per-order finite-difference steps (roundoff grows like eps / h**k)
FD_STEPS = (1e-5, 1e-4, 1e-3)


@dataclass(frozen=True)
class CurveJet:
    x: float
    point: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray


@dataclass(frozen=True)
class FrenetFrame:
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: float
    tau: float


def fd_derivatives(f, x, steps=FD_STEPS):
    """First three derivatives of ``f`` at ``x`` from five-point central stencils."""
    scale = max(1.0, abs(x))
    h1, h2, h3 = (s * scale for s in steps)

    def stencil(h):
        return [np.asarray(f(x + k * h), dtype=float) for k in (-2, -1, 0, 1, 2)]

    m2, m1, _, p1, p2 = stencil(h1)
    d1 = (-p2 + 8 * p1 - 8 * m1 + m2) / (12 * h1)
    m2, m1, z0, p1, p2 = stencil(h2)
    d2 = (-p2 + 16 * p1 - 30 * z0 + 16 * m1 - m2) / (12 * h2 ** 2)
    m2, m1, _, p1, p2 = stencil(h3)
    d3 = (p2 - 2 * p1 + 2 * m1 - m2) / (2 * h3 ** 3)
    return d1, d2, d3


class ParametricCurve:
    """A curve ``x -> R^3`` with analytic or finite-difference jets.

    ``derivatives(x)`` should return ``(d1, d2, d3)``; without it the jets
    come from :func:`fd_derivatives`.
    """

    def __init__(self, position: Callable, derivatives: Optional[Callable] = None,
                 domain=(-np.inf, np.inf)):
        self.position = position
        self.derivatives = derivatives
        self.domain = tuple(domain)

    @property
    def analytic(self):
        return self.derivatives is not None

    def jet(self, x) -> CurveJet:
        x = float(x)
        p = np.asarray(self.position(x), dtype=float)
        if self.derivatives is not None:
            d1, d2, d3 = (np.asarray(d, dtype=float) for d in self.derivatives(x))
        else:
            d1, d2, d3 = fd_derivatives(self.position, x)
        return CurveJet(x, p, d1, d2, d3)

    def reparametrize(self, phi, dphi, ddphi, dddphi):
        """Curve ``t -> c(phi(t))`` with jets from the chain rule."""
        def position(t):
            return self.position(phi(t))

        def derivatives(t):
            j = self.jet(phi(t))
            s1, s2, s3 = dphi(t), ddphi(t), dddphi(t)
            return (s1 * j.d1,
                    s2 * j.d1 + s1 ** 2 * j.d2,
                    s3 * j.d1 + 3 * s1 * s2 * j.d2 + s1 ** 3 * j.d3)

        return ParametricCurve(position, derivatives if self.analytic else None)

    def transformed(self, m):
        """Image under a Galilean isometry."""
        def position(x):
            return m(self.position(x))

        def derivatives(x):
            j = self.jet(x)
            return m.linear(j.d1), m.linear(j.d2), m.linear(j.d3)

        return ParametricCurve(position, derivatives if self.analytic else None, self.domain)


def graph_curve(y, z, dy, dz, ddy, ddz, dddy, dddz):
    """Admissible curve ``(x, y(x), z(x))`` from component functions and their derivatives."""
    return ParametricCurve(
        lambda x: np.array([x, y(x), z(x)]),
        lambda x: (np.array([1.0, dy(x), dz(x)]),
                   np.array([0.0, ddy(x), ddz(x)]),
                   np.array([0.0, dddy(x), dddz(x)])),
    )


def _admissible_jet(c, x, tol):
    j = c.jet(x)
    if abs(j.d1[0] - 1.0) > tol:
        raise NotAdmissible(f"tangent x-component {j.d1[0]!r} differs from 1 at x={x}")
    return j


def curvature_arclength(c, x, tol=ADMISSIBLE_TOL):
    j = _admissible_jet(c, x, tol)
    return float(np.hypot(j.d2[1], j.d2[2]))


def torsion_arclength(c, x, tol=ADMISSIBLE_TOL, kappa_min=KAPPA_MIN):
    j = _admissible_jet(c, x, tol)
    k2 = j.d2[1] ** 2 + j.d2[2] ** 2
    if np.sqrt(k2) <= kappa_min:
        raise CurvatureVanishes(f"curvature {np.sqrt(k2):.3g} at x={x}")
    return float(det3(j.d1, j.d2, j.d3) / k2)


def frenet_frame(c, x, tol=ADMISSIBLE_TOL, kappa_min=KAPPA_MIN) -> FrenetFrame:
    j = _admissible_jet(c, x, tol)
    y2, z2 = j.d2[1], j.d2[2]
    kappa = float(np.hypot(y2, z2))
    if kappa <= kappa_min:
        raise CurvatureVanishes(f"curvature {kappa:.3g} at x={x}")
    tau = float(det3(j.d1, j.d2, j.d3) / kappa ** 2)
    return FrenetFrame(T=j.d1.copy(), N=j.d2 / kappa,
                       B=np.array([0.0, -z2, y2]) / kappa, kappa=kappa, tau=tau)


def curvature_torsion_general(c, x, kappa_min=KAPPA_MIN):
    """``(kappa, tau)`` for an arbitrary regular parametrization.

    ``tau`` is ``nan`` where the curvature vanishes.
    """
    j = c.jet(x)
    speed = float(gnorm(j.d1))
    if speed <= kappa_min:
        raise DegenerateJet(f"vanishing speed at x={x}")
    cross = gcross(j.d1, j.d2)
    w = float(gnorm(cross))
    kappa = w / speed ** 3
    tau = float(det3(j.d1, j.d2, j.d3) / w ** 2) if w > kappa_min else float("nan")
    return kappa, tau


def frenet_residuals(c, x, h, tol=ADMISSIBLE_TOL, kappa_min=KAPPA_MIN):
    """Residuals of ``T' = kappa N``, ``N' = tau B``, ``B' = -tau N`` at ``x``.

    Frame derivatives are central differences with step ``h``, so the
    residuals decay like ``h**2`` for smooth curves.  Returns the three
    Euclidean residual norms.
    """
    f0 = frenet_frame(c, x, tol, kappa_min)
    fp = frenet_frame(c, x + h, tol, kappa_min)
    fm = frenet_frame(c, x - h, tol, kappa_min)

    def d(name):
        return (getattr(fp, name) - getattr(fm, name)) / (2 * h)

    return (float(np.linalg.norm(d("T") - f0.kappa * f0.N)),
            float(np.linalg.norm(d("N") - f0.tau * f0.B)),
            float(np.linalg.norm(d("B") + f0.tau * f0.N)))
