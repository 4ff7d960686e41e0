"""Lagrangians of the elastic-line problems, traced with JAX.

A chart's ``position(u1, u2, xp)`` is differentiated with forward-mode AD
to obtain its jets, and the energy densities

* incomplete: ``H = kappa_n^2 + lam (g - 1)``
* complete:   ``H = kappa^2   + lam (g - 1)``

are assembled from them.  ``kappa^2`` is the squared ``(y, z)`` length of
the ambient acceleration of ``psi(u(x))``; on the constraint manifold it
equals ``kappa_n^2 + kappa_g^2``.

Derivatives of composed quantities along a curve are taken by pushing a
truncated Taylor path through nested ``jvp`` calls (:func:`along`).
"""

import os
from functools import partial
from pathlib import Path

import jax
import jax.numpy as jnp

jax.config.update("jax_enable_x64", True)

# Compiled kernels are cached on disk across processes.  Set
# GALILEAN_ELASTICA_JAX_CACHE to another directory, or to an empty string to
# disable the cache.
_CACHE_DIR = os.environ.get("GALILEAN_ELASTICA_JAX_CACHE",
                            str(Path.home() / ".cache" / "galilean_elastica" / "jax"))
if _CACHE_DIR:
    jax.config.update("jax_compilation_cache_dir", _CACHE_DIR)
    jax.config.update("jax_persistent_cache_min_compile_time_secs", 0.2)

KINDS = ("incomplete", "complete")

# The traced graphs are small and run in microseconds; compile time dominates.
FAST_COMPILE = {"xla_backend_optimization_level": 0}


def along(F, zs, m):
    """``d^m/dt^m F(sum_k zs[k] t^k / k!)`` at ``t = 0``.

    ``zs`` is a list of equally structured tuples of arrays (the value and
    its successive derivatives along the curve).
    """
    def path(t):
        out = []
        for parts in zip(*zs):
            acc = parts[0]
            fact = 1.0
            for k in range(1, len(parts)):
                fact *= k
                acc = acc + parts[k] * (t ** k / fact)
            out.append(acc)
        return F(*out)

    f = path
    for _ in range(m):
        f = (lambda g: (lambda t: jax.jvp(g, (t,), (jnp.ones_like(t),))[1]))(f)
    return f(jnp.asarray(0.0))


class ChartLagrangian:
    """JAX-traced constraint, curvatures and Lagrangians of one chart."""

    def __init__(self, chart):
        self.chart = chart
        self.isotropic = chart.isotropic

        def pos(u):
            return jnp.stack([jnp.asarray(c, dtype=jnp.float64) + 0.0 * u[0]
                              for c in chart.position(u[0], u[1], xp=jnp)])

        self.pos = pos
        self._d1 = jax.jacfwd(pos)
        self._d2 = jax.jacfwd(jax.jacfwd(pos))
        self._cache = {}

    # -- pointwise geometry ------------------------------------------------

    def jets(self, u):
        J = self._d1(u)          # (3, 2): columns psi_1, psi_2
        Hs = self._d2(u)         # (3, 2, 2)
        return J, Hs

    def _g(self, J, du):
        T = J @ du
        if self.isotropic:
            return T[1] ** 2 + T[2] ** 2
        return T[0] ** 2

    def _L(self, J, Hs):
        if self.isotropic:
            return Hs[0]
        p1, p2 = J[:, 0], J[:, 1]
        cy = p1[2] * p2[0] - p1[0] * p2[2]
        cz = p1[0] * p2[1] - p1[1] * p2[0]
        W = jnp.sqrt(cy ** 2 + cz ** 2)
        # det(psi1, psi2, psi_ij) / W, which equals both printed variants
        m = p1[1] * p2[2] - p1[2] * p2[1]
        return (Hs[0] * m + Hs[1] * cy + Hs[2] * cz) / W

    def g(self, u, du):
        """Speed functional: ``(X . du)^2`` or, on isotropic charts, ``|du|_h^2``."""
        return self._g(self._d1(u), du)

    def second_form(self, u):
        return self._L(*self.jets(u))

    def kappa_n(self, u, du):
        return du @ self.second_form(u) @ du

    def acceleration(self, u, du, ddu):
        J, Hs = self.jets(u)
        return jnp.einsum("aij,i,j->a", Hs, du, du) + J @ ddu

    def kappa2(self, u, du, ddu):
        a = self.acceleration(u, du, ddu)
        return a[1] ** 2 + a[2] ** 2

    def H(self, kind, u, du, ddu, lam):
        J, Hs = self.jets(u)
        if kind == "incomplete":
            dens = (du @ self._L(J, Hs) @ du) ** 2
        else:
            a = jnp.einsum("aij,i,j->a", Hs, du, du) + J @ ddu
            dens = a[1] ** 2 + a[2] ** 2
        return dens + lam * (self._g(J, du) - 1.0)

    # -- derivatives of H --------------------------------------------------

    def H_parts(self, kind):
        """Function ``(u, du, ddu, lam) -> (H_u, H_du, H_ddu)``."""
        return jax.grad(partial(self.H, kind), argnums=(0, 1, 2))

    def el_pointwise(self, kind):
        """EL residual from curve jets.

        Returns ``f(u, du, d2u, d3u, d4u, lam, dlam) -> (E1, E2)`` with
        ``E = H_u - (H_du)' + (H_ddu)''``.
        """
        parts = self.H_parts(kind)

        def Hu(u, du, ddu, lam):
            return parts(u, du, ddu, lam)[0]

        def Hd(u, du, ddu, lam):
            return parts(u, du, ddu, lam)[1]

        def Hdd(u, du, ddu, lam):
            return parts(u, du, ddu, lam)[2]

        def el(u, du, d2u, d3u, d4u, lam, dlam):
            z0 = (u, du, d2u, lam)
            z1 = (du, d2u, d3u, dlam)
            z2 = (d2u, d3u, d4u, jnp.zeros_like(lam))
            r = Hu(*z0) - along(Hd, [z0, z1], 1)
            if kind == "complete":
                r = r + along(Hdd, [z0, z1, z2], 2)
            return r

        return el

    def constraint_derivs(self, u, du, d2u, d3u, d4u, order):
        """``(g, g', g'', g''')`` along the curve up to ``order``."""
        z = [(u, du), (du, d2u), (d2u, d3u), (d3u, d4u)]
        out = [self.g(u, du) - 1.0]
        for m in range(1, order + 1):
            out.append(along(self.g, z[:m + 1], m))
        return out

    def compiled(self, name, builder):
        """Cache of jitted helpers keyed by name."""
        if name not in self._cache:
            self._cache[name] = builder()
        return self._cache[name]


def lagrangian_for(chart):
    """The (cached) :class:`ChartLagrangian` of ``chart``."""
    lag = getattr(chart, "_lagrangian", None)
    if lag is None:
        lag = ChartLagrangian(chart)
        chart._lagrangian = lag
    return lag


def momentum_factors(lag, kind, branch, u, du, Q, P):
    """Free-end conditions in terms of the momenta ``Q = H_ddu`` and
    ``P = H_du - Q'`` (incomplete problem: ``P = H_du`` and no ``Q``).

    Incomplete problem: ``P = 0``.  Complete problem: the three factors of
    the ``U2`` (or ``U1``) boundary terms, multiplying
    ``(delta du1, delta u1, delta u2)`` (or ``(delta du2, delta u2, delta u1)``).
    """
    if kind == "incomplete":
        return P
    gu, gd = jax.grad(lag.g, argnums=(0, 1))(u, du)
    k, o = (1, 0) if branch == "U2" else (0, 1)
    Ux = -gu / gd[k]
    Uv = -gd[o] / gd[k]
    return jnp.stack([Q[o] + Q[k] * Uv, P[o] + Q[k] * Ux[o], P[k] + Q[k] * Ux[k]])


def natural_factors(lag, kind, branch, u, du, d2u, d3u, lam):
    """:func:`momentum_factors` evaluated from curve jets."""
    parts = lag.H_parts(kind)
    _, Hd, Hdd = parts(u, du, d2u, lam)
    if kind == "incomplete":
        return Hd

    def Hdd_fn(a, b, c, l):
        return parts(a, b, c, l)[2]

    P = Hd - along(Hdd_fn, [(u, du, d2u, lam), (du, d2u, d3u, jnp.zeros_like(lam))], 1)
    return momentum_factors(lag, kind, branch, u, du, Hdd, P)
