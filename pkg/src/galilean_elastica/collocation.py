"""Chebyshev collocation of the Euler-Lagrange boundary-value problem.

The equations are written as a first-order system in momentum variables,
``Q = H_ddu``, ``P = H_du - Q'`` and ``P' = H_u`` (the incomplete problem
has no ``Q``), so only first derivatives of ``H`` are ever traced.  The
unknowns are the nodal values of ``u``, ``u'``, ``u''``, ``Q``, ``P`` and
``lambda`` at Chebyshev-Lobatto nodes.  Derivative relations, momentum
equations and ``g = 1`` are imposed at every node together with the
boundary conditions, and the overdetermined system is solved by
Levenberg-Marquardt.
"""

from functools import partial
from types import SimpleNamespace

import jax
import jax.numpy as jnp
import numpy as np
from numpy.polynomial import Chebyshev
from scipy.optimize import least_squares

from .lagrangian import FAST_COMPILE, along, lagrangian_for, momentum_factors
from .shooting import PIN_WEIGHTS
from .surfaces import CurveOnSurface


def cheb_grid(N, length):
    """Nodes on ``[0, length]`` (ascending) and the differentiation matrix."""
    t = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.hstack([2.0, np.ones(N - 1), 2.0]) * (-1.0) ** np.arange(N + 1)
    dT = t[:, None] - t[None, :]
    D = np.outer(c, 1.0 / c) / (dT + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    return length * (1.0 - t) / 2.0, -2.0 / length * D


def state_width(kind):
    """Nodal unknowns: ``u, u', u'', Q, P, lambda`` (complete) or ``u, u', P, lambda``."""
    return 11 if kind == "complete" else 7


def layout(kind):
    """Column slices of the nodal state."""
    if kind == "complete":
        return dict(u=slice(0, 2), du=slice(2, 4), d2u=slice(4, 6), Q=slice(6, 8),
                    P=slice(8, 10), lam=10)
    return dict(u=slice(0, 2), du=slice(2, 4), P=slice(4, 6), lam=6)


def state_from_jets(lag, kind, u, du, d2u, d3u, lam):
    """Nodal states (rows) from curve jets and multiplier samples."""
    parts = jax.vmap(lag.H_parts(kind))
    zero = jnp.zeros_like(jnp.asarray(lam))
    _, Hd, Hdd = parts(u, du, d2u, jnp.asarray(lam))
    if kind == "incomplete":
        return np.column_stack([u, du, Hd, lam])

    def Hdd_fn(a, b, c, l):
        return lag.H_parts(kind)(a, b, c, l)[2]

    dQ = jax.vmap(lambda *z: along(Hdd_fn, [z[:4], z[4:]], 1))(u, du, d2u, lam, du, d2u, d3u, zero)
    return np.column_stack([u, du, d2u, Hdd, np.asarray(Hd) - np.asarray(dQ), lam])


def _residual_builder(lag, kind, N, length, start, given_index, branches):
    """Residual and Jacobian of the collocation system.

    Every node contributes ``width`` equations that depend only on the
    node's state ``y`` and on ``dy = (D Y)[node]``; boundary rows depend on
    the end states.  Pointwise Jacobians are traced once and assembled as
    ``A_k delta_kl + B_k D_kl``.
    """
    x, D = cheb_grid(N, length)
    n, m = N + 1, state_width(kind)
    L = layout(kind)
    parts = lag.H_parts(kind)

    def loc(y, dy):
        u, du, P, lam = y[L["u"]], y[L["du"]], y[L["P"]], y[L["lam"]]
        g = jnp.atleast_1d(lag.g(u, du) - 1.0)
        if kind == "incomplete":
            Hu, Hd, _ = parts(u, du, jnp.zeros(2), lam)
            return jnp.concatenate([dy[L["u"]] - du, P - Hd, dy[L["P"]] - Hu, g])
        d2u, Q = y[L["d2u"]], y[L["Q"]]
        Hu, Hd, Hdd = parts(u, du, d2u, lam)
        return jnp.concatenate([dy[L["u"]] - du, dy[L["du"]] - d2u, Q - Hdd,
                                P + dy[L["Q"]] - Hd, dy[L["P"]] - Hu, g])

    def natural(branch):
        def f(y, dy):
            Q = y[L["Q"]] if kind == "complete" else None
            return momentum_factors(lag, kind, branch, y[L["u"]], y[L["du"]], Q, y[L["P"]])
        return f

    def clamped(y, dy, u0, du0):
        rows = [y[L["u"]] - u0]
        if kind == "complete":
            rows.append(jnp.atleast_1d(y[L["du"]][given_index] - du0[given_index]))
        return jnp.concatenate(rows)

    bc0 = natural(branches[0]) if start is None else clamped
    bc1 = natural(branches[1])

    def with_jac(f):
        def both(*a):
            return f(*a), jax.jacfwd(f, argnums=(0, 1))(*a)
        return both

    loc_all = jax.jit(jax.vmap(with_jac(loc)), compiler_options=FAST_COMPILE)
    bc0_j = jax.jit(with_jac(bc0), compiler_options=FAST_COMPILE)
    bc1_j = jax.jit(with_jac(bc1), compiler_options=FAST_COMPILE)
    eye = np.eye(n)

    def evaluate(z, u0, du0, want_jac):
        Y = z.reshape(n, m)
        dY = D @ Y
        extra0 = () if start is None else (u0, du0)
        r_loc, (A, B) = loc_all(Y, dY)
        r0, (A0, B0) = bc0_j(Y[0], dY[0], *extra0)
        r1, (A1, B1) = bc1_j(Y[-1], dY[-1])
        r = np.concatenate([np.asarray(r_loc).ravel(), np.asarray(r0), np.asarray(r1)])
        if not want_jac:
            return r
        A, B = np.asarray(A), np.asarray(B)
        J = (np.einsum("kij,kl->kilj", A, eye) + np.einsum("kij,kl->kilj", B, D))
        J = J.reshape(n * m, n * m)

        def bc_rows(Ab, Bb, node):
            Ab, Bb = np.asarray(Ab), np.asarray(Bb)
            rows = np.einsum("ij,l->ilj", Bb, D[node]).copy()
            rows[:, node, :] += Ab
            return rows.reshape(len(Ab), n * m)

        return r, np.vstack([J, bc_rows(A0, B0, 0), bc_rows(A1, B1, n - 1)])

    return x, D, evaluate


def solve_collocation(problem, guess, branches, N=40, max_nfev=400, start_data=None,
                      accept_tol=1e-12):
    """Collocate ``problem`` starting from ``guess(x) -> (Y (n, width))``.

    The columns of ``Y`` follow :func:`layout`.  Returns node values, interpolants and diagnostics.
    """
    lag = lagrangian_for(problem.chart)
    if start_data is None:
        u0, du0, gi = np.zeros(2), np.zeros(2), 0
    else:
        u0, du0, gi = start_data
    key = f"colloc_{problem.kind}_{N}_{problem.length!r}_{problem.start is None}_{gi}_{branches}"
    x, D, evaluate = lag.compiled(key, partial(_residual_builder, lag, problem.kind, N,
                                               problem.length, problem.start, gi, branches))
    m = state_width(problem.kind)
    z0 = np.asarray(guess(x), float).ravel()
    args = (np.asarray(u0, float), np.asarray(du0, float))
    # weak pinning rows, as in shooting, keep degenerate families at the guess
    res = None
    r0 = evaluate(z0, *args, False)
    if np.max(np.abs(r0)) <= accept_tol:
        # the guess already solves the system; iterating would only steer
        # roundoff along degenerate directions
        res = SimpleNamespace(x=z0, fun=np.concatenate([r0, np.zeros(len(z0))]), nfev=1, status=0)
    for weight in PIN_WEIGHTS if res is None else ():
        def fun(z, weight=weight):
            return np.concatenate([evaluate(z, *args, False), weight * (z - z0)])

        def jac(z, weight=weight):
            return np.vstack([evaluate(z, *args, True)[1], weight * np.eye(len(z0))])

        res = least_squares(fun, z0 if res is None else res.x, jac=jac, method="lm",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
    Y = res.x.reshape(N + 1, m)
    dom = [0.0, problem.length]
    L = layout(problem.kind)
    levels = ["u", "du", "d2u"] if problem.kind == "complete" else ["u", "du"]
    polys = [[Chebyshev.fit(x, Y[:, L[lev]][:, c], N, domain=dom) for c in range(2)]
             for lev in levels]
    lpoly = Chebyshev.fit(x, Y[:, -1], N, domain=dom)
    return dict(x=x, Y=Y, U=Y[:, :2], lam=Y[:, -1], polys=polys, lam_poly=lpoly,
                residual=float(np.max(np.abs(res.fun[:-len(z0)]))), nfev=int(res.nfev), status=int(res.status))


def polys_to_curve(levels, x, order=4):
    """Curve from interpolants of ``u`` and its derivatives (one pair per level).

    Orders beyond the last level are derivatives of its interpolant; the
    lower levels are used directly, which keeps roundoff in the nodal values
    from being amplified by repeated spectral differentiation.
    """
    top = len(levels) - 1

    def stack(t):
        out = []
        for k in range(order + 1):
            pair = levels[min(k, top)]
            m = k - min(k, top)
            out.append(np.stack([p.deriv(m)(t) if m else p(t) for p in pair], axis=-1))
        return np.stack(out)

    return CurveOnSurface(np.asarray(x, float), stack(np.asarray(x, float)), stack)
