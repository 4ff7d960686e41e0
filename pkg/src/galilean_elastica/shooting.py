"""Multiple shooting over the normal form of the Euler-Lagrange equations.

Complete problem.  The state is ``s = (u, u', u'', P)`` with the momentum
``P = H_du - Q'`` and ``Q = H_ddu``.  Given ``s``, the pair
``(u''', lambda)`` solves the affine system

    Q'(u, u', u'', u''') - H_du(lambda) + P = 0,    g'' = 0,

(``H_ddu`` does not involve ``lambda``, and ``H_du`` is affine in it), and
then ``s' = (u', u'', u''', H_u)``.  The constraint enters differentiated
twice, with the invariants ``g = 1`` and ``g' = 0`` imposed at the start and
restored by projection during integration.

Incomplete problem.  The state is ``s = (u, u', lambda)`` and
``(u'', lambda')`` solves ``(H_du)' = H_u``, ``g' = 0``; the invariant
``g = 1`` is imposed at the start.  This system is singular wherever
``H_du`` is degenerate in the direction allowed by the constraint, which is
the case along straight generators of cylinders; the solver then reports
failure so the caller can fall back to collocation.
"""

from functools import partial

import jax
import jax.numpy as jnp
import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.optimize import least_squares

from .errors import NoConvergence
from .lagrangian import FAST_COMPILE, along, lagrangian_for, momentum_factors
from .surfaces import CurveOnSurface

SEGMENTS = 8
STEPS = 64
PROJECT_EVERY = 10
KKT_COND_MAX = 1e12
FD_STEP = 1e-6
PIN_WEIGHTS = (1e-8, 1e-14)


def state_width(kind):
    return 8 if kind == "complete" else 5


def _normal_form(lag, kind):
    """``field(s) -> (s', v, A)``: ``v`` holds the solved top derivative and
    multiplier (or its rate), ``A`` is the matrix of the affine system."""
    parts = lag.H_parts(kind)
    zero2 = jnp.zeros(2)

    if kind == "complete":
        def Hdd_fn(u, du, d2u):
            return parts(u, du, d2u, 0.0)[2]

        def affine(s, v):
            u, du, d2u, P = s[0:2], s[2:4], s[4:6], s[6:8]
            d3u, lam = v[:2], v[2]
            _, dQ = jax.jvp(Hdd_fn, (u, du, d2u), (du, d2u, d3u))
            _, Hd, _ = parts(u, du, d2u, lam)
            g2 = along(lag.g, [(u, du), (du, d2u), (d2u, d3u)], 2)
            return jnp.concatenate([dQ - Hd + P, jnp.atleast_1d(g2)])

        def field_from(s, v):
            u, du, d2u = s[0:2], s[2:4], s[4:6]
            Hu = parts(u, du, d2u, v[2])[0]
            return jnp.concatenate([du, d2u, v[:2], Hu])
    else:
        def affine(s, v):
            u, du, lam = s[0:2], s[2:4], s[4]
            d2u, dlam = v[:2], v[2]
            _, dP = jax.jvp(lambda a, b, c: parts(a, b, zero2, c)[1], (u, du, lam), (du, d2u, dlam))
            Hu = parts(u, du, zero2, lam)[0]
            g1 = jax.jvp(lag.g, (u, du), (du, d2u))[1]
            return jnp.concatenate([dP - Hu, jnp.atleast_1d(g1)])

        def field_from(s, v):
            return jnp.concatenate([s[2:4], v[:2], v[2:3]])

    def kkt(s):
        # the affine map in v = (top derivative, multiplier rate) has matrix
        # [[H_{ww}, -+g_du], [g_du, 0]] with w = ddu (complete) or du (incomplete)
        u, du = s[0:2], s[2:4]
        gd = jax.grad(lag.g, argnums=1)(u, du)
        if kind == "complete":
            Hww = jax.jacfwd(Hdd_fn, argnums=2)(u, du, s[4:6])
            col = -gd
        else:
            Hww = jax.jacfwd(lambda b: parts(u, b, zero2, s[4])[1])(du)
            col = gd
        return jnp.block([[Hww, col[:, None]], [gd[None, :], jnp.zeros((1, 1))]])

    @jax.jit
    def field(s):
        A = kkt(s)
        v = jnp.linalg.solve(A, -affine(s, jnp.zeros(3)))
        return field_from(s, v), v, A

    return field


def _project(lag, kind, s):
    """Restore ``g = 1`` (and ``g' = 0`` for the complete problem)."""
    u, du = s[0:2], s[2:4]
    du = du / jnp.sqrt(lag.g(u, du))       # g is homogeneous of degree 2 in du
    if kind == "incomplete":
        return s.at[2:4].set(du)
    d2u = s[4:6]
    gu, gd = jax.grad(lag.g, argnums=(0, 1))(u, du)
    d2u = d2u - (gu @ du + gd @ d2u) / (gd @ gd) * gd
    return s.at[2:4].set(du).at[4:6].set(d2u)


# classical RK4 tableau, walked one stage per scan iteration so that the
# compiled loop body holds a single copy of the vector field
_RK_NEXT = np.array([0.5, 0.5, 1.0, 0.0])
_RK_WEIGHT = np.array([1.0, 2.0, 2.0, 1.0]) / 6.0


def _flow(lag, kind, field, h, steps, s):
    """RK4 flow over one segment with periodic projection.

    Returns the end state and, at the ``steps + 1`` grid points, the states,
    the solved ``v`` and the affine-system matrices.
    """
    nxt, wts = jnp.asarray(_RK_NEXT), jnp.asarray(_RK_WEIGHT)

    def stage(carry, i):
        base, point, acc = carry
        k, v, A = field(point)
        st = i % 4
        acc = acc + wts[st] * k
        new_base = base + h * acc
        step_no = i // 4 + 1
        new_base = jnp.where(step_no % PROJECT_EVERY == 0, _project(lag, kind, new_base), new_base)
        last = st == 3
        base_out = jnp.where(last, new_base, base)
        point_out = jnp.where(last, new_base, base + nxt[st] * h * k)
        acc_out = jnp.where(last, jnp.zeros_like(acc), acc)
        return (base_out, point_out, acc_out), (point, v, A)

    (end, _, _), (pts, vs, As) = jax.lax.scan(stage, (s, s, jnp.zeros_like(s)),
                                              jnp.arange(4 * steps))
    _, v_end, A_end = field(end)
    # stage-0 evaluation points are the grid states
    return (end, jnp.concatenate([pts[::4], end[None]]), jnp.concatenate([vs[::4], v_end[None]]),
            jnp.concatenate([As[::4], A_end[None]]))


def _builder(lag, kind, length, start, given_index, branches, M, K):
    field = _normal_form(lag, kind)
    h = length / (M * K)
    parts = lag.H_parts(kind)
    ns = state_width(kind)

    # One compiled batch flow of fixed shape serves the boundary map, its
    # difference Jacobian and the dense output.  This kernel runs many times,
    # so it is compiled with full optimization.
    flow_batch = jax.jit(jax.vmap(partial(_flow, lag, kind, field, h, K)))
    width = (2 * ns + 1) * M

    def flow(S, end_only=False):
        S = np.asarray(S, float)
        padded = np.concatenate([S, np.repeat(S[:1], width - len(S), axis=0)])
        out = flow_batch(padded)
        if end_only:
            return np.asarray(out[0])[:len(S)]
        return tuple(np.asarray(a)[:len(S)] for a in out)

    def invariants(s):
        u, du = s[0:2], s[2:4]
        rows = [jnp.atleast_1d(lag.g(u, du) - 1.0)]
        if kind == "complete":
            rows.append(jnp.atleast_1d(jax.jvp(lag.g, (u, du), (du, s[4:6]))[1]))
        return jnp.concatenate(rows)

    def natural(branch):
        def f(s):
            u, du = s[0:2], s[2:4]
            if kind == "complete":
                Q = parts(u, du, s[4:6], 0.0)[2]
                return momentum_factors(lag, kind, branch, u, du, Q, s[6:8])
            return momentum_factors(lag, kind, branch, u, du, None, parts(u, du, jnp.zeros(2), s[4])[1])
        return f

    def clamped(s, u0, du0):
        rows = [s[0:2] - u0]
        if kind == "complete":
            rows.append(jnp.atleast_1d(s[2 + given_index] - du0[given_index]))
        return jnp.concatenate(rows)

    bc0 = natural(branches[0]) if start is None else clamped
    bc1 = natural(branches[1])

    def ends(s0, s1, *extra):
        return jnp.concatenate([invariants(s0), bc0(s0, *extra)]), bc1(s1)

    def ends_jac(s0, s1, *extra):
        return ends(s0, s1, *extra), jax.jacfwd(ends, argnums=(0, 1))(s0, s1, *extra)

    ends_j = jax.jit(ends_jac, compiler_options=FAST_COMPILE)
    eye = np.eye(ns)

    def evaluate(z, u0, du0):
        S = z.reshape(M, ns)
        extra = () if start is None else (u0, du0)
        # central differences of the segment maps
        step = FD_STEP * np.maximum(1.0, np.abs(S))            # (M, ns)
        batch = np.concatenate([S[None], S[None] + step[None] * eye[:, None, :],
                                S[None] - step[None] * eye[:, None, :]])   # (2 ns + 1, M, ns)
        E = flow(batch.reshape(-1, ns), end_only=True).reshape(2 * ns + 1, M, ns)
        Phi = ((E[1:ns + 1] - E[ns + 1:]) / (2 * step.T[:, :, None])).transpose(1, 2, 0)
        E = E[0]
        (r0, r1), ((J0, _), (_, J1)) = ends_j(S[0], E[-1], *extra)
        r0, r1, J0, J1 = (np.asarray(a) for a in (r0, r1, J0, J1))
        r = np.concatenate([(E[:-1] - S[1:]).ravel(), r0, r1])
        J = np.zeros((len(r), M * ns))
        for j in range(M - 1):
            J[j * ns:(j + 1) * ns, j * ns:(j + 1) * ns] = Phi[j]
            J[j * ns:(j + 1) * ns, (j + 1) * ns:(j + 2) * ns] = -eye
        row = (M - 1) * ns
        J[row:row + len(r0), :ns] = J0
        J[row + len(r0):, (M - 1) * ns:] = J1 @ Phi[-1]
        return r, J

    return evaluate, flow


def initial_states(lag, kind, u, du, d2u, d3u, lam):
    """Shooting states from curve jets (rows) and multiplier values."""
    u, du, d2u, d3u = (jnp.asarray(a, float) for a in (u, du, d2u, d3u))
    lam = jnp.asarray(lam, float)
    if kind == "incomplete":
        return np.column_stack([u, du, lam])
    parts = lag.H_parts(kind)

    def P(a, b, c, d, l):
        _, Hd, _ = parts(a, b, c, l)
        _, dQ = jax.jvp(lambda p, q, r: parts(p, q, r, 0.0)[2], (a, b, c), (b, c, d))
        return Hd - dQ

    return np.column_stack([u, du, d2u, np.asarray(jax.vmap(P)(u, du, d2u, d3u, lam))])


def solve_shooting(problem, S0, branches, start_data=None, M=SEGMENTS, K=STEPS,
                   max_nfev=200, tol=1e-8):
    """Multiple shooting from segment start states ``S0`` (``(M, width)``).

    Returns a dict with the dense curve, ``lam``, ``dlam`` and diagnostics.
    Jets come from the flow up to order 3 (complete) or 2 (incomplete); the
    next order is the derivative of a quintic spline through the top one.  Raises :class:`NoConvergence` when the boundary map does
    not reach ``tol``, the normal form is singular or the flow blows up.
    """
    lag = lagrangian_for(problem.chart)
    kind = problem.kind
    if start_data is None:
        u0, du0, gi = np.zeros(2), np.zeros(2), 0
    else:
        u0, du0, gi = start_data
    key = f"shoot_{kind}_{M}_{K}_{problem.length!r}_{problem.start is None}_{gi}_{branches}"
    evaluate, flow = lag.compiled(
        key, partial(_builder, lag, kind, problem.length, problem.start, gi, branches, M, K))
    args = (np.asarray(u0, float), np.asarray(du0, float))
    S0 = np.asarray(S0, float)

    # residual and Jacobian come from the same batch flow; memoize the last one
    # Weak pinning rows select the member of a degenerate solution family
    # nearest the initial guess.  Their pull, of order PIN_WEIGHT**2, stalls
    # progress along directions where the residual is of high order, so a
    # second pass with a far weaker pin polishes the result.
    z0 = S0.ravel()
    res = None
    for weight in PIN_WEIGHTS:
        memo = {}
        pin = weight * np.eye(len(z0))

        def rj(z, memo=memo, weight=weight, pin=pin):
            key = z.tobytes()
            if key not in memo:
                memo.clear()
                r, J = evaluate(z, *args)
                r = np.concatenate([np.where(np.isfinite(r), r, 1e10), weight * (z - z0)])
                memo[key] = (r, np.vstack([np.nan_to_num(J), pin]))
            return memo[key]

        x0 = z0 if res is None else res.x
        try:
            res = least_squares(lambda z: rj(z)[0], x0, jac=lambda z: rj(z)[1], method="lm",
                                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise NoConvergence(f"shooting failed: {exc}") from exc
    resid = float(np.max(np.abs(res.fun[:-len(z0)])))
    if not np.isfinite(resid) or resid > tol:
        raise NoConvergence(f"shooting stalled at boundary residual {resid:.3g}")

    ns = state_width(kind)
    S = res.x.reshape(M, ns)
    _, traj, v, A = flow(S)
    # segments share their end points: keep the first sample of segment 0 only
    states = np.concatenate([traj[0]] + [t[1:] for t in traj[1:]])
    v = np.concatenate([v[0]] + [t[1:] for t in v[1:]])
    kkt = float(np.max(np.linalg.cond(A.reshape(-1, 3, 3))))
    if not np.isfinite(kkt) or kkt > KKT_COND_MAX:
        raise NoConvergence(f"normal form is singular along the solution (cond {kkt:.3g})")
    x = np.linspace(0.0, problem.length, len(states))

    def rate(y):
        return make_interp_spline(x, y, k=5).derivative()(x)

    if kind == "complete":
        derivs = np.stack([states[:, 0:2], states[:, 2:4], states[:, 4:6], v[:, :2], rate(v[:, :2])])
        lam, dlam = v[:, 2], rate(v[:, 2])
    else:
        derivs = np.stack([states[:, 0:2], states[:, 2:4], v[:, :2], rate(v[:, :2])])
        lam, dlam = states[:, 4], v[:, 2]
    curve = CurveOnSurface.from_jets(x, derivs, method="shooting")
    return dict(x=x, curve=curve, lam=lam, dlam=dlam, states=S, residual=resid,
                nfev=int(res.nfev), kkt_cond=kkt)
