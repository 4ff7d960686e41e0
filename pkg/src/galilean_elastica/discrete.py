"""Direct minimization of the discretized elastic-line energies.

The curve is a C1 piecewise cubic Hermite interpolant: the unknowns are
``u_k`` and ``u'_k`` at the nodes of a uniform grid of ``[0, length]``.  The
energy density is integrated cell by cell with Gauss-Legendre quadrature and
``g = 1`` is imposed at every node.  Because the energy is the exact
integral of a conforming trial curve, the discrete free-end conditions are
consistent with the continuous ones and a clamped direction is imposed
exactly; finite-difference stencils with one-sided boundary rows, by
contrast, leave an O(h) boundary layer in the energy.

The minimizer is a damped Gauss-Newton iteration on the constraint
manifold: each step solves the linearized, equality-constrained
least-squares problem, is projected back onto ``g = 1`` and is accepted only
if it lowers the energy, so the recorded energy history never increases.

The multiplier is recovered from the constraint forces,
``lambda_k = nu_k / w_k`` with trapezoid weights ``w_k``.

:func:`discrete_functional` is a separate, purely nodal discretization
(fourth-order finite differences) used to check Euler-Lagrange operators
against finite-difference gradients.
"""

import warnings
from functools import partial

import jax
import jax.numpy as jnp
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse
from scipy.linalg import lstsq
from scipy.sparse.linalg import MatrixRankWarning, splu, spsolve
from scipy.interpolate import CubicHermiteSpline, make_interp_spline

from .errors import NoConvergence
from .lagrangian import FAST_COMPILE, lagrangian_for
from .surfaces import CurveOnSurface

GAUSS_POINTS = 4
FEAS_TOL = 1e-13


def fd_weights(offsets, order):
    """Finite-difference weights for the ``order``-th derivative on integer ``offsets``."""
    offsets = np.asarray(offsets, float)
    V = np.vander(offsets, increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[order] = np.prod(np.arange(1, order + 1))
    return np.linalg.solve(V, rhs)


def diff_matrices(n, h):
    """Fourth-order first and second derivative matrices on ``n + 1`` nodes."""
    m = n + 1
    D1, D2 = np.zeros((m, m)), np.zeros((m, m))
    for k in range(m):
        lo = min(max(k - 2, 0), m - 5)
        D1[k, lo:lo + 5] = fd_weights(np.arange(lo, lo + 5) - k, 1)
        if 2 <= k <= m - 3:
            D2[k, k - 2:k + 3] = fd_weights(np.arange(-2, 3), 2)
        else:
            lo = 0 if k < 2 else m - 6
            D2[k, lo:lo + 6] = fd_weights(np.arange(lo, lo + 6) - k, 2)
    return D1 / h, D2 / h ** 2


def trapezoid_weights(n):
    w = np.ones(n + 1)
    w[[0, -1]] = 0.5
    return w


def hermite_maps(n, h, points=GAUSS_POINTS):
    """Quadrature abscissae and weights, and the local Hermite basis there.

    Returns ``(xq, wq, cell, basis)``: ``cell[q]`` is the cell holding point
    ``q`` and ``basis[d][q]`` the ``d``-th derivatives (``d = 0, 1, 2``) of
    the four basis functions multiplying ``(u_k, u'_k, u_k+1, u'_k+1)``.
    """
    t, wt = leggauss(points)
    t = (t + 1.0) / 2.0
    local = [np.array([2 * t ** 3 - 3 * t ** 2 + 1, h * (t ** 3 - 2 * t ** 2 + t),
                       -2 * t ** 3 + 3 * t ** 2, h * (t ** 3 - t ** 2)]),
             np.array([6 * t ** 2 - 6 * t, h * (3 * t ** 2 - 4 * t + 1),
                       -6 * t ** 2 + 6 * t, h * (3 * t ** 2 - 2 * t)]) / h,
             np.array([12 * t - 6, h * (6 * t - 4), -12 * t + 6, h * (6 * t - 2)]) / h ** 2]
    cell = np.repeat(np.arange(n), points)
    basis = [np.tile(b.T, (n, 1)) for b in local]
    xq = (np.arange(n)[:, None] + t[None, :]).ravel() * h
    wq = np.tile(wt / 2.0, n) * h
    return xq, wq, cell, basis


def _pointwise(lag, kind):
    """Per-point energy residual (its square is the density), constraint and
    both densities, with Jacobians in ``(u, du, ddu)``."""
    def res(u, du, ddu):
        if kind == "complete":
            a = lag.acceleration(u, du, ddu)
            return a[1:]
        return jnp.atleast_1d(lag.kappa_n(u, du))

    def con(u, du):
        return lag.g(u, du) - 1.0

    def one(u, du, ddu):
        r = res(u, du, ddu)
        Jr = jax.jacfwd(res, argnums=(0, 1, 2))(u, du, ddu)
        c = con(u, du)
        Jc = jax.grad(con, argnums=(0, 1))(u, du)
        return r, Jr, c, Jc, lag.kappa2(u, du, ddu), lag.kappa_n(u, du) ** 2

    return jax.jit(jax.vmap(one), compiler_options=FAST_COMPILE)


class DiscreteProblem:
    """Discretized energy, constraint and their Jacobians for one problem.

    The unknown vector is the row-major ravel of ``A`` with shape
    ``(2 (n + 1), 2)``: rows ``2k`` and ``2k + 1`` hold ``u`` and ``u'`` at
    node ``k``.
    """

    def __init__(self, problem, n_segments):
        if n_segments < 8:
            raise ValueError("n_segments must be at least 8")
        self.problem = problem
        self.n = n = int(n_segments)
        self.h = problem.length / n
        self.x = np.linspace(0.0, problem.length, n + 1)
        self.xq, self.wq, cell, self.basis = hermite_maps(n, self.h)
        nq = len(self.xq)
        # rows 2 cell .. 2 cell + 3 of A feed quadrature point q
        self._rows = 2 * cell[:, None] + np.arange(4)[None, :]
        self.B = [sparse.csr_matrix((b.ravel(), (np.repeat(np.arange(nq), 4), self._rows.ravel())),
                                    shape=(nq, 2 * (n + 1))) for b in self.basis]
        self.w = trapezoid_weights(n) * self.h
        self.size = 4 * (n + 1)
        lag = lagrangian_for(problem.chart)
        self.fn = lag.compiled(f"discrete_{problem.kind}", partial(_pointwise, lag, problem.kind))

    def pack(self, U, dU):
        """Unknown vector from nodal values and derivatives (each ``(n + 1, 2)``)."""
        A = np.empty((2 * (self.n + 1), 2))
        A[0::2], A[1::2] = U, dU
        return A.ravel()

    def unpack(self, z):
        A = np.asarray(z, float).reshape(-1, 2)
        return A[0::2], A[1::2]

    def evaluate(self, z, want_jac=True):
        """Weighted residual ``R`` (``E = R.R``), constraint values ``c`` and,
        with ``want_jac``, their sparse Jacobians ``J`` and ``C``."""
        A = np.asarray(z, float).reshape(-1, 2)
        nq, m = len(self.xq), self.n + 1
        B0, B1, B2 = self.B
        pts = (np.vstack([B0 @ A, A[0::2]]), np.vstack([B1 @ A, A[1::2]]),
               np.vstack([B2 @ A, np.zeros((m, 2))]))
        r, Jr, c, Jc, k2, kn2 = jax.tree_util.tree_map(np.asarray, self.fn(*pts))
        r, c = r[:nq], c[nq:]
        sw = np.sqrt(self.wq)
        R = (sw[:, None] * r).ravel()
        out = dict(R=R, c=c, K=float(self.wq @ k2[:nq]), Kn=float(self.wq @ kn2[:nq]),
                   E=float(R @ R))
        if not want_jac:
            return out
        b0, b1, b2 = self.basis
        Ru, Rd, Rdd = (a[:nq] for a in Jr)
        # d r_q / d A[row, comp] over the four rows of the cell holding q
        loc = (np.einsum("qic,qa->qiac", Ru, b0) + np.einsum("qic,qa->qiac", Rd, b1)
               + np.einsum("qic,qa->qiac", Rdd, b2)) * sw[:, None, None, None]
        rdim = r.shape[1]
        rows = np.broadcast_to((np.arange(nq)[:, None] * rdim + np.arange(rdim))[:, :, None, None],
                               loc.shape)
        cols = np.broadcast_to((2 * self._rows[:, None, :, None] + np.arange(2)), loc.shape)
        J = sparse.csr_matrix((loc.ravel(), (rows.ravel(), cols.ravel())),
                              shape=(nq * rdim, self.size))
        Cu, Cd = (a[nq:] for a in Jc)
        k = np.arange(m)
        C = sparse.csr_matrix((np.hstack([Cu, Cd]).ravel(),
                               (np.repeat(k, 4), (4 * k[:, None] + np.arange(4)).ravel())),
                              shape=(m, self.size))
        out.update(J=J, C=C)
        return out


def _fixed_rows(dp, start_data):
    """Linear equality rows ``A z = b`` of a clamped start."""
    if start_data is None:
        return sparse.csr_matrix((0, dp.size)), np.zeros(0)
    u0, du0, gi = start_data
    cols, rhs = [0, 1], [u0[0], u0[1]]
    if dp.problem.kind == "complete":
        cols.append(2 + gi)
        rhs.append(du0[gi])
    A = sparse.csr_matrix((np.ones(len(cols)), (np.arange(len(cols)), cols)),
                          shape=(len(cols), dp.size))
    return A, np.array(rhs, float)


def _restore(dp, z, A, b, tol=FEAS_TOL, iters=30):
    """Newton projection onto ``g = 1`` and the linear start conditions."""
    for _ in range(iters):
        ev = dp.evaluate(z)
        viol = np.concatenate([ev["c"], A @ z - b])
        if np.max(np.abs(viol)) < tol:
            return z, True
        G = sparse.vstack([ev["C"], A]).tocsr()
        try:
            z = z - G.T @ spsolve((G @ G.T).tocsc(), viol)
        except RuntimeError:
            z = z - G.T @ np.linalg.lstsq((G @ G.T).toarray(), viol, rcond=None)[0]
    ev = dp.evaluate(z, want_jac=False)
    return z, bool(np.max(np.abs(np.concatenate([ev["c"], A @ z - b]))) < 100 * tol)


def _damped_step(J, R, G, viol, mu):
    """Minimize ``|J s + R|^2 + mu |s|^2`` subject to ``G s = -viol``.

    The augmented (KKT) system keeps the conditioning of ``J`` rather than
    squaring it as the normal equations would, which matters for the weakly
    curved directions of degenerate minimizers.  A rank-deficient ``G``
    falls back to dense null-space elimination.
    """
    nr, nz, nc = J.shape[0], J.shape[1], G.shape[0]
    K = sparse.bmat([[sparse.identity(nr), -J, None],
                     [J.T, mu * sparse.identity(nz), G.T],
                     [None, G, None]], format="csc")
    rhs = np.concatenate([R, np.zeros(nz), -viol])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", MatrixRankWarning)
            sol = splu(K).solve(rhs)
        if np.all(np.isfinite(sol)):
            return sol[nr:nr + nz]
    except (RuntimeError, MatrixRankWarning):
        pass
    Jd, Gd = J.toarray(), G.toarray()
    Us, sv, Vt = np.linalg.svd(Gd)
    rank = int(np.sum(sv > 1e-10 * sv[0]))
    Z = Vt[rank:].T
    s0 = -Vt[:rank].T @ ((Us[:, :rank].T @ viol) / sv[:rank])
    lhs = np.vstack([Jd @ Z, np.sqrt(mu) * np.eye(Z.shape[1])])
    rhs = -np.concatenate([R + Jd @ s0, np.zeros(Z.shape[1])])
    return s0 + Z @ lstsq(lhs, rhs, lapack_driver="gelsy", check_finite=False)[0]


def minimize_discrete(dp, z0, start_data=None, max_iter=400, rtol=1e-14, energy_floor=1e-20):
    """Projected damped Gauss-Newton from the unknown vector ``z0``.

    Iteration stops when the energy falls below ``energy_floor`` or stops
    decreasing (relative gain below ``rtol`` on three consecutive accepted
    steps, or ten consecutive rejected steps).
    Returns ``(U, dU, info)`` with nodal values, nodal derivatives and the
    energy history of accepted iterates.
    """
    A, b = _fixed_rows(dp, start_data)
    z, ok = _restore(dp, np.asarray(z0, float).ravel(), A, b)
    if not ok:
        raise NoConvergence("could not project the initial guess onto the constraint")
    ev = dp.evaluate(z)
    history = [ev["E"]]
    scale = max(1.0, float(np.max(ev["J"].multiply(ev["J"]).sum(axis=0))))
    mu = 1e-8 * scale
    stall = rejected = 0
    it = 0
    for it in range(max_iter):
        if ev["E"] < energy_floor or stall >= 3 or rejected >= 10 or mu > 1e20 * scale:
            break
        G = sparse.vstack([ev["C"], A]).tocsr()
        viol = np.concatenate([ev["c"], A @ z - b])
        step = _damped_step(ev["J"], ev["R"], G, viol, mu)
        trial, ok = _restore(dp, z + step, A, b)
        ev_t = dp.evaluate(trial) if ok else None
        if ok and ev_t["E"] < ev["E"]:
            gain = (ev["E"] - ev_t["E"]) / max(ev["E"], 1e-300)
            z, ev = trial, ev_t
            history.append(ev["E"])
            mu = max(mu / 10.0, 1e-24 * scale)
            stall = stall + 1 if gain < rtol else 0
            rejected = 0
        else:
            mu *= 4.0
            rejected += 1
    # multiplier from the constraint forces: 2 J^T R + G^T nu = 0
    G = sparse.vstack([ev["C"], A]).toarray()
    nu = np.linalg.lstsq(G.T, -2.0 * (ev["J"].T @ ev["R"]), rcond=None)[0][:dp.n + 1]
    U, dU = dp.unpack(z)
    return U, dU, dict(history=history, iterations=it + 1, mu=mu, lam=nu / dp.w,
                       K=ev["K"], Kn=ev["Kn"], E=ev["E"],
                       constraint=float(np.max(np.abs(ev["c"]))))


def _H_batch(chart, kind):
    lag = lagrangian_for(chart)
    return lag.compiled(f"H_vec_{kind}", lambda: jax.jit(jax.vmap(partial(lag.H, kind))))


def discrete_functional(chart, kind, U, lam, length):
    """``sum_k w_k H(u_k, (D1 U)_k, (D2 U)_k, lam_k)`` on ``len(U) - 1`` segments,
    with fourth-order finite differences and trapezoid weights ``w_k``.

    ``U`` may carry leading batch dimensions.  Away from the ends, the
    gradient with respect to node ``k`` approximates ``w_k`` times the
    Euler-Lagrange operator at ``x_k``.
    """
    U = np.asarray(U, float)
    n = U.shape[-2] - 1
    h = length / n
    D1, D2 = diff_matrices(n, h)
    lam = np.broadcast_to(np.asarray(lam, float), U.shape[:-1])
    flat = U.reshape(-1, n + 1, 2)
    H = _H_batch(chart, kind)(flat.reshape(-1, 2), (D1 @ flat).reshape(-1, 2),
                              (D2 @ flat).reshape(-1, 2), lam.reshape(-1))
    out = np.asarray(H).reshape(-1, n + 1) @ (trapezoid_weights(n) * h)
    return out.reshape(U.shape[:-2]) if U.ndim > 2 else float(out[0])


def functional_gradient(chart, kind, U, lam, length, h_fd=1e-6):
    """Central finite-difference gradient of :func:`discrete_functional`."""
    U = np.asarray(U, float)
    size = U.size
    E = np.eye(size).reshape(size, *U.shape) * h_fd
    F = discrete_functional(chart, kind, np.concatenate([U + E, U - E]), lam, length)
    return ((F[:size] - F[size:]) / (2.0 * h_fd)).reshape(U.shape)


def el_gradient_check(chart, kind, jet_fn, lam_fn, length=1.0, n=64, h_fd=1e-6, margin=6):
    """Largest relative gap between the Euler-Lagrange operator and the scaled
    finite-difference gradient of the discretized energy at interior nodes.

    ``jet_fn(x)`` returns ``(5, 2)`` curve jets and ``lam_fn(x)`` the
    multiplier and its derivative, both at arrays ``x``.
    """
    from .variational import Multiplier, el_residual

    x = np.linspace(0.0, length, n + 1)
    curve = CurveOnSurface.from_function(jet_fn, x)
    lam, dlam = lam_fn(x)
    res = el_residual(chart, curve, Multiplier(x, lam, dlam), kind)
    el = np.column_stack([res.r1, res.r2])[margin:-margin]
    grad = functional_gradient(chart, kind, curve.u, lam, length, h_fd)
    w = trapezoid_weights(n) * (length / n)
    scaled = (grad / w[:, None])[margin:-margin]
    return float(np.max(np.abs(scaled - el)) / max(float(np.max(np.abs(el))), 1e-300))


def discrete_curve(x, U, dU):
    """Curve through the nodes (jets up to order 4).

    Positions use the Hermite interpolant; higher derivatives come from a
    quintic spline through the nodal derivatives.
    """
    pos = CubicHermiteSpline(x, U, dU, axis=0)
    vel = make_interp_spline(x, dU, k=5)

    def jet_fn(t):
        return np.stack([pos(t), vel(t)] + [vel.derivative(k)(t) for k in (1, 2, 3)])

    return CurveOnSurface(np.asarray(x, float), jet_fn(x), jet_fn, dict(method="discrete"))
