"""Vector algebra of the Galilean space G3.

Vectors are plain arrays whose last axis holds ``(x, y, z)``; ``x`` is the
absolute (time-like) coordinate.  Every function broadcasts over leading
axes.  A vector is *isotropic* when its first component vanishes; such
vectors are measured with the Euclidean norm of their ``(y, z)`` part.
"""

from dataclasses import dataclass

import numpy as np

#: default isotropy threshold for computed vectors
ISO_TOL = 1e-10


def _split(v):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 3:
        raise ValueError(f"expected a trailing axis of length 3, got shape {v.shape}")
    return v[..., 0], v[..., 1], v[..., 2]


def is_isotropic(v, tol=0.0):
    """True where ``|v.x| <= tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    x, _, _ = _split(v)
    return np.abs(x) <= tol


def gnorm(v, tol=0.0):
    """Galilean norm: ``|x|`` for non-isotropic vectors, ``sqrt(y^2 + z^2)`` otherwise.

    The absolute value keeps the norm nonnegative for vectors pointing
    backwards in ``x``.
    """
    x, y, z = _split(v)
    return np.where(np.abs(x) > tol, np.abs(x), np.hypot(y, z))


def gdot(a, b, tol=0.0):
    """Degenerate Galilean scalar product.

    ``a.x * b.x`` when either factor is non-isotropic, the Euclidean
    product of the ``(y, z)`` parts when both are isotropic.
    """
    ax, ay, az = _split(a)
    bx, by, bz = _split(b)
    iso = (np.abs(ax) <= tol) & (np.abs(bx) <= tol)
    return np.where(iso, ay * by + az * bz, ax * bx)


def gcross(a, b):
    """Galilean cross product, the formal determinant with first row ``(0, e2, e3)``.

    The result is always isotropic.
    """
    a1, a2, a3 = _split(a)
    b1, b2, b3 = _split(b)
    zero = np.zeros(np.broadcast(a1, b1).shape)
    return np.stack([zero, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1], axis=-1)


def det3(a, b, c):
    """``det(a, b, c)`` with the vectors as rows."""
    return np.linalg.det(np.stack(np.broadcast_arrays(
        np.asarray(a, float), np.asarray(b, float), np.asarray(c, float)), axis=-2))


@dataclass(frozen=True)
class GalileanIsometry:
    """Element of the six-parameter motion group B6.

    Acts by ``(a + x, b + c x + y cos(phi) + z sin(phi), d + e x - y sin(phi) + z cos(phi))``.
    """

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0
    e: float = 0.0
    phi: float = 0.0

    def __call__(self, p):
        return apply_isometry(self, p)

    def linear(self, v):
        """Action on difference vectors (translations dropped)."""
        x, y, z = _split(v)
        cs, sn = np.cos(self.phi), np.sin(self.phi)
        return np.stack([x,
                         self.c * x + y * cs + z * sn,
                         self.e * x - y * sn + z * cs], axis=-1)

    @classmethod
    def random(cls, rng):
        a, b, c, d, e = rng.uniform(-2.0, 2.0, size=5)
        return cls(a, b, c, d, e, rng.uniform(-np.pi, np.pi))


def apply_isometry(m, p):
    """Apply the isometry ``m`` to the point(s) ``p``."""
    return m.linear(p) + np.array([m.a, m.b, m.d])
