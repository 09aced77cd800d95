"""SU(2) and su(2) numerics on unit quaternions.

A unit quaternion ``w + x i + y j + z k`` is identified with the
special-unitary matrix

    [[ w + i x,   y + i z],
     [-y + i z,   w - i x]]

so ``i`` is ``diag(i, -i)``.  Pure quaternions ``x i + y j + z k`` are the
Lie algebra; with this basis the invariant inner product
``<a, b> = -tr(ab)/2`` is the Euclidean dot product of coordinates.
"""

from __future__ import annotations

import math
from collections import namedtuple

import numpy as np

from .errors import DegenerateElement, TraceMismatch

NORM_TOL = 1e-6
DEFAULT_EPS = 1e-9
TRACE_TOL = 1e-8

_Quat = namedtuple("_Quat", "w x y z")
_Vec = namedtuple("_Vec", "x y z")


class Su2Element(_Quat):
    """Immutable unit quaternion.

    The constructor renormalizes; inputs whose norm is off by more than
    ``NORM_TOL`` are rejected.  Use :meth:`normalized` for arbitrary nonzero
    input.
    """

    __slots__ = ()

    def __new__(cls, w, x, y, z):
        w, x, y, z = float(w), float(x), float(y), float(z)
        n = math.sqrt(w * w + x * x + y * y + z * z)
        if not (1.0 - NORM_TOL <= n <= 1.0 + NORM_TOL):
            raise ValueError(f"quaternion norm {n!r} is not 1 within {NORM_TOL}")
        return super().__new__(cls, w / n, x / n, y / n, z / n)

    @classmethod
    def normalized(cls, coords):
        q = np.asarray(coords, dtype=float)
        n = float(np.linalg.norm(q))
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("cannot normalize a zero or non-finite quaternion")
        return cls(*(q / n))

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=complex)
        return cls.normalized([m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag])

    @classmethod
    def from_json(cls, data, normalize=False):
        if len(data) != 4:
            raise ValueError("Su2Element JSON must be a list of 4 numbers")
        return cls.normalized(data) if normalize else cls(*data)

    def to_json(self):
        return [self.w, self.x, self.y, self.z]

    @property
    def coords(self):
        return np.array(self, dtype=float)

    @property
    def vector(self):
        """Imaginary part as a length-3 array."""
        return np.array([self.x, self.y, self.z])

    def trace(self):
        return 2.0 * self.w

    def inverse(self):
        return Su2Element.__base__.__new__(Su2Element, self.w, -self.x, -self.y, -self.z)

    def __neg__(self):
        return Su2Element.__base__.__new__(Su2Element, -self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if not isinstance(other, Su2Element):
            return NotImplemented
        a1, b1, c1, d1 = self
        a2, b2, c2, d2 = other
        return Su2Element(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    def conj_by(self, x):
        """Return ``x self x^-1``."""
        return x * self * x.inverse()

    def distance(self, other):
        """Euclidean distance between coordinate vectors."""
        return math.sqrt(sum((a - b) ** 2 for a, b in zip(self, other)))

    def matrix(self):
        return np.array(
            [
                [complex(self.w, self.x), complex(self.y, self.z)],
                [complex(-self.y, self.z), complex(self.w, -self.x)],
            ]
        )

    def __repr__(self):
        return f"Su2Element({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


class LieVector(_Vec):
    """Element of su(2) as coefficients of the quaternion units i, j, k."""

    __slots__ = ()

    def __new__(cls, x, y, z):
        return super().__new__(cls, float(x), float(y), float(z))

    @classmethod
    def from_json(cls, data):
        if len(data) != 3:
            raise ValueError("LieVector JSON must be a list of 3 numbers")
        return cls(*data)

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0].imag, m[0, 1].real, m[0, 1].imag)

    def to_json(self):
        return list(self)

    @property
    def coords(self):
        return np.array(self, dtype=float)

    def inner(self, other):
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self):
        return math.sqrt(self.inner(self))

    def scaled(self, s):
        return LieVector(s * self.x, s * self.y, s * self.z)

    def matrix(self):
        return np.array(
            [
                [complex(0.0, self.x), complex(self.y, self.z)],
                [complex(-self.y, self.z), complex(0.0, -self.x)],
            ]
        )


IDENTITY = Su2Element.identity()
MINUS_IDENTITY = -IDENTITY
DIAG_I = Su2Element(0.0, 1.0, 0.0, 0.0)


def diag_element(alpha):
    """``diag(e^{i alpha}, e^{-i alpha})``."""
    return Su2Element(math.cos(alpha), math.sin(alpha), 0.0, 0.0)


def inner_product(xi, eta):
    """``-tr(xi eta)/2`` computed from the 2x2 matrices."""
    return float((-0.5 * np.trace(xi.matrix() @ eta.matrix())).real)


def adjoint(x, xi):
    """``Ad_x xi = x xi x^-1``."""
    w = _quat_mul(_quat_mul(x, (0.0, *xi)), x.inverse())
    return LieVector(w[1], w[2], w[3])


def _quat_mul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def is_central(g, tol=DEFAULT_EPS):
    return abs(abs(g.trace()) - 2.0) <= tol


def _check_nondegenerate(g, eps, name=None):
    if abs(g.trace()) >= 2.0 - eps:
        label = name or "element"
        raise DegenerateElement(
            f"{label} is within {eps} of +-1 (trace {g.trace()!r})", name=name
        )


def exp_lie(xi):
    theta = xi.norm()
    if theta == 0.0:
        return IDENTITY
    s = math.sin(theta) / theta
    return Su2Element(math.cos(theta), s * xi.x, s * xi.y, s * xi.z)


def f_angle(g, eps=DEFAULT_EPS):
    """``Arccos(tr(g)/2)``, defined away from +-1."""
    _check_nondegenerate(g, eps)
    return math.atan2(math.hypot(g.x, g.y, g.z), g.w)


def _axis(g):
    r = math.hypot(g.x, g.y, g.z)
    return r, (g.x / r, g.y / r, g.z / r)


def log_ell(g, eps=DEFAULT_EPS):
    """The logarithm with ``exp(log(g)) = g`` and ``|log(g)| < pi``."""
    _check_nondegenerate(g, eps)
    r, u = _axis(g)
    alpha = math.atan2(r, g.w)
    return LieVector(alpha * u[0], alpha * u[1], alpha * u[2])


def variation_F(g, eps=DEFAULT_EPS):
    """Gradient of ``f_angle``: the unit vector along the axis of ``g``."""
    _check_nondegenerate(g, eps)
    _, u = _axis(g)
    return LieVector(*u)


def variation_forms(g, eps=DEFAULT_EPS):
    """The three closed forms of the variation, each evaluated independently.

    Returns ``(A, B, C)`` with ``A = (g - g^-1)/sqrt(4 - tr(g)^2)`` computed
    with 2x2 matrices, ``B = log(g)/|log(g)|`` and ``C = x diag(i,-i) x^-1``
    where ``x`` diagonalizes ``g``.
    """
    _check_nondegenerate(g, eps)
    m = g.matrix()
    tr = np.trace(m).real
    a = LieVector.from_matrix((m - np.linalg.inv(m)) / math.sqrt(4.0 - tr * tr))
    ell = log_ell(g, eps)
    b = ell.scaled(1.0 / ell.norm())
    x = conjugator(diag_element(f_angle(g, eps)), g)
    c = LieVector.from_matrix(x.matrix() @ DIAG_I.matrix() @ x.inverse().matrix())
    return a, b, c


def zeta(g, t, eps=DEFAULT_EPS, name=None):
    """``exp(t F(g))``: the one-parameter subgroup through the axis of ``g``."""
    _check_nondegenerate(g, eps, name)
    _, u = _axis(g)
    s = math.sin(t)
    return Su2Element(math.cos(t), s * u[0], s * u[1], s * u[2])


def principal_sqrt(g):
    """A square root of ``g``; ``-1`` maps to ``diag(i, -i)``."""
    r = math.hypot(g.x, g.y, g.z)
    if r == 0.0:
        return IDENTITY if g.w > 0 else DIAG_I
    half = 0.5 * math.atan2(r, g.w)
    s = math.sin(half) / r
    return Su2Element(math.cos(half), s * g.x, s * g.y, s * g.z)


def _shortest_arc(a, b):
    # rotation by the angle between unit vectors a, b about a x b, as a quaternion
    h = a + b
    h = h / np.linalg.norm(h)
    cross = np.cross(a, h)
    return Su2Element.normalized([float(a @ h), *cross])


def _orthogonal_axis(a):
    for e in np.eye(3):
        v = e - (e @ a) * a
        n = np.linalg.norm(v)
        if n > 0.5:
            return v / n
    raise AssertionError("unreachable: some coordinate axis is far from parallel")


def conjugator(p, q, tol=TRACE_TOL, eps=DEFAULT_EPS):
    """Return ``x`` with ``x p x^-1 = q``.

    Rotates the axis of ``p`` onto the axis of ``q`` along the shortest arc.
    Nearly antipodal axes are handled by a half turn about the first
    coordinate axis (in i, j, k order) that is well separated from p's axis,
    followed by the short arc that remains.
    """
    if abs(p.trace() - q.trace()) >= tol:
        raise TraceMismatch(f"traces differ: {p.trace()!r} vs {q.trace()!r}")
    _check_nondegenerate(p, eps, "p")
    _check_nondegenerate(q, eps, "q")
    a = p.vector / np.linalg.norm(p.vector)
    b = q.vector / np.linalg.norm(q.vector)
    if np.linalg.norm(a + b) > 1e-3:
        return _shortest_arc(a, b)
    n = _orthogonal_axis(a)
    flip = Su2Element(0.0, *n)
    return _shortest_arc(-a, b) * flip


def random_su2(rng):
    """Haar-random element: a normalized standard Gaussian in R^4."""
    while True:
        v = rng.standard_normal(4)
        n = float(np.linalg.norm(v))
        if n > 1e-12:
            return Su2Element(*(v / n))


def random_unit_in_hyperplane(normal, rng):
    """Uniform unit quaternion on the great 2-sphere orthogonal to ``normal``.

    A zero ``normal`` imposes no constraint.
    """
    normal = np.asarray(normal, dtype=float)
    nn = float(np.linalg.norm(normal))
    while True:
        v = rng.standard_normal(4)
        if nn > 0.0:
            u = normal / nn
            v = v - (v @ u) * u
        n = float(np.linalg.norm(v))
        if n > 1e-12:
            return Su2Element(*(v / n))


def random_centralizer(g, rng, eps=DEFAULT_EPS):
    """Uniform element of the maximal torus through ``g``."""
    return zeta(g, rng.uniform(0.0, 2.0 * math.pi), eps)
