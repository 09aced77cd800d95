"""Representation varieties of the surface and of its orientation double cover.

``RepPoint`` holds the holonomies ``(c, b, a_1..a_K)`` along the generators
of the surface group; ``DoubleRepPoint`` holds the holonomies along their
two lifts, ``(c, b, A, cbar, bbar, Abar)``.  Points of the moduli spaces are
represented by arbitrary lifts, and equality of classes is decided by
:func:`same_orbit` / :func:`same_orbit_double`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import su2
from .errors import DegenerateElement, Inconclusive, NotInVariety, SamplerStuck
from .su2 import IDENTITY, Su2Element
from .surfaces import (
    PBAR,
    P,
    letter_arrows,
    relation_residual_R,
    relation_residuals_Rtilde,
    relation_words_R,
    evaluate_word,
)

MEMBERSHIP_TOL = 1e-9
NX_TOL = 1e-9
FINGERPRINT_TOL = 1e-8
WITNESS_TOL = 1e-8
RANK_CUTOFF = 1e-8
MAX_TRIES = 100_000
GRID = 17


@dataclass(frozen=True)
class RepPoint:
    c: Su2Element
    b: Su2Element
    a: tuple

    def letters(self):
        return [self.c, self.b, *self.a]

    @classmethod
    def from_letters(cls, letters):
        return cls(letters[0], letters[1], tuple(letters[2:]))

    def to_json(self):
        return {"c": self.c.to_json(), "b": self.b.to_json(), "a": [x.to_json() for x in self.a]}

    @classmethod
    def from_json(cls, data, normalize=False):
        def el(v):
            return Su2Element.from_json(v, normalize)

        return cls(el(data["c"]), el(data["b"]), tuple(el(x) for x in data["a"]))

    def distance(self, other):
        return max(x.distance(y) for x, y in zip(self.letters(), other.letters()))


@dataclass(frozen=True)
class DoubleRepPoint:
    c: Su2Element
    b: Su2Element
    a: tuple
    cbar: Su2Element
    bbar: Su2Element
    abar: tuple

    def letters(self):
        return [self.c, self.b, *self.a, self.cbar, self.bbar, *self.abar]

    @classmethod
    def from_letters(cls, letters):
        n = len(letters) // 2
        first, second = letters[:n], letters[n:]
        return cls(
            first[0], first[1], tuple(first[2:]), second[0], second[1], tuple(second[2:])
        )

    @property
    def unbarred(self):
        return RepPoint(self.c, self.b, self.a)

    @property
    def barred(self):
        return RepPoint(self.cbar, self.bbar, self.abar)

    def to_json(self):
        return {
            "c": self.c.to_json(),
            "b": self.b.to_json(),
            "a": [x.to_json() for x in self.a],
            "cbar": self.cbar.to_json(),
            "bbar": self.bbar.to_json(),
            "abar": [x.to_json() for x in self.abar],
        }

    @classmethod
    def from_json(cls, data, normalize=False):
        def el(v):
            return Su2Element.from_json(v, normalize)

        return cls(
            el(data["c"]),
            el(data["b"]),
            tuple(el(x) for x in data["a"]),
            el(data["cbar"]),
            el(data["bbar"]),
            tuple(el(x) for x in data["abar"]),
        )

    def distance(self, other):
        return max(x.distance(y) for x, y in zip(self.letters(), other.letters()))


def point_from_json(data, normalize=False):
    """Parse either point type, deciding by the presence of barred letters.

    With ``normalize`` each letter is rescaled to unit norm instead of being
    rejected, so an off-variety record can still be measured.
    """
    if "cbar" in data:
        return DoubleRepPoint.from_json(data, normalize)
    return RepPoint.from_json(data, normalize)


# --- actions and induced maps ---------------------------------------------

def act_G(g, p):
    gi = g.inverse()
    return RepPoint.from_letters([g * x * gi for x in p.letters()])


def act_GxG(g, h, q, spec):
    """Gauge action by ``g`` at P and ``h`` at Pbar: ``x -> gauge(src) x gauge(tgt)^-1``."""
    gauge = {P: (g, g.inverse()), PBAR: (h, h.inverse())}
    out = [gauge[s][0] * x * gauge[t][1] for x, (s, t) in zip(q.letters(), letter_arrows(spec))]
    return DoubleRepPoint.from_letters(out)


def lift_I(p, spec, tol=MEMBERSHIP_TOL):
    """Pull back along the covering map: ``(c, b, A) -> (c, b, A, c, b, A)``."""
    r = relation_residual_R(spec, p)
    if not r < tol:
        raise NotInVariety(f"point is not in R for {spec}: residual {r:.3e}")
    return DoubleRepPoint(p.c, p.b, p.a, p.c, p.b, p.a)


def deck_T(q):
    return DoubleRepPoint(q.cbar, q.bbar, q.abar, q.c, q.b, q.a)


# --- samplers --------------------------------------------------------------

def _retrying(fn):
    # measure-zero degeneracies (an element landing on +-1) are simply redrawn
    def wrapper(*args, **kwargs):
        for _ in range(MAX_TRIES):
            try:
                return fn(*args, **kwargs)
            except DegenerateElement:
                continue
        raise SamplerStuck(f"{fn.__name__} failed {MAX_TRIES} times")

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _product(elements):
    g = IDENTITY
    for x in elements:
        g = g * x
    return g


def _randomized_conjugator(p, q, rng):
    # any x with x p x^-1 = q, spread over the coset x * centralizer(p)
    return su2.conjugator(p, q) * su2.random_centralizer(p, rng)


def _trace_matching_normal(t):
    # tr(y) = tr(t y)  <=>  (t_w - 1) y_w - t_v . y_v = 0
    return np.array([t.w - 1.0, -t.x, -t.y, -t.z])


def solve_commutator_product(target, k, rng):
    """Random ``x_1..x_2k`` with ``[x_1,x_2]...[x_2k-1,x_2k] = target``.

    All but the last pair are Haar; ``x_2k`` is drawn uniformly subject to
    ``tr(x_2k) = tr(t x_2k)`` where ``t`` is the required last commutator,
    and ``x_2k-1`` conjugates ``x_2k`` onto ``t x_2k``.
    """
    if k == 0:
        return []
    xs = [su2.random_su2(rng) for _ in range(2 * k - 2)]
    prefix = IDENTITY
    for i in range(k - 1):
        x, y = xs[2 * i], xs[2 * i + 1]
        prefix = prefix * x * y * x.inverse() * y.inverse()
    t = prefix.inverse() * target
    y = su2.random_unit_in_hyperplane(_trace_matching_normal(t), rng)
    x = _randomized_conjugator(y, t * y, rng)
    return xs + [x, y]


def _lhs_R(spec, c, b):
    return evaluate_word([c, b], relation_words_R(spec)[0])


@_retrying
def _sample_R(spec, rng, twist):
    c = su2.random_su2(rng)
    if spec.case == "iii":
        if spec.k == 0:
            b = _randomized_conjugator(c, c.inverse(), rng)
            return RepPoint(c, b, ())
        b = su2.random_su2(rng)
        return RepPoint(c, b, tuple(solve_commutator_product(_lhs_R(spec, c, b), spec.k, rng)))
    b = su2.random_su2(rng)
    a = [su2.random_su2(rng) for _ in range(spec.k - 1)]
    square = _product(x * x for x in a).inverse() * _lhs_R(spec, c, b)
    if twist and spec.k % 2:
        square = -square
    a.append(su2.principal_sqrt(square))
    return RepPoint(c, b, tuple(a))


def sample_R(spec, rng):
    """A random point of R, solved in closed form.

    Cases i/ii draw c, b, a_1..a_k-1 from Haar measure and take a_k as the
    principal square root forced by the relation; case iii uses
    :func:`solve_commutator_product`.
    """
    return _sample_R(spec, rng, False)


def _linear_re_functional(f):
    # coefficients of the real-linear map u -> Re(f(u)) on quaternions u
    basis = [Su2Element(*e) for e in np.eye(4)]
    return np.array([f(e).w for e in basis])


@_retrying
def _sample_Rtilde(spec, rng):
    rand = lambda: su2.random_su2(rng)  # noqa: E731
    K = spec.n_a
    if spec.case == "i":
        # unknowns: abar_k (linear solve), cbar (constrained draw), bbar (conjugator)
        c, b = rand(), rand()
        a = [rand() for _ in range(K)]
        abar = [rand() for _ in range(K - 1)]
        lhs1 = b.inverse() * c * b * c.inverse()
        head = _product(x * y for x, y in zip(a, abar)) * a[-1]
        abar.append(head.inverse() * lhs1)
        y = _product(y * x for x, y in zip(a, abar))
        cbar = su2.random_unit_in_hyperplane(_trace_matching_normal(y), rng)
        bbar = _randomized_conjugator(cbar, y * cbar, rng).inverse()
        return DoubleRepPoint(c, b, tuple(a), cbar, bbar, tuple(abar))
    if spec.case == "ii":
        # unknowns: cbar (constrained draw), a_k (conjugator), abar_k (linear solve)
        c, b, bbar = rand(), rand(), rand()
        a = [rand() for _ in range(K - 1)]
        abar = [rand() for _ in range(K - 1)]
        x_head = _product(x * y for x, y in zip(a, abar))
        y_head = _product(y * x for x, y in zip(a, abar))
        ci = c.inverse()
        m1 = lambda u: x_head.inverse() * bbar.inverse() * u * bbar * ci  # noqa: E731
        m2 = lambda u: y_head.inverse() * b.inverse() * ci * b * u  # noqa: E731
        normal = _linear_re_functional(m1) - _linear_re_functional(m2)
        cbar_inv = su2.random_unit_in_hyperplane(normal, rng)
        M1, M2 = m1(cbar_inv), m2(cbar_inv)
        ak = _randomized_conjugator(M2, M1, rng)
        a.append(ak)
        abar.append(ak.inverse() * M1)
        return DoubleRepPoint(c, b, tuple(a), cbar_inv.inverse(), bbar, tuple(abar))
    # case iii: the two relations decouple into commutator-product problems
    c, b = rand(), rand()
    if spec.k == 0:
        cbar = b.inverse() * c.inverse() * b
        bbar = b.inverse() * su2.random_centralizer(c, rng)
        return DoubleRepPoint(c, b, (), cbar, bbar, ())
    cbar, bbar = rand(), rand()
    lhs1 = bbar.inverse() * cbar.inverse() * bbar * c.inverse()
    lhs2 = b.inverse() * c.inverse() * b * cbar.inverse()
    a = solve_commutator_product(lhs1, spec.k, rng)
    abar = solve_commutator_product(lhs2, spec.k, rng)
    return DoubleRepPoint(c, b, tuple(a), cbar, bbar, tuple(abar))


def sample_Rtilde(spec, rng):
    """A random point of the double-cover variety, solved in closed form.

    case i    draw c, b, A, abar_1..abar_k-1; solve the first relation for
              abar_k; draw cbar subject to tr(cbar) = tr(Y cbar) with Y the
              required value of the second relation; bbar^-1 conjugates cbar
              onto Y cbar.
    case ii   draw c, b, bbar and all but the last a / abar; the condition
              that a_k abar_k and abar_k a_k be conjugate is linear in
              cbar^-1, so draw cbar on that great sphere; a_k is a
              conjugator and abar_k follows linearly.
    case iii  draw c, b, cbar, bbar; each relation is then an independent
              commutator-product equation in A or Abar.
    """
    return _sample_Rtilde(spec, rng)


# --- fixed-point strata ----------------------------------------------------

def nx_case_form(p, x, spec):
    """Assemble the double tuple of the N_x stratum from its base ``(c, b, A)``.

    case i    (c, b, A, c, b, A x)
    case ii   (c, b, A, c, b x, A x)
    case iii  (c, b, A, c, b x, A)
    """
    ax = tuple(a * x for a in p.a)
    if spec.case == "i":
        return DoubleRepPoint(p.c, p.b, p.a, p.c, p.b, ax)
    if spec.case == "ii":
        return DoubleRepPoint(p.c, p.b, p.a, p.c, p.b * x, ax)
    return DoubleRepPoint(p.c, p.b, p.a, p.c, p.b * x, p.a)


def nx_twist_residual(q, x, spec):
    """``max |T(q) - (1, x^-1).q|`` over letters."""
    return deck_T(q).distance(act_GxG(IDENTITY, x.inverse(), q, spec))


def in_Nx(q, x, spec, tol=NX_TOL):
    """Whether ``q`` lies in N_x, with the residual that decided it.

    The residual is the larger of the twist residual ``|T(q) - (1,x^-1).q|``
    and the two relation residuals of the double-cover variety.
    """
    residual = max(nx_twist_residual(q, x, spec), *relation_residuals_Rtilde(spec, q))
    return residual < tol, residual


def _torus_point(spec, x, rng):
    u = su2.variation_F(x)
    theta = su2.f_angle(x)
    along = lambda phi: su2.exp_lie(u.scaled(phi))  # noqa: E731
    two_pi = 2.0 * math.pi
    phi_b = rng.uniform(0, two_pi)
    k = spec.k
    if spec.case == "iii":
        # all letters commute, so c^-2 = 1
        phi_c = math.pi * rng.integers(2)
        phis = [rng.uniform(0, two_pi) for _ in range(spec.n_a)]
    else:
        phi_c = rng.uniform(0, two_pi)
        phis = [rng.uniform(0, two_pi) for _ in range(k - 1)]
        # case i:  2 sum(phi) + k theta = 0;  case ii: 2 sum(phi) + k theta = -2 phi_c
        rhs = -k * theta - (2.0 * phi_c if spec.case == "ii" else 0.0)
        phis.append((rhs - 2.0 * sum(phis)) / 2.0 + math.pi * rng.integers(2))
    return RepPoint(along(phi_c), along(phi_b), tuple(along(p) for p in phis))


def sample_Nx(spec, x, rng, tol=1e-10):
    """A random point of N_x.

    For ``x = 1`` this is ``I`` of a sample of R.  For ``x = -1`` the base
    ``(c, b, A)`` satisfies the relation of R twisted by ``(-1)^k`` in cases
    i/ii (case iii is untwisted).  Any other ``x`` has a maximal torus as
    centralizer, so every letter is drawn from that torus and the abelian
    relation is solved for the last angle; in case iii this forces c = +-1.
    """
    if x.distance(IDENTITY) < tol:
        return lift_I(sample_R(spec, rng), spec)
    if x.distance(-IDENTITY) < tol:
        x = -IDENTITY
        base = _sample_R(spec, rng, spec.case != "iii")
    else:
        base = _torus_point(spec, x, rng)
    q = nx_case_form(base, x, spec)
    ok, res = in_Nx(q, x, spec)
    if not ok:
        raise SamplerStuck(f"N_x sample failed validation (residual {res:.3e})")
    return q


# --- fingerprints ----------------------------------------------------------

def _walk(combo, arrows, start):
    cur = start
    word = []
    for i in combo:
        s, t = arrows[i]
        if s == t:
            if s != cur:
                return None
            word.append((i, 1))
        elif s == cur:
            word.append((i, 1))
            cur = t
        else:
            word.append((i, -1))
            cur = s
    return tuple(word) if cur == start else None


def _canonical(word):
    inv = tuple((i, -e) for i, e in reversed(word))
    n = len(word)
    return min(w[r:] + w[:r] for w in (word, inv) for r in range(n))


@lru_cache(maxsize=None)
def fingerprint_words(spec, double):
    """Closed words of length <= 4 used for fingerprints.

    Letters appear at most once, in increasing index order; loops keep
    exponent +1 and letters between base points take whichever direction
    continues the path.  Words are kept if they close up at P or at Pbar,
    and deduplicated up to cyclic rotation and inversion.
    """
    if double:
        arrows = letter_arrows(spec)
        starts = (P, PBAR)
    else:
        arrows = ((P, P),) * spec.generator_count
        starts = (P,)
    seen = set()
    words = []
    for length in range(1, 5):
        for combo in combinations(range(len(arrows)), length):
            for start in starts:
                w = _walk(combo, arrows, start)
                if w is None:
                    continue
                key = _canonical(w)
                if key not in seen:
                    seen.add(key)
                    words.append(w)
    return tuple(words)


def word_label(word, names):
    return ".".join(names[i] + ("" if e > 0 else "^-1") for i, e in word)


@lru_cache(maxsize=None)
def _word_index_table(spec, double):
    words = fingerprint_words(spec, double)
    n = 2 * spec.generator_count if double else spec.generator_count
    # rows 0..n-1 letters, n..2n-1 inverses, 2n identity padding
    idx = np.full((len(words), 4), 2 * n, dtype=int)
    for r, w in enumerate(words):
        for col, (i, e) in enumerate(w):
            idx[r, col] = i if e > 0 else n + i
    return idx


def _qmul(p, q):
    a1, b1, c1, d1 = p.T
    a2, b2, c2, d2 = q.T
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=1,
    )


@dataclass(frozen=True)
class Fingerprint:
    words: tuple
    traces: np.ndarray

    def distance(self, other):
        if self.words != other.words:
            raise ValueError("fingerprints over different word lists")
        if not len(self.traces):
            return 0.0
        return float(np.max(np.abs(self.traces - other.traces)))

    def to_json(self):
        return {"words": list(self.words), "traces": [float(t) for t in self.traces]}


def fingerprint(point, spec):
    """Traces of the fixed closed-word list; invariant under the gauge action."""
    double = isinstance(point, DoubleRepPoint)
    letters = np.array(point.letters(), dtype=float)
    table = np.concatenate(
        [letters, letters * np.array([1.0, -1.0, -1.0, -1.0]), [[1.0, 0.0, 0.0, 0.0]]]
    )
    idx = _word_index_table(spec, double)
    prod = table[idx[:, 0]]
    for col in range(1, 4):
        prod = _qmul(prod, table[idx[:, col]])
    names = spec.double_letter_names() if double else spec.letter_names()
    labels = tuple(word_label(w, names) for w in fingerprint_words(spec, double))
    return Fingerprint(labels, 2.0 * prod[:, 0])


# --- orbit equality --------------------------------------------------------

def _left_matrix(q):
    w, x, y, z = q
    return np.array([[w, -x, -y, -z], [x, w, -z, y], [y, z, w, -x], [z, -y, x, w]])


def _right_matrix(q):
    w, x, y, z = q
    return np.array([[w, -x, -y, -z], [x, w, z, -y], [y, -z, w, x], [z, y, -x, w]])


def _intertwiner_system(src_letters, dst_letters, arrows, n_unknowns):
    # gauge(s) x = x' gauge(t), linear in the stacked unknown quaternions
    slot = {P: 0, PBAR: 4}
    rows = []
    for x, xp, (s, t) in zip(src_letters, dst_letters, arrows):
        block = np.zeros((4, n_unknowns))
        block[:, slot[s] : slot[s] + 4] += _right_matrix(x)
        block[:, slot[t] : slot[t] + 4] -= _left_matrix(xp)
        rows.append(block)
    return np.vstack(rows) if rows else np.zeros((0, n_unknowns))


def _null_space(m, cutoff=RANK_CUTOFF):
    n = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    smax = s[0] if len(s) else 0.0
    rank = int(np.sum(s > cutoff * smax)) if smax > 0 else 0
    return vt[rank:].T


def _sphere_grid(basis, size=GRID):
    # directions on the unit sphere of span(first three basis vectors)
    cols = basis[:, :3]
    thetas = np.linspace(0.0, math.pi, size)
    phis = np.linspace(0.0, 2.0 * math.pi, size, endpoint=False)
    for th in thetas:
        for ph in phis:
            coef = np.array([math.cos(th), math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph)])
            yield cols @ coef[: cols.shape[1]]


def _candidates(basis):
    for j in range(basis.shape[1]):
        yield basis[:, j]
    if basis.shape[1] > 1:
        yield from _sphere_grid(basis)


def _as_unit(v):
    n = float(np.linalg.norm(v))
    if n < 1e-6:
        return None
    return Su2Element(*(v / n))


def intertwiner_kernel(src, dst, spec):
    """Null space of the linear intertwining system from ``src`` to ``dst``."""
    if isinstance(src, DoubleRepPoint):
        arrows, n = letter_arrows(spec), 8
    else:
        arrows, n = ((P, P),) * spec.generator_count, 4
    return _null_space(_intertwiner_system(src.letters(), dst.letters(), arrows, n))


def same_orbit(p, p2, spec, fp_tol=FINGERPRINT_TOL, tol=WITNESS_TOL):
    """Return ``g`` with ``g.p = p2``, or None if the classes differ.

    Raises :class:`Inconclusive` when the intertwiner space has dimension > 1
    and no candidate in it verifies.
    """
    if fingerprint(p, spec).distance(fingerprint(p2, spec)) > fp_tol:
        return None
    basis = intertwiner_kernel(p, p2, spec)
    if basis.shape[1] == 0:
        return None
    for v in _candidates(basis):
        g = _as_unit(v)
        if g is not None and act_G(g, p).distance(p2) < tol:
            return g
    if basis.shape[1] == 1:
        return None
    raise Inconclusive(f"kernel of dimension {basis.shape[1]} has no verified witness")


def same_orbit_double(q, q2, spec, fp_tol=FINGERPRINT_TOL, tol=WITNESS_TOL):
    """Return ``(g, h)`` with ``(g, h).q = q2``, or None if the classes differ."""
    if fingerprint(q, spec).distance(fingerprint(q2, spec)) > fp_tol:
        return None
    basis = intertwiner_kernel(q, q2, spec)
    if basis.shape[1] == 0:
        return None
    for v in _candidates(basis):
        g, h = _as_unit(v[:4]), _as_unit(v[4:])
        if g is None or h is None:
            continue
        if act_GxG(g, h, q, spec).distance(q2) < tol:
            return g, h
    if basis.shape[1] == 1:
        return None
    raise Inconclusive(f"kernel of dimension {basis.shape[1]} has no verified witness")


def is_generic(q, spec):
    """Stabilizer is exactly {(1,1), (-1,-1)}: self-intertwiner kernel of dimension 1."""
    return intertwiner_kernel(q, q, spec).shape[1] == 1


def tau_witness(q, spec):
    """``(g, h)`` with ``T(q) = (g, h).q`` if the class of q is deck-fixed, else None."""
    return same_orbit_double(q, deck_T(q), spec)


def fixed_stratum(q, spec):
    """For a deck-fixed class, the ``x`` with ``(1, g^-1).q`` in N_x.

    With ``T(q) = (g, h).q`` this is ``x = (h g)^-1``; it is well defined up
    to conjugacy for generic q.  Returns None if the class is not fixed.
    """
    w = tau_witness(q, spec)
    if w is None:
        return None
    g, h = w
    return (h * g).inverse()


def in_iota_image(q, spec, tol=1e-8):
    """Whether the class of a generic ``q`` lies in the image of the covering pullback."""
    x = fixed_stratum(q, spec)
    return x is not None and x.distance(IDENTITY) < tol
