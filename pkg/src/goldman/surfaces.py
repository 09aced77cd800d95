"""Combinatorial data of the three surface cases.

A nonorientable surface cut along an oriented two-sided curve with
connected complement falls into one of three cases, according to which of
the two pieces glued along the separating curve is orientable:

    case i    minus-piece nonorientable (k cross-caps), plus-piece orientable
    case ii   both pieces nonorientable (k cross-caps on the minus side)
    case iii  minus-piece orientable (k handles), plus-piece nonorientable

Everything here is pure data: letter names, relation words, and the
base-point typing of the lifted generators in the orientation double cover.
Words are tuples of ``(letter_index, exponent)`` with exponent in {+1, -1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import ArityMismatch
from .su2 import IDENTITY, Su2Element

CASES = ("i", "ii", "iii")
P, PBAR = "P", "Pbar"


@dataclass(frozen=True)
class SurfaceSpec:
    case: str
    k: int
    allow_k0: bool = False

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"case must be one of {CASES}, got {self.case!r}")
        if not isinstance(self.k, int) or isinstance(self.k, bool):
            raise ValueError(f"k must be an integer, got {self.k!r}")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.k == 0 and not (self.case == "iii" and self.allow_k0):
            raise ValueError(
                "k = 0 is only admitted in case iii with allow_k0 (Klein bottle)"
            )

    @property
    def n_a(self):
        """Number of ``a`` letters: k cross-cap loops or 2k handle loops."""
        return 2 * self.k if self.case == "iii" else self.k

    @property
    def generator_count(self):
        return 2 + self.n_a

    def euler_characteristic(self):
        return euler_characteristic(self)

    def letter_names(self):
        return ["c", "b"] + [f"a{j}" for j in range(1, self.n_a + 1)]

    def double_letter_names(self):
        names = self.letter_names()
        return names + [_bar(n) for n in names]

    def to_json(self):
        return {"case": self.case, "k": self.k}

    @classmethod
    def from_json(cls, data, allow_k0=False):
        return cls(str(data["case"]), int(data["k"]), allow_k0=allow_k0)

    def __str__(self):
        return f"case {self.case}, k={self.k}"


def _bar(name):
    return name[0] + "bar" + name[1:]


def euler_characteristic(spec):
    # chi(plus piece) = -1; chi(minus piece) = 1 - k (cross-caps) or 1 - 2k (handles)
    return -1 + (1 - spec.n_a)


# --- relation words --------------------------------------------------------

def _a(j):
    return 2 + j - 1


def _commutators(first_a, count, offset=0):
    word = []
    for i in range(count):
        x = offset + first_a + 2 * i
        y = x + 1
        word += [(x, 1), (y, 1), (x, -1), (y, -1)]
    return word


@lru_cache(maxsize=None)
def relation_words_R(spec):
    """``(lhs, rhs)`` of the single relation defining the variety R.

    case i    b^-1 c b c^-1      = a_1^2 ... a_k^2
    case ii   b^-1 c^-1 b c^-1   = a_1^2 ... a_k^2
    case iii  b^-1 c^-1 b c^-1   = [a_1,a_2] ... [a_2k-1,a_2k]

    with ``[x, y] = x y x^-1 y^-1``.
    """
    c, b = 0, 1
    if spec.case == "i":
        lhs = [(b, -1), (c, 1), (b, 1), (c, -1)]
    else:
        lhs = [(b, -1), (c, -1), (b, 1), (c, -1)]
    if spec.case == "iii":
        rhs = _commutators(2, spec.k)
    else:
        rhs = [(_a(j), 1) for j in range(1, spec.k + 1) for _ in range(2)]
    return tuple(lhs), tuple(rhs)


@lru_cache(maxsize=None)
def relation_words_Rtilde(spec):
    """The two relations of the double-cover variety, in the fixed order.

    Letters are indexed ``c, b, a_1..a_K`` then ``cbar, bbar, abar_1..abar_K``.
    """
    n = spec.generator_count
    c, b, cb, bb = 0, 1, n, n + 1
    K = spec.n_a
    if spec.case == "i":
        lhs1 = [(b, -1), (c, 1), (b, 1), (c, -1)]
        lhs2 = [(bb, -1), (cb, 1), (bb, 1), (cb, -1)]
    else:
        lhs1 = [(bb, -1), (cb, -1), (bb, 1), (c, -1)]
        lhs2 = [(b, -1), (c, -1), (b, 1), (cb, -1)]
    if spec.case == "iii":
        rhs1 = _commutators(2, spec.k)
        rhs2 = _commutators(2, spec.k, offset=n)
    else:
        rhs1, rhs2 = [], []
        for j in range(1, K + 1):
            rhs1 += [(_a(j), 1), (n + _a(j), 1)]
            rhs2 += [(n + _a(j), 1), (_a(j), 1)]
    return (tuple(lhs1), tuple(rhs1)), (tuple(lhs2), tuple(rhs2))


def evaluate_word(letters, word):
    g = IDENTITY
    for idx, e in word:
        x = letters[idx]
        g = g * (x if e > 0 else x.inverse())
    return g


def relation_residual(letters, lhs, rhs):
    """``|LHS RHS^-1 - 1|`` in quaternion coordinates."""
    return (evaluate_word(letters, lhs) * evaluate_word(letters, rhs).inverse()).distance(
        IDENTITY
    )


def _letters_R(spec, p):
    letters = p.letters() if hasattr(p, "letters") else list(p)
    if len(letters) != spec.generator_count:
        raise ArityMismatch(
            f"{spec} needs {spec.generator_count} letters, got {len(letters)}"
        )
    return letters


def _letters_Rtilde(spec, q):
    letters = q.letters() if hasattr(q, "letters") else list(q)
    if len(letters) != 2 * spec.generator_count:
        raise ArityMismatch(
            f"{spec} needs {2 * spec.generator_count} letters, got {len(letters)}"
        )
    return letters


def relation_residual_R(spec, p):
    return relation_residual(_letters_R(spec, p), *relation_words_R(spec))


def relation_residuals_Rtilde(spec, q):
    letters = _letters_Rtilde(spec, q)
    r1, r2 = relation_words_Rtilde(spec)
    return relation_residual(letters, *r1), relation_residual(letters, *r2)


# --- base-point typing in the double cover ---------------------------------

@lru_cache(maxsize=None)
def arrow_typing(spec):
    """Map each lifted letter name to its ``(source, target)`` base points.

    A letter from P to Pbar transforms as ``g x h^-1`` under the gauge
    action that evaluates to g at P and h at Pbar.
    """
    loop_b = spec.case == "i"
    loop_a = spec.case == "iii"
    table = {"c": (P, P), "cbar": (PBAR, PBAR)}
    table["b"] = (P, P) if loop_b else (P, PBAR)
    table["bbar"] = (PBAR, PBAR) if loop_b else (PBAR, P)
    for j in range(1, spec.n_a + 1):
        table[f"a{j}"] = (P, P) if loop_a else (P, PBAR)
        table[f"abar{j}"] = (PBAR, PBAR) if loop_a else (PBAR, P)
    return table


@lru_cache(maxsize=None)
def letter_arrows(spec):
    """Arrow typing as a tuple indexed like the double tuple's letters."""
    table = arrow_typing(spec)
    return tuple(table[name] for name in spec.double_letter_names())


def word_endpoints(spec, word):
    """``(source, target)`` of a word over lifted letters, or None if the
    arrows do not compose."""
    arrows = letter_arrows(spec)
    start = end = None
    for idx, e in word:
        s, t = arrows[idx]
        if e < 0:
            s, t = t, s
        if end is not None and s != end:
            return None
        if start is None:
            start = s
        end = t
    return start, end


def is_closed_at(spec, word, base=P):
    ends = word_endpoints(spec, word)
    return ends == (base, base)
