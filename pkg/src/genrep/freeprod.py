"""Reduced words in A * F_n and finite permutation quotients separating a finite set.

A word is a tuple of syllables ``("A", x)`` (a non-identity element of the
abelian factor) or ``("F", letters)`` (a non-empty freely reduced word, letter
+j for a_j and -j for its inverse), alternating between the two kinds.  The
abelian factor is either a vector group Z(m_1) x ... x Z(m_d) (modulus 0 meaning
Z) or a finite group given by its table.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, VerificationError
from .finitegroup import FiniteGroup, abelian, compose


# --- abelian factors ------------------------------------------------------------------

class VectorFactor:
    """Z(m_1) x ... x Z(m_d) with elements as integer tuples; m_i = 0 means Z."""

    def __init__(self, moduli: Sequence[int]):
        self.moduli = tuple(int(m) for m in moduli)
        if any(m < 0 for m in self.moduli):
            raise InputError("moduli must be non-negative")

    def __eq__(self, other):
        return isinstance(other, VectorFactor) and self.moduli == other.moduli

    def reduce(self, x) -> tuple:
        x = tuple(int(v) for v in x)
        if len(x) != len(self.moduli):
            raise InputError(f"abelian syllable {list(x)} has length {len(x)}, expected {len(self.moduli)}")
        return tuple(v % m if m else v for v, m in zip(x, self.moduli))

    def mul(self, x, y) -> tuple:
        return self.reduce(a + b for a, b in zip(x, y))

    def inv(self, x) -> tuple:
        return self.reduce(-a for a in x)

    def is_identity(self, x) -> bool:
        return not any(x)


class TableFactor:
    """A finite group given by its multiplication table; elements are indices."""

    def __init__(self, group: FiniteGroup):
        self.group = group

    def reduce(self, x) -> int:
        x = int(x)
        if not 0 <= x < self.group.order:
            raise InputError(f"element {x} is outside the factor group")
        return x

    def mul(self, x, y) -> int:
        return self.group.mul(x, y)

    def inv(self, x) -> int:
        return self.group.inv(x)

    def is_identity(self, x) -> bool:
        return x == self.group.identity


# --- words ------------------------------------------------------------------------------

def _free_reduce(letters) -> tuple:
    out = []
    for x in letters:
        if x == 0:
            raise InputError("free letter index must be non-zero")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def normalize(syllables, factor) -> tuple:
    """Reduced alternating form: merge neighbours of the same kind, drop trivial syllables."""
    out: list = []
    for kind, val in syllables:
        if kind == "A":
            val = factor.reduce(val)
        elif kind == "F":
            val = _free_reduce(val)
        else:
            raise InputError(f"unknown syllable kind {kind!r}")
        if out and out[-1][0] == kind:
            prev = out.pop()[1]
            val = factor.mul(prev, val) if kind == "A" else _free_reduce(prev + val)
        if (kind == "A" and factor.is_identity(val)) or (kind == "F" and not val):
            continue
        out.append((kind, val))
    return tuple(out)


def mul(u, v, factor) -> tuple:
    return normalize(tuple(u) + tuple(v), factor)


def inverse(w, factor) -> tuple:
    return normalize(
        tuple((k, factor.inv(x) if k == "A" else tuple(-l for l in reversed(x))) for k, x in reversed(w)),
        factor,
    )


def letters(w) -> list:
    """The word as single letters: ("A", x) per abelian syllable, ("F", (l,)) per free letter."""
    out = []
    for kind, val in w:
        if kind == "A":
            out.append((kind, val))
        else:
            out.extend(("F", (l,)) for l in val)
    return out


def free_rank_used(w) -> int:
    return max((abs(l) for kind, val in w if kind == "F" for l in val), default=0)


_LETTER = re.compile(r"^a(\d+)(?:\^(-?\d+))?$")


def parse_free(text: str) -> tuple:
    """'a1 a2^-1 a1^3' -> free letters."""
    out = []
    for tok in text.split():
        m = _LETTER.match(tok)
        if not m or int(m.group(1)) < 1:
            raise InputError(f"bad free letter {tok!r}")
        j, e = int(m.group(1)), int(m.group(2) or 1)
        out.extend([j if e > 0 else -j] * abs(e))
    return tuple(out)


def format_free(letters_: Sequence[int]) -> str:
    toks = []
    i = 0
    while i < len(letters_):
        j = i
        while j < len(letters_) and letters_[j] == letters_[i]:
            j += 1
        l, e = letters_[i], j - i
        e = e if l > 0 else -e
        toks.append(f"a{abs(l)}" if e == 1 else f"a{abs(l)}^{e}")
        i = j
    return " ".join(toks)


def word_from_json(data, factor) -> tuple:
    if not isinstance(data, list):
        raise InputError("word must be a list of syllables")
    sylls = []
    for i, s in enumerate(data):
        if not isinstance(s, dict) or len(s) != 1:
            raise InputError(f"syllable {i} must be an object with one key", path=f"[{i}]")
        if "abelian" in s:
            sylls.append(("A", s["abelian"]))
        elif "free" in s:
            sylls.append(("F", parse_free(s["free"])))
        else:
            raise InputError(f"syllable {i} must have key 'abelian' or 'free'", path=f"[{i}]")
    return normalize(sylls, factor)


def word_to_json(w) -> list:
    return [{"abelian": list(v) if isinstance(v, tuple) else v} if k == "A" else {"free": format_free(v)} for k, v in w]


def word_str(w, labels=None) -> str:
    """Readable form; ``labels`` maps table-factor indices to their coordinate tuples."""
    if not w:
        return "1"
    parts = []
    for k, v in w:
        if k == "A":
            v = labels[v] if labels is not None else v
            parts.append("e" + str(list(v) if isinstance(v, tuple) else v))
        else:
            parts.append(format_free(v))
    return " ".join(parts)


# --- exponent bound and reduction -----------------------------------------------------

def max_exponent(C) -> tuple:
    """(N, M): N the largest |coordinate| of an abelian syllable in C, M = 2N + 1."""
    N = max((abs(x) for w in C for k, v in w if k == "A" for x in v), default=0)
    return N, 2 * N + 1


def exponent_reduce(w, p: Sequence[int]) -> tuple:
    """Image of a word of Z^d * F_n in (prod Z(p_i)) * F_n."""
    if any(m < 1 for m in p):
        raise InputError("moduli must be at least 1")
    return normalize(w, VectorFactor(p))


# --- separating permutation quotients -------------------------------------------------

@dataclass
class PermQuotient:
    """Right action of A * F_n on a finite carrier; perm[w] is the image of point w."""

    carrier: list  # normal-form words; index 0 is the base point
    factor: TableFactor
    a_perms: list  # one permutation per element of A
    free_perms: list  # one permutation per free generator
    n: int

    def letter_perm(self, kind, val) -> tuple:
        if kind == "A":
            return self.a_perms[val]
        perm = self.free_perms[abs(val) - 1]
        return perm if val > 0 else _invert(perm)

    def image(self, w) -> tuple:
        """Permutation of the carrier induced by w (first syllable acts first)."""
        result = np.arange(len(self.carrier))
        for kind, val in letters(w):
            if kind == "F":
                val = val[0]
            # right action: apply result first, then the letter
            result = np.asarray(self.letter_perm(kind, val))[result]
        return tuple(int(x) for x in result)

    def to_json(self) -> dict:
        return {
            "carrier": [word_str(w, self.factor.group.labels) for w in self.carrier],
            "a_perms": [list(p) for p in self.a_perms],
            "free_perms": [list(p) for p in self.free_perms],
        }


def _invert(perm) -> tuple:
    out = [0] * len(perm)
    for i, j in enumerate(perm):
        out[j] = i
    return tuple(out)


def _prefixes(w) -> list:
    """Prefixes of a normal-form word; abelian syllables are atomic, free ones split by letter."""
    out = [()]
    for i, (kind, val) in enumerate(w):
        if kind == "A":
            out.append(w[:i] + ((kind, val),))
        else:
            for j in range(1, len(val) + 1):
                out.append(w[:i] + ((kind, val[:j]),))
    return out


def _word_key(w):
    """Shortlex-style key: letter length, then syllable content."""
    return (len(letters(w)), [(k, v if isinstance(v, tuple) else (v,)) for k, v in w])


def separating_quotient(A: FiniteGroup, n: int, words) -> PermQuotient:
    """Finite permutation quotient of A * F_n in which every given word acts nontrivially.

    The carrier starts as the prefix closure of the words.  Each A-coset
    fragment r*A is completed to a full torsor with dummy points, then each free
    generator's partial right multiplication is completed to a permutation by
    pairing unmatched points in carrier order.
    """
    factor = TableFactor(A)
    words = [normalize(w, factor) for w in words]
    for w in words:
        if free_rank_used(w) > n:
            raise InputError(f"word {word_str(w)} uses a free generator beyond a{n}")
    prefixes = set()
    for w in words:
        prefixes.update(_prefixes(w))
    prefixes.add(())

    def coset_rep(u):
        return u[:-1] if u and u[-1][0] == "A" else u

    reps = sorted({coset_rep(u) for u in prefixes}, key=_word_key)
    dummies = []
    for r in reps:
        for a in range(A.order):
            u = mul(r, (("A", a),), factor)
            if u not in prefixes:
                dummies.append(u)
    carrier = sorted(prefixes, key=_word_key) + dummies
    index = {u: i for i, u in enumerate(carrier)}
    if len(index) != len(carrier):
        raise VerificationError("separating_quotient.carrier", "duplicate carrier points")

    a_perms = [tuple(index[mul(u, (("A", a),), factor)] for u in carrier) for a in range(A.order)]

    free_perms = []
    for j in range(1, n + 1):
        partial = {}
        for i, u in enumerate(carrier):
            v = mul(u, (("F", (j,)),), factor)
            if v in index:
                partial[i] = index[v]
        partial_before = dict(partial)
        free_dom = [i for i in range(len(carrier)) if i not in partial]
        used = set(partial.values())
        free_img = [i for i in range(len(carrier)) if i not in used]
        partial.update(zip(free_dom, free_img))
        perm = tuple(partial[i] for i in range(len(carrier)))
        if sorted(perm) != list(range(len(carrier))):
            raise VerificationError("separating_quotient.permutation", f"a{j} completion is not a bijection")
        if any(perm[i] != v for i, v in partial_before.items()):
            raise VerificationError("separating_quotient.extension", f"a{j} completion rewrote a defined value")
        free_perms.append(perm)

    Q = PermQuotient(carrier, factor, a_perms, free_perms, n)
    # rho(a g) = rho(a) rho(g) for all a and generators g, with rho(1) = id, gives a homomorphism
    P = np.array(a_perms)
    if not (P[A.identity] == np.arange(len(carrier))).all():
        raise VerificationError("separating_quotient.homomorphism", "identity of A acts nontrivially")
    for g in A.generators():
        for a in range(A.order):
            if not (P[g][P[a]] == P[A.mul(a, g)]).all():
                raise VerificationError("separating_quotient.homomorphism", f"A relation fails at ({a}, {g})")
    for w in words:
        if w and Q.image(w)[0] == 0:
            raise VerificationError("separating_quotient.nontrivial", f"{word_str(w)} fixes the base point")
        if w and Q.image(w)[0] != index[w]:
            raise VerificationError("separating_quotient.orbit", f"base point is not sent to {word_str(w)}")
    return Q


# --- quotients of Z^d * F_n -----------------------------------------------------------

def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


def perm_order(perm) -> int:
    seen = [False] * len(perm)
    out = 1
    for i in range(len(perm)):
        if not seen[i]:
            k, j = 0, i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                k += 1
            out = math.lcm(out, k)
    return out


@dataclass
class QuotientResult:
    d: int
    n: int
    moduli: tuple
    M: int
    quotient: PermQuotient
    index: dict  # residue tuple -> element of the finite abelian factor
    words: list  # the input set C, normalised over Z^d * F_n

    def q(self, w) -> tuple:
        """Permutation image of a word of Z^d * F_n."""
        red = exponent_reduce(w, self.moduli)
        return self.quotient.image(tuple((k, self.index[v]) if k == "A" else (k, v) for k, v in red))

    def generator_images(self) -> dict:
        out = {}
        for i in range(self.d):
            e = tuple(int(i == j) for j in range(self.d))
            out[f"e{i + 1}"] = self.q((("A", e),))
        for j in range(1, self.n + 1):
            out[f"a{j}"] = self.q((("F", (j,)),))
        return out

    def to_json(self) -> dict:
        gens = self.generator_images()
        return {
            "moduli": list(self.moduli),
            "M": self.M,
            "carrier_size": len(self.quotient.carrier),
            "carrier": [word_str(w, self.quotient.factor.group.labels) for w in self.quotient.carrier],
            "generators": {k: list(v) for k, v in gens.items()},
            "generator_orders": {k: perm_order(v) for k, v in gens.items()},
            "words": [word_to_json(w) for w in self.words],
        }


def build_quotient(d: int, n: int, C, p: Sequence[int], *, relaxed: bool = False) -> QuotientResult:
    """Finite permutation quotient of Z^d * F_n, injective on C, with q(e_i) of order p_i."""
    p = tuple(int(x) for x in p)
    if len(p) != d:
        raise InputError(f"need {d} moduli, got {len(p)}")
    Z = VectorFactor((0,) * d)
    C = list(dict.fromkeys(normalize(w, Z) for w in C))
    for w in C:
        if free_rank_used(w) > n:
            raise InputError(f"word {word_str(w)} uses a free generator beyond a{n}")
    N, M = max_exponent(C)
    for i, m in enumerate(p):
        if m < M:
            raise InputError(f"modulus p_{i + 1} = {m} is below the bound M = {M}")
        if not relaxed and not _is_prime(m):
            raise InputError(f"modulus p_{i + 1} = {m} is not prime (use relaxed mode)")
    if not relaxed and len(set(p)) != len(p):
        raise InputError("moduli must be distinct primes (use relaxed mode)")

    reduced = [exponent_reduce(w, p) for w in C]
    if len(set(reduced)) != len(reduced):
        raise VerificationError("build_quotient.exponent_reduce", "reduction is not injective on C")

    A = abelian(p)
    index = {lab: i for i, lab in enumerate(A.labels)}
    factor = TableFactor(A)
    as_table = [tuple((k, index[v]) if k == "A" else (k, v) for k, v in w) for w in reduced]
    targets = {((("A", a),)) for a in range(A.order) if a != A.identity}
    for i, u in enumerate(as_table):
        for v in as_table[i + 1:]:
            targets.add(mul(inverse(u, factor), v, factor))
    targets.discard(())
    Q = separating_quotient(A, n, sorted(targets, key=_word_key))
    result = QuotientResult(d, n, p, M, Q, index, C)
    _verify_quotient(result)
    return result


def _verify_quotient(res: QuotientResult):
    images = [res.q(w) for w in res.words]
    if len(set(images)) != len(images):
        raise VerificationError("build_quotient.injective", "two words of C have the same image")
    gens = res.generator_images()
    for i in range(res.d):
        order = perm_order(gens[f"e{i + 1}"])
        if order != res.moduli[i]:
            raise VerificationError("build_quotient.order", f"q(e{i + 1}) has order {order}, expected {res.moduli[i]}")
        for j in range(i):
            a, b = gens[f"e{i + 1}"], gens[f"e{j + 1}"]
            if compose(a, b) != compose(b, a):
                raise VerificationError("build_quotient.commute", f"q(e{i + 1}) and q(e{j + 1}) do not commute")
