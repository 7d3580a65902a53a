"""Countable abelian groups at finite truncation, their characters and duality.

A group is Z^r plus finitely many primary blocks Z(p^n)^m with m finite or
infinite.  Infinite blocks materialise ``trunc`` concrete generators; anything
that needs a fresh generator draws from those and fails loudly when they run
out.  Elements are integer coordinate tuples over the materialised generators.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceeded, InputError, VerificationError
from .exact import Angle, angle_dist, format_fraction
from .finitegroup import FiniteGroup
from .lattice import echelon, lattice_index, reduce_vector

INF = None  # multiplicity omega


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


def _lcm(values) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


@dataclass(frozen=True, order=True)
class PrimaryBlock:
    p: int
    n: int
    mult: Optional[int]  # None means omega
    trunc: int = 1

    @property
    def order(self) -> int:
        return self.p ** self.n

    @property
    def infinite(self) -> bool:
        return self.mult is None

    @property
    def count(self) -> int:
        return self.trunc if self.mult is None else self.mult


class AbGroup:
    """Z^free_rank (+) sum over blocks of Z(p^n)^mult, materialised."""

    def __init__(self, free_rank: int = 0, primary: Sequence[PrimaryBlock] = ()):
        if free_rank < 0:
            raise InputError("free_rank must be non-negative")
        seen = set()
        for b in primary:
            if not _is_prime(b.p):
                raise InputError(f"{b.p} is not prime")
            if b.n < 1:
                raise InputError(f"exponent must be positive in Z({b.p}^{b.n})")
            if b.mult is not None and b.mult < 1:
                raise InputError(f"multiplicity of Z({b.p}^{b.n}) must be positive or omega")
            if b.mult is None and b.trunc < 1:
                raise InputError(f"truncation of Z({b.p}^{b.n})^omega must be at least 1")
            if (b.p, b.n) in seen:
                raise InputError(f"duplicate primary entry Z({b.p}^{b.n})")
            seen.add((b.p, b.n))
        self.free_rank = free_rank
        self.blocks = tuple(sorted(primary))
        orders, ids, owner = [], [], []
        for i in range(free_rank):
            orders.append(0)
            ids.append(f"Z#{i}")
            owner.append(None)
        for bi, b in enumerate(self.blocks):
            for j in range(b.count):
                orders.append(b.order)
                ids.append(f"{b.p}^{b.n}#{j}")
                owner.append(bi)
        self.orders = tuple(orders)
        self.gen_ids = tuple(ids)
        self.block_of = tuple(owner)
        self.rank = len(orders)

    @classmethod
    def of(cls, *entries, free_rank=0) -> "AbGroup":
        """Shorthand: ``AbGroup.of((2, 1, None, 4), (3, 1, 2))`` for Z(2)^omega (+) Z(3)^2."""
        return cls(free_rank, [PrimaryBlock(*e) for e in entries])

    def __eq__(self, other):
        return isinstance(other, AbGroup) and (self.free_rank, self.blocks) == (other.free_rank, other.blocks)

    def __hash__(self):
        return hash((self.free_rank, self.blocks))

    def __repr__(self):
        parts = [f"Z^{self.free_rank}"] if self.free_rank else []
        for b in self.blocks:
            m = "w" if b.infinite else str(b.mult)
            parts.append(f"Z({b.order})^{m}" + (f"[trunc {b.trunc}]" if b.infinite else ""))
        return "AbGroup(" + " + ".join(parts or ["0"]) + ")"

    # --- Pruefer invariants ---------------------------------------------
    def multiplicity(self, p: int, n: int):
        """m_Gamma(p^n): 0, a positive integer, or None for omega."""
        for b in self.blocks:
            if (b.p, b.n) == (p, n):
                return b.mult
        return 0

    @property
    def bounded(self) -> bool:
        return self.free_rank == 0

    def require_bounded(self, what: str):
        if not self.bounded:
            raise InputError(f"{what} needs a bounded group; {self!r} has free rank {self.free_rank}")

    @property
    def exponent(self) -> int:
        self.require_bounded("exponent")
        return _lcm(b.order for b in self.blocks)

    @property
    def size(self) -> int:
        """Order of the materialised group."""
        self.require_bounded("size")
        return math.prod(self.orders)

    # --- elements -------------------------------------------------------
    def element(self, coords: Sequence[int]) -> tuple:
        if len(coords) != self.rank:
            raise InputError(f"element has {len(coords)} coordinates, group rank is {self.rank}")
        return tuple(int(c) % o if o else int(c) for c, o in zip(coords, self.orders))

    @property
    def zero(self) -> tuple:
        return (0,) * self.rank

    def gen(self, i: int) -> tuple:
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def add(self, x, y) -> tuple:
        return self.element([a + b for a, b in zip(x, y)])

    def neg(self, x) -> tuple:
        return self.element([-a for a in x])

    def scale(self, k: int, x) -> tuple:
        return self.element([k * a for a in x])

    def order_of(self, x) -> int:
        """Order of an element; 0 means infinite."""
        out = 1
        for c, o in zip(x, self.orders):
            if c % o if o else c:
                if not o:
                    return 0
                out = out * (o // math.gcd(o, c)) // math.gcd(out, o // math.gcd(o, c))
        return out

    def elements(self):
        """All elements in lexicographic coordinate order (bounded groups only)."""
        self.require_bounded("element enumeration")
        return product(*[range(o) for o in self.orders])

    def as_finite_group(self, cap: int = 4096):
        """Multiplication table of the materialised group plus the element list."""
        if self.size > cap:
            raise CapExceeded(f"group of order {self.size} exceeds table cap {cap}")
        elems = list(self.elements())
        index = {e: i for i, e in enumerate(elems)}
        table = [[index[self.add(a, b)] for b in elems] for a in elems]
        return FiniteGroup(table, labels=elems, check=False), elems

    # --- JSON -------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "free_rank": self.free_rank,
            "primary": [
                {"p": b.p, "n": b.n, "mult": "inf" if b.infinite else b.mult, "trunc": b.trunc}
                for b in self.blocks
            ],
        }

    @classmethod
    def from_json(cls, obj, path="group") -> "AbGroup":
        if not isinstance(obj, dict):
            raise InputError(f"{path}: expected an object", path=path)
        free = obj.get("free_rank", 0)
        if not isinstance(free, int) or isinstance(free, bool) or free < 0:
            raise InputError(f"{path}.free_rank: expected a non-negative integer", path=f"{path}.free_rank")
        blocks = []
        for i, e in enumerate(obj.get("primary", [])):
            p_ = f"{path}.primary[{i}]"
            try:
                mult = e["mult"]
                mult = None if mult == "inf" else int(mult)
                trunc = int(e.get("trunc", 1))
                blocks.append(PrimaryBlock(int(e["p"]), int(e["n"]), mult, trunc))
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"{p_}: malformed primary entry ({exc})", path=p_) from None
        return cls(free, blocks)


@dataclass(frozen=True)
class Character:
    """A homomorphism to the circle, given by its values on the generators."""

    group: AbGroup
    values: tuple

    def __post_init__(self):
        vals = tuple(v if isinstance(v, Angle) else Angle(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.group.rank:
            raise InputError(f"character has {len(vals)} values, group rank is {self.group.rank}")
        for gid, o, v in zip(self.group.gen_ids, self.group.orders, vals):
            if o and (v.value * o).denominator != 1:
                raise InputError(f"character value {v} on {gid} is incompatible with order {o}")

    @classmethod
    def trivial(cls, group: AbGroup) -> "Character":
        return cls(group, (Angle(0),) * group.rank)

    def __call__(self, x) -> Angle:
        return Angle(sum((c * v.value for c, v in zip(x, self.values)), Fraction(0)))

    def to_json(self) -> dict:
        return {gid: format_fraction(v.value) for gid, v in zip(self.group.gen_ids, self.values)}

    @classmethod
    def from_json(cls, group: AbGroup, obj, path="character") -> "Character":
        from .exact import parse_fraction

        if not isinstance(obj, dict):
            raise InputError(f"{path}: expected a generator -> angle map", path=path)
        unknown = set(obj) - set(group.gen_ids)
        if unknown:
            raise InputError(f"{path}: unknown generator ids {sorted(unknown)}", path=path)
        vals = [Angle(parse_fraction(obj.get(g, "0"), path=f"{path}.{g}")) for g in group.gen_ids]
        return cls(group, vals)


@dataclass(frozen=True)
class CyclicSubgroupOfTorus:
    """The subgroup {j/N : 0 <= j < N} of the circle."""

    order: int

    def __contains__(self, a: Angle) -> bool:
        return (a.value * self.order).denominator == 1

    def elements(self):
        return [Angle(Fraction(j, self.order)) for j in range(self.order)]


# --- Pruefer-invariant predicates ------------------------------------------

def has_star(G: AbGroup) -> bool:
    """Every occurring p^n is dominated by some p^k, k >= n, of infinite multiplicity."""
    G.require_bounded("has_star")
    return all(
        any(c.p == b.p and c.n >= b.n and c.infinite for c in G.blocks) for b in G.blocks
    )


def h_gamma(G: AbGroup) -> CyclicSubgroupOfTorus:
    G.require_bounded("h_gamma")
    return CyclicSubgroupOfTorus(_lcm(b.order for b in G.blocks if b.infinite))


def discon_obstruction(G: AbGroup):
    """(p, n) with 0 < m(p^n) < omega and m(p^k) = 0 for k > n, or None when the property holds.

    The smallest such prime is returned.
    """
    G.require_bounded("discon_obstruction")
    for p in sorted({b.p for b in G.blocks}):
        top = max((b for b in G.blocks if b.p == p), key=lambda b: b.n)
        if not top.infinite:
            return (p, top.n)
    return None


# --- subgroup lattices --------------------------------------------------------

class _CharLattice:
    """Subgroup generated by ``gens`` (plus the group relations) with a character on it."""

    def __init__(self, G: AbGroup, gens, values=None):
        self.G = G
        m = G.rank
        if values is None:
            values = [Angle(0)] * len(gens)
        if len(values) != len(gens):
            raise InputError(f"{len(values)} character values for {len(gens)} subgroup generators")
        self.rows = [list(G.element(g)) + [v.value] for g, v in zip(gens, values)]
        self.rows += [
            [o if i == j else 0 for i in range(m)] + [Fraction(0)]
            for j, o in enumerate(G.orders)
            if o
        ]
        self._rebuild()

    def _rebuild(self):
        m = self.G.rank
        basis, left = echelon(self.rows, range(m))
        for row in left:
            if row[m] % 1:
                raise InputError(
                    "character values violate a relation of the subgroup",
                    witness=[int(x) for x in row[:m]],
                )
        self.basis = [(c, row[:m] + [row[m] % 1]) for c, row in basis]

    def evaluate(self, x) -> Optional[Angle]:
        m = self.G.rank
        rem, coefs = reduce_vector(self.basis, list(x) + [Fraction(0)], m)
        if any(rem):
            return None
        return Angle(sum((q * row[m] for q, (_, row) in zip(coefs, self.basis)), Fraction(0)))

    def __contains__(self, x) -> bool:
        m = self.G.rank
        rem, _ = reduce_vector(self.basis, list(x) + [Fraction(0)], m)
        return not any(rem)

    def least_multiple(self, j: int) -> Optional[int]:
        """Least k > 0 with k * e_j in the subgroup, or None."""
        m = self.G.rank
        cols = [i for i in range(m) if i != j] + [j]
        basis, _ = echelon(self.rows, cols)
        if basis and basis[-1][0] == j:
            return basis[-1][1][j]
        return None

    def adjoin(self, x, value: Angle):
        self.rows.append(list(self.G.element(x)) + [value.value])
        self._rebuild()


def subgroup_order(G: AbGroup, gens) -> int:
    """Order of the subgroup generated by ``gens`` (bounded groups)."""
    G.require_bounded("subgroup_order")
    if G.rank == 0:
        return 1
    rows = [list(G.element(g)) for g in gens]
    rows += [[o if i == j else 0 for i in range(G.rank)] for j, o in enumerate(G.orders)]
    return math.prod(G.orders) // lattice_index(rows, G.rank)


def in_subgroup(G: AbGroup, gens, x) -> bool:
    return tuple(x) in _CharLattice(G, gens)


# --- characters -----------------------------------------------------------------

def kth_roots(a: Angle, k: int) -> list:
    """All c with k*c = a (mod 1), ascending; consecutive roots are 1/k apart."""
    if k < 1:
        raise InputError(f"k must be positive, got {k}")
    return [Angle((a.value + t) / k) for t in range(k)]


def extend_character(G: AbGroup, delta_gens, theta) -> Character:
    """Extend a character given on the generators of a subgroup to all of G.

    Generators of G are adjoined one at a time; for each, k is the least
    positive integer putting it into the current subgroup and its value is the
    smallest k-th root of the value already forced on its k-th multiple.
    """
    theta = [t if isinstance(t, Angle) else Angle(t) for t in theta]
    delta_gens = [G.element(g) for g in delta_gens]
    lat = _CharLattice(G, delta_gens, theta)
    values = []
    for j in range(G.rank):
        e = G.gen(j)
        k = lat.least_multiple(j)
        if k is None:
            c = Angle(0)
        else:
            forced = lat.evaluate(G.scale(k, e))
            c = kth_roots(forced, k)[0]
        lat.adjoin(e, c)
        values.append(c)
    chi = Character(G, tuple(values))
    for g, t in zip(delta_gens, theta):
        if chi(g) != t:
            raise VerificationError("extend_character.restriction", f"value on {g} is {chi(g)}, expected {t}")
    return chi


def _first_element(G: AbGroup, predicate, cap: int):
    for count, x in enumerate(G.elements()):
        if count >= cap:
            raise CapExceeded(f"element search exceeded cap {cap}")
        if predicate(x):
            return x
    return None


def dense_tuple_step(G: AbGroup, F_gens, thetas, b, eps, *, search_cap: int = 10**6):
    """Characters agreeing with ``thetas`` on F and sending one element eps-close to ``b``.

    Returns ``(phis, gamma0)`` with max_i d(phi_i(gamma0), b_i) < eps.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise InputError("eps must be positive")
    G.require_bounded("dense_tuple_step")
    if len(thetas) != len(b):
        raise InputError(f"{len(thetas)} characters but target has arity {len(b)}")
    F_gens = [G.element(g) for g in F_gens]
    thetas = [[t if isinstance(t, Angle) else Angle(t) for t in th] for th in thetas]
    lats = [_CharLattice(G, F_gens, th) for th in thetas]
    bound = subgroup_order(G, F_gens) / eps
    if G.exponent <= bound:
        raise InputError(f"no element of order > |F|/eps = {bound} in {G!r}")
    gamma0 = _first_element(G, lambda x: G.order_of(x) > bound, search_cap)
    plain = _CharLattice(G, F_gens)
    k = next(k for k in range(1, G.order_of(gamma0) + 1) if G.scale(k, gamma0) in plain)
    phis = []
    for lat, th, target in zip(lats, thetas, b):
        forced = lat.evaluate(G.scale(k, gamma0))
        c = min(kth_roots(forced, k), key=lambda r: (angle_dist(r, target), r.value))
        phis.append(extend_character(G, F_gens + [gamma0], th + [c]))
    worst = max((angle_dist(phi(gamma0), t) for phi, t in zip(phis, b)), default=Fraction(0))
    if worst >= eps:
        raise VerificationError("dense_tuple_step.closeness", f"distance {worst} >= eps {eps}")
    return phis, gamma0


def _fresh_element(G: AbGroup, delta_gens, N: int, search_cap: int):
    support = {i for g in delta_gens for i, c in enumerate(g) if c}
    gamma = [0] * G.rank
    ok = True
    for p in sorted({b.p for b in G.blocks}):
        top = max((bi for bi, b in enumerate(G.blocks) if b.p == p), key=lambda bi: G.blocks[bi].n)
        fresh = [i for i, owner in enumerate(G.block_of) if owner == top and i not in support]
        if not fresh:
            ok = False
            break
        gamma[fresh[0]] = 1
    if ok:
        return tuple(gamma)
    delta = _CharLattice(G, delta_gens)

    def meets_trivially(x):
        return G.order_of(x) == N and all(G.scale(j, x) not in delta for j in range(1, N))

    return _first_element(G, meets_trivially, search_cap)


def hit_target_bounded(G: AbGroup, delta_gens, psis, x, *, search_cap: int = 10**5):
    """Characters extending ``psis`` from Delta with a common gamma mapped exactly onto ``x``.

    Returns ``(phis, gamma)`` with phi_i(gamma) == x_i for every i.
    """
    if not has_star(G):
        raise InputError(f"{G!r} lacks the domination property required here")
    H = h_gamma(G)
    x = [a if isinstance(a, Angle) else Angle(a) for a in x]
    for i, a in enumerate(x):
        if a not in H:
            raise InputError(f"target coordinate {i} = {a} is not in H_Gamma of order {H.order}")
    if len(psis) != len(x):
        raise InputError(f"{len(psis)} characters but target has arity {len(x)}")
    delta_gens = [G.element(g) for g in delta_gens]
    if all(a.value == 0 for a in x):
        gamma = G.zero
    else:
        gamma = _fresh_element(G, delta_gens, G.exponent, search_cap)
    if gamma is None:
        raise InputError("truncation too small to supply an element meeting Delta trivially")
    phis = [
        extend_character(G, delta_gens + [gamma], [Angle(v) if not isinstance(v, Angle) else v for v in psi] + [a])
        for psi, a in zip(psis, x)
    ]
    for phi, a in zip(phis, x):
        if phi(gamma) != a:
            raise VerificationError("hit_target_bounded.exact_hit", f"{phi(gamma)} != {a}")
    return phis, gamma


def in_cyclic_closure(H: FiniteGroup, g: int, h: int) -> bool:
    """True iff h is a power of g in the finite group H."""
    for e in (g, h):
        if not 0 <= e < H.order:
            raise InputError(f"element {e} outside group of order {H.order}")
    return h in H.cyclic_subgroup(g)


# --- density surrogate on the torus ---------------------------------------------

def generated_torus_subgroup(generators) -> tuple:
    """(N, elements) with the subgroup of the torus generated, as integer tuples mod N."""
    if not generators:
        raise InputError("covering radius needs at least one generator")
    n = len(generators[0])
    if any(len(g) != n for g in generators):
        raise InputError("generators have mixed arity")
    gens = [[a if isinstance(a, Angle) else Angle(a) for a in g] for g in generators]
    N = _lcm(a.order for g in gens for a in g)
    ints = [tuple(int(a.value * N) for a in g) for g in gens]
    seen = {(0,) * n}
    frontier = list(seen)
    while frontier:
        nxt = []
        for s in frontier:
            for g in ints:
                t = tuple((u + v) % N for u, v in zip(s, g))
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    return N, sorted(seen)


def covering_radius_torus(generators, *, cap: int = 5 * 10**7) -> Fraction:
    """Max over the torus of the max-metric distance to the generated finite subgroup.

    When the subgroup is the product of its coordinate projections the answer is
    max_i 1/(2 q_i).  Otherwise the distance function is piecewise linear with
    breakpoints on hyperplanes x_i = c and x_i +- x_j = c whose vertices are
    half-integral over (1/N)Z, so the maximum is attained on the (1/2N) grid,
    which is searched exhaustively.
    """
    N, S = generated_torus_subgroup(generators)
    n = len(S[0])
    proj = [len({s[i] for s in S}) for i in range(n)]
    if len(S) == math.prod(proj):
        return max(Fraction(1, 2 * q) for q in proj)
    M = 2 * N
    work = (M ** n) * len(S) * n
    if work > cap:
        raise CapExceeded(f"covering-radius grid search needs {work} steps (cap {cap})")
    pts = np.array(S, dtype=np.int64) * 2
    best = 0
    for y in product(range(M), repeat=n):
        diff = np.abs(pts - np.array(y, dtype=np.int64)) % M
        circ = np.minimum(diff, M - diff).max(axis=1).min()
        best = max(best, int(circ))
    return Fraction(best, M)
