"""Finite groups given by multiplication tables.

Elements are the indices ``0..n-1``; ``table[a][b]`` is the index of ``a*b``.
Constructors below always place the identity at index 0.
"""
from __future__ import annotations

from itertools import permutations, product
from typing import Sequence

from .errors import InputError


class FiniteGroup:
    def __init__(self, table: Sequence[Sequence[int]], labels=None, check=True):
        self.table = tuple(tuple(int(x) for x in row) for row in table)
        n = len(self.table)
        self.order = n
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        if check:
            self._validate()
        self.identity = next(e for e in range(n) if all(self.table[e][x] == x for x in range(n)))
        self.inverses = tuple(
            next(b for b in range(n) if self.table[a][b] == self.identity) for a in range(n)
        )

    def _validate(self):
        n = self.order
        if n == 0:
            raise InputError("group table is empty")
        full = set(range(n))
        for i, row in enumerate(self.table):
            if len(row) != n or set(row) != full:
                raise InputError(f"table row {i} is not a permutation of the elements", path=f"table[{i}]")
        for j in range(n):
            if {self.table[i][j] for i in range(n)} != full:
                raise InputError(f"table column {j} is not a permutation of the elements")
        ids = [e for e in range(n) if all(self.table[e][x] == x and self.table[x][e] == x for x in range(n))]
        if not ids:
            raise InputError("table has no two-sided identity")
        t = self.table
        for a, b, c in product(range(n), repeat=3):
            if t[t[a][b]][c] != t[a][t[b][c]]:
                raise InputError(f"table not associative at ({a}, {b}, {c})", witness=(a, b, c))

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverses[a]

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inverses[a], -k
        out = self.identity
        for _ in range(k):
            out = self.table[out][a]
        return out

    def element_order(self, a: int) -> int:
        x, k = a, 1
        while x != self.identity:
            x = self.table[x][a]
            k += 1
        return k

    def cyclic_subgroup(self, a: int) -> list:
        out = [self.identity]
        x = a
        while x != self.identity:
            out.append(x)
            x = self.table[x][a]
        return out

    def subgroup(self, gens) -> list:
        """Sorted element list of the subgroup generated by ``gens``."""
        seen = {self.identity}
        frontier = [self.identity]
        gens = list(gens)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.table[x][g]
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(seen)

    def generators(self) -> list:
        """A small generating set, chosen greedily in index order."""
        gens = []
        span = {self.identity}
        for a in range(self.order):
            if a not in span:
                gens.append(a)
                span = set(self.subgroup(gens))
        return gens

    def is_abelian(self) -> bool:
        t = self.table
        return all(t[a][b] == t[b][a] for a in range(self.order) for b in range(a))

    def conjugacy_classes(self) -> list:
        seen = set()
        classes = []
        for x in range(self.order):
            if x in seen:
                continue
            cls = sorted({self.table[self.table[g][x]][self.inverses[g]] for g in range(self.order)})
            seen.update(cls)
            classes.append(cls)
        return classes


def cyclic(n: int) -> FiniteGroup:
    return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)], check=False)


def abelian(orders: Sequence[int]) -> FiniteGroup:
    """Z(o_1) x ... x Z(o_k); element labels are coordinate tuples in lexicographic order."""
    elems = list(product(*[range(o) for o in orders]))
    index = {e: i for i, e in enumerate(elems)}
    table = [
        [index[tuple((x + y) % o for x, y, o in zip(a, b, orders))] for b in elems]
        for a in elems
    ]
    return FiniteGroup(table, labels=elems, check=False)


def elementary_abelian_2(k: int) -> FiniteGroup:
    """Z(2)^k with element i the bit vector of i, product = xor."""
    n = 1 << k
    return FiniteGroup([[a ^ b for b in range(n)] for a in range(n)], check=False)


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    pairs = [(a, b) for a in range(g.order) for b in range(h.order)]
    index = {p: i for i, p in enumerate(pairs)}
    table = [[index[(g.table[a][c], h.table[b][d])] for (c, d) in pairs] for (a, b) in pairs]
    return FiniteGroup(table, labels=pairs, check=False)


def compose(p: Sequence[int], q: Sequence[int]) -> tuple:
    """(p o q)(i) = p[q[i]]."""
    return tuple(p[i] for i in q)


def from_permutations(gens: Sequence[Sequence[int]], degree=None) -> FiniteGroup:
    """Permutation group generated by ``gens`` with product (p*q)(i) = p(q(i))."""
    if degree is None:
        degree = len(gens[0]) if gens else 0
    ident = tuple(range(degree))
    elems = [ident]
    seen = {ident}
    frontier = [ident]
    gens = [tuple(g) for g in gens]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = compose(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        elems.extend(nxt)
        frontier = nxt
    elems = [ident] + sorted(elems[1:])
    index = {e: i for i, e in enumerate(elems)}
    table = [[index[compose(a, b)] for b in elems] for a in elems]
    return FiniteGroup(table, labels=elems, check=False)


def symmetric(n: int) -> FiniteGroup:
    perms = list(permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[compose(a, b)] for b in perms] for a in perms]
    return FiniteGroup(table, labels=perms, check=False)


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the n-gon as permutations of its vertices."""
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    return from_permutations([rot, ref], degree=n)
