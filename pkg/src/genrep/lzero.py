"""Dyadic step-function groups K_n = K^(2^n) with the averaged metric.

A step map of level n is a list of 2^n values in a finite metric group K
(element indices).  The group law is pointwise and
d(f, g) = 2^-n * sum_i d_K(f_i, g_i).  For K a finite subgroup of the circle,
``circle_group(N)`` gives Z(N) with the geodesic metric on {j/N}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .abgroup import AbGroup, Character, h_gamma, has_star
from .errors import CapExceeded, InputError, VerificationError
from .exact import Angle, angle_dist, format_fraction
from .finitegroup import cyclic
from .lattice import lattice_index
from .metspace import BiInvMetricGroup


def circle_group(N: int) -> BiInvMetricGroup:
    """{j/N} inside the circle with the shortest-geodesic metric; element j is the angle j/N."""
    if N < 1:
        raise InputError("circle subgroup order must be positive")
    G = cyclic(N)
    G.labels = tuple(Angle(Fraction(j, N)) for j in range(N))
    dist = [[angle_dist(Angle(Fraction(i, N)), Angle(Fraction(j, N))) for j in range(N)] for i in range(N)]
    return BiInvMetricGroup(G, dist, check=False)


@dataclass(frozen=True)
class StepMap:
    level: int
    values: tuple  # element indices of the value group

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if self.level < 0:
            raise InputError("level must be non-negative")
        if len(self.values) != 2 ** self.level:
            raise InputError(f"level {self.level} step map needs {2 ** self.level} values, got {len(self.values)}")


class StepGroup:
    def __init__(self, level: int, K: BiInvMetricGroup):
        if level < 0:
            raise InputError("level must be non-negative")
        self.level = level
        self.K = K
        self.width = 2 ** level
        self._D, self._scale = K.metric.int_matrix()

    def __repr__(self):
        return f"StepGroup(level={self.level}, |K|={len(self.K)})"

    @property
    def size(self) -> int:
        return len(self.K) ** self.width

    def _check(self, f: StepMap):
        if f.level != self.level:
            raise InputError(f"step map of level {f.level} used in level {self.level} group")
        if any(not 0 <= v < len(self.K) for v in f.values):
            raise InputError("step map value outside the value group")

    @property
    def identity(self) -> StepMap:
        return StepMap(self.level, (self.K.group.identity,) * self.width)

    def mul(self, f: StepMap, g: StepMap) -> StepMap:
        self._check(f)
        self._check(g)
        T = self.K.group
        return StepMap(self.level, tuple(T.mul(a, b) for a, b in zip(f.values, g.values)))

    def inv(self, f: StepMap) -> StepMap:
        self._check(f)
        return StepMap(self.level, tuple(self.K.group.inv(a) for a in f.values))

    def dist(self, f: StepMap, g: StepMap) -> Fraction:
        self._check(f)
        self._check(g)
        total = sum(int(self._D[a, b]) for a, b in zip(f.values, g.values))
        return Fraction(total, self._scale * self.width)

    def elements(self):
        for vals in product(range(len(self.K)), repeat=self.width):
            yield StepMap(self.level, vals)

    def from_angles(self, angles: Sequence) -> StepMap:
        """Step map from Angles, for value groups built by ``circle_group``."""
        labels = {lab: i for i, lab in enumerate(self.K.group.labels)}
        try:
            return StepMap(self.level, [labels[a if isinstance(a, Angle) else Angle(a)] for a in angles])
        except KeyError as exc:
            raise InputError(f"angle {exc.args[0]} is not in the value group") from None

    def angles(self, f: StepMap) -> list:
        return [self.K.group.labels[v] for v in f.values]

    def to_json(self, f: StepMap) -> dict:
        labs = self.K.group.labels
        vals = [format_fraction(labs[v].value) if isinstance(labs[v], Angle) else v for v in f.values]
        return {"level": f.level, "values": vals}


def refine(f: StepMap, m: int) -> StepMap:
    """The same step function viewed at level m >= n (each value repeated 2^(m-n) times)."""
    if m < f.level:
        raise InputError(f"cannot refine level {f.level} to lower level {m}")
    rep = 2 ** (m - f.level)
    return StepMap(m, tuple(v for v in f.values for _ in range(rep)))


# --- homomorphisms from abelian groups ----------------------------------------------

@dataclass
class StepHom:
    """gamma -> (phi_1(gamma), ..., phi_{2^n}(gamma)) into the circle subgroup of order N."""

    group: AbGroup
    level: int
    chars: list
    N: int
    target: StepGroup
    gen_images: list  # StepMap per materialised generator

    def __call__(self, x) -> StepMap:
        x = self.group.element(x)
        return StepMap(
            self.level,
            [int((phi(x).value * self.N) % self.N) for phi in self.chars],
        )

    def image_order(self) -> int:
        """|image| = N^(2^n) / [Z^(2^n) : span(images) + N Z^(2^n)]."""
        k = 2 ** self.level
        rows = [list(img.values) for img in self.gen_images]
        rows += [[self.N if i == j else 0 for i in range(k)] for j in range(k)]
        return self.N ** k // lattice_index(rows, k)

    def image_elements(self, cap: int = 10**6) -> list:
        """All image elements by closure under the generator images (for cross-checks)."""
        T = self.target
        seen = {T.identity}
        frontier = [T.identity]
        while frontier:
            nxt = []
            for f in frontier:
                for g in self.gen_images:
                    h = T.mul(f, g)
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
                        if len(seen) > cap:
                            raise CapExceeded(f"image enumeration exceeded cap {cap}")
            frontier = nxt
        return sorted(seen, key=lambda f: f.values)


def hom_from_characters(G: AbGroup, level: int, chars: Sequence[Character], N: Optional[int] = None) -> StepHom:
    """Homomorphism G -> K_level given by 2^level characters, one per dyadic interval."""
    k = 2 ** level
    if len(chars) != k:
        raise InputError(f"level {level} needs {k} characters, got {len(chars)}")
    for phi in chars:
        if phi.group != G:
            raise InputError("character belongs to a different group")
        Character(G, phi.values)  # order compatibility
    if N is None:
        N = math.lcm(1, *(v.order for phi in chars for v in phi.values))
    for phi in chars:
        for v in phi.values:
            if N % v.order:
                raise InputError(f"character value {v} does not lie in the circle subgroup of order {N}")
    target = StepGroup(level, circle_group(N))
    hom = StepHom(G, level, list(chars), N, target, [])
    hom.gen_images = [hom(G.gen(j)) for j in range(G.rank)]
    T = target
    for j, o in enumerate(G.orders):
        if o:
            acc = T.identity
            for _ in range(o):
                acc = T.mul(acc, hom.gen_images[j])
            if acc != T.identity:
                raise VerificationError("hom_from_characters.relation", f"generator {G.gen_ids[j]} relation fails")
    for a in range(G.rank):
        for b in range(G.rank):
            lhs = hom(G.add(G.gen(a), G.gen(b)))
            if lhs != T.mul(hom.gen_images[a], hom.gen_images[b]):
                raise VerificationError("hom_from_characters.multiplicative", f"at ({a}, {b})")
    return hom


def surjective_hom(G: AbGroup, level: int) -> StepHom:
    """A homomorphism from G onto (H_Gamma)^(2^level).

    For each prime p dividing |H_Gamma| the i-th generator (i < 2^level) of the
    top Z(p^n) block is sent to the step map with value 1/p^n at position i and
    0 elsewhere; all other generators go to 0.  By the Chinese remainder
    theorem the images generate the full product.
    """
    if not has_star(G):
        raise InputError(f"{G!r} lacks the domination property required here")
    N = h_gamma(G).order
    k = 2 ** level
    values = [[Angle(0)] * G.rank for _ in range(k)]
    for p in sorted({b.p for b in G.blocks}):
        top = max((bi for bi, b in enumerate(G.blocks) if b.p == p), key=lambda bi: G.blocks[bi].n)
        gens = [j for j, owner in enumerate(G.block_of) if owner == top]
        if len(gens) < k:
            raise InputError(
                f"truncation insufficient: Z({p}^{G.blocks[top].n}) block has {len(gens)} generators, need {k}"
            )
        step = Fraction(1, G.blocks[top].order)
        for i in range(k):
            values[i][gens[i]] = Angle(step)
    chars = [Character(G, tuple(v)) for v in values]
    hom = hom_from_characters(G, level, chars, N=N)
    if hom.image_order() != N ** k:
        raise VerificationError("surjective_hom.image_size", f"image has {hom.image_order()} elements, expected {N ** k}")
    return hom


# --- covering radius ----------------------------------------------------------------

@dataclass
class DensityReport:
    covering_radius: Fraction
    witness: StepMap
    subgroup_order: int

    def to_json(self, T: StepGroup) -> dict:
        return {
            "covering_radius": format_fraction(self.covering_radius),
            "witness": T.to_json(self.witness),
            "subgroup_order": self.subgroup_order,
        }


def density_report(T: StepGroup, generators: Sequence[StepMap], *, cap: int = 10**6, points=None) -> DensityReport:
    """Exact max over f of min over s in <generators> of d(f, s).

    ``points`` restricts the outer max to the given step maps (default: all of
    T).  The witness is the first farthest point in lexicographic order.
    """
    if points is None and T.size > cap:
        raise CapExceeded(f"step group of size {T.size} exceeds cap {cap}")
    for g in generators:
        T._check(g)
    Kt = np.array(T.K.group.table)
    S = {T.identity.values}
    frontier = list(S)
    while frontier:
        nxt = []
        for f in frontier:
            for g in generators:
                h = tuple(int(x) for x in Kt[list(f), list(g.values)])
                if h not in S:
                    S.add(h)
                    nxt.append(h)
                    if len(S) > cap:
                        raise CapExceeded(f"subgroup enumeration exceeded cap {cap}")
        frontier = nxt
    S_arr = np.array(sorted(S), dtype=np.int64)
    D = np.asarray(T._D, dtype=np.int64)
    if points is None:
        pts = np.array(list(product(range(len(T.K)), repeat=T.width)), dtype=np.int64)
    else:
        pts = np.array([p.values for p in points], dtype=np.int64).reshape(-1, T.width)
    best, witness = -1, None
    chunk = max(1, 2**22 // max(1, len(S_arr) * T.width))
    for start in range(0, len(pts), chunk):
        block = pts[start:start + chunk]
        totals = D[block[:, None, :], S_arr[None, :, :]].sum(axis=2).min(axis=1)
        i = int(np.argmax(totals))
        if totals[i] > best:
            best, witness = int(totals[i]), block[i]
    return DensityReport(Fraction(best, T._scale * T.width), StepMap(T.level, witness), len(S_arr))
