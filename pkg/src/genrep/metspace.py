"""Finite rational metric spaces, isometric actions and metric induction.

Distances are Fractions.  Bulk checks (triangle inequality, isometry tests,
the min over a subgroup in ``induce``) scale the matrix to integers by the
common denominator and run on numpy arrays; results are converted back to
Fractions, so nothing is approximated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import floyd_warshall

from .errors import CapExceeded, InputError, VerificationError
from .exact import format_fraction, parse_fraction
from .finitegroup import FiniteGroup

_INT64_SAFE = 2**61


def integer_matrix(rows, scale: Optional[int] = None):
    """(array, scale) with array = rows * scale exactly; object dtype if int64 would overflow."""
    flat = [Fraction(x) for r in rows for x in r]
    if scale is None:
        scale = math.lcm(*(q.denominator for q in flat)) if flat else 1
    ints = [int(q * scale) for q in flat]
    n = len(rows)
    m = len(rows[0]) if n else 0
    big = max((abs(v) for v in ints), default=0) * 2 >= _INT64_SAFE
    arr = np.array(ints, dtype=object if big else np.int64).reshape(n, m)
    return arr, scale


def integer_matrix_scaled(M, factor: int):
    big = M.dtype == object or int(np.abs(M).max(initial=0)) * factor * 2 >= _INT64_SAFE
    return (M.astype(object) if big else M) * factor


def metric_violation(dist) -> Optional[dict]:
    """First failed metric axiom as a report dict, or None."""
    n = len(dist)
    for i, row in enumerate(dist):
        if len(row) != n:
            return {"kind": "shape", "row": i}
    if n == 0:
        return None
    D, _ = integer_matrix(dist)
    return int_metric_violation(D)


def int_metric_violation(D) -> Optional[dict]:
    """metric_violation for an integer matrix."""
    n = len(D)
    diag = np.flatnonzero(np.diagonal(D) != 0)
    if len(diag):
        return {"kind": "diagonal", "points": [int(diag[0])]}
    bad = np.argwhere(np.triu(D != D.T, 1))
    if len(bad):
        return {"kind": "symmetry", "points": [int(v) for v in bad[0]]}
    bad = np.argwhere(np.triu(D <= 0, 1))
    if len(bad):
        return {"kind": "positivity", "points": [int(v) for v in bad[0]]}
    if n > 40 and D.dtype != object and int(D.max()) < 2**50:
        # shortest-path closure equals D iff every triangle inequality holds
        closure = floyd_warshall(D.astype(np.float64), directed=False)
        if np.array_equal(closure, D):
            return None
    for y in range(n):
        worse = D[:, y][:, None] + D[y, :][None, :] < D
        if worse.any():
            x, z = map(int, np.argwhere(worse)[0])
            return {"kind": "triangle", "points": [x, y, z]}
    return None


class FinMetric:
    """A finite metric space with rational distances.

    Stored as an integer matrix ``M`` and a common denominator ``scale``:
    d(i, j) = M[i, j] / scale exactly.
    """

    def __init__(self, labels: Sequence, dist, *, check: bool = True):
        dist = [list(row) for row in dist]
        if len(labels) != len(dist):
            raise InputError(f"{len(labels)} labels for a {len(dist)}-point matrix")
        if any(len(row) != len(dist) for row in dist):
            raise InputError("distance matrix is not square", witness={"kind": "shape"})
        M, scale = integer_matrix(dist) if dist else (np.zeros((0, 0), dtype=np.int64), 1)
        self._setup(labels, M, scale, check)

    @classmethod
    def from_int(cls, labels, M, scale: int, *, check: bool = False) -> "FinMetric":
        obj = cls.__new__(cls)
        g = math.gcd(int(scale), *(int(v) for v in np.unique(M))) if np.size(M) else int(scale)
        if g > 1:
            M, scale = M // g, scale // g
        obj._setup(labels, np.asarray(M), int(scale), check)
        return obj

    def _setup(self, labels, M, scale, check):
        self.labels = tuple(labels)
        if len(self.labels) != len(M):
            raise InputError(f"{len(self.labels)} labels for a {len(M)}-point matrix")
        self._M = M
        self._M.flags.writeable = False
        self._scale = scale
        self._dist = None
        if check:
            bad = int_metric_violation(M)
            if bad is not None:
                raise InputError(_describe(bad, self.labels), witness=bad)
        self._index = {lab: i for i, lab in enumerate(self.labels)}

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return f"FinMetric({len(self)} points, diam {self.diam})"

    @property
    def dist(self) -> tuple:
        if self._dist is None:
            sc = self._scale
            self._dist = tuple(tuple(Fraction(int(v), sc) for v in row) for row in self._M)
        return self._dist

    def d(self, i: int, j: int) -> Fraction:
        return Fraction(int(self._M[i, j]), self._scale)

    def index(self, label) -> int:
        return self._index[label]

    @property
    def diam(self) -> Fraction:
        return Fraction(int(self._M.max()), self._scale) if len(self) else Fraction(0)

    def same_metric(self, other: "FinMetric") -> bool:
        return self._scale == other._scale and np.array_equal(self._M, other._M)

    def restrict(self, idx: Sequence[int]) -> "FinMetric":
        idx = list(idx)
        return FinMetric.from_int([self.labels[i] for i in idx], self._M[np.ix_(idx, idx)], self._scale)

    def int_matrix(self, scale=None):
        """(M, scale) with d = M / scale; ``scale`` must be a multiple of the stored one."""
        if scale is None or scale == self._scale:
            return self._M, self._scale
        if scale % self._scale:
            raise ValueError(f"scale {scale} is not a multiple of {self._scale}")
        return integer_matrix_scaled(self._M, scale // self._scale), scale

    def to_json(self) -> dict:
        return {
            "points": [_label_json(lab) for lab in self.labels],
            "dist": [[format_fraction(x) for x in row] for row in self.dist],
        }

    @classmethod
    def from_json(cls, obj, path="metric") -> "FinMetric":
        if not isinstance(obj, dict) or "dist" not in obj:
            raise InputError(f"{path}: expected an object with 'dist'", path=path)
        dist = []
        for i, row in enumerate(obj["dist"]):
            if not isinstance(row, list):
                raise InputError(f"{path}.dist[{i}]: expected a list", path=f"{path}.dist[{i}]")
            parsed = []
            for j, x in enumerate(row):
                q = parse_fraction(x, path=f"{path}.dist[{i}][{j}]")
                if q < 0:
                    raise InputError(f"{path}.dist[{i}][{j}]: negative distance", path=f"{path}.dist[{i}][{j}]")
                parsed.append(q)
            dist.append(parsed)
        labels = obj.get("points", list(range(len(dist))))
        return validate_metric(dist, labels)


def _label_json(lab):
    return lab if isinstance(lab, (int, str)) else str(lab)


def _describe(bad: dict, labels) -> str:
    pts = [labels[i] if i < len(labels) else i for i in bad.get("points", [])]
    return f"metric axiom '{bad['kind']}' fails at {pts}"


def validate_metric(matrix, labels=None) -> FinMetric:
    """Build a FinMetric or raise InputError whose witness names the failing points."""
    if labels is None:
        labels = list(range(len(matrix)))
    return FinMetric(labels, matrix)


class IsoAction:
    """A left action of (a subset of) a finite group on the points of a space.

    ``perms`` maps group element index -> tuple image of each point.  The
    acting elements must form a subgroup; the action law
    perm[g*h] = perm[g] o perm[h] is checked on all pairs.
    """

    def __init__(self, group: FiniteGroup, perms: dict, space: Optional[FinMetric] = None, *, check=True):
        self.group = group
        self.perms = {int(g): tuple(p) for g, p in perms.items()}
        self.space = space
        if check:
            bad = self.violation()
            if bad:
                raise InputError(f"invalid action: {bad}")

    @property
    def elements(self):
        return sorted(self.perms)

    def act(self, g: int, x: int) -> int:
        return self.perms[g][x]

    def violation(self) -> Optional[str]:
        G = self.group
        npts = len(next(iter(self.perms.values()))) if self.perms else 0
        for g, p in self.perms.items():
            if sorted(p) != list(range(npts)):
                return f"element {g} does not act by a permutation"
        if G.identity not in self.perms or self.perms[G.identity] != tuple(range(npts)):
            return "identity does not act trivially"
        for g, pg in self.perms.items():
            for h, ph in self.perms.items():
                gh = G.mul(g, h)
                if gh not in self.perms:
                    return f"acting elements not closed: {g}*{h}"
                if self.perms[gh] != tuple(pg[x] for x in ph):
                    return f"action law fails for ({g}, {h})"
        if self.space is not None:
            if len(self.space) != npts:
                return "permutation size differs from the space"
            D, _ = self.space.int_matrix()
            for g, p in self.perms.items():
                idx = np.array(p)
                if not np.array_equal(D[np.ix_(idx, idx)], D):
                    return f"element {g} is not an isometry"
        return None

    def is_faithful(self) -> bool:
        ident = tuple(range(len(next(iter(self.perms.values())))))
        return all(p != ident for g, p in self.perms.items() if g != self.group.identity)

    def to_json(self) -> dict:
        return {str(g): list(p) for g, p in sorted(self.perms.items())}


class BiInvMetricGroup:
    """A finite group with a bi-invariant rational metric on its elements."""

    def __init__(self, group: FiniteGroup, dist, *, check=True):
        self.group = group
        self.metric = FinMetric(group.labels, dist, check=check)
        if check:
            bad = biinvariance_violation(group, self.metric.dist)
            if bad is not None:
                raise InputError(f"metric is not bi-invariant at (g, k1, k2, h) = {bad}", witness=bad)

    def __len__(self):
        return self.group.order

    def delta(self, a: int, b: int) -> Fraction:
        return self.metric.dist[a][b]

    def scaled(self, factor) -> "BiInvMetricGroup":
        return BiInvMetricGroup(self.group, [[x * factor for x in row] for row in self.metric.dist], check=False)

    def to_json(self) -> dict:
        return {"table": [list(r) for r in self.group.table], **self.metric.to_json()}

    @classmethod
    def from_json(cls, obj, path="group") -> "BiInvMetricGroup":
        if not isinstance(obj, dict) or "table" not in obj:
            raise InputError(f"{path}: expected an object with 'table' and 'dist'", path=path)
        G = FiniteGroup(obj["table"], labels=obj.get("points"))
        m = FinMetric.from_json(obj, path)
        if len(m) != G.order:
            raise InputError(f"{path}: metric has {len(m)} points but group has order {G.order}", path=path)
        return cls(G, m.dist)


def biinvariance_violation(group: FiniteGroup, dist) -> Optional[tuple]:
    """A tuple (g, k1, k2, h) with d(g k1 h, g k2 h) != d(k1, k2), or None.

    Left and right invariance separately imply bi-invariance, so two O(n^3)
    scans replace the O(n^4) one; a failure of either is reported with the
    other translation set to the identity.
    """
    D, _ = integer_matrix(dist)
    T = np.array(group.table)
    e = group.identity
    for g in range(group.order):
        left = T[g]
        if not np.array_equal(D[np.ix_(left, left)], D):
            k1, k2 = map(int, np.argwhere(D[np.ix_(left, left)] != D)[0])
            return (g, k1, k2, e)
        right = T[:, g]
        if not np.array_equal(D[np.ix_(right, right)], D):
            k1, k2 = map(int, np.argwhere(D[np.ix_(right, right)] != D)[0])
            return (e, k1, k2, g)
    return None


def from_lengths(group: FiniteGroup, length: Sequence) -> BiInvMetricGroup:
    """d(a, b) = length[a^-1 b]; bi-invariant when ``length`` is a symmetric class function."""
    n = group.order
    dist = [[Fraction(length[group.mul(group.inv(a), b)]) for b in range(n)] for a in range(n)]
    return BiInvMetricGroup(group, dist)


def class_length_metric(group: FiniteGroup, weights: Sequence) -> BiInvMetricGroup:
    """Bi-invariant metric from one weight per conjugacy class.

    Weights are paired with the non-identity classes in order; a class and its
    inverse class receive the weight of whichever comes first.  Weights all in
    [w, 2w] guarantee the triangle inequality.
    """
    classes = [c for c in group.conjugacy_classes() if group.identity not in c]
    length = [Fraction(0)] * group.order
    assigned = {}
    for cls, w in zip(classes, weights):
        key = min(cls)
        inv_key = min(group.inv(x) for x in cls)
        val = assigned.get(inv_key, Fraction(w))
        assigned[key] = val
        for x in cls:
            length[x] = val
    if len(weights) < len(classes):
        raise InputError(f"{len(classes)} non-identity classes but {len(weights)} weights")
    return from_lengths(group, length)


def hamming_group(k: int) -> BiInvMetricGroup:
    """Z(2)^k (element i = bit vector of i) with the normalised Hamming metric."""
    from .finitegroup import elementary_abelian_2

    G = elementary_abelian_2(k)
    return from_lengths(G, [Fraction(bin(i).count("1"), k) for i in range(1 << k)])


def cyclic_word_metric(n: int) -> BiInvMetricGroup:
    from .finitegroup import cyclic

    return from_lengths(cyclic(n), [min(i, n - i) for i in range(n)])


# --- induction -------------------------------------------------------------------

@dataclass
class ScaleResult:
    group: BiInvMetricGroup
    factor: int
    vacuous: bool


def subgroup_gap(K: BiInvMetricGroup, gamma: Sequence[int]) -> Optional[Fraction]:
    e = K.group.identity
    vals = [K.delta(e, g) for g in gamma if g != e]
    return min(vals) if vals else None


def scale_for_induction(K: BiInvMetricGroup, gamma_gens: Sequence[int], Z: FinMetric) -> ScaleResult:
    """Multiply the metric by the least power of 2 making min_{g != 1} delta(1, g) > diam Z."""
    gamma = K.group.subgroup(gamma_gens)
    gap = subgroup_gap(K, gamma)
    if gap is None:
        return ScaleResult(K, 1, True)
    factor = 1
    while gap * factor <= Z.diam:
        factor *= 2
    return ScaleResult(K if factor == 1 else K.scaled(factor), factor, False)


def product_metric(K: BiInvMetricGroup, Z: FinMetric) -> FinMetric:
    """K x Z, k-major, with the max of the two distances."""
    nz = len(Z)
    labels = [(K.group.labels[k], Z.labels[z]) for k in range(len(K)) for z in range(nz)]
    dist = [
        [max(K.delta(k1, k2), Z.d(z1, z2)) for k2 in range(len(K)) for z2 in range(nz)]
        for k1 in range(len(K))
        for z1 in range(nz)
    ]
    return FinMetric(labels, dist, check=False)


@dataclass
class InductionResult:
    Y: FinMetric
    beta: IsoAction
    embedding: list  # e(z) as an index into Y
    orbit_reps: list  # canonical (k, z) representative per point of Y
    metadata: dict = field(default_factory=dict)


def induce(K: BiInvMetricGroup, gamma_gens: Sequence[int], Z: FinMetric, alpha: IsoAction) -> InductionResult:
    """Induce an isometric action of the subgroup Gamma on Z up to K.

    Y = (K x Z)/Gamma for the right action (k, z).g = (k g, g^-1 z) with
    d_Y = min_g d_X(x1, x2.g); K acts on the left and e(z) = (1, z)Gamma.
    """
    G = K.group
    gamma = G.subgroup(gamma_gens)
    if sorted(alpha.perms) != gamma:
        raise InputError("action must be given on exactly the elements of the subgroup")
    if any(len(p) != len(Z) for p in alpha.perms.values()):
        raise InputError("action permutations do not match the space size")
    IsoAction(G, alpha.perms, Z)  # isometry check
    if not alpha.is_faithful():
        raise InputError("action of the subgroup is not faithful")
    gap = subgroup_gap(K, gamma)
    if gap is not None and not gap > Z.diam:
        raise InputError(
            f"gap condition fails: min delta(1, g) = {gap} <= diam Z = {Z.diam}; rescale first",
            witness={"gap": str(gap), "diam": str(Z.diam)},
        )
    nk, nz = G.order, len(Z)
    X = product_metric(K, Z)
    idx = lambda k, z: k * nz + z  # noqa: E731
    right = {
        g: np.array([idx(G.mul(k, g), alpha.act(G.inv(g), z)) for k in range(nk) for z in range(nz)])
        for g in gamma
    }
    orbit_of = [-1] * (nk * nz)
    reps = []
    for x in range(nk * nz):  # x increasing = lexicographic (k, z)
        if orbit_of[x] < 0:
            for g in gamma:
                orbit_of[int(right[g][x])] = len(reps)
            reps.append(x)
    DX, scale = X.int_matrix()
    stack = np.stack([DX[:, right[g]] for g in gamma])
    DY_full = stack.min(axis=0)
    rep_idx = np.array(reps)
    DY_int = DY_full[np.ix_(rep_idx, rep_idx)]
    labels = [(G.labels[x // nz], Z.labels[x % nz]) for x in reps]
    dist = [[Fraction(int(v), scale) for v in row] for row in DY_int]
    bad = metric_violation(dist)
    if bad is not None:
        raise VerificationError("induce.metric", _describe(bad, labels))
    Y = FinMetric(labels, dist, check=False)
    beta_perms = {
        k: tuple(orbit_of[idx(G.mul(k, x // nz), x % nz)] for x in reps) for k in range(nk)
    }
    beta = IsoAction(G, beta_perms, None, check=False)
    e_map = [orbit_of[idx(G.identity, z)] for z in range(nz)]
    _verify_induction(G, gamma, Z, alpha, Y, beta, e_map)
    meta = {
        "delta": [[format_fraction(x) for x in row] for row in K.metric.dist],
        "gap": None if gap is None else format_fraction(gap),
        "diam_Z": format_fraction(Z.diam),
        "subgroup": gamma,
    }
    return InductionResult(Y, beta, e_map, [(x // nz, x % nz) for x in reps], meta)


def _verify_induction(G, gamma, Z, alpha, Y, beta, e_map):
    bad = IsoAction(G, beta.perms, Y, check=False).violation()
    if bad:
        raise VerificationError("induce.beta_isometric_action", bad)
    if not beta.is_faithful():
        raise VerificationError("induce.beta_faithful", "a non-identity element fixes every point")
    for z1 in range(len(Z)):
        for z2 in range(len(Z)):
            if Y.d(e_map[z1], e_map[z2]) != Z.d(z1, z2):
                raise VerificationError("induce.e_isometric", f"at ({Z.labels[z1]}, {Z.labels[z2]})")
    for g in gamma:
        for z in range(len(Z)):
            if e_map[alpha.act(g, z)] != beta.act(g, e_map[z]):
                raise VerificationError("induce.e_equivariant", f"at g={g}, z={Z.labels[z]}")


# --- isometry groups -----------------------------------------------------------

def iso_group(X: FinMetric, cap: int = 8):
    """Full isometry group by backtracking; returns (FiniteGroup, list of permutations)."""
    n = len(X)
    if n > cap:
        raise CapExceeded(f"isometry search on {n} points exceeds cap {cap}")
    D = X.dist
    found = []

    def extend(img, used):
        i = len(img)
        if i == n:
            found.append(tuple(img))
            return
        for c in range(n):
            if c not in used and all(D[img[j]][c] == D[j][i] for j in range(i)):
                img.append(c)
                used.add(c)
                extend(img, used)
                img.pop()
                used.discard(c)

    extend([], set())
    found.sort()  # identity is lexicographically least
    index = {p: i for i, p in enumerate(found)}
    table = [[index[tuple(p[i] for i in q)] for q in found] for p in found]
    return FiniteGroup(table, labels=found, check=False), found
