"""Katetov functions, one-point extensions and finite Urysohn-type saturation.

A Katetov function on a subset S of a finite metric space prescribes the
distances of a new point to the points of S.  ``one_point_extension`` realises
it, ``extend_action`` does so equivariantly for a finite isometric action,
``saturate`` iterates extensions until every catalogued function is realised,
and ``extend_partial_isometry`` extends a partial isometry to a total one on a
larger space.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceeded, InputError, VerificationError
from .exact import format_fraction
from .finitegroup import FiniteGroup
from scipy.sparse.csgraph import floyd_warshall

from .metspace import FinMetric, IsoAction, int_metric_violation, _describe


@dataclass(frozen=True)
class KatetovFn:
    """Prescribed distances ``values[i]`` to the points ``support[i]`` of ``space``."""

    space: FinMetric
    support: tuple
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(i) for i in self.support))
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))
        if len(self.support) != len(self.values):
            raise InputError("support and values differ in length")
        if len(set(self.support)) != len(self.support):
            raise InputError("support has repeated points")
        for i, v in zip(self.support, self.values):
            if not 0 <= i < len(self.space):
                raise InputError(f"support point {i} outside the space")
            if v < 0:
                raise InputError(f"negative value {v} at {self.space.labels[i]}")
        X = self.space
        for (i, a), (j, b) in combinations(zip(self.support, self.values), 2):
            d = X.d(i, j)
            if not abs(a - b) <= d <= a + b:
                raise InputError(
                    f"not a Katetov function at ({X.labels[i]}, {X.labels[j]}): "
                    f"|{a} - {b}| <= {d} <= {a} + {b} fails",
                    witness=[X.labels[i], X.labels[j]],
                )

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.values))


def extension_values(X: FinMetric, f: KatetovFn, cap=None) -> list:
    """f-hat(y) = min_x (f(x) + d(x, y)), optionally capped; equals f on the support."""
    if not f.support:
        raise InputError("a Katetov function needs a non-empty support to be extended")
    out = [min(v + X.d(x, y) for x, v in zip(f.support, f.values)) for y in range(len(X))]
    if cap is not None:
        out = [min(Fraction(cap), v) for v in out]
    return out


def _check_cap(X: FinMetric, cap):
    if cap is not None and X.diam > cap:
        raise InputError(f"diameter cap {cap} is below the space diameter {X.diam}")


def _append_point(X: FinMetric, label, dists) -> FinMetric:
    scale = math.lcm(X.int_matrix()[1], *(Fraction(v).denominator for v in dists))
    M, _ = X.int_matrix(scale)
    n = len(X)
    out = np.zeros((n + 1, n + 1), dtype=M.dtype)
    out[:n, :n] = M
    row = np.array([int(Fraction(v) * scale) for v in dists], dtype=M.dtype)
    out[n, :n] = row
    out[:n, n] = row
    return FinMetric.from_int(list(X.labels) + [label], out, scale)


def one_point_extension(X: FinMetric, f: KatetovFn, *, cap=None, label=None) -> FinMetric:
    """X plus one new point at distance f-hat(y) from every y; the new point is last."""
    if f.space is not X and not f.space.same_metric(X):
        raise InputError("Katetov function lives on a different space")
    _check_cap(X, cap)
    if any(v == 0 for v in f.values):
        i = f.support[f.values.index(0)]
        raise InputError(f"value 0 at {X.labels[i]}: the function is realised by that point", witness=[X.labels[i]])
    vals = extension_values(X, f, cap)
    if label is None:
        label = point_name(X, f, 0)
    Y = _append_point(X, label, vals)
    bad = int_metric_violation(Y.int_matrix()[0])
    if bad is not None:
        raise VerificationError("one_point_extension.metric", _describe(bad, Y.labels))
    return Y


def point_name(X: FinMetric, f: KatetovFn, round_no: int) -> str:
    """Reproducible label from the support labels, the values and the round."""
    return _hash_name([str(X.labels[i]) for i in f.support], f.values, round_no)


# --- equivariant extension ----------------------------------------------------

def extend_action(X: FinMetric, alpha: IsoAction, f: KatetovFn, *, cap=None):
    """Extend X by the orbit of f-hat under g.f = f o g^-1 and extend the action.

    Returns ``(X2, alpha2, new_points)``.  Distances between two new points are
    min_y (fhat1(y) + fhat2(y)), which is what adding them one at a time gives.
    """
    _check_cap(X, cap)
    if alpha.space is None or not alpha.space.same_metric(X):
        IsoAction(alpha.group, alpha.perms, X)
    if any(v == 0 for v in f.values):
        raise InputError("value 0 on the support: the function is realised by an existing point")
    G = alpha.group
    base = extension_values(X, f, cap)
    orbit, index_of, action_on_orbit = [], {}, {}
    for g in alpha.elements:
        p = alpha.perms[g]
        moved = [None] * len(X)
        for y in range(len(X)):
            moved[p[y]] = base[y]  # (g.f)(g y) = f(y)
        key = tuple(moved)
        if key not in index_of:
            index_of[key] = len(orbit)
            orbit.append(key)
    for g in alpha.elements:
        p = alpha.perms[g]
        row = []
        for fn in orbit:
            moved = [None] * len(X)
            for y in range(len(X)):
                moved[p[y]] = fn[y]
            row.append(index_of[tuple(moved)])
        action_on_orbit[g] = row
    n = len(X)
    dist = [list(r) + [fn[i] for fn in orbit] for i, r in enumerate(X.dist)]
    for a, fa in enumerate(orbit):
        row = list(fa)
        for b, fb in enumerate(orbit):
            v = Fraction(0) if a == b else min(x + y for x, y in zip(fa, fb))
            row.append(v if cap is None else min(Fraction(cap), v))
        dist.append(row)
    names = [point_name(X, f, 0) + (f"/{k}" if k else "") for k in range(len(orbit))]
    X2 = FinMetric(list(X.labels) + names, dist, check=False)
    bad = int_metric_violation(X2.int_matrix()[0])
    if bad is not None:
        raise VerificationError("extend_action.metric", _describe(bad, X2.labels))
    perms = {g: tuple(alpha.perms[g]) + tuple(n + j for j in action_on_orbit[g]) for g in alpha.elements}
    alpha2 = IsoAction(G, perms, X2, check=False)
    bad = alpha2.violation()
    if bad:
        raise VerificationError("extend_action.isometric_action", bad)
    return X2, alpha2, list(range(n, n + len(orbit)))


# --- saturation --------------------------------------------------------------------

def grid_values(D: int, R) -> list:
    """Positive rationals with denominator <= D and value <= R, ascending."""
    R = Fraction(R)
    vals = {Fraction(a, b) for b in range(1, D + 1) for a in range(1, math.floor(R * b) + 1)}
    return sorted(vals)


def _katetov_ok(values, dists) -> bool:
    k = len(values)
    return all(
        abs(values[i] - values[j]) <= dists[i][j] <= values[i] + values[j]
        for i in range(k)
        for j in range(i + 1, k)
    )


def catalogue_audit(X: FinMetric, s: int, V: Sequence, limit: Optional[int] = None) -> list:
    """Missing (support, values) pairs: Katetov functions on at most ``s`` points
    with values in V that no point of X realises.  Supports are index tuples in
    lexicographic order, values in lexicographic order of V."""
    n = len(X)
    V = list(V)
    if s <= 0 or not V or n == 0:
        return []
    nv = len(V)
    L = math.lcm(X.int_matrix()[1], *(Fraction(v).denominator for v in V))
    M, _ = X.int_matrix(L)
    V_int = np.array([int(Fraction(v) * L) for v in V], dtype=np.int64)
    pos = np.clip(np.searchsorted(V_int, M), 0, nv - 1)
    idx = np.where(V_int[pos] == M, pos, -1).astype(np.int64)
    missing = []

    def full():
        return limit is not None and len(missing) >= limit

    for size in range(1, min(s, n) + 1):
        if size == 1:
            for i in range(n):
                present = np.zeros(nv, dtype=bool)
                col = idx[:, i]
                present[col[col >= 0]] = True
                for a in np.flatnonzero(~present):
                    missing.append(((i,), (V[a],)))
                    if full():
                        return missing
        elif size == 2:
            masks = {}
            for i in range(n):
                A = idx[:, i]
                ok = (A[:, None] >= 0) & (idx >= 0)
                codes = (np.arange(n)[None, :] * nv + A[:, None]) * nv + idx
                present = np.zeros(n * nv * nv, dtype=bool)
                present[codes[ok]] = True
                present = present.reshape(n, nv, nv)
                for j in range(i + 1, n):
                    d = X.d(i, j)
                    if d not in masks:
                        masks[d] = np.array(
                            [[abs(a - b) <= d <= a + b for b in V] for a in V], dtype=bool
                        )
                    for a, b in np.argwhere(masks[d] & ~present[j]):
                        missing.append(((i, j), (V[a], V[b])))
                        if full():
                            return missing
        else:
            for S in combinations(range(n), size):
                rows = {tuple(r) for r in idx[:, list(S)].tolist() if min(r) >= 0}
                dS = [[X.d(a, b) for b in S] for a in S]
                for combo in product(range(nv), repeat=size):
                    if combo not in rows and _katetov_ok([V[c] for c in combo], dS):
                        missing.append((S, tuple(V[c] for c in combo)))
                        if full():
                            return missing
    return missing


def _int_scale(X: FinMetric, D: int, R: Fraction) -> int:
    return math.lcm(X.int_matrix()[1], *range(1, D + 1), R.denominator)


def _choose_extension(M, n, S, vals, capR, V_int, strategy, rng, miss=None, vpos=None):
    """Distances of a new point to points 0..n-1 of the integer matrix M.

    Support points get ``vals``; the others are visited in index order and
    get a value from [max |g(x) - d(x,y)|, min(capR, min g(x) + d(x,y))] over
    the points already assigned, which keeps the function Katetov.
    """
    if strategy == "canonical":
        out = np.min(np.array(vals)[:, None] + M[list(S), :n], axis=0)
        return np.minimum(out, capR)
    lo = np.zeros(n, dtype=np.int64)
    hi = np.full(n, capR, dtype=np.int64)
    out = np.zeros(n, dtype=np.int64)
    assigned = np.zeros(n, dtype=bool)
    for x, v in zip(S, vals):
        out[x] = v
        assigned[x] = True
        lo = np.maximum(lo, np.abs(v - M[x, :n]))
        hi = np.minimum(hi, v + M[x, :n])
    for y in range(n):
        if assigned[y]:
            continue
        low, high = max(int(lo[y]), 1), int(hi[y])
        if strategy == "minimal":
            v = low
        elif strategy == "cover":
            ok = (V_int >= low) & (V_int <= high)
            if not ok.any():
                v = low
            else:
                counts = np.zeros(len(V_int), dtype=np.int64)
                n0 = miss[0].shape[0]
                if y < n0:
                    counts += miss[0][y]
                    if miss[1] is not None:
                        done = np.flatnonzero(assigned[:n0])
                        gi = vpos.get_many(out[done])
                        keep = gi >= 0
                        if keep.any():
                            counts += miss[1][done[keep], y, gi[keep], :].sum(axis=0)
                counts = np.where(ok, counts, -1)
                best = np.flatnonzero(counts == counts.max())
                v = int(V_int[best[rng.integers(len(best))]])
        else:
            options = V_int[(V_int >= low) & (V_int <= high)]
            v = int(options[rng.integers(len(options))]) if len(options) else low
        out[y] = v
        lo = np.maximum(lo, np.abs(v - M[y, :n]))
        hi = np.minimum(hi, v + M[y, :n])
    return out


def _int_audit(M, n, s, V_int, limit=None):
    """catalogue_audit on an integer matrix; returns (support, int values) pairs."""
    X = FinMetric.from_int(range(n), M[:n, :n].copy(), 1)
    return catalogue_audit(X, s, [Fraction(int(v)) for v in V_int], limit)


class _CoverState:
    """Missing catalogue entries among the points present at the start of a round."""

    def __init__(self, missing, n0, V_int):
        self.n0 = n0
        self.lookup = {int(v): i for i, v in enumerate(V_int)}
        P = len(V_int)
        self.one = np.zeros((n0, P), dtype=np.int64)
        pairs = any(len(S) == 2 for S, _ in missing)
        self.two = np.zeros((n0, n0, P, P), dtype=np.int64) if pairs else None
        self.rest = set()
        for S, vals in missing:
            if len(S) == 1:
                self.one[S[0], self.lookup[int(vals[0])]] = 1
            elif len(S) == 2:
                a, b = (self.lookup[int(v)] for v in vals)
                self.two[S[0], S[1], a, b] = 1
                self.two[S[1], S[0], b, a] = 1
            else:
                self.rest.add((tuple(S), tuple(int(v) for v in vals)))

    def get_many(self, values):
        return np.array([self.lookup.get(int(v), -1) for v in values], dtype=np.int64)

    def is_missing(self, S, vals) -> bool:
        idx = [self.lookup[v] for v in vals]
        if len(S) == 1:
            return bool(self.one[S[0], idx[0]])
        if len(S) == 2:
            return bool(self.two[S[0], S[1], idx[0], idx[1]])
        return (tuple(S), tuple(vals)) in self.rest

    def mark_realised(self, row):
        gi = self.get_many(row[: self.n0])
        pts = np.flatnonzero(gi >= 0)
        self.one[pts, gi[pts]] = 0
        if self.two is not None and len(pts):
            xs, ys = np.meshgrid(pts, pts, indexing="ij")
            self.two[xs, ys, gi[xs], gi[ys]] = 0
        if self.rest:
            self.rest = {
                (S, vals) for S, vals in self.rest if any(int(row[x]) != v for x, v in zip(S, vals))
            }


@dataclass
class ExtensionTower:
    space: FinMetric
    seed_size: int
    params: dict
    rounds: list = field(default_factory=list)  # per round: list of provenance dicts

    def to_json(self) -> dict:
        return {"params": self.params, "seed_size": self.seed_size, "rounds": self.rounds, "space": self.space.to_json()}


ROUND_STRATEGIES = ("cover", "random", "minimal", "canonical")
STRATEGIES = ("auto", "template") + ROUND_STRATEGIES


def saturate(X: FinMetric, s: int, D: int, R, *, guard: int = 2000, strategy: str = "auto",
             seed: int = 0, node_budget: int = 200000) -> ExtensionTower:
    """A finite space containing X in which every Katetov function on <= s
    points with values in the (D, R) grid is realised.

    ``"template"`` embeds X isometrically into the torus Z(2K)^k with the
    capped circular max-metric (distances scaled by the common denominator L,
    K = R*L, k = max(s, 1)) and audits the result.  The round strategies extend
    point by point (see ``_saturate_rounds``).  ``"auto"`` tries the template
    first and falls back to ``"cover"``.  Either way the output passes the
    exhaustive catalogue audit or an error is raised.
    """
    R = Fraction(R)
    if s < 0 or D < 1 or R <= 0:
        raise InputError("need s >= 0, D >= 1, R > 0")
    if X.diam > R:
        raise InputError(f"space diameter {X.diam} exceeds the value bound R = {R}")
    if strategy not in STRATEGIES:
        raise InputError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if strategy in ROUND_STRATEGIES:
        return _saturate_rounds(X, s, D, R, guard=guard, strategy=strategy, seed=seed)
    V = grid_values(D, R)
    if s == 0 or not catalogue_audit(X, s, V, limit=1):
        params = {"s": s, "D": D, "R": format_fraction(R), "strategy": strategy, "guard": guard, "seed": seed}
        return ExtensionTower(X, len(X), params)
    try:
        return _saturate_template(X, s, D, R, guard=guard, node_budget=node_budget, strategy=strategy, seed=seed)
    except CapExceeded:
        if strategy == "template":
            raise
    return _saturate_rounds(X, s, D, R, guard=guard, strategy="cover", seed=seed)


def torus_metric(m: int, k: int, cap: int):
    """Points of Z(m)^k (lexicographic) and their capped circular max-distances."""
    pts = np.array(list(product(range(m), repeat=k)), dtype=np.int64).reshape(-1, k)
    diff = np.abs(pts[:, None, :] - pts[None, :, :])
    dist = np.minimum(diff, m - diff).max(axis=2) if k else np.zeros((1, 1), dtype=np.int64)
    return [tuple(int(c) for c in p) for p in pts], np.minimum(dist, cap)


def find_embedding(MX, MT, budget: int, prefix=(0,)):
    """Isometric embedding of the integer metric MX into MT by backtracking.

    The first ``len(prefix)`` points are sent to ``prefix``; returns a list of
    target indices or None.  Raises CapExceeded when the node budget runs out.
    ``allowed[i]`` holds the targets still compatible with every point placed
    so far, for each point i not yet placed.
    """
    n, m = len(MX), len(MT)
    if n == 0:
        return []
    allowed = np.ones((n, m), dtype=bool)
    for i, t in enumerate(prefix):
        only = np.zeros(m, dtype=bool)
        only[t] = True
        allowed[i] &= only
    image = []
    saved = []
    stack = [np.flatnonzero(allowed[0]).tolist()]
    nodes = 0
    while stack:
        cands = stack[-1]
        if not cands:
            stack.pop()
            if image:
                image.pop()
                allowed = saved.pop()
            continue
        nodes += 1
        if nodes > budget:
            raise CapExceeded(f"embedding search exceeded node budget {budget}")
        t = cands.pop(0)
        i = len(image)
        nxt = allowed.copy()
        nxt[i + 1:] &= MT[t][None, :] == MX[i + 1:, i][:, None]
        nxt[i + 1:, t] = False
        if i + 1 < n and not nxt[i + 1:].any(axis=1).all():
            continue
        saved.append(allowed)
        allowed = nxt
        image.append(t)
        if len(image) == n:
            return image
        stack.append(np.flatnonzero(allowed[i + 1]).tolist())
    return None


def _saturate_template(X, s, D, R, *, guard, node_budget, strategy, seed):
    V = grid_values(D, R)
    L = _int_scale(X, D, R)
    K = int(R * L)
    k = max(s, 1)
    m = 2 * K
    if m ** k > guard:
        raise CapExceeded(f"template Z({m})^{k} has {m ** k} points, above guard size {guard}")
    pts, MT = torus_metric(m, k, K)
    MX, _ = X.int_matrix(L)
    image = find_embedding(np.asarray(MX, dtype=np.int64), MT, node_budget)
    if image is None:
        raise CapExceeded(f"seed space does not embed in the template Z({m})^{k}")
    rest = [t for t in range(len(pts)) if t not in set(image)]
    order = list(image) + rest
    labels = list(X.labels) + [f"t{pts[t]}" for t in rest]
    Y = FinMetric.from_int(labels, MT[np.ix_(order, order)], L)
    bad = int_metric_violation(Y.int_matrix()[0])
    if bad is not None:
        raise VerificationError("saturate.metric", _describe(bad, Y.labels))
    if not X.same_metric(Y.restrict(range(len(X)))):
        raise VerificationError("saturate.seed_isometric", "seed space not embedded isometrically")
    missing = catalogue_audit(Y, s, V, limit=1)
    if missing:
        raise CapExceeded(f"template Z({m})^{k} misses catalogue entry {missing[0]}")
    params = {"s": s, "D": D, "R": format_fraction(R), "strategy": strategy, "guard": guard, "seed": seed,
              "template": f"Z({m})^{k}", "scale": L}
    tower = ExtensionTower(Y, len(X), params)
    tower.rounds.append([{"point": labels[len(X) + i], "coords": list(pts[t])} for i, t in enumerate(rest)])
    return tower


def _saturate_rounds(X: FinMetric, s: int, D: int, R, *, guard: int, strategy: str, seed: int) -> ExtensionTower:
    """Each round audits the catalogue, then realises the missing functions in
    order, skipping those already realised by a point added earlier in the
    round.  ``strategy`` fixes a new point's distances off the support:
    ``"canonical"`` is f-hat capped at R, ``"minimal"`` the least admissible
    value point by point, ``"random"`` a uniformly chosen admissible grid value
    (numpy PCG64 seeded with ``seed``), ``"cover"`` the admissible grid value
    completing the most catalogue entries still missing, ties broken by the
    same generator.  Raises CapExceeded once the space would outgrow ``guard``.
    """
    R = Fraction(R)
    if len(X) > guard:
        raise CapExceeded(f"seed space already exceeds guard size {guard}")
    V = grid_values(D, R)
    L = _int_scale(X, D, R)
    V_int = np.array([int(v * L) for v in V], dtype=np.int64)
    capR = int(R * L)
    rng = np.random.Generator(np.random.PCG64(seed))
    params = {"s": s, "D": D, "R": format_fraction(R), "strategy": strategy, "guard": guard, "seed": seed}
    tower = ExtensionTower(X, len(X), params)
    n = len(X)
    M = np.zeros((guard, guard), dtype=np.int64)
    M[:n, :n], _ = X.int_matrix(L)
    labels = list(X.labels)
    round_no = 0
    while True:
        missing = _int_audit(M, n, s, V_int)
        if not missing:
            break
        round_no += 1
        start = n
        log = []
        cover = _CoverState(missing, n, V_int) if strategy == "cover" else None
        for S, vals in missing:
            S = list(S)
            vals = [int(v) for v in vals]
            if cover is not None:
                if not cover.is_missing(S, vals):
                    continue
            elif n > start and np.any(np.all(M[start:n][:, S] == np.array(vals), axis=1)):
                continue
            if n >= guard:
                raise CapExceeded(
                    f"saturation exceeded guard size {guard} in round {round_no} "
                    f"with {len(missing)} functions missing at the round start",
                    witness={"round": round_no, "size": n, "missing": len(missing)},
                )
            row = _choose_extension(
                M, n, S, vals, capR, V_int, strategy, rng,
                miss=None if cover is None else (cover.one, cover.two), vpos=None if cover is None else cover,
            )
            if cover is not None:
                cover.mark_realised(row)
            M[n, :n] = row
            M[:n, n] = row
            name = _hash_name([str(labels[i]) for i in S], [Fraction(v, L) for v in vals], round_no)
            labels.append(name)
            log.append({"point": name, "support": [str(labels[i]) for i in S],
                        "values": [format_fraction(Fraction(v, L)) for v in vals]})
            n += 1
        tower.rounds.append(log)
    Y = FinMetric.from_int(labels, M[:n, :n].copy(), L)
    bad = int_metric_violation(Y.int_matrix()[0])
    if bad is not None:
        raise VerificationError("saturate.metric", _describe(bad, Y.labels))
    tower.space = Y
    return tower


def _hash_name(support_labels, values, round_no) -> str:
    payload = json.dumps(
        {"support": support_labels, "values": [format_fraction(v) for v in values], "round": round_no},
        sort_keys=True,
    )
    return "k" + hashlib.sha256(payload.encode()).hexdigest()[:12]


# --- partial isometries --------------------------------------------------------------

@dataclass
class IsometryExtension:
    space: FinMetric  # contains the input space as its first points
    sigma: tuple  # total isometry of ``space``
    method: str  # "internal" or "amalgam"
    copies: int = 1


def _check_partial_isometry(X: FinMetric, p: dict):
    dom = sorted(p)
    if len(set(p.values())) != len(dom):
        raise InputError("partial map is not injective")
    for a in dom:
        if not (0 <= a < len(X) and 0 <= p[a] < len(X)):
            raise InputError(f"partial map mentions a point outside the space: {a} -> {p[a]}")
    for a, b in combinations(dom, 2):
        if X.d(a, b) != X.d(p[a], p[b]):
            raise InputError(
                f"partial map is not distance-preserving at ({X.labels[a]}, {X.labels[b]}): "
                f"{X.d(a, b)} != {X.d(p[a], p[b])}",
                witness=[X.labels[a], X.labels[b]],
            )


def extend_partial_isometry(X: FinMetric, p: dict, *, cap=None, node_budget: int = 20000,
                            max_copies: int = 12) -> IsometryExtension:
    """Extend a distance-preserving partial injection to a total isometry.

    First a back-and-forth search inside X.  If X has no such isometry, X is
    glued into N copies X x Z(N) with (p(a), i) identified with (a, i+1) under
    the (optionally capped) shortest-path metric; the shift i -> i+1 then
    extends p on copy 0.  N runs over multiples of the cycle lengths of p
    exceeding its longest chain until copy 0 embeds isometrically; failure
    within ``max_copies`` is reported, not guessed around.
    """
    p = {int(a): int(b) for a, b in p.items()}
    _check_partial_isometry(X, p)
    n = len(X)
    dom = sorted(p)
    order = dom + [a for a in range(n) if a not in p]
    MX, L = X.int_matrix()
    MX = np.asarray(MX, dtype=np.int64)
    Mo = MX[np.ix_(order, order)]
    try:
        image = find_embedding(Mo, MX, node_budget, prefix=[p[a] for a in dom])
    except CapExceeded:
        image = None
    if image is not None:
        sigma = [0] * n
        for a, t in zip(order, image):
            sigma[a] = t
        return _verified(X, tuple(sigma), p, "internal", 1)
    if cap is not None and X.diam > cap:
        raise InputError(f"cap {cap} below the diameter {X.diam}")
    capK = None if cap is None else int(Fraction(cap) * L)
    cycle_lcm, longest = 1, 0
    for a in dom:
        k, x = 0, a
        while x in p:
            x = p[x]
            k += 1
            if x == a:
                cycle_lcm = math.lcm(cycle_lcm, k)
                break
        else:
            longest = max(longest, k)
    N = cycle_lcm * (longest // cycle_lcm + 1)
    while N <= max_copies:
        result = _amalgam(X, MX, L, p, N, capK)
        if result is not None:
            return result
        N += cycle_lcm
    raise CapExceeded(f"no isometric gluing with at most {max_copies} copies; catalogue insufficient")


def _amalgam(X, MX, L, p, N, capK):
    n = len(X)
    parent = list(range(n * N))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for a, b in p.items():
        for i in range(N):
            u, v = find(a + n * ((i + 1) % N)), find(b + n * i)
            if u != v:
                parent[max(u, v)] = min(u, v)
    roots = sorted({find(u) for u in range(n * N)}, key=lambda u: (u // n, u % n))
    if any(find(a) != a for a in range(n)):
        return None  # two points of copy 0 were identified
    cls = {r: i for i, r in enumerate(roots)}
    c = len(roots)
    W = np.zeros((c, c), dtype=np.float64)  # 0 = no edge for csgraph
    for i in range(N):
        ids = np.array([cls[find(a + n * i)] for a in range(n)])
        block = W[np.ix_(ids, ids)]
        W[np.ix_(ids, ids)] = np.where(block > 0, np.minimum(block, MX), MX)
    G = floyd_warshall(W, directed=False).astype(np.int64)
    if capK is not None:
        G = np.minimum(G, capK)
    if not np.array_equal(G[:n, :n], MX):
        return None
    shift = [None] * c
    for u in range(n * N):
        a, i = u % n, u // n
        img = cls[find(a + n * ((i + 1) % N))]
        if shift[cls[find(u)]] not in (None, img):
            raise VerificationError("extend_partial_isometry.shift", "shift is not well defined on classes")
        shift[cls[find(u)]] = img
    labels = list(X.labels) + [f"{X.labels[r % n]}@{r // n}" for r in roots[n:]]
    Y = FinMetric.from_int(labels, G, L)
    return _verified(Y, tuple(shift), p, "amalgam", N, base=X)


def _verified(Y: FinMetric, sigma, p, method, copies, base=None) -> IsometryExtension:
    n = len(Y)
    if sorted(sigma) != list(range(n)):
        raise VerificationError("extend_partial_isometry.bijective", "map is not a permutation")
    for a, b in p.items():
        if sigma[a] != b:
            raise VerificationError("extend_partial_isometry.extends", f"sigma({a}) = {sigma[a]} != {b}")
    M, _ = Y.int_matrix()
    idx = np.array(sigma)
    if not np.array_equal(M[np.ix_(idx, idx)], M):
        raise VerificationError("extend_partial_isometry.isometry", "distances not preserved")
    bad = int_metric_violation(Y.int_matrix()[0])
    if bad is not None:
        raise VerificationError("extend_partial_isometry.metric", _describe(bad, Y.labels))
    if base is not None and not base.same_metric(Y.restrict(range(len(base)))):
        raise VerificationError("extend_partial_isometry.contains_input", "input space not embedded")
    return IsometryExtension(Y, tuple(sigma), method, copies)
