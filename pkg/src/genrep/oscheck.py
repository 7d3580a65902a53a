"""Finite oscillation-stability checks on metric groups.

An instance (G, A, eps, B) holds when every 2-colouring c of B admits a colour
i and a translate g with: each g*a (a in A) lies strictly within eps of some
point of B coloured i.  Colourings are bit vectors: bit j is the colour of
B[j], and the exhaustive mode runs a binary counter over them.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceeded, InputError, VerificationError
from .finitegroup import FiniteGroup
from .metspace import BiInvMetricGroup, biinvariance_violation, hamming_group


@dataclass
class OscInstance:
    G: BiInvMetricGroup
    A: tuple
    eps: Fraction
    B: tuple

    def __post_init__(self):
        self.eps = Fraction(self.eps)
        self.A = tuple(int(a) for a in self.A)
        self.B = tuple(int(b) for b in self.B)
        n = len(self.G)
        if self.eps <= 0:
            raise InputError("epsilon must be positive")
        for name, S in (("A", self.A), ("B", self.B)):
            if any(not 0 <= x < n for x in S):
                raise InputError(f"{name} contains an element outside the group")
            if len(set(S)) != len(S):
                raise InputError(f"{name} has repeated elements")

    def near(self) -> np.ndarray:
        """Boolean array [g, a, j]: d(g*a, B[j]) < eps."""
        D, scale = self.G.metric.int_matrix()
        T = np.array(self.G.group.table)
        ga = T[:, list(self.A)]  # (|G|, |A|)
        d = np.asarray(D, dtype=object if D.dtype == object else np.int64)[ga][:, :, list(self.B)]
        return d * self.eps.denominator < self.eps.numerator * scale


@dataclass
class Verdict:
    holds: bool
    counterexample: Optional[tuple] = None  # colour of each element of B
    colourings_checked: int = 0
    witness: Optional[dict] = None

    def to_json(self, inst: Optional[OscInstance] = None) -> dict:
        out = {"holds": self.holds, "colourings_checked": self.colourings_checked}
        if self.counterexample is not None:
            out["counterexample"] = list(self.counterexample)
            if inst is not None:
                out["counterexample_by_element"] = {str(b): c for b, c in zip(inst.B, self.counterexample)}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _masks(near: np.ndarray) -> np.ndarray:
    """Bitmask per (g, a) of the B-positions strictly within eps of g*a."""
    weights = np.array([1 << j for j in range(near.shape[2])], dtype=np.uint64)
    return (near.astype(np.uint64) * weights).sum(axis=2)


def check_witness(inst: OscInstance, *, cap: int = 20, chunk: int = 1 << 16) -> Verdict:
    """Exhaustive check over all 2^|B| colourings; stops at the first defeating one."""
    b = len(inst.B)
    if b > cap:
        raise CapExceeded(f"|B| = {b} exceeds the exhaustive cap {cap}; use sampled mode")
    if not inst.A:
        return Verdict(True, colourings_checked=0)
    masks = _masks(inst.near())
    full = np.uint64((1 << b) - 1)
    total = 1 << b
    for start in range(0, total, chunk):
        C = np.arange(start, min(total, start + chunk), dtype=np.uint64)
        comp = C ^ full
        ok = np.zeros(len(C), dtype=bool)
        for g in range(masks.shape[0]):
            one = np.ones(len(C), dtype=bool)
            zero = np.ones(len(C), dtype=bool)
            for m in masks[g]:
                one &= (C & m) != 0
                zero &= (comp & m) != 0
            ok |= one | zero
            if ok.all():
                break
        if not ok.all():
            c = int(C[int(np.argmin(ok))])
            colouring = tuple((c >> j) & 1 for j in range(b))
            _reverify_defeat(inst, colouring)
            return Verdict(False, colouring, start + int(np.argmin(ok)) + 1)
    return Verdict(True, colourings_checked=total)


def witness_for(inst: OscInstance, colouring: Sequence[int]) -> Optional[tuple]:
    """(i, g) satisfying the condition for this colouring, by plain Python; None if defeated."""
    D, scale = inst.G.metric.int_matrix()
    G = inst.G.group
    num, den = inst.eps.numerator, inst.eps.denominator
    for g in range(G.order):
        for i in (0, 1):
            cls = [k for k, c in zip(inst.B, colouring) if c == i]
            if all(any(int(D[G.mul(g, a), k]) * den < num * scale for k in cls) for a in inst.A):
                return (i, g)
    return None


def _reverify_defeat(inst: OscInstance, colouring):
    if witness_for(inst, colouring) is not None:
        raise VerificationError("check_witness.counterexample", f"colouring {colouring} is not defeating")


@dataclass
class SearchReport:
    B: Optional[tuple]
    candidates_checked: int
    exhausted: bool
    max_b: int

    def to_json(self) -> dict:
        return {
            "found": self.B is not None,
            "B": None if self.B is None else list(self.B),
            "candidates_checked": self.candidates_checked,
            "exhausted_within_caps": self.exhausted,
            "max_b": self.max_b,
        }


def search_witness(G: BiInvMetricGroup, A, eps, max_b: int, *, max_candidates: int = 100000,
                   cap: int = 20) -> SearchReport:
    """Smallest B (by size, then lexicographic) for which the instance holds."""
    if max_b > cap:
        raise InputError(f"max |B| = {max_b} exceeds the exhaustive cap {cap}")
    checked = 0
    for size in range(1, min(max_b, len(G)) + 1):
        for B in combinations(range(len(G)), size):
            if checked >= max_candidates:
                return SearchReport(None, checked, False, max_b)
            checked += 1
            if check_witness(OscInstance(G, A, eps, B), cap=cap).holds:
                return SearchReport(B, checked, False, max_b)
    return SearchReport(None, checked, True, max_b)


def sampled_falsifier(inst: OscInstance, trials: int, seed: int) -> Verdict:
    """Uniformly sampled colourings (numpy PCG64); any defeat is re-verified exactly."""
    if not isinstance(trials, int) or trials < 1:
        raise InputError("trials must be a positive integer")
    rng = np.random.Generator(np.random.PCG64(seed))
    near = inst.near()
    for t in range(trials):
        c = rng.integers(0, 2, size=len(inst.B)).astype(bool)
        if not _holds_for(near, c):
            colouring = tuple(int(x) for x in c)
            _reverify_defeat(inst, colouring)
            return Verdict(False, colouring, t + 1)
    return Verdict(True, colourings_checked=trials)


def _holds_for(near: np.ndarray, c: np.ndarray) -> bool:
    if near.shape[1] == 0:
        return True
    one = (near & c[None, None, :]).any(axis=2).all(axis=1)
    zero = (near & ~c[None, None, :]).any(axis=2).all(axis=1)
    return bool((one | zero).any())


def success_fraction(inst: OscInstance, trials: int, seed: int) -> Fraction:
    """Fraction of sampled colourings that admit a witness (i, g)."""
    if trials < 1:
        raise InputError("trials must be a positive integer")
    rng = np.random.Generator(np.random.PCG64(seed))
    near = inst.near()
    hits = sum(_holds_for(near, rng.integers(0, 2, size=len(inst.B)).astype(bool)) for _ in range(trials))
    return Fraction(hits, trials)


def concentration_trend(levels=(1, 2, 3), eps=Fraction(3, 10), trials: int = 500, seed: int = 0) -> list:
    """[(n, fraction)] for Z(2)^(2^n) with normalised Hamming metric, A = {0, e_1}, B = G."""
    out = []
    for n in levels:
        G = hamming_group(2 ** n)
        inst = OscInstance(G, (0, 1), eps, tuple(range(len(G))))
        out.append((n, success_fraction(inst, trials, seed)))
    return out


def validate_biinvariant(table, metric) -> Optional[tuple]:
    """None if d(g k1 h, g k2 h) = d(k1, k2) throughout, else a violating (g, k1, k2, h)."""
    G = table if isinstance(table, FiniteGroup) else FiniteGroup(table)
    return biinvariance_violation(G, metric)
