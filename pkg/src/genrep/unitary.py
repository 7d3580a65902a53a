"""Diagonal unitary representations of finite abelian groups, computed exactly.

A representation is given by characters phi_1..phi_m: gamma acts on the i-th
basis vector by the scalar <gamma, phi_i>.  Vectors have coefficients in
Q(zeta_e), e the exponent of the group, so every quantity below is exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .abgroup import AbGroup, Character
from .errors import CapExceeded, InputError, VerificationError
from .exact import Angle, CycloNumber, angle_dist, cyclo_det, format_fraction


@dataclass
class DiagRep:
    group: AbGroup
    chars: list

    def __post_init__(self):
        self.group.require_bounded("a diagonal representation")
        self.chars = [c if isinstance(c, Character) else Character(self.group, c) for c in self.chars]
        for c in self.chars:
            if c.group != self.group:
                raise InputError("character belongs to a different group")

    @property
    def dim(self) -> int:
        return len(self.chars)

    @property
    def conductor(self) -> int:
        if not hasattr(self, "_conductor"):
            self._conductor = self.group.exponent
            # phi_i(gen_j) * e as integers, so <gamma, phi_i> = zeta_e^(sum_j gamma_j k_ij)
            self._exps = [[int(v.value * self._conductor) for v in c.values] for c in self.chars]
        return self._conductor

    def value(self, i: int, gamma) -> CycloNumber:
        """<gamma, phi_i> as a root of unity."""
        e = self.conductor
        return CycloNumber.zeta(e, sum(g * k for g, k in zip(gamma, self._exps[i])))

    def act(self, gamma, xi: Sequence[CycloNumber]) -> list:
        return [a * self.value(i, gamma) for i, a in enumerate(xi)]

    def vector(self, coeffs: Sequence) -> list:
        """Coerce rationals or CycloNumbers to a vector of this conductor."""
        if len(coeffs) != self.dim:
            raise InputError(f"vector has {len(coeffs)} coefficients, dimension is {self.dim}")
        out = []
        for a in coeffs:
            if isinstance(a, CycloNumber):
                if a.m != self.conductor:
                    raise InputError(f"coefficient conductor {a.m} differs from the group exponent {self.conductor}")
                out.append(a)
            else:
                out.append(CycloNumber.from_rational(self.conductor, a))
        return out

    def to_json(self) -> dict:
        return {"group": self.group.to_json(), "chars": [c.to_json() for c in self.chars]}

    @classmethod
    def from_json(cls, obj, path="rep") -> "DiagRep":
        if not isinstance(obj, dict) or "group" not in obj or "chars" not in obj:
            raise InputError(f"{path}: expected keys 'group' and 'chars'", path=path)
        G = AbGroup.from_json(obj["group"], path=f"{path}.group")
        return cls(G, [Character.from_json(G, c, path=f"{path}.chars[{i}]") for i, c in enumerate(obj["chars"])])


def vector_from_json(rep: DiagRep, obj, path="xi") -> list:
    """Each coefficient is a list of rationals in the power basis of zeta_e."""
    from .exact import parse_fraction

    if not isinstance(obj, list):
        raise InputError(f"{path}: expected a list of coefficient lists", path=path)
    out = []
    for i, c in enumerate(obj):
        if not isinstance(c, list):
            raise InputError(f"{path}[{i}]: expected a coefficient list", path=f"{path}[{i}]")
        out.append(CycloNumber.from_coeffs(rep.conductor, [parse_fraction(x, path=f"{path}[{i}][{k}]") for k, x in enumerate(c)]))
    return rep.vector(out)


def vector_to_json(xi) -> list:
    return [[format_fraction(c) for c in a.coeffs] for a in xi]


# --- cyclicity ----------------------------------------------------------------------

def cyclo_rank(rows: Sequence[Sequence[CycloNumber]]) -> int:
    """Rank over Q(zeta_m) by exact Gaussian elimination."""
    a = [list(r) for r in rows if any(not x.is_zero() for x in r)]
    if not a:
        return 0
    ncols = len(a[0])
    rank = 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(a)) if not a[r][c].is_zero()), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = a[rank][c].inverse()
        for r in range(rank + 1, len(a)):
            if not a[r][c].is_zero():
                f = a[r][c] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


def orbit_rank(rep: DiagRep, xi) -> int:
    """Dimension of span{pi(gamma) xi : gamma in G}, from the full orbit matrix."""
    return cyclo_rank([rep.act(g, xi) for g in rep.group.elements()])


@dataclass
class CyclicVerdict:
    cyclic: bool
    witness: Optional[list] = None  # gamma_1..gamma_m
    det: Optional[CycloNumber] = None
    zero_coefficient: Optional[int] = None
    repeated_pair: Optional[tuple] = None
    oracle_rank: Optional[int] = None

    def to_json(self) -> dict:
        out = {"cyclic": self.cyclic, "oracle_rank": self.oracle_rank}
        if self.witness is not None:
            out["witness"] = [list(g) for g in self.witness]
            out["det"] = self.det.to_json()
        if self.zero_coefficient is not None:
            out["zero_coefficient"] = self.zero_coefficient
        if self.repeated_pair is not None:
            out["repeated_pair"] = list(self.repeated_pair)
        return out


def is_cyclic(rep: DiagRep, xi, *, max_dim: int = 6, max_group: int = 64, cross_check: bool = True) -> CyclicVerdict:
    """Whether the orbit of xi spans the whole space.

    The verdict comes from the criterion (all coefficients non-zero and the
    characters pairwise distinct).  A cyclic verdict carries gamma_1..gamma_m,
    chosen greedily in lexicographic order to extend an independent set, with
    det(a_i <gamma_j, phi_i>) != 0 as certificate.  The orbit rank is computed
    separately and must agree.
    """
    xi = rep.vector(xi)
    if rep.dim > max_dim:
        raise CapExceeded(f"dimension {rep.dim} exceeds cap {max_dim}")
    if rep.group.size > max_group:
        raise CapExceeded(f"group order {rep.group.size} exceeds cap {max_group}")
    verdict = None
    for i, a in enumerate(xi):
        if a.is_zero():
            verdict = CyclicVerdict(False, zero_coefficient=i)
            break
    if verdict is None:
        for i in range(rep.dim):
            for j in range(i + 1, rep.dim):
                if rep.chars[i] == rep.chars[j]:
                    verdict = CyclicVerdict(False, repeated_pair=(i, j))
                    break
            if verdict:
                break
    if verdict is None:
        chosen, cols = [], []
        for g in rep.group.elements():
            col = rep.act(g, xi)
            if cyclo_rank(cols + [col]) > len(cols):
                chosen.append(g)
                cols.append(col)
                if len(cols) == rep.dim:
                    break
        if len(cols) < rep.dim:
            raise VerificationError("is_cyclic.witness", "no independent translates despite the criterion")
        # matrix entry (i, j) = a_i <gamma_j, phi_i>
        det = cyclo_det([[cols[j][i] for j in range(rep.dim)] for i in range(rep.dim)]) if rep.dim else CycloNumber.from_rational(rep.conductor, 1)
        if det.is_zero():
            raise VerificationError("is_cyclic.det", "certificate determinant vanishes")
        verdict = CyclicVerdict(True, witness=chosen, det=det)
    if cross_check:
        r = orbit_rank(rep, xi)
        verdict.oracle_rank = r
        if (r == rep.dim) != verdict.cyclic:
            raise VerificationError("is_cyclic.oracle", f"criterion says {verdict.cyclic}, orbit rank is {r} of {rep.dim}")
    return verdict


# --- positive-definite functions and spectral measures -------------------------------

def norm_sq(a: CycloNumber) -> CycloNumber:
    return a * a.conj()


def positive_definite_fn(rep: DiagRep, xi, gamma) -> CycloNumber:
    """<pi(gamma) xi, xi> = sum_i |a_i|^2 <gamma, phi_i>."""
    xi = rep.vector(xi)
    return _pdf(rep, [norm_sq(a) for a in xi], rep.group.element(gamma))


def _pdf(rep: DiagRep, norms, gamma) -> CycloNumber:
    total = CycloNumber.from_rational(rep.conductor, 0)
    for i, n in enumerate(norms):
        total = total + n * rep.value(i, gamma)
    return total


@dataclass
class SpectralMeasure:
    atoms: list  # (Character, mass as CycloNumber in the real subfield)

    def total_mass(self, m: int) -> CycloNumber:
        total = CycloNumber.from_rational(m, 0)
        for _, mass in self.atoms:
            total = total + mass
        return total

    def to_json(self) -> list:
        out = []
        for c, mass in self.atoms:
            q = rational_value(mass)
            out.append({"char": c.to_json(), "mass": format_fraction(q) if q is not None else mass.to_json()})
        return out


def rational_value(x: CycloNumber) -> Optional[Fraction]:
    """x as a rational number, or None if it is irrational."""
    c = x.coeffs
    return c[0] if not any(c[1:]) else None


def spectral_measure(rep: DiagRep, xi) -> SpectralMeasure:
    """Atoms at the distinct characters of positive mass, mass = sum of |a_j|^2 over phi_j equal to the atom.

    The Fourier identity sum mass * <gamma, phi> = positive_definite_fn(gamma)
    is asserted for every gamma in G.
    """
    xi = rep.vector(xi)
    atoms: dict = {}
    order = []
    for c, a in zip(rep.chars, xi):
        if c not in atoms:
            atoms[c] = CycloNumber.from_rational(rep.conductor, 0)
            order.append(c)
        atoms[c] = atoms[c] + norm_sq(a)
    # characters carrying no mass are not atoms
    mu = SpectralMeasure([(c, atoms[c]) for c in order if not atoms[c].is_zero()])
    norms = [norm_sq(a) for a in xi]
    for g in rep.group.elements():
        lhs = CycloNumber.from_rational(rep.conductor, 0)
        for c, mass in mu.atoms:
            lhs = lhs + mass * CycloNumber.from_angle(rep.conductor, c(g))
        if lhs != _pdf(rep, norms, g):
            raise VerificationError("spectral_measure.bochner", f"Fourier identity fails at {g}")
    return mu


# --- approximating a function on the characters ---------------------------------------

@dataclass
class C1Result:
    found: bool
    gamma: tuple
    distance: Fraction  # max_j angle_dist(<gamma, phi_j>, f_j) at gamma

    def to_json(self) -> dict:
        return {"found": self.found, "gamma": list(self.gamma), "distance": format_fraction(self.distance)}


def c1_search(rep: DiagRep, f: Sequence, eps) -> C1Result:
    """First gamma (lexicographic) with max_j angle_dist(<gamma, phi_j>, f_j) < eps.

    Without one, the result carries the smallest achievable max distance and
    the first gamma attaining it.
    """
    eps = Fraction(eps)
    f = [a if isinstance(a, Angle) else Angle(a) for a in f]
    if len(f) != rep.dim:
        raise InputError(f"need {rep.dim} target angles, got {len(f)}")
    if len(set(rep.chars)) != rep.dim:
        raise InputError("characters must be pairwise distinct")
    best, best_g = None, None
    for g in rep.group.elements():
        d = max((angle_dist(c(g), t) for c, t in zip(rep.chars, f)), default=Fraction(0))
        if d < eps:
            if not all(angle_dist(c(g), t) < eps for c, t in zip(rep.chars, f)):
                raise VerificationError("c1_search.strict", f"re-check failed at {g}")
            return C1Result(True, tuple(g), d)
        if best is None or d < best:
            best, best_g = d, tuple(g)
    return C1Result(False, best_g, best)
