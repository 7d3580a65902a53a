"""Exact arithmetic: rationals, angles on the circle, cyclotomic numbers.

The circle is normalised to circumference 1, so a point of the torus is a
rational number of turns in [0, 1).  Cyclotomic numbers live in Q(zeta_m) and
are stored in the power basis modulo the m-th cyclotomic polynomial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Sequence

from .errors import InputError

Rational = Fraction


def parse_fraction(text, *, path="value", reduced=True) -> Fraction:
    """Parse ``"a/b"`` or ``"n"``; reject unreduced or malformed strings."""
    if isinstance(text, bool):
        raise InputError(f"{path}: expected a fraction string, got {text!r}", path=path)
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise InputError(f"{path}: expected a fraction string, got {text!r}", path=path)
    parts = text.strip().split("/")
    try:
        if len(parts) == 1:
            return Fraction(int(parts[0]))
        if len(parts) == 2:
            num, den = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise InputError(f"{path}: malformed fraction {text!r}", path=path) from None
    if den <= 0:
        raise InputError(f"{path}: denominator must be positive in {text!r}", path=path)
    if reduced and (math.gcd(num, den) != 1 or den == 1):
        raise InputError(f"{path}: fraction {text!r} is not in lowest terms", path=path)
    return Fraction(num, den)


def format_fraction(q) -> str:
    return str(Fraction(q))


@dataclass(frozen=True, order=True)
class Angle:
    """A point of the circle group R/Z, measured in turns."""

    value: Fraction

    def __post_init__(self):
        v = Fraction(self.value) % 1
        object.__setattr__(self, "value", v)

    @classmethod
    def parse(cls, text, path="angle") -> "Angle":
        q = parse_fraction(text, path=path)
        if not 0 <= q < 1:
            raise InputError(f"{path}: angle {text!r} outside [0, 1)", path=path)
        return cls(q)

    def __add__(self, other: "Angle") -> "Angle":
        return Angle(self.value + other.value)

    def __sub__(self, other: "Angle") -> "Angle":
        return Angle(self.value - other.value)

    def __neg__(self) -> "Angle":
        return Angle(-self.value)

    def __mul__(self, k: int) -> "Angle":
        return Angle(self.value * k)

    __rmul__ = __mul__

    @property
    def order(self) -> int:
        """Order of the angle in Q/Z."""
        return self.value.denominator

    def __str__(self):
        return str(self.value)

    def __repr__(self):
        return f"Angle({self.value})"


ZERO_ANGLE = Angle(Fraction(0))

TorusPoint = tuple  # tuple[Angle, ...]


def angle_dist(a: Angle, b: Angle) -> Fraction:
    """Shortest-geodesic distance on the unit-circumference circle."""
    t = abs(a.value - b.value)
    return min(t, 1 - t)


def torus_dist_max(x: Sequence[Angle], y: Sequence[Angle]) -> Fraction:
    if len(x) != len(y):
        raise InputError(f"arity mismatch: {len(x)} != {len(y)}")
    return max((angle_dist(a, b) for a, b in zip(x, y)), default=Fraction(0))


# --- rational polynomials (coefficient lists, lowest degree first) ---------

def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod(a, b):
    a = _trim(a)
    b = _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    r = [Fraction(c) for c in a]
    lead = Fraction(b[-1])
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        c = r[-1] / lead
        q[shift] = c
        for i, bc in enumerate(b):
            r[shift + i] -= c * bc
        r = _trim(r)
    return _trim(q), r


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _poly_sub(a, b):
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)])


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple:
    """Phi_m by dividing x^m - 1 by Phi_d for every proper divisor d of m."""
    if m < 1:
        raise InputError(f"conductor must be positive, got {m}")
    num = [Fraction(-1)] + [Fraction(0)] * (m - 1) + [Fraction(1)]
    for d in range(1, m):
        if m % d == 0:
            num, rem = _poly_divmod(num, cyclotomic_poly(d))
            assert not rem
    return tuple(num)


@lru_cache(maxsize=None)
def _int_phi(m: int) -> tuple:
    return tuple(int(c) for c in cyclotomic_poly(m))


def _reduce_int(coeffs: list, m: int) -> list:
    phi = _int_phi(m)
    d = len(phi) - 1
    a = list(coeffs)
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i]
        if c:
            a[i] = 0
            base = i - d
            for j in range(d):
                if phi[j]:
                    a[base + j] -= c * phi[j]
    a = a[:d]
    return a + [0] * (d - len(a))


@lru_cache(maxsize=None)
def _power_table(m: int) -> tuple:
    """Reduced integer coefficient vectors of zeta_m^k for k = 0..m-1."""
    d = len(_int_phi(m)) - 1
    rows = []
    for k in range(m):
        v = [0] * (k + 1)
        v[k] = 1
        rows.append(tuple(_reduce_int(v, m) if k >= d else v + [0] * (d - k - 1)))
    return tuple(rows)


class CycloNumber:
    """Element of Q(zeta_m): integer numerators over a common denominator."""

    __slots__ = ("m", "num", "den")

    def __init__(self, m: int, num: Iterable[int], den: int = 1, _normalised=False):
        self.m = m
        if _normalised:
            self.num = num
            self.den = den
            return
        num = [int(c) for c in num]
        d = len(_int_phi(m)) - 1
        if len(num) > d:
            num = _reduce_int(num, m)
        else:
            num = num + [0] * (d - len(num))
        if den < 0:
            num = [-c for c in num]
            den = -den
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        g = den
        for c in num:
            g = math.gcd(g, c)
        if g > 1:
            num = [c // g for c in num]
            den //= g
        if not any(num):
            den = 1
        self.num = tuple(num)
        self.den = den

    # constructors
    @classmethod
    def from_rational(cls, m: int, q) -> "CycloNumber":
        q = Fraction(q)
        d = len(_int_phi(m)) - 1
        return cls(m, [q.numerator] + [0] * (d - 1), q.denominator)

    @classmethod
    def zeta(cls, m: int, k: int = 1) -> "CycloNumber":
        return cls(m, _power_table(m)[k % m], 1, _normalised=True)

    @classmethod
    def from_angle(cls, m: int, a: Angle) -> "CycloNumber":
        """exp(2 pi i a) as an element of Q(zeta_m); a must have order dividing m."""
        k = a.value * m
        if k.denominator != 1:
            raise InputError(f"angle {a} has order {a.order} not dividing conductor {m}")
        return cls.zeta(m, int(k))

    @classmethod
    def from_coeffs(cls, m: int, coeffs: Sequence) -> "CycloNumber":
        qs = [Fraction(c) for c in coeffs]
        den = 1
        for q in qs:
            den = den * q.denominator // math.gcd(den, q.denominator)
        return cls(m, [int(q * den) for q in qs], den)

    @property
    def coeffs(self) -> tuple:
        return tuple(Fraction(c, self.den) for c in self.num)

    def _coerce(self, other) -> "CycloNumber":
        if isinstance(other, CycloNumber):
            if other.m != self.m:
                raise InputError(f"conductor mismatch: {self.m} vs {other.m}")
            return other
        if isinstance(other, (int, Fraction)):
            return CycloNumber.from_rational(self.m, other)
        return NotImplemented

    def is_zero(self) -> bool:
        return not any(self.num)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CycloNumber.from_rational(self.m, other)
        if not isinstance(other, CycloNumber):
            return NotImplemented
        return self.m == other.m and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.m, self.num, self.den))

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.den, other.den
        return CycloNumber(self.m, [x * b + y * a for x, y in zip(self.num, other.num)], a * b)

    __radd__ = __add__

    def __neg__(self):
        return CycloNumber(self.m, tuple(-c for c in self.num), self.den, _normalised=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prod = [0] * (2 * len(self.num) - 1 if self.num else 0)
        for i, x in enumerate(self.num):
            if x:
                for j, y in enumerate(other.num):
                    if y:
                        prod[i + j] += x * y
        return CycloNumber(self.m, _reduce_int(prod, self.m), self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "CycloNumber":
        """Multiplicative inverse via the extended Euclidean algorithm mod Phi_m."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero cyclotomic number")
        phi = list(cyclotomic_poly(self.m))
        a = _trim([Fraction(c) for c in self.num])
        # invariant: r0 = s0*a mod phi, r1 = s1*a mod phi
        r0, s0 = phi, []
        r1, s1 = a, [Fraction(1)]
        while len(r1) > 1:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
        c = r1[0]
        inv = [x / c for x in s1]
        return CycloNumber.from_coeffs(self.m, inv) * self.den

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = CycloNumber.from_rational(self.m, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "CycloNumber":
        """Complex conjugate: zeta -> zeta^-1."""
        table = _power_table(self.m)
        acc = [0] * len(self.num)
        for k, c in enumerate(self.num):
            if c:
                row = table[(-k) % self.m]
                for j, r in enumerate(row):
                    acc[j] += c * r
        return CycloNumber(self.m, acc, self.den)

    def to_json(self) -> dict:
        return {"m": self.m, "coeffs": [format_fraction(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj, path="cyclo") -> "CycloNumber":
        try:
            m = int(obj["m"])
            coeffs = [parse_fraction(c, path=f"{path}.coeffs[{i}]") for i, c in enumerate(obj["coeffs"])]
        except (KeyError, TypeError) as exc:
            raise InputError(f"{path}: malformed cyclotomic number ({exc})", path=path) from None
        if m < 1 or len(coeffs) > len(cyclotomic_poly(m)) - 1:
            raise InputError(f"{path}: degree bound violated for conductor {m}", path=path)
        return cls.from_coeffs(m, coeffs)

    def __repr__(self):
        terms = [f"{c}*z^{k}" for k, c in enumerate(self.coeffs) if c]
        return f"Cyclo[{self.m}](" + (" + ".join(terms) or "0") + ")"


def cyclo_det(matrix: Sequence[Sequence[CycloNumber]]) -> CycloNumber:
    """Exact determinant over Q(zeta_m).

    Small matrices use the permutation expansion, which needs no division;
    larger ones use Gaussian elimination with field inverses.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise InputError("cyclo_det needs a square matrix")
    if n == 0:
        raise InputError("cyclo_det of an empty matrix needs an explicit conductor")
    m = matrix[0][0].m
    for row in matrix:
        for x in row:
            if x.m != m:
                raise InputError(f"conductor mismatch: {x.m} vs {m}")
    if n <= 5:
        total = CycloNumber.from_rational(m, 0)
        for perm in permutations(range(n)):
            term = CycloNumber.from_rational(m, _perm_sign(perm))
            for i, j in enumerate(perm):
                term = term * matrix[i][j]
                if term.is_zero():
                    break
            total = total + term
        return total
    a = [list(row) for row in matrix]
    det = CycloNumber.from_rational(m, 1)
    for c in range(n):
        piv = next((r for r in range(c, n) if not a[r][c].is_zero()), None)
        if piv is None:
            return CycloNumber.from_rational(m, 0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c]
        inv = a[c][c].inverse()
        for r in range(c + 1, n):
            if not a[r][c].is_zero():
                f = a[r][c] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign
