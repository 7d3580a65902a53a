"""Integer row echelon forms for subgroups of Z^r x Z(q_1) x ... x Z(q_s).

A subgroup is stored as a lattice L in Z^m containing the relation vectors
q_j e_j.  Rows may carry trailing payload columns (for instance the value of a
character on that row); unimodular row operations act on the payload too, so a
payload that survives on a zero row exposes an inconsistent assignment.
"""
from __future__ import annotations

from fractions import Fraction


def xgcd(a: int, b: int):
    """Return (g, x, y) with g = gcd(a, b) >= 0 and x*a + y*b = g."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def echelon(rows, cols):
    """Triangularise ``rows`` over the integers on the pivot columns ``cols``.

    Returns ``(basis, leftovers)``: ``basis`` is a list of ``(col, row)`` in
    pivot order, each row zero on all earlier pivot columns; ``leftovers`` are
    the rows that became zero on every column in ``cols``.
    """
    work = [list(r) for r in rows]
    basis = []
    for c in cols:
        pivot = None
        rest = []
        for r in work:
            if r[c] == 0:
                rest.append(r)
            elif pivot is None:
                pivot = r
            else:
                a, b = pivot[c], r[c]
                g, x, y = xgcd(a, b)
                ag, bg = a // g, b // g
                new_pivot = [x * p + y * q for p, q in zip(pivot, r)]
                rest.append([bg * p - ag * q for p, q in zip(pivot, r)])
                pivot = new_pivot
        if pivot is not None:
            if pivot[c] < 0:
                pivot = [-v for v in pivot]
            basis.append((c, pivot))
        work = rest
    return basis, work


def reduce_vector(basis, vec, ncols):
    """Reduce ``vec`` against an echelon basis.

    Returns ``(remainder, coefficients)`` where ``vec = sum(coef * row) +
    remainder`` on the first ``ncols`` columns.  ``vec`` lies in the lattice iff
    the remainder is zero.
    """
    v = list(vec)
    coefs = []
    for c, row in basis:
        q = v[c] // row[c]
        if q:
            v = [x - q * y for x, y in zip(v, row)]
        coefs.append(q)
    return v[:ncols], coefs


def lattice_index(rows, dim: int) -> int:
    """[Z^dim : L] for a full-rank lattice L spanned by ``rows`` (0 if not full rank)."""
    basis, _ = echelon(rows, range(dim))
    if len(basis) < dim:
        return 0
    out = 1
    for c, row in basis:
        out *= row[c]
    return out


def mod1(q) -> Fraction:
    return Fraction(q) % 1
