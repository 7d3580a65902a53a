from fractions import Fraction
import math
from itertools import combinations

from hypothesis import given, strategies as st

from genrep.lattice import echelon, lattice_index, mod1, reduce_vector, xgcd


@given(st.integers(-500, 500), st.integers(-500, 500))
def test_xgcd(a, b):
    g, x, y = xgcd(a, b)
    assert g >= 0 and x * a + y * b == g
    assert g == math.gcd(a, b)


def test_lattice_index_examples():
    assert lattice_index([[2, 0], [0, 3]], 2) == 6
    assert lattice_index([[1, 1], [1, -1]], 2) == 2
    assert lattice_index([[1, 2], [2, 4]], 2) == 0


@given(st.lists(st.lists(st.integers(-6, 6), min_size=2, max_size=2), min_size=1, max_size=4))
def test_lattice_index_is_gcd_of_minors(rows):
    # for a lattice in Z^2 spanned by any rows, the index is the gcd of all 2x2 minors
    minors = [abs(a[0] * b[1] - a[1] * b[0]) for a, b in combinations(rows, 2)]
    assert lattice_index(rows, 2) == math.gcd(0, *minors)


@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=1, max_size=4),
       st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_reduce_vector_recognises_members(rows, coeffs):
    basis, _ = echelon([[Fraction(x) for x in r] for r in rows], range(3))
    member = [sum(c * r[i] for c, r in zip(coeffs, rows)) for i in range(3)]
    rem, _ = reduce_vector(basis, [Fraction(x) for x in member], 3)
    assert not any(rem)


def test_mod1():
    assert mod1(Fraction(5, 3)) == Fraction(2, 3)
    assert mod1(Fraction(-1, 4)) == Fraction(3, 4)
