from itertools import product

import pytest
from hypothesis import given, strategies as st

from genrep.errors import InputError
from genrep.finitegroup import (
    FiniteGroup,
    abelian,
    compose,
    cyclic,
    dihedral,
    direct_product,
    elementary_abelian_2,
    from_permutations,
    symmetric,
)


def _assert_group_axioms(G):
    n = G.order
    e = G.identity
    for a, b, c in product(range(n), repeat=3):
        assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))
    for a in range(n):
        assert G.mul(a, e) == a == G.mul(e, a)
        assert G.mul(a, G.inv(a)) == e


@pytest.mark.parametrize("G", [cyclic(6), abelian((2, 4)), elementary_abelian_2(3), symmetric(3), dihedral(4),
                               direct_product(cyclic(2), cyclic(3))])
def test_constructors_give_groups(G):
    _assert_group_axioms(G)


def test_orders_and_abelian_flags():
    assert symmetric(3).order == 6 and not symmetric(3).is_abelian()
    assert dihedral(5).order == 10
    assert abelian((2, 3)).is_abelian()
    assert sorted(len(c) for c in symmetric(3).conjugacy_classes()) == [1, 2, 3]
    assert cyclic(12).element_order(8) == 3


def test_bad_table_rejected():
    with pytest.raises(InputError):
        FiniteGroup([[0, 1], [0, 1]])
    with pytest.raises(InputError):
        FiniteGroup([])


def test_subgroup_and_power():
    G = cyclic(12)
    assert G.subgroup([4]) == [0, 4, 8]
    assert G.subgroup([4, 6]) == [0, 2, 4, 6, 8, 10]
    assert G.power(5, 3) == 3
    assert G.power(5, -1) == 7


def test_from_permutations_composition_convention():
    p, q = (1, 0, 2), (0, 2, 1)
    assert compose(p, q) == (1, 2, 0)
    G = from_permutations([p, q])
    assert G.order == 6


@given(st.integers(1, 16), st.integers(0, 15))
def test_cyclic_subgroup_closed(n, a):
    G = cyclic(n)
    a %= n
    H = G.cyclic_subgroup(a)
    assert len(H) == G.element_order(a)
    assert all(G.mul(x, y) in H for x in H for y in H)
