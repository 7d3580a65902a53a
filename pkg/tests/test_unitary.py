import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from genrep.abgroup import AbGroup, Character
from genrep.errors import CapExceeded, InputError
from genrep.exact import Angle, CycloNumber, angle_dist, cyclo_det
from genrep.unitary import (
    DiagRep,
    c1_search,
    is_cyclic,
    orbit_rank,
    positive_definite_fn,
    rational_value,
    spectral_measure,
    vector_from_json,
    vector_to_json,
)

F = Fraction
Z2 = AbGroup.of((2, 1, 1))
SIGN = DiagRep(Z2, [Character.trivial(Z2), Character(Z2, (F(1, 2),))])


def test_is_cyclic_examples():
    v = is_cyclic(SIGN, [1, 1])
    assert v.cyclic and v.witness == [(0,), (1,)]
    assert v.det == CycloNumber.from_rational(2, -2)
    assert v.oracle_rank == 2
    v = is_cyclic(SIGN, [1, 0])
    assert not v.cyclic and v.zero_coefficient == 1
    same = DiagRep(Z2, [Character.trivial(Z2)] * 2)
    v = is_cyclic(same, [1, 1])
    assert not v.cyclic and v.repeated_pair == (0, 1) and v.oracle_rank == 1


def test_is_cyclic_caps():
    with pytest.raises(CapExceeded):
        is_cyclic(SIGN, [1, 1], max_dim=1)
    big = AbGroup.of((2, 1, 7))
    with pytest.raises(CapExceeded):
        is_cyclic(DiagRep(big, [Character.trivial(big)]), [1])


def test_positive_definite_examples():
    assert positive_definite_fn(SIGN, [1, 1], (0,)) == CycloNumber.from_rational(2, 2)
    assert positive_definite_fn(SIGN, [1, 1], (1,)).is_zero()
    assert positive_definite_fn(SIGN, [0, 0], (1,)).is_zero()
    assert positive_definite_fn(SIGN, [F(1, 2), 3], (0,)) == CycloNumber.from_rational(2, F(37, 4))


def test_spectral_examples():
    mu = spectral_measure(SIGN, [1, 1])
    assert [(c.values, rational_value(m)) for c, m in mu.atoms] == [((Angle(0),), 1), ((Angle(F(1, 2)),), 1)]
    mu = spectral_measure(SIGN, [1, 0])
    assert len(mu.atoms) == 1 and rational_value(mu.atoms[0][1]) == 1
    same = DiagRep(Z2, [Character(Z2, (F(1, 2),))] * 2)
    mu = spectral_measure(same, [1, 1])
    assert len(mu.atoms) == 1 and rational_value(mu.atoms[0][1]) == 2
    assert mu.to_json() == [{"char": {"2^1#0": "1/2"}, "mass": "2"}]


def test_c1_examples():
    Z4 = AbGroup.of((2, 2, 1))
    rep = DiagRep(Z4, [Character(Z4, (F(1, 4),))])
    res = c1_search(rep, [F(3, 8)], F(1, 4))
    assert res.found and res.gamma == (1,) and res.distance == F(1, 8)
    res = c1_search(rep, [F(3, 8)], F(1, 16))
    assert not res.found and res.distance == F(1, 8) and res.gamma == (1,)
    res = c1_search(rep, [F(3, 4)], F(1, 100))
    assert res.found and res.distance == 0
    with pytest.raises(InputError):
        c1_search(rep, [0, 0], F(1, 2))


def test_vector_json():
    Z3 = AbGroup.of((3, 1, 1))
    rep = DiagRep(Z3, [Character(Z3, (F(1, 3),)), Character.trivial(Z3)])
    xi = vector_from_json(rep, [["1", "1/2"], ["0"]])
    assert vector_from_json(rep, vector_to_json(xi)) == xi
    with pytest.raises(InputError):
        vector_from_json(rep, [["1"]])
    assert DiagRep.from_json(rep.to_json()).chars == rep.chars


GROUPS = [AbGroup.of((2, 1, 2)), AbGroup.of((3, 1, 1)), AbGroup.of((2, 2, 1)), AbGroup.of((2, 1, 1), (3, 1, 1)),
          AbGroup.of((5, 1, 1))]


@st.composite
def reps_and_vectors(draw):
    G = draw(st.sampled_from(GROUPS))
    m = draw(st.integers(1, 3))
    chars = [Character(G, tuple(Angle(F(draw(st.integers(0, o - 1)), o)) for o in G.orders)) for _ in range(m)]
    rep = DiagRep(G, chars)
    e = rep.conductor
    deg = len(CycloNumber.zeta(e).coeffs)
    xi = [CycloNumber.from_coeffs(e, draw(st.lists(st.sampled_from([0, 0, 1, -1, F(1, 2)]), min_size=deg, max_size=deg)))
          for _ in range(m)]
    return rep, xi


@settings(max_examples=80, deadline=None)
@given(reps_and_vectors())
def test_cyclicity_criterion_matches_rank(inst):
    rep, xi = inst
    v = is_cyclic(rep, xi, cross_check=False)
    assert v.cyclic == (orbit_rank(rep, xi) == rep.dim)
    if v.cyclic:
        M = [[xi[i] * rep.value(i, g) for g in v.witness] for i in range(rep.dim)]
        assert cyclo_det(M) == v.det and not v.det.is_zero()


@settings(max_examples=60, deadline=None)
@given(reps_and_vectors())
def test_bochner_and_hermitian_symmetry(inst):
    rep, xi = inst
    G = rep.group
    mu = spectral_measure(rep, xi)
    total = CycloNumber.from_rational(rep.conductor, 0)
    for a in xi:
        total = total + a * a.conj()
    assert mu.total_mass(rep.conductor) == total
    for g in G.elements():
        lhs = CycloNumber.from_rational(rep.conductor, 0)
        for c, mass in mu.atoms:
            lhs = lhs + mass * CycloNumber.from_angle(rep.conductor, c(g))
        assert lhs == positive_definite_fn(rep, xi, g)
        assert positive_definite_fn(rep, xi, G.neg(g)) == positive_definite_fn(rep, xi, g).conj()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_c1_search_reverifies(seed):
    rng = random.Random(seed)
    G = rng.choice(GROUPS)
    chars = list({Character(G, tuple(Angle(F(rng.randrange(o), o)) for o in G.orders)) for _ in range(3)})
    rep = DiagRep(G, chars)
    f = [Angle(F(rng.randrange(24), 24)) for _ in chars]
    eps = F(rng.randint(1, 6), 12)
    res = c1_search(rep, f, eps)
    worst = [max(angle_dist(c(g), t) for c, t in zip(chars, f)) for g in G.elements()]
    assert res.distance == max(angle_dist(c(res.gamma), t) for c, t in zip(chars, f))
    if res.found:
        assert res.distance < eps
    else:
        assert res.distance == min(worst) >= eps
