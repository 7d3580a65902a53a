import random

import pytest
from hypothesis import given, settings, strategies as st

from genrep.errors import InputError
from genrep.finitegroup import abelian, cyclic
from genrep.freeprod import (
    TableFactor,
    VectorFactor,
    build_quotient,
    exponent_reduce,
    format_free,
    inverse,
    max_exponent,
    mul,
    normalize,
    parse_free,
    perm_order,
    separating_quotient,
    word_from_json,
    word_to_json,
)

Z1, Z2 = VectorFactor((0,)), VectorFactor((0, 0))


def e(*v):
    return ("A", tuple(v))


def a(*letters):
    return ("F", tuple(letters))


def test_max_exponent_examples():
    assert max_exponent([normalize([e(2)], Z1)]) == (2, 5)
    assert max_exponent([]) == (0, 1)
    assert max_exponent([normalize([a(1), e(-3), a(2)], Z1)]) == (3, 7)


def test_exponent_reduce_examples():
    assert exponent_reduce(normalize([e(5)], Z1), (5,)) == ()
    assert exponent_reduce(normalize([e(2)], Z1), (5,)) == (e(2),)
    assert exponent_reduce(normalize([a(1), e(5), a(1)], Z1), (5,)) == (a(1, 1),)


def test_parse_and_format_free():
    assert parse_free("a1 a2^-1 a1^3") == (1, -2, 1, 1, 1)
    assert format_free((1, -2, 1, 1, 1)) == "a1 a2^-1 a1^3"
    for bad in ("b1", "a0", "a1^x"):
        with pytest.raises(InputError):
            parse_free(bad)


def test_word_json_round_trip():
    w = word_from_json([{"abelian": [1, -2]}, {"free": "a1 a2^-1"}, {"abelian": [0, 3]}], Z2)
    assert word_from_json(word_to_json(w), Z2) == w
    with pytest.raises(InputError):
        word_from_json([{"abelian": [1]}], Z2)
    with pytest.raises(InputError):
        word_from_json([{"other": 1}], Z2)


def test_separating_quotient_regular_action():
    A = cyclic(5)
    Q = separating_quotient(A, 0, [(("A", 1),), (("A", 2),)])
    assert len(Q.carrier) == 5
    assert all(Q.image(w)[0] != 0 for w in [(("A", 1),), (("A", 2),)])


def test_separating_quotient_trivial():
    assert separating_quotient(cyclic(1), 0, []).carrier == [()]
    # the base point's A-orbit is always completed, so A still acts freely
    Q = separating_quotient(cyclic(3), 0, [])
    assert len(Q.carrier) == 3 and Q.carrier[0] == ()


def test_separating_quotient_prefix_walk():
    A = cyclic(2)
    w = (("A", 1), ("F", (1,)))
    Q = separating_quotient(A, 1, [w])
    assert {(), (("A", 1),), w} <= set(Q.carrier)
    assert Q.image(w)[0] == Q.carrier.index(w)


@st.composite
def words(draw, d, n, max_len=6):
    syl = []
    for _ in range(draw(st.integers(0, max_len))):
        if d and (not n or draw(st.booleans())):
            syl.append(e(*draw(st.lists(st.integers(-3, 3), min_size=d, max_size=d))))
        elif n:
            syl.append(a(draw(st.sampled_from([1, -1])) * draw(st.integers(1, n))))
    return syl


@given(words(2, 2), words(2, 2), words(2, 2))
def test_normalize_idempotent_and_associative(u, v, w):
    nu, nv, nw = (normalize(x, Z2) for x in (u, v, w))
    assert normalize(nu, Z2) == nu
    assert normalize(nu + nv, Z2) == normalize(u + v, Z2)
    assert mul(mul(nu, nv, Z2), nw, Z2) == mul(nu, mul(nv, nw, Z2), Z2)
    assert mul(nu, inverse(nu, Z2), Z2) == ()
    for i in range(len(nu) - 1):
        assert nu[i][0] != nu[i + 1][0]


def _next_prime(m):
    while not all(m % q for q in range(2, int(m ** 0.5) + 1)) or m < 2:
        m += 1
    return m


@settings(max_examples=60, deadline=None)
@given(st.lists(words(2, 1), min_size=1, max_size=5))
def test_exponent_reduce_injective_above_bound(C):
    C = list(dict.fromkeys(normalize(w, Z2) for w in C))
    _, M = max_exponent(C)
    p1 = _next_prime(M)
    p = (p1, _next_prime(p1 + 1))
    reduced = [exponent_reduce(w, p) for w in C]
    assert len(set(reduced)) == len(C)


def test_build_quotient_examples():
    res = build_quotient(1, 0, [[e(1)], [e(2)]], [5])
    g = res.generator_images()
    assert perm_order(g["e1"]) == 5
    assert res.q((e(1),)) != res.q((e(2),))
    res = build_quotient(2, 0, [[e(1, 0)], [e(0, 1)], [e(1, 1)]], [5, 7])
    g = res.generator_images()
    assert perm_order(g["e1"]) == 5 and perm_order(g["e2"]) == 7
    res = build_quotient(1, 0, [], [5])
    assert perm_order(res.generator_images()["e1"]) == 5


def test_build_quotient_errors():
    with pytest.raises(InputError):
        build_quotient(1, 0, [[e(3)]], [5])  # M = 7
    with pytest.raises(InputError):
        build_quotient(2, 0, [[e(1, 0)]], [5, 5])
    with pytest.raises(InputError):
        build_quotient(1, 0, [[e(1)]], [9])
    with pytest.raises(InputError):
        build_quotient(1, 1, [[a(2)]], [3])
    res = build_quotient(1, 0, [[e(1)]], [9], relaxed=True)
    assert perm_order(res.generator_images()["e1"]) == 9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_quotient_extends_the_prefix_automaton(seed):
    """Completed permutations agree with right multiplication wherever the product stays in the carrier."""
    rng = random.Random(seed)
    A = abelian(rng.choice([(2,), (3,), (2, 3), (5,)]))
    n = rng.randint(0, 2)
    factor = TableFactor(A)
    ws = []
    for _ in range(rng.randint(0, 4)):
        syl = []
        for _ in range(rng.randint(1, 5)):
            if not n or rng.random() < 0.5:
                syl.append(("A", rng.randrange(A.order)))
            else:
                syl.append(("F", (rng.choice([1, -1]) * rng.randint(1, n),)))
        ws.append(syl)
    Q = separating_quotient(A, n, ws)
    index = {u: i for i, u in enumerate(Q.carrier)}
    for u, i in index.items():
        for x in range(A.order):
            v = mul(u, (("A", x),), factor)
            assert Q.a_perms[x][i] == index[v]
        for j in range(1, n + 1):
            for s in (j, -j):
                v = mul(u, (("F", (s,)),), factor)
                if v in index:
                    assert Q.letter_perm("F", s)[i] == index[v]
    for w in ws:
        w = normalize(w, factor)
        if w:
            assert Q.image(w)[0] == index[w] != 0
