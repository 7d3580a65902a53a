import random
from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from gen import random_metric
from genrep.errors import CapExceeded, InputError
from genrep.finitegroup import cyclic
from genrep.katetov import (
    KatetovFn,
    catalogue_audit,
    extend_action,
    extend_partial_isometry,
    grid_values,
    one_point_extension,
    saturate,
)
from genrep.metspace import FinMetric, IsoAction, iso_group, metric_violation

F = Fraction


def two_points(d):
    return FinMetric(["a", "b"], [[0, d], [d, 0]])


def test_one_point_extension_examples():
    X = FinMetric(["o"], [[0]])
    Y = one_point_extension(X, KatetovFn(X, (0,), (F(3, 2),)))
    assert len(Y) == 2 and Y.d(0, 1) == F(3, 2)
    X = two_points(2)
    Y = one_point_extension(X, KatetovFn(X, (0, 1), (1, 1)))
    assert len(Y) == 3 and Y.d(2, 0) == Y.d(2, 1) == 1
    with pytest.raises(InputError):
        KatetovFn(X, (0, 1), (0, 3))


def test_one_point_extension_off_support_uses_minimal_extension():
    X = FinMetric(list("abc"), [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    Y = one_point_extension(X, KatetovFn(X, (0,), (F(1, 2),)))
    assert [Y.d(3, y) for y in range(3)] == [F(1, 2), F(3, 2), F(5, 2)]
    Yc = one_point_extension(X, KatetovFn(X, (0,), (F(1, 2),)), cap=2)
    assert Yc.d(3, 2) == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_one_point_extension_is_metric_and_isometric(seed):
    rng = random.Random(seed)
    X = random_metric(rng, rng.randint(1, 5))
    S = tuple(sorted(rng.sample(range(len(X)), rng.randint(1, len(X)))))
    # distances to a fresh point of a larger random space give a Katetov function
    W = random_metric(rng, len(X) + 1)
    f = [W.d(len(X), i) for i in S]
    try:
        fn = KatetovFn(X, S, f)
    except InputError:
        return
    Y = one_point_extension(X, fn)
    assert metric_violation(Y.dist) is None
    assert Y.restrict(range(len(X))).same_metric(X)
    assert [Y.d(len(X), i) for i in S] == f


def test_extend_action_examples():
    X = two_points(2)
    swap = IsoAction(cyclic(2), {0: (0, 1), 1: (1, 0)}, X)
    X2, a2, new = extend_action(X, swap, KatetovFn(X, (0, 1), (1, 1)))
    assert new == [2] and a2.perms[1] == (1, 0, 2)
    X3, a3, new = extend_action(X, swap, KatetovFn(X, (0, 1), (1, 3)))
    assert len(new) == 2
    assert a3.perms[1][2] == 3 and a3.perms[1][3] == 2
    assert metric_violation(X3.dist) is None
    triv = IsoAction(cyclic(1), {0: (0, 1)}, X)
    Xt, _, _ = extend_action(X, triv, KatetovFn(X, (0,), (1,)))
    assert Xt.same_metric(one_point_extension(X, KatetovFn(X, (0,), (1,))))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_extend_action_extends_and_is_isometric(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    vals = [[F(0)] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        vals[i][j] = vals[j][i] = F(rng.randint(1, 2))
    X = FinMetric(list(range(n)), vals)
    G, perms = iso_group(X)
    alpha = IsoAction(G, dict(enumerate(perms)), X)
    S = tuple(sorted(rng.sample(range(n), rng.randint(1, n))))
    f = [F(rng.randint(1, 3)) for _ in S]
    try:
        fn = KatetovFn(X, S, f)
    except InputError:
        return
    X2, a2, new = extend_action(X, alpha, fn)
    assert X2.restrict(range(n)).same_metric(X)
    assert a2.violation() is None
    for g, p in alpha.perms.items():
        assert a2.perms[g][:n] == p


def test_grid_values():
    assert grid_values(1, 2) == [1, 2]
    assert grid_values(2, 1) == [F(1, 2), 1]
    assert grid_values(1, F(1, 2)) == []


def _brute_missing(X, s, V):
    n = len(X)
    out = []
    for size in range(1, min(s, n) + 1):
        for S in combinations(range(n), size):
            realised = {tuple(X.d(y, i) for i in S) for y in range(n)}
            for vals in product(V, repeat=size):
                ok = all(abs(vals[a] - vals[b]) <= X.d(S[a], S[b]) <= vals[a] + vals[b]
                         for a, b in combinations(range(size), 2))
                if ok and vals not in realised:
                    out.append((S, vals))
    return out


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_catalogue_audit_matches_brute_force(seed, s):
    rng = random.Random(seed)
    X = random_metric(rng, rng.randint(1, 5))
    V = grid_values(2, 2)
    assert sorted(catalogue_audit(X, s, V)) == sorted(_brute_missing(X, s, V))


def test_saturate_examples():
    X = FinMetric(["o"], [[0]])
    tower = saturate(X, 1, 1, 2)
    assert len(tower.space) >= 3
    assert not catalogue_audit(tower.space, 1, [1, 2])
    assert saturate(X, 0, 1, 2).space is X
    assert saturate(X, 1, 1, F(1, 2)).space is X
    with pytest.raises(InputError):
        saturate(two_points(3), 1, 1, 2)


@pytest.mark.parametrize("strategy", ["template", "cover", "random", "canonical", "minimal"])
def test_saturate_strategies_pass_audit(strategy):
    X = two_points(1)
    for s in (1, 2):
        if s == 2 and strategy in ("canonical", "minimal"):
            # these keep creating pairs they cannot close; the guard stops them
            with pytest.raises(CapExceeded):
                saturate(X, s, 1, 2, strategy=strategy, guard=300)
            continue
        Y = saturate(X, s, 1, 2, strategy=strategy, seed=3).space
        assert Y.restrict([0, 1]).same_metric(X)
        assert not _brute_missing(Y, s, [F(1), F(2)])


def test_saturate_guard():
    with pytest.raises(CapExceeded):
        saturate(two_points(1), 2, 2, 3, strategy="cover", guard=5)


def test_partial_isometry_examples():
    X = FinMetric(list("abc"), [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    ext = extend_partial_isometry(X, {0: 0, 1: 1, 2: 2})
    assert ext.sigma == (0, 1, 2) and ext.method == "internal"
    with pytest.raises(InputError):
        extend_partial_isometry(X, {0: 0, 1: 2})


def test_partial_isometry_needs_amalgam():
    # a -> b moves the end of a path to its middle; no isometry of X does this
    X = FinMetric(list("abc"), [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    ext = extend_partial_isometry(X, {0: 1})
    assert ext.method == "amalgam" and ext.sigma[0] == 1
    Y = ext.space
    assert Y.restrict(range(3)).same_metric(X)
    assert all(Y.d(ext.sigma[i], ext.sigma[j]) == Y.d(i, j) for i in range(len(Y)) for j in range(len(Y)))


def test_partial_isometry_on_saturated_space():
    Y = saturate(two_points(1), 1, 1, 2).space
    # two points at equal distance from a third
    pairs = [(a, b, c) for a, b, c in product(range(len(Y)), repeat=3)
             if len({a, b, c}) == 3 and Y.d(a, c) == Y.d(b, c)]
    a, b, c = pairs[0]
    ext = extend_partial_isometry(Y, {a: b, b: a, c: c})
    assert ext.sigma[a] == b and ext.sigma[b] == a and ext.sigma[c] == c


def test_tower_json():
    tower = saturate(two_points(1), 1, 1, 1)
    out = tower.to_json()
    assert out["params"]["s"] == 1 and FinMetric.from_json(out["space"]).same_metric(tower.space)
