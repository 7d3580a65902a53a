"""Random instance generators shared by the property and acceptance tests."""
import math
import random
from fractions import Fraction
from itertools import combinations, product

from genrep.abgroup import AbGroup, Character, PrimaryBlock
from genrep.exact import Angle
from genrep.finitegroup import abelian, cyclic, dihedral, symmetric
from genrep.metspace import FinMetric, IsoAction, class_length_metric


def small_groups(max_order=12):
    """A fixed pool of finite groups of order <= max_order (abelian and not)."""
    pool = [cyclic(n) for n in range(1, max_order + 1)]
    pool += [abelian((2, 2)), abelian((2, 4)), abelian((2, 2, 2)), abelian((3, 3)), abelian((2, 6))]
    pool += [dihedral(n) for n in range(3, max_order // 2 + 1)]
    pool.append(symmetric(3))
    return [G for G in pool if G.order <= max_order]


def random_weights(rng, count):
    """Weights in [w, 2w] so that any class-length assignment is a metric."""
    q = rng.randint(1, 4)
    return [Fraction(rng.randint(q, 2 * q), q) for _ in range(count)]


def random_biinv(rng, G):
    classes = [c for c in G.conjugacy_classes() if G.identity not in c]
    return class_length_metric(G, random_weights(rng, len(classes)))


def subgroups(G):
    """Subgroups generated by at most two elements, deduplicated, as sorted lists."""
    seen = {}
    for a in range(G.order):
        for b in range(a, G.order):
            H = tuple(G.subgroup([a, b]))
            seen[H] = None
    return [list(H) for H in seen]


def coset_action(G, gamma, H):
    """Left action of the subgroup gamma on the left cosets of H <= gamma."""
    cosets = []
    for g in gamma:
        c = tuple(sorted(G.mul(g, h) for h in H))
        if c not in cosets:
            cosets.append(c)
    pos = {x: i for i, c in enumerate(cosets) for x in c}
    return len(cosets), {g: tuple(pos[G.mul(g, c[0])] for c in cosets) for g in gamma}


def faithful_space(rng, G, gamma, max_points=6, tries=40):
    """A Gamma-invariant random metric on a faithful Gamma-set of at most max_points points."""
    subs = [H for H in subgroups(G) if set(H) <= set(gamma)]
    e = G.identity
    for _ in range(tries):
        pieces, size = [], 0
        for _ in range(rng.randint(1, 3)):
            H = rng.choice(subs)
            n, perms = coset_action(G, gamma, H)
            if size + n > max_points:
                continue
            pieces.append((n, perms))
            size += n
        if not pieces:
            continue
        perms = {}
        for g in gamma:
            img, off = [], 0
            for n, p in pieces:
                img.extend(off + x for x in p[g])
                off += n
            perms[g] = tuple(img)
        ident = tuple(range(size))
        if any(perms[g] == ident for g in gamma if g != e):
            continue
        # one weight per orbit of Gamma on unordered pairs
        w = {}
        weights = random_weights(rng, size * size)
        dist = [[Fraction(0)] * size for _ in range(size)]
        for x, y in combinations(range(size), 2):
            key = min(tuple(sorted((perms[g][x], perms[g][y]))) for g in gamma)
            if key not in w:
                w[key] = weights[len(w)]
            dist[x][y] = dist[y][x] = w[key]
        Z = FinMetric(list(range(size)), dist)
        return Z, IsoAction(G, perms, Z)
    return None


def random_metric(rng, n, q=None):
    """Random rational metric on n points (values in [w, 2w])."""
    ws = random_weights(rng, n * n)
    dist = [[Fraction(0)] * n for _ in range(n)]
    k = 0
    for i, j in combinations(range(n), 2):
        dist[i][j] = dist[j][i] = ws[k]
        k += 1
    return FinMetric(list(range(n)), dist)


# --- abelian groups ------------------------------------------------------------------

def random_bounded_group(rng, primes=(2, 3, 5), max_entries=3, max_n=2, star=None, trunc=3):
    while True:
        pairs = rng.sample([(p, n) for p in primes for n in range(1, max_n + 1)], rng.randint(1, max_entries))
        blocks = []
        for p, n in pairs:
            mult = None if rng.random() < 0.5 else rng.randint(1, 2)
            blocks.append(PrimaryBlock(p, n, mult, trunc if mult is None else 1))
        G = AbGroup(0, blocks)
        from genrep.abgroup import has_star

        if star is None or has_star(G) == star:
            return G


def random_character(rng, G):
    return Character(G, tuple(Angle(Fraction(rng.randrange(o), o)) if o else Angle(Fraction(rng.randrange(12), 12))
                              for o in G.orders))


def random_element(rng, G):
    return tuple(rng.randrange(o) if o else rng.randint(-3, 3) for o in G.orders)
