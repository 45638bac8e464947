"""Core model tests: densities, shadows, blow-ups, catalog, invariants."""

import itertools
import random
from fractions import Fraction

import pytest

from redhyp import (DomainError, Pattern, ReducedHypergraph, blow_up,
                    constituent_density, is_box_dense, pattern_catalog,
                    random_box_dense, shadow)
from redhyp.constructions import orientation_reduced
from redhyp.core import sorted_pair, sorted_triple


def complete_host(m, p):
    return random_box_dense(m, p, 1, seed=0)


def test_density_complete_empty_orientation():
    h = complete_host(3, 2)
    assert constituent_density(h, (1, 2, 3)) == 1
    empty = random_box_dense(3, 2, 0, seed=0)
    assert constituent_density(empty, (1, 2, 3)) == 0
    orient = orientation_reduced(4)
    assert constituent_density(orient, (1, 2, 4)) == Fraction(1, 4)


def test_density_unknown_triple():
    h = complete_host(4, 1)
    with pytest.raises(DomainError):
        constituent_density(h, (1, 2, 5))
    with pytest.raises(DomainError):
        constituent_density(h, (1, 1, 2))


def test_density_is_exact_rational():
    rng = random.Random(7)
    for _ in range(20):
        m = rng.randint(3, 5)
        p = rng.randint(1, 4)
        h = random_box_dense(m, p, Fraction(rng.randint(0, 8), 8),
                             seed=rng.randint(0, 999))
        for t in h.triples():
            d = constituent_density(h, t)
            assert d * p ** 3 == h.edge_count(t)


def test_is_box_dense_cases():
    h = complete_host(4, 2)
    assert is_box_dense(h, 1) == (True, None)
    orient = orientation_reduced(5)
    assert is_box_dense(orient, Fraction(1, 4)) == (True, None)
    ok, witness = is_box_dense(orient, Fraction(1, 4) + Fraction(1, 1000))
    assert not ok and witness == (1, 2, 3)
    cons = {t: list(h.edges(t)) for t in h.triples()}
    cons[(2, 3, 4)] = []
    h2 = ReducedHypergraph.with_uniform_classes(4, 2, cons)
    ok, witness = is_box_dense(h2, Fraction(1, 8))
    assert not ok and witness == (2, 3, 4)


def test_is_box_dense_monotone():
    rng = random.Random(3)
    for _ in range(20):
        h = random_box_dense(rng.randint(3, 5), rng.randint(1, 3),
                             Fraction(rng.randint(0, 10), 10),
                             seed=rng.randint(0, 99))
        d1 = Fraction(rng.randint(0, 12), 12)
        d2 = Fraction(rng.randint(0, 12), 12)
        if d2 > d1:
            d1, d2 = d2, d1
        if is_box_dense(h, d1)[0]:
            assert is_box_dense(h, d2)[0]


def test_is_box_dense_rejects_bad_threshold():
    h = complete_host(3, 1)
    with pytest.raises(DomainError):
        is_box_dense(h, Fraction(5, 4))


def test_density_invariant_under_index_relabeling():
    rng = random.Random(11)
    for _ in range(10):
        m = rng.randint(4, 6)
        h = random_box_dense(m, 2, Fraction(1, 2), seed=rng.randint(0, 99))
        perm = list(range(1, m + 1))
        rng.shuffle(perm)
        g = h.induced(perm)
        for x, y, z in g.triples():
            orig = sorted_triple(perm[x - 1], perm[y - 1], perm[z - 1])
            assert constituent_density(g, (x, y, z)) == constituent_density(h, orig)


def test_shadow_examples():
    fstar = pattern_catalog("Fstar")
    assert shadow(fstar) == frozenset(itertools.combinations(range(1, 6), 2))
    k4m = pattern_catalog("K4minus")
    assert shadow(k4m) == frozenset(itertools.combinations(range(1, 5), 2))
    single = pattern_catalog("single_edge")
    assert shadow(single) == frozenset({(1, 2), (1, 3), (2, 3)})


def test_shadow_matches_definition():
    rng = random.Random(5)
    for _ in range(20):
        n = rng.randint(3, 6)
        edges = set()
        for _ in range(rng.randint(0, 8)):
            edges.add(tuple(sorted(rng.sample(range(1, n + 1), 3))))
        p = Pattern(n, edges)
        expected = {tuple(sorted(set(e) - {x})) for e in edges for x in e}
        assert p.shadow == frozenset(expected)


def test_blow_up_identity_and_counts():
    fstar = pattern_catalog("Fstar")
    assert blow_up(fstar, 1) == fstar
    single = pattern_catalog("single_edge")
    doubled = blow_up(single, 2)
    assert doubled.vertex_count == 6
    assert len(doubled.edges) == 8
    k4m2 = blow_up(pattern_catalog("K4minus"), 2)
    assert len(k4m2.edges) == 24
    with pytest.raises(DomainError):
        blow_up(single, 0)


def test_blow_up_shadow_is_pairwise_blow_up():
    # The blown-up shadow must be exactly the pairs of copies whose
    # originals are distinct and shadow-adjacent.
    for name in ("single_edge", "K4minus", "Fstar"):
        p = pattern_catalog(name)
        for t in (2, 3):
            big = blow_up(p, t)
            expected = set()
            for u, v in p.shadow:
                for su, sv in itertools.product(range(t), repeat=2):
                    expected.add(sorted_pair((u - 1) * t + su + 1,
                                             (v - 1) * t + sv + 1))
            assert big.shadow == frozenset(expected)


def test_pattern_catalog():
    fstar = pattern_catalog("Fstar")
    assert fstar.vertex_count == 5
    assert fstar.edges == frozenset(
        {(1, 2, 3), (1, 2, 4), (1, 3, 4), (1, 2, 5), (3, 4, 5)})
    k4m = pattern_catalog("K4minus")
    assert k4m.edges == frozenset({(1, 2, 3), (1, 2, 4), (1, 3, 4)})
    assert all(1 in e for e in k4m.edges)  # apex at vertex 1
    k4 = pattern_catalog("K4")
    assert len(k4.edges) == 4 and k4.vertex_count == 4
    with pytest.raises(DomainError):
        pattern_catalog("K5")


def test_pattern_validation():
    with pytest.raises(DomainError):
        Pattern(3, [(1, 2, 2)])
    with pytest.raises(DomainError):
        Pattern(3, [(1, 2, 4)])
    with pytest.raises(DomainError):
        Pattern(0, [])


def test_host_validation():
    with pytest.raises(DomainError):  # missing class size
        ReducedHypergraph(3, {(1, 2): 1, (1, 3): 1}, {})
    with pytest.raises(DomainError):  # zero class size
        ReducedHypergraph.with_uniform_classes(3, 0, {})
    with pytest.raises(DomainError):  # edge out of range
        ReducedHypergraph.with_uniform_classes(3, 1, {(1, 2, 3): [(0, 0, 1)]})
    with pytest.raises(DomainError):  # duplicate edge
        ReducedHypergraph.with_uniform_classes(
            3, 2, {(1, 2, 3): [(0, 0, 0), (0, 0, 0)]})
    with pytest.raises(DomainError):  # unsorted constituent key
        ReducedHypergraph.with_uniform_classes(3, 1, {(2, 1, 3): [(0, 0, 0)]})


def test_induced_reversal_matches_by_hand():
    h = complete_host(4, 2)
    cons = {t: set(h.edges(t)) for t in h.triples()}
    cons[(1, 2, 3)] = {(0, 1, 0)}
    h = ReducedHypergraph.with_uniform_classes(4, 2, cons)
    g = h.induced([3, 2, 1])  # new 1=old 3, new 2=old 2, new 3=old 1
    # Old edge (a, b, c) in classes (P12, P13, P23) becomes (c, b, a) in
    # new classes (P'12, P'13, P'23) = (P23, P13, P12).
    assert g.edges((1, 2, 3)) == frozenset({(0, 1, 0)})
    cons[(1, 2, 3)] = {(0, 1, 1)}
    h = ReducedHypergraph.with_uniform_classes(4, 2, cons)
    g = h.induced([3, 2, 1])
    assert g.edges((1, 2, 3)) == frozenset({(1, 1, 0)})
