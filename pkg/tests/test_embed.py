"""Embedding tests: validator conditions, engine/oracle agreement,
certificates, budgets, and monotonicity."""

import random
from fractions import Fraction

import pytest

from redhyp import (CapExceeded, DanglingReferenceError, DomainError, Pattern,
                    ReducedHypergraph, ReducedMap, blow_up, exhaustive_oracle,
                    find_reduced_image, pattern_catalog, random_box_dense,
                    validate_reduced_map)
from redhyp.constructions import orientation_reduced


def complete_host(m, p=1):
    return random_box_dense(m, p, 1, seed=0)


def five_row_host():
    """Host on indices 1..5, singleton classes, holding exactly the five
    constituent edges of the staircase-style assignment below."""
    cons = {t: [] for t in
            [(1, 2, 3), (1, 2, 4), (1, 2, 5), (1, 4, 5), (3, 4, 5)]}
    for t in cons:
        cons[t] = [(0, 0, 0)]
    return ReducedHypergraph.with_uniform_classes(5, 1, cons)


def staircase_map():
    lam = {1: 1, 2: 2, 3: 5, 4: 4, 5: 3}
    phi = {}
    for u in range(1, 6):
        for v in range(u + 1, 6):
            i, j = sorted((lam[u], lam[v]))
            phi[(u, v)] = ((i, j), 0)
    return ReducedMap(lam=lam, phi=phi)


def test_validate_staircase_assignment():
    host = five_row_host()
    ok, violation = validate_reduced_map(host, pattern_catalog("Fstar"), staircase_map())
    assert ok and violation is None


def test_validate_detects_missing_edge():
    host = five_row_host()
    cons = {t: set(host.edges(t)) for t in host.triples() if host.edges(t)}
    del cons[(3, 4, 5)]
    broken = ReducedHypergraph.with_uniform_classes(5, 1, cons)
    ok, violation = validate_reduced_map(broken, pattern_catalog("Fstar"), staircase_map())
    assert not ok and violation.kind == "edge"


def test_validate_single_edge_complete():
    host = complete_host(3)
    rmap = ReducedMap(lam={1: 1, 2: 2, 3: 3},
                      phi={(1, 2): ((1, 2), 0), (1, 3): ((1, 3), 0),
                           (2, 3): ((2, 3), 0)})
    ok, _ = validate_reduced_map(host, pattern_catalog("single_edge"), rmap)
    assert ok


def test_validate_distinctness_and_class_violations():
    host = complete_host(3)
    pat = pattern_catalog("single_edge")
    rmap = ReducedMap(lam={1: 1, 2: 1, 3: 3},
                      phi={(1, 2): ((1, 2), 0), (1, 3): ((1, 3), 0),
                           (2, 3): ((2, 3), 0)})
    ok, violation = validate_reduced_map(host, pat, rmap)
    assert not ok and violation.kind == "distinctness"
    rmap = ReducedMap(lam={1: 1, 2: 2, 3: 3},
                      phi={(1, 2): ((1, 3), 0), (1, 3): ((1, 3), 0),
                           (2, 3): ((2, 3), 0)})
    ok, violation = validate_reduced_map(host, pat, rmap)
    assert not ok and violation.kind == "class"


def test_validate_dangling_references_are_errors_not_violations():
    host = complete_host(3)
    pat = pattern_catalog("single_edge")
    with pytest.raises(DanglingReferenceError):
        validate_reduced_map(host, pat, ReducedMap(lam={1: 1, 2: 2},
                                                   phi={}))
    with pytest.raises(DanglingReferenceError):
        validate_reduced_map(host, pat, ReducedMap(
            lam={1: 1, 2: 2, 3: 9},
            phi={(1, 2): ((1, 2), 0), (1, 3): ((1, 3), 0), (2, 3): ((2, 3), 0)}))
    with pytest.raises(DanglingReferenceError):
        validate_reduced_map(host, pat, ReducedMap(
            lam={1: 1, 2: 2, 3: 3},
            phi={(1, 2): ((1, 2), 5), (1, 3): ((1, 3), 0), (2, 3): ((2, 3), 0)}))


def test_find_on_complete_host():
    host = complete_host(5)
    result = find_reduced_image(host, pattern_catalog("Fstar"))
    assert result.status == "found"
    ok, _ = validate_reduced_map(host, pattern_catalog("Fstar"),
                                 result.certificate.rmap)
    assert ok


def test_orientation_hosts_are_free():
    for m in (4, 6, 8):
        host = orientation_reduced(m)
        assert find_reduced_image(host, pattern_catalog("K4minus")).status == "not-found"
    host = orientation_reduced(6)
    assert find_reduced_image(host, pattern_catalog("Fstar")).status == "not-found"
    oracle = exhaustive_oracle(host, pattern_catalog("Fstar"))
    assert not oracle.found and oracle.count == 0


def test_oracle_complete_k4_counts_index_assignments():
    host = complete_host(4)
    oracle = exhaustive_oracle(host, pattern_catalog("K4"))
    assert oracle.found and oracle.count == 24  # 4! index assignments


def test_oracle_empty_host():
    host = random_box_dense(5, 2, 0, seed=0)
    oracle = exhaustive_oracle(host, pattern_catalog("single_edge"))
    assert not oracle.found and oracle.count == 0


def test_oracle_counts_free_vertices_of_incomplete_shadow():
    # A pattern vertex outside every edge is unconstrained, so maps
    # multiply by the index count.
    host = complete_host(3)
    pat = Pattern(4, [(1, 2, 3)])
    oracle = exhaustive_oracle(host, pat)
    assert oracle.count == 6 * 3
    engine = find_reduced_image(host, pat, count_all=True)
    assert engine.count == 18


def test_oracle_cap_refusal():
    host = complete_host(6, 4)
    with pytest.raises(CapExceeded):
        exhaustive_oracle(host, pattern_catalog("Fstar"), cap=10 ** 4)


def test_budget_exhaustion_is_distinct():
    host = orientation_reduced(6)
    result = find_reduced_image(host, pattern_catalog("Fstar"), budget=50)
    assert result.status == "budget-exhausted"
    assert result.nodes >= 50
    with pytest.raises(DomainError):
        find_reduced_image(host, pattern_catalog("Fstar"), budget=0)


def test_engine_matches_oracle_on_seeded_hosts():
    densities = [Fraction(1, 10), Fraction(1, 2), Fraction(9, 10)]
    names = ["single_edge", "K4minus", "K4", "Fstar"]
    rng = random.Random(123)
    for trial in range(12):
        m = rng.choice([4, 5, 6])
        p = rng.choice([1, 2]) if m >= 5 else rng.choice([1, 2, 3])
        d = densities[trial % 3]
        host = random_box_dense(m, p, d, seed=1000 + trial)
        for name in names:
            pat = pattern_catalog(name)
            oracle = exhaustive_oracle(host, pat)
            engine = find_reduced_image(host, pat)
            count = find_reduced_image(host, pat, count_all=True)
            assert (engine.status == "found") == oracle.found
            assert count.count == oracle.count
            if engine.certificate is not None:
                ok, violation = validate_reduced_map(host, pat, engine.certificate.rmap)
                assert ok, violation


def test_monotone_under_edge_addition():
    rng = random.Random(77)
    pat = pattern_catalog("K4minus")
    for trial in range(10):
        host = random_box_dense(5, 2, Fraction(1, 4), seed=trial)
        before = find_reduced_image(host, pat).status
        extra = {}
        for t in host.triples():
            if rng.random() < 0.5:
                extra[t] = [(rng.randrange(2), rng.randrange(2), rng.randrange(2))]
        bigger = host.with_extra_edges(extra)
        after = find_reduced_image(bigger, pat).status
        if before == "found":
            assert after == "found"


def test_blow_up_containment_consistency():
    host = random_box_dense(5, 2, Fraction(3, 4), seed=5)
    pat = pattern_catalog("K4minus")
    if find_reduced_image(host, pat).status == "found":
        sub = Pattern(pat.vertex_count, sorted(pat.edges)[:-1])
        assert find_reduced_image(host, blow_up(sub, 1)).status == "found"


def test_threads_match_sequential():
    host = random_box_dense(5, 2, Fraction(1, 2), seed=9)
    pat = pattern_catalog("K4minus")
    seq = find_reduced_image(host, pat, count_all=True)
    par = find_reduced_image(host, pat, count_all=True, threads=3)
    assert seq.count == par.count
    seq_f = find_reduced_image(host, pat)
    par_f = find_reduced_image(host, pat, threads=3)
    assert seq_f.status == par_f.status
    if seq_f.status == "found":
        assert par_f.certificate.rmap == seq_f.certificate.rmap
