"""Cleaning machinery: auxiliary bipartite Q-graphs, degree colorings,
monochromatic extraction, and S-sets.

For a triple i<j<k two bipartite graphs are kept.  The low graph joins
w in P^{ij} to v in P^{ik} when at least eps^2 * |P^{jk}| vertices of
P^{jk} complete wv to a constituent edge; the high graph joins v in
P^{ik} to w in P^{jk} with completions counted in P^{ij}.  Thresholds
are exact rational comparisons against integer counts.

`clean` runs the whole process: color every triple blue or red by a
degree-square inequality, extract a monochromatic index subset (an exact
branch-and-bound search; red subsets are turned blue by an order-reversing
relabeling recorded in the system), re-color by the deepest S-set level
that stays delta-large, extract again, and re-verify the surviving
triples from scratch.  Every stage failure is a structured result.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Sequence

from .core import ReducedHypergraph, Triple, sorted_triple
from .errors import DomainError

DEFAULT_RAMSEY_EXACT_CAP = 32


@dataclass
class BipartiteGraph:
    """Bitset adjacency between a left and a right vertex class."""

    left_size: int
    right_size: int
    left_adj: list[int]   # per left vertex: bitset over right vertices
    right_adj: list[int]  # per right vertex: bitset over left vertices

    @classmethod
    def build(cls, left_size: int, right_size: int,
              has_edge: Callable[[int, int], bool]) -> "BipartiteGraph":
        left_adj = [0] * left_size
        right_adj = [0] * right_size
        for a in range(left_size):
            for b in range(right_size):
                if has_edge(a, b):
                    left_adj[a] |= 1 << b
                    right_adj[b] |= 1 << a
        return cls(left_size, right_size, left_adj, right_adj)

    def has(self, left: int, right: int) -> bool:
        return bool(self.left_adj[left] >> right & 1)

    def left_degree(self, left: int) -> int:
        return self.left_adj[left].bit_count()

    def right_degree(self, right: int) -> int:
        return self.right_adj[right].bit_count()

    def edge_count(self) -> int:
        return sum(a.bit_count() for a in self.left_adj)


@dataclass
class QGraphSystem:
    """Q-graphs for one host, plus the cleaning results once `clean` ran.

    q_low[(i,j,k)] joins P^{ij} (left) to P^{ik} (right); q_high[(i,j,k)]
    joins P^{ik} (left) to P^{jk} (right).  After cleaning, the host here
    is the relabeled survivor and to_original maps its indices back to the
    input host's labels.
    """

    host: ReducedHypergraph
    eps: Fraction
    q_low: dict[Triple, BipartiteGraph]
    q_high: dict[Triple, BipartiteGraph]
    delta: Fraction | None = None
    color1: dict[Triple, str] | None = None
    s_sets: dict[tuple[Triple, int], frozenset[int]] | None = None
    r_star: int | None = None
    to_original: tuple[int, ...] | None = None

    @property
    def surviving_indices(self) -> tuple[int, ...] | None:
        return self.to_original

    def s_set(self, triple: Triple, r: int) -> frozenset[int]:
        if self.s_sets is None:
            raise DomainError("S-sets are only available after clean()")
        key = (sorted_triple(*triple), r)
        if key not in self.s_sets:
            raise DomainError(f"no stored S-set for triple {triple} at level {r}")
        return self.s_sets[key]


def build_q_graphs(host: ReducedHypergraph, eps,
                   threads: int = 1) -> QGraphSystem:
    """Build both Q-graph families for every index triple of the host."""
    eps = Fraction(eps)
    if not (0 < eps < 1):
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    eps_sq = eps * eps
    triples = list(host.triples())

    def build_one(t: Triple) -> tuple[Triple, BipartiteGraph, BipartiteGraph]:
        con = host.constituent(t)
        s0, s1, s2 = con.sizes
        low_threshold = eps_sq * s2
        high_threshold = eps_sq * s0
        comp01 = con.comp01
        comp12 = con.comp12
        low = BipartiteGraph.build(
            s0, s1, lambda a, b: comp01[a * s1 + b].bit_count() >= low_threshold)
        high = BipartiteGraph.build(
            s1, s2, lambda b, c: comp12[b * s2 + c].bit_count() >= high_threshold)
        return t, low, high

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            built = list(pool.map(build_one, triples))
    else:
        built = [build_one(t) for t in triples]
    q_low = {t: low for t, low, _ in built}
    q_high = {t: high for t, _, high in built}
    return QGraphSystem(host=host, eps=eps, q_low=q_low, q_high=q_high)


def check_sum_of_squares(host: ReducedHypergraph, system: QGraphSystem,
                         triple: Triple) -> tuple[Fraction, bool]:
    """Exact left-hand side of the degree-product bound for one triple,
    and whether it reaches (1/4 + eps/2) * |P^{ij}| * |P^{jk}| * |P^{ik}|."""
    t = sorted_triple(*triple)
    low = system.q_low[t]
    high = system.q_high[t]
    i, j, k = t
    lhs = Fraction(sum(low.right_adj[v].bit_count() * high.left_adj[v].bit_count()
                       for v in range(low.right_size)))
    rhs = (Fraction(1, 4) + system.eps / 2) * host.class_size(i, j) \
        * host.class_size(j, k) * host.class_size(i, k)
    return lhs, lhs >= rhs


def color_triples(host: ReducedHypergraph,
                  system: QGraphSystem) -> dict[Triple, str]:
    """Color each triple blue or red by the degree-square dichotomy.

    Blue means the low-graph degree squares over P^{ik} reach
    (1/4 + eps/2) * |P^{ij}|^2 * |P^{ik}|; otherwise the triple is red.
    Whenever the degree-product bound holds, a non-blue triple must
    satisfy the mirrored high-graph inequality; that dichotomy is
    enforced here as an internal invariant.
    """
    colors: dict[Triple, str] = {}
    quarter = Fraction(1, 4) + system.eps / 2
    for t in host.triples():
        i, j, k = t
        low = system.q_low[t]
        high = system.q_high[t]
        blue_lhs = Fraction(sum(low.right_adj[v].bit_count() ** 2
                                for v in range(low.right_size)))
        blue_rhs = quarter * host.class_size(i, j) ** 2 * host.class_size(i, k)
        if blue_lhs >= blue_rhs:
            colors[t] = "blue"
            continue
        colors[t] = "red"
        sos_lhs, sos_holds = check_sum_of_squares(host, system, t)
        if sos_holds:
            red_lhs = Fraction(sum(high.left_adj[v].bit_count() ** 2
                                   for v in range(high.left_size)))
            red_rhs = quarter * host.class_size(j, k) ** 2 * host.class_size(i, k)
            if red_lhs < red_rhs:
                raise RuntimeError(
                    f"degree-square dichotomy violated at triple {t}: "
                    f"product bound holds ({sos_lhs}) but neither square bound does")
    return colors


def level_cap(delta: Fraction) -> int:
    """Highest S-set level: ceil(1 / (2 delta))."""
    inv = Fraction(1, 2) / delta
    return -(-inv.numerator // inv.denominator)


def compute_s_sets(host: ReducedHypergraph, system: QGraphSystem, delta,
                   max_level: int | None = None) -> dict[tuple[Triple, int], frozenset[int]]:
    """S-sets for every triple and level 1..max_level+1.

    S^i_{jk}(r) collects x in P^{ik} whose low-graph degree toward P^{ij}
    is at least (1/2 + r*delta) * |P^{ij}|.  Levels are nested decreasing.
    """
    delta = Fraction(delta)
    cap = level_cap(delta) if max_level is None else max_level
    out: dict[tuple[Triple, int], frozenset[int]] = {}
    for t in host.triples():
        i, j, k = t
        low = system.q_low[t]
        size_ij = host.class_size(i, j)
        degrees = [low.right_adj[x].bit_count() for x in range(low.right_size)]
        for r in range(1, cap + 2):
            threshold = (Fraction(1, 2) + r * delta) * size_ij
            out[(t, r)] = frozenset(x for x, deg in enumerate(degrees)
                                    if deg >= threshold)
    return out


def level_coloring(host: ReducedHypergraph, system: QGraphSystem, delta,
                   s_sets: Mapping[tuple[Triple, int], frozenset[int]]) -> dict[Triple, int]:
    """Color each triple by the deepest level whose S-set is delta-large.

    Level 0 marks triples where even level 1 falls below delta * |P^{ik}|;
    such triples cannot survive cleaning.
    """
    delta = Fraction(delta)
    cap = level_cap(delta)
    colors: dict[Triple, int] = {}
    for t in host.triples():
        i, j, k = t
        floor = delta * host.class_size(i, k)
        level = 0
        for r in range(cap, 0, -1):
            if len(s_sets[(t, r)]) >= floor:
                level = r
                break
        colors[t] = level
    return colors


@dataclass(frozen=True)
class RamseyResult:
    subset: tuple[int, ...]
    color: Hashable
    exhaustive: bool


def ramsey_extract(items: Sequence[int], coloring: Mapping[Triple, Hashable],
                   target: int,
                   exact_cap: int = DEFAULT_RAMSEY_EXACT_CAP) -> RamseyResult | None:
    """Find a subset of `target` items whose internal triples share a color.

    Exact branch-and-bound search when len(items) <= exact_cap, returning
    the lexicographically least monochromatic subset; above the cap a
    greedy pass runs instead and its result is flagged non-exhaustive.
    Returns None when no such subset exists (exact) or is found (greedy).
    """
    if target < 3:
        raise DomainError(f"target must be >= 3, got {target}")
    items = sorted(items)
    if len(items) < target:
        raise DomainError(
            f"need at least target={target} items, got {len(items)}")
    for t in itertools.combinations(items, 3):
        if t not in coloring:
            raise DomainError(f"coloring is missing triple {t}")
    colors = sorted({coloring[t] for t in itertools.combinations(items, 3)},
                    key=repr)

    if len(items) > exact_cap:
        for color in colors:
            subset = _greedy_mono(items, coloring, color, target)
            if subset is not None:
                return RamseyResult(subset, color, exhaustive=False)
        return None

    best: tuple[tuple[int, ...], Hashable] | None = None
    for color in colors:
        subset = _exact_mono(items, coloring, color, target)
        if subset is not None and (best is None or subset < best[0]):
            best = (subset, color)
    if best is None:
        return None
    return RamseyResult(best[0], best[1], exhaustive=True)


def _compatible(chosen: Sequence[int], x: int,
                coloring: Mapping[Triple, Hashable], color: Hashable) -> bool:
    for a, b in itertools.combinations(chosen, 2):
        if coloring[sorted_triple(a, b, x)] != color:
            return False
    return True


def _greedy_mono(items, coloring, color, target):
    chosen: list[int] = []
    for x in items:
        if _compatible(chosen, x, coloring, color):
            chosen.append(x)
            if len(chosen) == target:
                return tuple(chosen)
    return None


def _exact_mono(items, coloring, color, target):
    """Lexicographically least monochromatic subset of exactly `target`
    items, by include-first depth-first search with a size-pruned frontier."""
    n = len(items)

    def rec(chosen: list[int], start: int):
        if len(chosen) == target:
            return tuple(chosen)
        if len(chosen) + (n - start) < target:
            return None
        for idx in range(start, n):
            x = items[idx]
            if len(chosen) + (n - idx) < target:
                return None
            if _compatible(chosen, x, coloring, color):
                chosen.append(x)
                hit = rec(chosen, idx + 1)
                if hit is not None:
                    return hit
                chosen.pop()
        return None

    return rec([], 0)


@dataclass(frozen=True)
class StageFailure:
    stage: str
    reason: str


@dataclass
class CleanResult:
    ok: bool
    system: QGraphSystem | None
    failure: StageFailure | None
    log: list[str] = field(default_factory=list)


def clean(host: ReducedHypergraph, config, threads: int = 1) -> CleanResult:
    """Run the full cleaning process under a pipeline configuration.

    On success the returned system's host is the surviving relabeled
    hypergraph, all of whose triples are blue and share the level r_star,
    with both survival clauses re-verified from scratch.
    """
    log: list[str] = []
    eps, delta = config.eps, config.delta
    target1, target2 = config.ramsey_target_1, config.ramsey_target_2
    if host.index_count < target1:
        return CleanResult(False, None, StageFailure(
            "ramsey-color", f"host has {host.index_count} indices, "
            f"need at least {target1}"), log)

    system = build_q_graphs(host, eps, threads=threads)
    colors = color_triples(host, system)
    blue = sum(1 for c in colors.values() if c == "blue")
    log.append(f"color1 blue={blue} red={len(colors) - blue}")

    extraction = ramsey_extract(list(host.indices()), colors, target1,
                                exact_cap=config.ramsey_exact_cap)
    if extraction is None:
        return CleanResult(False, None, StageFailure(
            "ramsey-color", f"no monochromatic index subset of size {target1}"), log)
    log.append(f"ramsey1 color={extraction.color} subset={list(extraction.subset)} "
               f"exhaustive={extraction.exhaustive}")

    if extraction.color == "blue":
        map1 = list(extraction.subset)
    else:
        map1 = list(reversed(extraction.subset))  # order reversal turns red into blue
        log.append("relabel reversed order for red subset")
    host2 = host.induced(map1)
    system2 = build_q_graphs(host2, eps, threads=threads)
    colors2 = color_triples(host2, system2)
    offenders = sorted(t for t, c in colors2.items() if c != "blue")
    if offenders:
        t = offenders[0]
        lhs, _ = check_sum_of_squares(host2, system2, t)
        return CleanResult(False, None, StageFailure(
            "blue-verification",
            f"triple {t} (original {tuple(map1[x - 1] for x in t)}) is not blue "
            f"after relabeling; degree-product lhs={lhs}"), log)

    s_sets2 = compute_s_sets(host2, system2, delta)
    levels = level_coloring(host2, system2, delta, s_sets2)
    log.append(f"levels min={min(levels.values())} max={max(levels.values())}")
    if host2.index_count < target2:
        return CleanResult(False, None, StageFailure(
            "ramsey-level", f"surviving set has {host2.index_count} indices, "
            f"need at least {target2}"), log)
    extraction2 = ramsey_extract(list(host2.indices()), levels, target2,
                                 exact_cap=config.ramsey_exact_cap)
    if extraction2 is None:
        return CleanResult(False, None, StageFailure(
            "ramsey-level", f"no level-monochromatic index subset of size {target2}"), log)
    r_star = extraction2.color
    log.append(f"ramsey2 r_star={r_star} subset={list(extraction2.subset)} "
               f"exhaustive={extraction2.exhaustive}")
    if r_star == 0:
        return CleanResult(False, None, StageFailure(
            "ramsey-level", "surviving triples have no delta-large S-set level"), log)

    map2 = list(extraction2.subset)
    host3 = host2.induced(map2)
    system3 = build_q_graphs(host3, eps, threads=threads)
    s_sets3 = compute_s_sets(host3, system3, delta)
    to_original = tuple(map1[map2[x - 1] - 1] for x in range(1, host3.index_count + 1))

    verify = verify_star(host3, system3, delta, s_sets3, r_star)
    if verify is not None:
        return CleanResult(False, None, StageFailure("star-verification", verify), log)
    log.append(f"surviving={list(to_original)}")

    system3.delta = Fraction(delta)
    system3.color1 = color_triples(host3, system3)
    system3.s_sets = s_sets3
    system3.r_star = r_star
    system3.to_original = to_original
    return CleanResult(True, system3, None, log)


def verify_star(host: ReducedHypergraph, system: QGraphSystem, delta,
                s_sets: Mapping[tuple[Triple, int], frozenset[int]],
                r_star: int) -> str | None:
    """Re-verify both survival clauses for every triple from scratch.

    Returns None when everything holds, else a message naming the first
    failing triple and clause.
    """
    delta = Fraction(delta)
    quarter = Fraction(1, 4) + system.eps / 2
    for t in host.triples():
        i, j, k = t
        low = system.q_low[t]
        blue_lhs = sum(low.right_adj[v].bit_count() ** 2
                       for v in range(low.right_size))
        blue_rhs = quarter * host.class_size(i, j) ** 2 * host.class_size(i, k)
        if blue_lhs < blue_rhs:
            return f"triple {t} fails the blue degree-square bound"
        floor = delta * host.class_size(i, k)
        if len(s_sets[(t, r_star)]) < floor:
            return f"triple {t} has |S(r_star)| below delta * |P^{{{i},{k}}}|"
        if not len(s_sets[(t, r_star + 1)]) < floor:
            return f"triple {t} has |S(r_star + 1)| not below delta * |P^{{{i},{k}}}|"
    return None
