"""Core data model: reduced hypergraphs, patterns, reduced maps, exact densities.

A reduced hypergraph has an index set 1..M, one vertex class per index
pair, and one 3-partite constituent per index triple.  Vertices within a
class are dense integers 0..size-1; pairs and triples are always handled
sorted ascending.  All densities are exact rationals; no floats appear on
any decision path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DomainError

Pair = tuple[int, int]
Triple = tuple[int, int, int]
Edge = tuple[int, int, int]


def sorted_pair(i: int, j: int) -> Pair:
    return (i, j) if i < j else (j, i)


def sorted_triple(i: int, j: int, k: int) -> Triple:
    return tuple(sorted((i, j, k)))  # type: ignore[return-value]


class Constituent:
    """Edge storage plus bitset adjacency for one 3-partite constituent.

    Slots 0, 1, 2 are the classes of the sorted index pairs (i,j), (i,k),
    (j,k) of the triple i<j<k.  An edge (a, b, c) selects vertex a from
    slot 0, b from slot 1, c from slot 2.

    Precomputed tables:
      comp01[a*s1+b] -> bitset over slot-2 completions, and likewise
        comp02 (fix slots 0,2) and comp12 (fix slots 1,2);
      proj_xy[v] -> bitset of slot-y vertices co-occurring with v in
        slot x, for all six ordered slot pairs;
      occupied[s] -> bitset of slot-s vertices used by at least one edge.
    """

    __slots__ = (
        "triple", "sizes", "edges", "packed",
        "comp01", "comp02", "comp12",
        "proj01", "proj02", "proj10", "proj12", "proj20", "proj21",
        "occupied",
    )

    def __init__(self, triple: Triple, sizes: tuple[int, int, int],
                 edges: Iterable[Edge]):
        self.triple = triple
        self.sizes = sizes
        self.edges = frozenset(edges)
        s0, s1, s2 = sizes
        comp01 = [0] * (s0 * s1)
        comp02 = [0] * (s0 * s2)
        comp12 = [0] * (s1 * s2)
        packed = set()
        for a, b, c in self.edges:
            comp01[a * s1 + b] |= 1 << c
            comp02[a * s2 + c] |= 1 << b
            comp12[b * s2 + c] |= 1 << a
            packed.add((a * s1 + b) * s2 + c)
        self.comp01 = comp01
        self.comp02 = comp02
        self.comp12 = comp12
        self.packed = frozenset(packed)
        proj01 = [0] * s0
        proj02 = [0] * s0
        proj10 = [0] * s1
        proj12 = [0] * s1
        proj20 = [0] * s2
        proj21 = [0] * s2
        for a, b, c in self.edges:
            proj01[a] |= 1 << b
            proj02[a] |= 1 << c
            proj10[b] |= 1 << a
            proj12[b] |= 1 << c
            proj20[c] |= 1 << a
            proj21[c] |= 1 << b
        self.proj01 = proj01
        self.proj02 = proj02
        self.proj10 = proj10
        self.proj12 = proj12
        self.proj20 = proj20
        self.proj21 = proj21
        occ0 = occ1 = occ2 = 0
        for a, b, c in self.edges:
            occ0 |= 1 << a
            occ1 |= 1 << b
            occ2 |= 1 << c
        self.occupied = (occ0, occ1, occ2)

    def has(self, a: int, b: int, c: int) -> bool:
        return (a, b, c) in self.edges

    def completion_bits(self, slot_x: int, slot_y: int, vx: int, vy: int) -> int:
        """Bitset of third-slot vertices completing (vx in slot_x, vy in slot_y)."""
        if (slot_x, slot_y) == (0, 1):
            return self.comp01[vx * self.sizes[1] + vy]
        if (slot_x, slot_y) == (0, 2):
            return self.comp02[vx * self.sizes[2] + vy]
        if (slot_x, slot_y) == (1, 2):
            return self.comp12[vx * self.sizes[2] + vy]
        raise DomainError(f"slot pair must be ascending, got ({slot_x}, {slot_y})")

    def support_bits(self, slot_from: int, slot_to: int, v: int) -> int:
        """Bitset of slot_to vertices co-occurring with v in slot_from."""
        table = {
            (0, 1): self.proj01, (0, 2): self.proj02,
            (1, 0): self.proj10, (1, 2): self.proj12,
            (2, 0): self.proj20, (2, 1): self.proj21,
        }.get((slot_from, slot_to))
        if table is None:
            raise DomainError(f"bad slot pair ({slot_from}, {slot_to})")
        return table[v]


class ReducedHypergraph:
    """Immutable reduced hypergraph on indices 1..M.

    class_sizes must cover every pair {i,j}; constituents maps sorted
    triples to edge collections and may omit empty constituents.
    """

    def __init__(self, index_count: int,
                 class_sizes: Mapping[Pair, int],
                 constituents: Mapping[Triple, Iterable[Edge]]):
        if index_count < 2:
            raise DomainError(f"index_count must be >= 2, got {index_count}")
        self._m = index_count
        sizes: dict[Pair, int] = {}
        for (i, j), s in class_sizes.items():
            if not (1 <= i < j <= index_count):
                raise DomainError(f"class pair ({i}, {j}) is not sorted within 1..{index_count}")
            if s < 1:
                raise DomainError(f"class P^{{{i},{j}}} must have size >= 1, got {s}")
            sizes[(i, j)] = int(s)
        for i, j in itertools.combinations(range(1, index_count + 1), 2):
            if (i, j) not in sizes:
                raise DomainError(f"missing class size for pair ({i}, {j})")
        self._sizes = sizes

        edge_sets: dict[Triple, frozenset[Edge]] = {}
        for t, edges in constituents.items():
            if len(t) != 3 or tuple(sorted(t)) != tuple(t):
                raise DomainError(f"constituent key {t} must be a sorted triple")
            i, j, k = t
            if not (1 <= i < j < k <= index_count):
                raise DomainError(f"constituent key {t} out of range 1..{index_count}")
            s0, s1, s2 = sizes[(i, j)], sizes[(i, k)], sizes[(j, k)]
            seen: set[Edge] = set()
            for e in edges:
                a, b, c = e
                if not (0 <= a < s0 and 0 <= b < s1 and 0 <= c < s2):
                    raise DomainError(
                        f"edge {e} of constituent {t} out of class ranges "
                        f"({s0}, {s1}, {s2})")
                if (a, b, c) in seen:
                    raise DomainError(f"duplicate edge {e} in constituent {t}")
                seen.add((a, b, c))
            edge_sets[t] = frozenset(seen)

        self._constituents: dict[Triple, Constituent] = {}
        for t in itertools.combinations(range(1, index_count + 1), 3):
            i, j, k = t
            s = (sizes[(i, j)], sizes[(i, k)], sizes[(j, k)])
            self._constituents[t] = Constituent(t, s, edge_sets.get(t, frozenset()))

    @property
    def index_count(self) -> int:
        return self._m

    def indices(self) -> range:
        return range(1, self._m + 1)

    def pairs(self) -> Iterator[Pair]:
        return itertools.combinations(range(1, self._m + 1), 2)

    def triples(self) -> Iterator[Triple]:
        return itertools.combinations(range(1, self._m + 1), 3)

    def class_size(self, i: int, j: int) -> int:
        key = sorted_pair(i, j)
        if key not in self._sizes:
            raise DomainError(f"unknown class pair ({i}, {j})")
        return self._sizes[key]

    def constituent(self, t: Triple) -> Constituent:
        key = sorted_triple(*t)
        con = self._constituents.get(key)
        if con is None:
            raise DomainError(f"unknown index triple {t}")
        return con

    def edges(self, t: Triple) -> frozenset[Edge]:
        return self.constituent(t).edges

    def edge_count(self, t: Triple) -> int:
        return len(self.constituent(t).edges)

    def total_edge_count(self) -> int:
        return sum(len(c.edges) for c in self._constituents.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReducedHypergraph):
            return NotImplemented
        return (self._m == other._m and self._sizes == other._sizes
                and {t: c.edges for t, c in self._constituents.items()}
                == {t: c.edges for t, c in other._constituents.items()})

    def __repr__(self) -> str:
        return (f"ReducedHypergraph(M={self._m}, "
                f"edges={self.total_edge_count()})")

    @classmethod
    def with_uniform_classes(cls, index_count: int, class_size: int,
                             constituents: Mapping[Triple, Iterable[Edge]]) -> "ReducedHypergraph":
        sizes = {p: class_size
                 for p in itertools.combinations(range(1, index_count + 1), 2)}
        return cls(index_count, sizes, constituents)

    def with_extra_edges(self, extra: Mapping[Triple, Iterable[Edge]]) -> "ReducedHypergraph":
        """New hypergraph with additional constituent edges (duplicates ignored)."""
        cons: dict[Triple, set[Edge]] = {t: set(c.edges)
                                         for t, c in self._constituents.items()
                                         if c.edges}
        for t, edges in extra.items():
            key = sorted_triple(*t)
            cons.setdefault(key, set()).update(tuple(e) for e in edges)
        return ReducedHypergraph(self._m, self._sizes, cons)

    def induced(self, index_map: Sequence[int]) -> "ReducedHypergraph":
        """Relabeled sub-hypergraph: new index p corresponds to index_map[p-1].

        index_map must be injective; it need not be monotone, so this also
        implements order-reversing relabelings.  Class vertices keep their
        numbering.
        """
        if len(set(index_map)) != len(index_map):
            raise DomainError("index_map must be injective")
        for o in index_map:
            if not (1 <= o <= self._m):
                raise DomainError(f"index {o} out of range 1..{self._m}")
        t_new = len(index_map)
        new_sizes = {}
        for x in range(1, t_new + 1):
            for y in range(x + 1, t_new + 1):
                new_sizes[(x, y)] = self._sizes[sorted_pair(index_map[x - 1], index_map[y - 1])]
        new_cons: dict[Triple, set[Edge]] = {}
        for x, y, z in itertools.combinations(range(1, t_new + 1), 3):
            ox, oy, oz = index_map[x - 1], index_map[y - 1], index_map[z - 1]
            o = sorted_triple(ox, oy, oz)
            old = self._constituents[o].edges
            if not old:
                continue
            old_slot_pairs = ((o[0], o[1]), (o[0], o[2]), (o[1], o[2]))
            sel = tuple(old_slot_pairs.index(p) for p in
                        (sorted_pair(ox, oy), sorted_pair(ox, oz), sorted_pair(oy, oz)))
            new_cons[(x, y, z)] = {(e[sel[0]], e[sel[1]], e[sel[2]]) for e in old}
        return ReducedHypergraph(t_new, new_sizes, new_cons)


def constituent_density(host: ReducedHypergraph, triple: Triple) -> Fraction:
    """Edge count of the constituent over the product of its class sizes."""
    con = host.constituent(triple)
    s0, s1, s2 = con.sizes
    return Fraction(len(con.edges), s0 * s1 * s2)


def is_box_dense(host: ReducedHypergraph, d) -> tuple[bool, Triple | None]:
    """Whether every constituent has density >= d.

    Returns (True, None), or (False, t) with t the lexicographically least
    violating triple.
    """
    d = Fraction(d)
    if not (0 <= d <= 1):
        raise DomainError(f"density threshold must lie in [0, 1], got {d}")
    for t in host.triples():
        if constituent_density(host, t) < d:
            return False, t
    return True, None


class Pattern:
    """A small 3-graph used as an embedding target.

    Vertices are 1..vertex_count; edges are sorted triples; the shadow is
    the derived set of pairs obtained by deleting one vertex from an edge.
    """

    def __init__(self, vertex_count: int, edges: Iterable[Edge],
                 name: str | None = None):
        if vertex_count < 1:
            raise DomainError(f"vertex_count must be >= 1, got {vertex_count}")
        self.vertex_count = vertex_count
        canon: set[Edge] = set()
        for e in edges:
            if len(set(e)) != 3:
                raise DomainError(f"pattern edge {e} must have three distinct vertices")
            u, v, w = sorted(e)
            if not (1 <= u and w <= vertex_count):
                raise DomainError(f"pattern edge {e} out of range 1..{vertex_count}")
            canon.add((u, v, w))
        self.edges: frozenset[Edge] = frozenset(canon)
        self.shadow: frozenset[Pair] = frozenset(
            sorted_pair(*pair)
            for e in self.edges for pair in itertools.combinations(e, 2))
        self.name = name

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pattern):
            return NotImplemented
        return self.vertex_count == other.vertex_count and self.edges == other.edges

    def __repr__(self) -> str:
        tag = f" {self.name!r}" if self.name else ""
        return f"Pattern{tag}(v={self.vertex_count}, e={len(self.edges)})"


def shadow(pattern: Pattern) -> frozenset[Pair]:
    """The shadow of the pattern: all pairs e minus one vertex, e an edge."""
    return pattern.shadow


def blow_up(pattern: Pattern, t: int) -> Pattern:
    """Replace every vertex by t copies.

    Copy s of original u becomes vertex (u-1)*t + s + 1.  A triple of
    copies is an edge exactly when its originals are three distinct
    vertices forming an edge.
    """
    if t < 1:
        raise DomainError(f"blow-up factor must be >= 1, got {t}")
    edges = []
    for u, v, w in pattern.edges:
        for su, sv, sw in itertools.product(range(t), repeat=3):
            edges.append(((u - 1) * t + su + 1,
                          (v - 1) * t + sv + 1,
                          (w - 1) * t + sw + 1))
    name = f"{pattern.name}({t})" if pattern.name else None
    return Pattern(pattern.vertex_count * t, edges, name=name)


_CATALOG: dict[str, tuple[int, tuple[Edge, ...]]] = {
    # Four-vertex cliques and near-cliques, apex of K4minus at vertex 1,
    # plus the five-vertex target whose fifth vertex has a matching link.
    "Fstar": (5, ((1, 2, 3), (1, 2, 4), (1, 3, 4), (1, 2, 5), (3, 4, 5))),
    "K4minus": (4, ((1, 2, 3), (1, 2, 4), (1, 3, 4))),
    "K4": (4, ((1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4))),
    "single_edge": (3, ((1, 2, 3),)),
}


def pattern_catalog(name: str) -> Pattern:
    """Return a named fixed pattern: Fstar, K4minus, K4, or single_edge."""
    entry = _CATALOG.get(name)
    if entry is None:
        raise DomainError(
            f"unknown pattern name {name!r}; known: {', '.join(sorted(_CATALOG))}")
    n, edges = entry
    return Pattern(n, edges, name=name)


@dataclass(frozen=True)
class ReducedMap:
    """A candidate reduced map: lam sends pattern vertices to indices;
    phi sends shadow pairs to (class pair, vertex) references."""

    lam: Mapping[int, int]
    phi: Mapping[Pair, tuple[Pair, int]]
