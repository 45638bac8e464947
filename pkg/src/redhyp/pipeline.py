"""Row-preparation pipeline: clean the host, iterate rows, pigeonhole the
projections, and assemble a verified reduced image of the five-vertex
target pattern.

One row picks, inside the working index set I with smallest element r and
top element m, an apex x in P^{rm} lying in many S-sets, a connector y in
P^{rr'} covered by many triangle projections, and spine vertices z_j so
that every x z_j y is a triangle in the union of r's low Q-graphs.  Each
row shrinks I; after all rounds, each row contributes an edge whose
completion set projects into P^{m'm}, and a vertex covered by three of
those sets stitches the rows into the final map.

Every tie is broken lexicographic-least among maximizers, so runs are
deterministic.  Stage failures are structured results, never crashes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ._bits import iter_bits, least_bit
from .core import Pattern, ReducedHypergraph, ReducedMap, Triple, pattern_catalog, sorted_pair
from .embed import EmbedCertificate, validate_reduced_map
from .errors import DomainError, RowPreparationError
from .qsystem import (DEFAULT_RAMSEY_EXACT_CAP, CleanResult, QGraphSystem,
                      StageFailure, clean)


def _ceil_fraction(x: Fraction) -> int:
    return -(-x.numerator // x.denominator)


@dataclass(frozen=True)
class PipelineConfig:
    """Explicit desk-scale thresholds; every quantity is a named parameter.

    rounds defaults to ceil(2 / eps^2) + 1; the two Ramsey targets default
    to the host's full index count when the caller leaves them at 0 (the
    CLI fills them in from the host).
    """

    eps: Fraction
    delta: Fraction
    ramsey_target_1: int
    ramsey_target_2: int
    rounds: int | None = None
    min_final_indices: int = 3
    ramsey_exact_cap: int = DEFAULT_RAMSEY_EXACT_CAP

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if not (0 < self.eps < 1):
            raise DomainError(f"eps must lie in (0, 1), got {self.eps}")
        if not (0 < self.delta < self.eps):
            raise DomainError(
                f"delta must lie in (0, eps), got delta={self.delta}, eps={self.eps}")
        if self.min_final_indices < 3:
            raise DomainError(
                f"min_final_indices must be >= 3, got {self.min_final_indices}")
        if self.rounds is not None and self.rounds < 1:
            raise DomainError(f"rounds must be >= 1, got {self.rounds}")
        if self.ramsey_target_2 < self.min_final_indices:
            raise DomainError(
                f"ramsey_target_2 must be >= min_final_indices "
                f"({self.min_final_indices}), got {self.ramsey_target_2}")
        if self.ramsey_target_1 < self.ramsey_target_2:
            raise DomainError(
                f"ramsey_target_1 ({self.ramsey_target_1}) must be >= "
                f"ramsey_target_2 ({self.ramsey_target_2})")

    @property
    def effective_rounds(self) -> int:
        if self.rounds is not None:
            return self.rounds
        return _ceil_fraction(2 / (self.eps * self.eps)) + 1


@dataclass(frozen=True)
class RowRecord:
    """One prepared row.

    row_index is r = min of the source set; r_next = min of the surviving
    set; spine maps each surviving j (other than r_next and the top index)
    to z_j with x z_j y a triangle in the row's Q-graphs.
    """

    index: int
    row_index: int
    source: tuple[int, ...]
    surviving: tuple[int, ...]
    r_next: int
    apex: int
    connector: int
    spine: dict[int, int]
    apex_hits: int
    connector_hits: int
    meets_delta_bound: bool


@dataclass(frozen=True)
class ProjectionRecord:
    row: int
    edge: tuple[int, int]          # (apex, spine vertex at m')
    m_prime: int
    members: tuple[int, ...]
    meets_eps_bound: bool


@dataclass
class PipelineResult:
    ok: bool
    certificate: EmbedCertificate | None
    failure: StageFailure | None
    clean: CleanResult | None
    rows: list[RowRecord] = field(default_factory=list)
    projections: list[ProjectionRecord] = field(default_factory=list)
    pigeonhole: dict | None = None
    trace: list[str] = field(default_factory=list)


def find_many_triangles(system: QGraphSystem, i: int, j1: int, j2: int,
                        k: int, x: int) -> list[tuple[int, int]]:
    """All triangles x y z with y in P^{ij2}, z in P^{ij1} through the
    low Q-graphs of index i.

    Requires i < j1 < j2 < k within the system's host and x in both
    S^i_{j1 k}(r_star) and S^i_{j2 k}(r_star); violations are domain
    errors.  Returns (y, z) pairs sorted lexicographically.
    """
    if not (i < j1 < j2 < k):
        raise DomainError(f"need i < j1 < j2 < k, got {(i, j1, j2, k)}")
    if k > system.host.index_count:
        raise DomainError(f"index {k} outside host range")
    if system.r_star is None:
        raise DomainError("system has not been cleaned")
    r_star = system.r_star
    if x not in system.s_set((i, j1, k), r_star) or \
            x not in system.s_set((i, j2, k), r_star):
        raise DomainError(
            f"x={x} must lie in S^{i}_{{{j1},{k}}} and S^{i}_{{{j2},{k}}} at level {r_star}")
    a_j1 = system.q_low[(i, j1, k)].right_adj[x]
    a_j2 = system.q_low[(i, j2, k)].right_adj[x]
    link = system.q_low[(i, j1, j2)]  # left P^{ij1}, right P^{ij2}
    out = []
    for y in iter_bits(a_j2):
        for z in iter_bits(link.right_adj[y] & a_j1):
            out.append((y, z))
    out.sort()
    return out


def _max_count_least_arg(universe: Sequence[int], bitsets: Sequence[int]) -> tuple[int, int]:
    """(best count, least element achieving it) of membership counts.

    universe holds candidate bit positions; bitsets are the sets counted.
    """
    best_v = -1
    best_count = -1
    for v in universe:
        c = sum(bits >> v & 1 for bits in bitsets)
        if c > best_count:
            best_count = c
            best_v = v
    return best_count, best_v


def prepare_row(system: QGraphSystem, working: Sequence[int], top: int,
                require_size_hypothesis: bool = True,
                round_index: int = 1) -> RowRecord:
    """Prepare one row inside the cleaned system.

    With require_size_hypothesis (the default for direct calls) the input
    set must satisfy |I| > 2 / delta^2; the iterated pipeline runs with
    the check relaxed and reports achieved sizes instead.  Failures of
    the two pigeonhole steps raise RowPreparationError naming the step.
    """
    if system.r_star is None or system.delta is None or system.s_sets is None:
        raise DomainError("prepare_row needs a cleaned QGraphSystem")
    working = sorted(set(working))
    if len(working) < 3:
        raise DomainError(f"index set must have >= 3 elements, got {working}")
    if top not in working or top != max(working):
        raise DomainError(f"top index {top} must be the maximum of {working}")
    delta = system.delta
    if require_size_hypothesis and Fraction(len(working)) <= 2 / (delta * delta):
        raise DomainError(
            f"|I| = {len(working)} does not exceed 2/delta^2 = {2 / (delta * delta)}")
    r = working[0]
    r_star = system.r_star
    middle = [j for j in working if j not in (r, top)]

    # Apex: the P^{rm} vertex lying in the most S^r_{j,top}(r_star).
    size_rm = system.host.class_size(r, top)
    member_bits = []
    for j in middle:
        bits = 0
        for x in system.s_set((r, j, top), r_star):
            bits |= 1 << x
        member_bits.append(bits)
    hit_count, apex = _max_count_least_arg(range(size_rm), member_bits)
    if hit_count <= 0:
        raise RowPreparationError(
            "apex-pigeonhole", "no apex vertex lies in any S-set of the row")
    i_prime = [j for j, bits in zip(middle, member_bits) if bits >> apex & 1]

    r_next = i_prime[0]
    # Neighbourhoods of the apex, one per surviving column.
    a_sets = {j: system.q_low[(r, j, top)].right_adj[apex] for j in i_prime}
    a_rnext = a_sets[r_next]
    if a_rnext == 0:
        raise RowPreparationError(
            "connector-pigeonhole", "apex has no neighbours in the connector class")

    # Connector: the P^{r r_next} vertex triangle-linked to the most columns.
    d_bits = []
    for j in i_prime[1:]:
        link = system.q_low[(r, r_next, j)]  # left P^{r r_next}, right P^{rj}
        bits = 0
        for y in iter_bits(a_rnext):
            if link.left_adj[y] & a_sets[j]:
                bits |= 1 << y
        d_bits.append(bits)
    conn_hits, connector = _max_count_least_arg(list(iter_bits(a_rnext)), d_bits)
    i_dprime = [j for j, bits in zip(i_prime[1:], d_bits) if bits >> connector & 1]

    surviving = sorted(i_dprime + [r_next, top])
    spine = {}
    for j in i_dprime:
        link = system.q_low[(r, r_next, j)]
        choices = link.left_adj[connector] & a_sets[j]
        if choices == 0:
            raise RowPreparationError(
                "spine-selection", f"no triangle completion for column {j}")
        spine[j] = least_bit(choices)

    record = RowRecord(
        index=round_index, row_index=r, source=tuple(working),
        surviving=tuple(surviving), r_next=r_next, apex=apex,
        connector=connector, spine=spine, apex_hits=len(i_prime),
        connector_hits=len(i_dprime),
        meets_delta_bound=Fraction(len(surviving)) >= delta * delta * len(working))
    _verify_row(system, record, top)
    return record


def _verify_row(system: QGraphSystem, row: RowRecord, top: int) -> None:
    """Every reported triangle must exist by direct adjacency lookups."""
    r, x, y = row.row_index, row.apex, row.connector
    rn = row.r_next
    if not system.q_low[(r, rn, top)].has(y, x):
        raise RuntimeError(f"row {row.index}: apex-connector edge missing")
    for j, z in row.spine.items():
        if not system.q_low[(r, j, top)].has(z, x):
            raise RuntimeError(f"row {row.index}: apex-spine edge missing at {j}")
        if not system.q_low[(r, rn, j)].has(y, z):
            raise RuntimeError(f"row {row.index}: connector-spine edge missing at {j}")


def projection_set(system: QGraphSystem, row: RowRecord, m_prime: int,
                   top: int) -> ProjectionRecord:
    """Completions in P^{m' top} of the row's (apex, spine at m') edge."""
    if m_prime not in row.spine:
        raise DomainError(f"row {row.index} has no spine vertex at {m_prime}")
    r = row.row_index
    z = row.spine[m_prime]
    con = system.host.constituent((r, m_prime, top))
    bits = con.comp01[z * con.sizes[1] + row.apex]
    members = tuple(iter_bits(bits))
    size = system.host.class_size(m_prime, top)
    meets = Fraction(len(members)) >= system.eps * system.eps * size
    return ProjectionRecord(row=row.index, edge=(row.apex, z), m_prime=m_prime,
                            members=members, meets_eps_bound=meets)


def covered_vertex(universe_size: int, member_lists: Sequence[Sequence[int]],
                   multiplicity: int) -> tuple[int, list[int]] | None:
    """Least vertex covered by the most member lists, requiring at least
    `multiplicity` of them; returns (vertex, covering list indices)."""
    counts = [0] * universe_size
    for members in member_lists:
        for v in members:
            counts[v] += 1
    best = max(counts, default=0)
    if best < multiplicity:
        return None
    v = counts.index(best)
    rows = [i for i, members in enumerate(member_lists) if v in members]
    return v, rows


def find_fstar(host: ReducedHypergraph, config: PipelineConfig,
               pattern: Pattern | None = None, threads: int = 1) -> PipelineResult:
    """Clean, iterate rows, pigeonhole, and return a validated certificate
    embedding the five-vertex target, or a structured stage failure."""
    if pattern is None:
        pattern = pattern_catalog("Fstar")
    trace: list[str] = []
    cleaned = clean(host, config, threads=threads)
    trace.extend(f"clean {line}" for line in cleaned.log)
    if not cleaned.ok:
        trace.append(f"fail {cleaned.failure.stage}")
        return PipelineResult(False, None, cleaned.failure, cleaned, trace=trace)
    system = cleaned.system
    work = system.host
    top = work.index_count

    rows: list[RowRecord] = []
    current = list(range(1, top + 1))
    rounds = config.effective_rounds
    for t in range(1, rounds + 1):
        if len(current) < 3:
            failure = StageFailure(f"row-{t}", f"index set exhausted: {current}")
            trace.append(f"fail {failure.stage}")
            return PipelineResult(False, None, failure, cleaned, rows, trace=trace)
        try:
            row = prepare_row(system, current, top,
                              require_size_hypothesis=False, round_index=t)
        except RowPreparationError as exc:
            failure = StageFailure(f"row-{t}", f"{exc.step}: {exc.reason}")
            trace.append(f"fail {failure.stage}")
            return PipelineResult(False, None, failure, cleaned, rows, trace=trace)
        rows.append(row)
        trace.append(
            f"row {t} r={row.row_index} x={row.apex} y={row.connector} "
            f"next={row.r_next} J={list(row.surviving)}")
        current = list(row.surviving)

    if len(current) < config.min_final_indices:
        failure = StageFailure(
            "final-index-set",
            f"final set {current} smaller than {config.min_final_indices}")
        trace.append(f"fail {failure.stage}")
        return PipelineResult(False, None, failure, cleaned, rows, trace=trace)
    m_prime = max(j for j in current if j != top)
    trace.append(f"m-prime {m_prime}")

    projections = []
    for row in rows:
        if m_prime not in row.spine:
            failure = StageFailure(
                "projection", f"row {row.index} lacks a spine vertex at {m_prime}")
            trace.append(f"fail {failure.stage}")
            return PipelineResult(False, None, failure, cleaned, rows, trace=trace)
        proj = projection_set(system, row, m_prime, top)
        projections.append(proj)
        trace.append(f"projection {row.index} size={len(proj.members)}")

    universe = work.class_size(m_prime, top)
    hit = covered_vertex(universe, [p.members for p in projections], 3)
    if hit is None:
        failure = StageFailure(
            "pigeonhole", "no completion vertex shared by three projections")
        trace.append(f"fail {failure.stage}")
        return PipelineResult(False, None, failure, cleaned, rows, projections,
                              trace=trace)
    v, covering = hit
    ri, rj, rk = covering[0], covering[1], covering[2]  # 0-based row positions
    trace.append(f"pigeonhole v={v} rows={[ri + 1, rj + 1, rk + 1]}")
    pigeonhole = {"vertex": v, "rows": (ri + 1, rj + 1, rk + 1)}

    try:
        rmap_work = _assemble_map(system, rows, ri, rk, m_prime, top, v)
    except RowPreparationError as exc:
        failure = StageFailure("completion-recovery", f"{exc.step}: {exc.reason}")
        trace.append(f"fail {failure.stage}")
        return PipelineResult(False, None, failure, cleaned, rows, projections,
                              pigeonhole, trace)

    ok, violation = validate_reduced_map(work, pattern, rmap_work)
    if not ok:
        raise RuntimeError(f"assembled map fails validation on working host: {violation}")
    rmap = _unrelabel_map(system, rmap_work)
    ok, violation = validate_reduced_map(host, pattern, rmap)
    if not ok:
        raise RuntimeError(f"assembled map fails validation on original host: {violation}")
    cert = EmbedCertificate(rmap, pattern)
    trace.append("certificate validated")
    return PipelineResult(True, cert, None, cleaned, rows, projections,
                          pigeonhole, trace)


def _completion_vertex(system: QGraphSystem, t: Triple, va: int, vb: int,
                       what: str) -> int:
    con = system.host.constituent(t)
    bits = con.comp01[va * con.sizes[1] + vb]
    if bits == 0:
        raise RowPreparationError("completion-recovery", f"no completion for {what}")
    return least_bit(bits)


def _assemble_map(system: QGraphSystem, rows: Sequence[RowRecord],
                  ri: int, rk: int, m_prime: int, top: int, v: int) -> ReducedMap:
    """Build the ten-vertex map from rows ri and rk (0-based positions)."""
    row_i, row_k = rows[ri], rows[rk]
    r_i, r_ip1 = row_i.row_index, row_i.r_next
    r_k = row_k.row_index
    x_i, y_i = row_i.apex, row_i.connector
    z_im = row_i.spine[m_prime]
    if r_k not in row_i.spine:
        raise RowPreparationError("completion-recovery",
                                  f"row {row_i.index} lacks a spine vertex at {r_k}")
    z_irk = row_i.spine[r_k]
    x_k = row_k.apex
    z_km = row_k.spine[m_prime]

    u1 = _completion_vertex(system, (r_i, r_ip1, top), y_i, x_i, "apex-connector")
    u2 = _completion_vertex(system, (r_i, r_ip1, m_prime), y_i, z_im, "m'-spine-connector")
    u3 = _completion_vertex(system, (r_i, r_ip1, r_k), y_i, z_irk, "r_k-spine-connector")

    lam = {1: r_i, 2: r_ip1, 3: top, 4: m_prime, 5: r_k}
    phi = {
        (1, 2): (sorted_pair(r_i, r_ip1), y_i),
        (1, 3): (sorted_pair(r_i, top), x_i),
        (1, 4): (sorted_pair(r_i, m_prime), z_im),
        (1, 5): (sorted_pair(r_i, r_k), z_irk),
        (2, 3): (sorted_pair(r_ip1, top), u1),
        (2, 4): (sorted_pair(r_ip1, m_prime), u2),
        (2, 5): (sorted_pair(r_ip1, r_k), u3),
        (3, 4): (sorted_pair(m_prime, top), v),
        (3, 5): (sorted_pair(r_k, top), x_k),
        (4, 5): (sorted_pair(r_k, m_prime), z_km),
    }
    return ReducedMap(lam=lam, phi=phi)


def _unrelabel_map(system: QGraphSystem, rmap: ReducedMap) -> ReducedMap:
    """Translate a working-host map back to original index labels.

    Class vertices keep their numbering; only index labels change.
    """
    back = system.to_original
    lam = {u: back[i - 1] for u, i in rmap.lam.items()}
    phi = {}
    for pair, ((i, j), vert) in rmap.phi.items():
        phi[pair] = (sorted_pair(back[i - 1], back[j - 1]), vert)
    return ReducedMap(lam=lam, phi=phi)
