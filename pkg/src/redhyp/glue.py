"""Glued-configuration search: an all-pairs row preparation and a finder
for a four-index structure made of a near-complete reduced image plus a
fourth constituent edge sharing one vertex.

The configuration lives on indices i1, i2, i3, i4 with vertices
alpha_{jk} in P^{i_j i_k} plus two extra vertices alpha'_{23}, alpha'_{24},
and requires the four constituent edges

    a13 a14 a34,   a12 a13 a23,   a12 a14 a24,   a'23 a'24 a34.

Row preparation here is stronger than the pipeline's: the spine z_k must
admit, for EVERY pair j < k of surviving non-top columns, some y in P^{rj}
making x z_k y a triangle.  Spines are chosen from the largest remaining
column downward; when a pigeonhole leaves no survivors the mandated
arbitrary choice (vertex 0) is taken and flagged degenerate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from ._bits import iter_bits, least_bit
from .core import ReducedHypergraph, Triple, sorted_pair, sorted_triple
from .errors import CapExceeded, DomainError, RowPreparationError
from .pipeline import (PipelineConfig, ProjectionRecord, _max_count_least_arg,
                       covered_vertex)
from .qsystem import (DEFAULT_RAMSEY_EXACT_CAP, CleanResult, QGraphSystem,
                      StageFailure, clean)

DEFAULT_GLUE_ORACLE_CAP = 10 ** 9


@dataclass(frozen=True)
class GlueConfig:
    """Thresholds for the glued-configuration pipeline.

    ladder lists, per row, how many spine columns to secure; it must be
    strictly decreasing.  The asymptotic relation between consecutive
    ladder entries is not enforced; achieved sizes are reported instead.
    """

    eps: Fraction
    delta: Fraction
    ladder: tuple[int, ...]
    ramsey_target_1: int
    ramsey_target_2: int
    min_final_indices: int = 3
    ramsey_exact_cap: int = DEFAULT_RAMSEY_EXACT_CAP

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "ladder", tuple(int(x) for x in self.ladder))
        if not self.ladder:
            raise DomainError("ladder must have at least one entry")
        if any(x < 1 for x in self.ladder):
            raise DomainError(f"ladder entries must be >= 1, got {self.ladder}")
        if any(a <= b for a, b in zip(self.ladder, self.ladder[1:])):
            raise DomainError(f"ladder must be strictly decreasing, got {self.ladder}")
        # Cleaning parameters are shared with the pipeline configuration.
        self._clean_config  # validates eps/delta/targets

    @property
    def _clean_config(self) -> PipelineConfig:
        return PipelineConfig(
            eps=self.eps, delta=self.delta,
            ramsey_target_1=self.ramsey_target_1,
            ramsey_target_2=self.ramsey_target_2,
            min_final_indices=self.min_final_indices,
            ramsey_exact_cap=self.ramsey_exact_cap)


@dataclass(frozen=True)
class GlueRowRecord:
    """One all-pairs row: spine[k] = z_k; witnesses[(j, k)] = y making
    x z_k y a triangle, present for every pair j < k of surviving
    non-top columns; degenerate lists spines picked arbitrarily."""

    index: int
    row_index: int
    source: tuple[int, ...]
    surviving: tuple[int, ...]
    r_next: int
    apex: int
    spine: dict[int, int]
    witnesses: dict[tuple[int, int], int]
    degenerate: tuple[int, ...]
    apex_hits: int
    target: int
    achieved: int


@dataclass(frozen=True)
class GluedConfiguration:
    """indices = (i1, i2, i3, i4) role labels, not necessarily sorted;
    alpha maps role pairs to class vertices; the primed vertices give a
    second, partly independent edge through alpha[(3, 4)]."""

    indices: tuple[int, int, int, int]
    alpha: dict[tuple[int, int], int]
    alpha23_prime: int
    alpha24_prime: int

    def class_of(self, j: int, k: int) -> tuple[int, int]:
        return sorted_pair(self.indices[j - 1], self.indices[k - 1])


@dataclass
class GlueResult:
    ok: bool
    configuration: GluedConfiguration | None
    failure: StageFailure | None
    clean: CleanResult | None
    rows: list[GlueRowRecord] = field(default_factory=list)
    projections: list[ProjectionRecord] = field(default_factory=list)
    pigeonhole: dict | None = None
    trace: list[str] = field(default_factory=list)


def _config_edges(host: ReducedHypergraph, cfg: GluedConfiguration):
    """The four (triple, edge) constituent memberships the configuration claims."""
    i1, i2, i3, i4 = cfg.indices
    a = cfg.alpha
    claims = [
        ((i1, i3, i4), {sorted_pair(i1, i3): a[(1, 3)],
                        sorted_pair(i1, i4): a[(1, 4)],
                        sorted_pair(i3, i4): a[(3, 4)]}),
        ((i1, i2, i3), {sorted_pair(i1, i2): a[(1, 2)],
                        sorted_pair(i1, i3): a[(1, 3)],
                        sorted_pair(i2, i3): a[(2, 3)]}),
        ((i1, i2, i4), {sorted_pair(i1, i2): a[(1, 2)],
                        sorted_pair(i1, i4): a[(1, 4)],
                        sorted_pair(i2, i4): a[(2, 4)]}),
        ((i2, i3, i4), {sorted_pair(i2, i3): cfg.alpha23_prime,
                        sorted_pair(i2, i4): cfg.alpha24_prime,
                        sorted_pair(i3, i4): a[(3, 4)]}),
    ]
    out = []
    for raw_triple, by_class in claims:
        t = sorted_triple(*raw_triple)
        slot_pairs = ((t[0], t[1]), (t[0], t[2]), (t[1], t[2]))
        edge = tuple(by_class[sp] for sp in slot_pairs)
        out.append((t, edge))
    return out


def validate_glued(host: ReducedHypergraph,
                   cfg: GluedConfiguration) -> tuple[bool, str | None]:
    """Check the four constituent-edge memberships by direct lookup."""
    i1, i2, i3, i4 = cfg.indices
    if len({i1, i2, i3, i4}) != 4:
        return False, f"indices {cfg.indices} are not distinct"
    for idx in cfg.indices:
        if not (1 <= idx <= host.index_count):
            raise DomainError(f"index {idx} outside host range")
    for (j, k), vert in sorted(cfg.alpha.items()):
        cls = cfg.class_of(j, k)
        if not (0 <= vert < host.class_size(*cls)):
            raise DomainError(f"alpha({j},{k}) = {vert} outside class P^{cls}")
    for vert, cls in ((cfg.alpha23_prime, cfg.class_of(2, 3)),
                      (cfg.alpha24_prime, cfg.class_of(2, 4))):
        if not (0 <= vert < host.class_size(*cls)):
            raise DomainError(f"primed vertex {vert} outside class P^{cls}")
    for t, edge in _config_edges(host, cfg):
        if not host.constituent(t).has(*edge):
            return False, f"missing edge {edge} in constituent A^{t}"
    return True, None


def prepare_row_glue(system: QGraphSystem, working: Sequence[int], top: int,
                     m2_target: int, round_index: int = 1) -> GlueRowRecord:
    """Prepare one all-pairs row, securing m2_target spine columns.

    Columns are taken largest-first; each spine choice pigeonholes the
    remaining candidates.  Structured failures name the step that broke;
    a final spine with an empty pigeonhole is chosen arbitrarily (vertex
    0) and flagged degenerate.  On success the all-pairs triangle property
    is re-verified pairwise by direct lookups.
    """
    if system.r_star is None or system.delta is None or system.s_sets is None:
        raise DomainError("prepare_row_glue needs a cleaned QGraphSystem")
    if m2_target < 1:
        raise DomainError(f"m2_target must be >= 1, got {m2_target}")
    working = sorted(set(working))
    if len(working) < 3:
        raise DomainError(f"index set must have >= 3 elements, got {working}")
    if top not in working or top != max(working):
        raise DomainError(f"top index {top} must be the maximum of {working}")
    r = working[0]
    r_star = system.r_star
    middle = [j for j in working if j not in (r, top)]

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
    a_sets = {j: system.q_low[(r, j, top)].right_adj[apex] for j in i_prime}

    chosen: list[int] = []
    spine: dict[int, int] = {}
    degenerate: list[int] = []
    candidates = list(i_prime)
    for step in range(1, m2_target + 1):
        if not candidates:
            raise RowPreparationError(
                f"spine-step-{step}",
                f"no candidate columns remain (secured {len(chosen)} of {m2_target})")
        k = max(candidates)
        candidates.remove(k)
        a_k = a_sets[k]
        d_bits = []
        others = list(candidates)  # all smaller than k, which was the maximum
        for j in others:
            link = system.q_low[(r, j, k)]  # left P^{rj}, right P^{rk}
            bits = 0
            for z in iter_bits(a_k):
                if link.right_adj[z] & a_sets[j]:
                    bits |= 1 << z
            d_bits.append(bits)
        if a_k == 0 or not others:
            z_k = least_bit(a_k) if a_k else 0
            if a_k == 0:
                degenerate.append(k)
            kept: list[int] = []
        else:
            count, z_k = _max_count_least_arg(list(iter_bits(a_k)), d_bits)
            if count <= 0:
                degenerate.append(k)
                z_k = least_bit(a_k)
                kept = []
            else:
                kept = [j for j, bits in zip(others, d_bits) if bits >> z_k & 1]
        chosen.append(k)
        spine[k] = z_k
        candidates = kept

    surviving = sorted(chosen + [top])
    witnesses: dict[tuple[int, int], int] = {}
    non_top = [j for j in surviving if j != top]
    for j, k in itertools.combinations(non_top, 2):
        z_k = spine[k]
        link_jk = system.q_low[(r, j, k)]       # left P^{rj}, right P^{rk}
        options = link_jk.right_adj[z_k] & a_sets[j]
        if options == 0:
            raise RowPreparationError(
                "all-pairs-verify",
                f"pair ({j}, {k}) has no triangle witness despite the pigeonholes")
        witnesses[(j, k)] = least_bit(options)
    record = GlueRowRecord(
        index=round_index, row_index=r, source=tuple(working),
        surviving=tuple(surviving), r_next=min(surviving), apex=apex,
        spine=spine, witnesses=witnesses, degenerate=tuple(degenerate),
        apex_hits=len(i_prime), target=m2_target, achieved=len(chosen))
    _verify_row_glue(system, record, top)
    return record


def _verify_row_glue(system: QGraphSystem, row: GlueRowRecord, top: int) -> None:
    """The witnessed triangles must exist by direct adjacency lookups."""
    r, x = row.row_index, row.apex
    for (j, k), y in row.witnesses.items():
        if not system.q_low[(r, j, top)].has(y, x):
            raise RuntimeError(f"row {row.index}: apex edge missing at column {j}")
        if not system.q_low[(r, k, top)].has(row.spine[k], x):
            raise RuntimeError(f"row {row.index}: apex edge missing at column {k}")
        if not system.q_low[(r, j, k)].has(y, row.spine[k]):
            raise RuntimeError(f"row {row.index}: witness edge missing for ({j}, {k})")


def find_glued(host: ReducedHypergraph, config: GlueConfig,
               threads: int = 1) -> GlueResult:
    """Clean, run the ladder of all-pairs rows, pigeonhole two projections,
    and return a validated glued configuration or a structured failure."""
    trace: list[str] = []
    cleaned = clean(host, config._clean_config, threads=threads)
    trace.extend(f"clean {line}" for line in cleaned.log)
    if not cleaned.ok:
        trace.append(f"fail {cleaned.failure.stage}")
        return GlueResult(False, None, cleaned.failure, cleaned, trace=trace)
    system = cleaned.system
    work = system.host
    top = work.index_count

    rows: list[GlueRowRecord] = []
    current = list(range(1, top + 1))
    for t, target in enumerate(config.ladder, start=1):
        if len(current) < 3:
            failure = StageFailure(f"row-{t}", f"index set exhausted: {current}")
            trace.append(f"fail {failure.stage}")
            return GlueResult(False, None, failure, cleaned, rows, trace=trace)
        try:
            row = prepare_row_glue(system, current, top, target, round_index=t)
        except RowPreparationError as exc:
            failure = StageFailure(f"row-{t}", f"{exc.step}: {exc.reason}")
            trace.append(f"fail {failure.stage}")
            return GlueResult(False, None, failure, cleaned, rows, trace=trace)
        rows.append(row)
        trace.append(f"row {t} r={row.row_index} x={row.apex} "
                     f"J={list(row.surviving)} degenerate={list(row.degenerate)}")
        current = list(row.surviving)

    if len(current) < config.min_final_indices:
        failure = StageFailure(
            "final-index-set",
            f"final set {current} smaller than {config.min_final_indices}")
        trace.append(f"fail {failure.stage}")
        return GlueResult(False, None, failure, cleaned, rows, trace=trace)
    m_prime = max(j for j in current if j != top)
    trace.append(f"m-prime {m_prime}")

    projections: list[ProjectionRecord] = []
    for row in rows:
        if m_prime not in row.spine:
            failure = StageFailure(
                "projection", f"row {row.index} lacks a spine vertex at {m_prime}")
            trace.append(f"fail {failure.stage}")
            return GlueResult(False, None, failure, cleaned, rows, trace=trace)
        r, z = row.row_index, row.spine[m_prime]
        con = work.constituent((r, m_prime, top))
        members = tuple(iter_bits(con.comp01[z * con.sizes[1] + row.apex]))
        meets = Fraction(len(members)) >= system.eps ** 2 * work.class_size(m_prime, top)
        projections.append(ProjectionRecord(row=row.index, edge=(row.apex, z),
                                            m_prime=m_prime, members=members,
                                            meets_eps_bound=meets))
        trace.append(f"projection {row.index} size={len(members)}")

    hit = covered_vertex(work.class_size(m_prime, top),
                         [p.members for p in projections], 2)
    if hit is None:
        failure = StageFailure(
            "pigeonhole", "no completion vertex shared by two projections")
        trace.append(f"fail {failure.stage}")
        return GlueResult(False, None, failure, cleaned, rows, projections,
                          trace=trace)
    v, covering = hit
    ri, rj = covering[0], covering[1]
    trace.append(f"pigeonhole v={v} rows={[ri + 1, rj + 1]}")
    pigeonhole = {"vertex": v, "rows": (ri + 1, rj + 1)}

    row_i, row_j = rows[ri], rows[rj]
    r_i, r_j = row_i.row_index, row_j.row_index
    x_i, z_im = row_i.apex, row_i.spine[m_prime]
    pair = (r_j, m_prime)
    if pair not in row_i.witnesses:
        failure = StageFailure(
            "completion-recovery",
            f"row {row_i.index} has no triangle witness for pair {pair}")
        trace.append(f"fail {failure.stage}")
        return GlueResult(False, None, failure, cleaned, rows, projections,
                          pigeonhole, trace)
    y = row_i.witnesses[pair]

    def completion(t: Triple, va: int, vb: int, what: str) -> int:
        con = work.constituent(t)
        bits = con.comp01[va * con.sizes[1] + vb]
        if bits == 0:
            raise RowPreparationError("completion-recovery", f"no completion for {what}")
        return least_bit(bits)

    try:
        u1 = completion((r_i, r_j, top), y, x_i, "apex-witness")
        u2 = completion((r_i, r_j, m_prime), y, z_im, "spine-witness")
    except RowPreparationError as exc:
        failure = StageFailure("completion-recovery", f"{exc.step}: {exc.reason}")
        trace.append(f"fail {failure.stage}")
        return GlueResult(False, None, failure, cleaned, rows, projections,
                          pigeonhole, trace)

    cfg_work = GluedConfiguration(
        indices=(r_i, r_j, top, m_prime),
        alpha={(1, 2): y, (1, 3): x_i, (1, 4): z_im,
               (2, 3): u1, (2, 4): u2, (3, 4): v},
        alpha23_prime=row_j.apex, alpha24_prime=row_j.spine[m_prime])
    ok, why = validate_glued(work, cfg_work)
    if not ok:
        raise RuntimeError(f"assembled configuration invalid on working host: {why}")
    back = system.to_original
    cfg = GluedConfiguration(
        indices=tuple(back[i - 1] for i in cfg_work.indices),
        alpha=dict(cfg_work.alpha),
        alpha23_prime=cfg_work.alpha23_prime,
        alpha24_prime=cfg_work.alpha24_prime)
    ok, why = validate_glued(host, cfg)
    if not ok:
        raise RuntimeError(f"assembled configuration invalid on original host: {why}")
    trace.append("configuration validated")
    return GlueResult(True, cfg, None, cleaned, rows, projections, pigeonhole, trace)


def _role_assignments(subset: tuple[int, int, int, int]):
    """All role assignments up to the 3<->4 symmetry: ordered (i1, i2),
    remaining pair ascending as (i3, i4)."""
    for i1, i2 in itertools.permutations(subset, 2):
        rest = sorted(x for x in subset if x not in (i1, i2))
        yield (i1, i2, rest[0], rest[1])


def brute_force_glued(host: ReducedHypergraph,
                      cap: int = DEFAULT_GLUE_ORACLE_CAP,
                      count_all: bool = True) -> tuple[bool, int]:
    """Enumerate glued configurations naively.

    Counts distinct certificates, a certificate being the set of four
    (triple, edge) memberships; the 3<->4 role symmetry therefore counts
    once, and on a complete host with singleton classes each index
    4-subset contributes exactly one certificate.  Refuses above cap.
    """
    total_space = 0
    subsets = list(itertools.combinations(host.indices(), 4))
    for subset in subsets:
        for i1, i2, i3, i4 in _role_assignments(subset):
            width = 1
            for a, b in itertools.combinations((i1, i2, i3, i4), 2):
                width *= host.class_size(*sorted_pair(a, b))
            width *= host.class_size(*sorted_pair(i2, i3))
            width *= host.class_size(*sorted_pair(i2, i4))
            total_space += width
            if total_space > cap:
                raise CapExceeded(
                    f"glued enumeration space exceeds cap {cap}")

    found = False
    certificates: set[frozenset] = set()
    for subset in subsets:
        for roles in _role_assignments(subset):
            for cfg in _enumerate_configs(host, roles):
                found = True
                if not count_all:
                    return True, 1
                certificates.add(frozenset(_config_edges(host, cfg)))
    return found, len(certificates)


def _enumerate_configs(host: ReducedHypergraph,
                       roles: tuple[int, int, int, int]) -> Iterable[GluedConfiguration]:
    i1, i2, i3, i4 = roles
    s12 = host.class_size(*sorted_pair(i1, i2))
    s13 = host.class_size(*sorted_pair(i1, i3))
    s14 = host.class_size(*sorted_pair(i1, i4))
    s23 = host.class_size(*sorted_pair(i2, i3))
    s24 = host.class_size(*sorted_pair(i2, i4))
    s34 = host.class_size(*sorted_pair(i3, i4))

    def member(t_raw, by_class) -> bool:
        t = sorted_triple(*t_raw)
        slot_pairs = ((t[0], t[1]), (t[0], t[2]), (t[1], t[2]))
        edge = tuple(by_class[sp] for sp in slot_pairs)
        return host.constituent(t).has(*edge)

    for a12 in range(s12):
        for a13 in range(s13):
            for a23 in range(s23):
                if not member((i1, i2, i3), {sorted_pair(i1, i2): a12,
                                             sorted_pair(i1, i3): a13,
                                             sorted_pair(i2, i3): a23}):
                    continue
                for a14 in range(s14):
                    for a24 in range(s24):
                        if not member((i1, i2, i4), {sorted_pair(i1, i2): a12,
                                                     sorted_pair(i1, i4): a14,
                                                     sorted_pair(i2, i4): a24}):
                            continue
                        for a34 in range(s34):
                            if not member((i1, i3, i4), {sorted_pair(i1, i3): a13,
                                                         sorted_pair(i1, i4): a14,
                                                         sorted_pair(i3, i4): a34}):
                                continue
                            for p23 in range(s23):
                                for p24 in range(s24):
                                    if member((i2, i3, i4),
                                              {sorted_pair(i2, i3): p23,
                                               sorted_pair(i2, i4): p24,
                                               sorted_pair(i3, i4): a34}):
                                        yield GluedConfiguration(
                                            indices=roles,
                                            alpha={(1, 2): a12, (1, 3): a13,
                                                   (1, 4): a14, (2, 3): a23,
                                                   (2, 4): a24, (3, 4): a34},
                                            alpha23_prime=p23,
                                            alpha24_prime=p24)
