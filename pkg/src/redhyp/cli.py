"""Unified command line: density checks, embedding search and oracle,
the row pipeline, glued configurations, generators, and audits.

Reports are line-oriented "key value" pairs on stdout (or --report FILE).
Rationals are always written a/b; decimals are rejected.  Exit codes:
0 success/found, 1 legitimate negative, 2 resource exhaustion, 3 input
error.  Under --deterministic, reports carry no timing lines and are
byte-identical across runs at --threads 1.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import fileio
from .constructions import (RNG_ALGORITHM, cyclic_triple_3graph,
                            orientation_reduced, random_box_dense,
                            random_tournament, reduced_blow_up)
from .core import (Pattern, ReducedHypergraph, ReducedMap, constituent_density,
                   is_box_dense, pattern_catalog)
from .embed import exhaustive_oracle, find_reduced_image
from .errors import CapExceeded, DomainError, ParseError, RedhypError
from .glue import GlueConfig, GluedConfiguration, brute_force_glued, find_glued
from .pipeline import PipelineConfig, find_fstar
from .plain import uniform_density_audit

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_EXHAUSTED = 2
EXIT_INPUT = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{message}\n{self.format_usage()}")


def parse_fraction(text: str) -> Fraction:
    """Parse 'a/b' or a bare integer; decimal notation is rejected."""
    text = text.strip()
    if "." in text:
        raise DomainError(f"rationals must be written a/b, got {text!r}")
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"bad rational {text!r}: {exc}") from None


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def certificate_lines(rmap: ReducedMap) -> list[str]:
    lines = [f"L {u} {rmap.lam[u]}" for u in sorted(rmap.lam)]
    for (u, v), ((i, j), a) in sorted(rmap.phi.items()):
        lines.append(f"F {u} {v} {i} {j} {a}")
    return lines


def parse_certificate(text: str) -> ReducedMap:
    lam: dict[int, int] = {}
    phi: dict[tuple[int, int], tuple[tuple[int, int], int]] = {}
    for raw in text.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "L" and len(parts) == 3:
            lam[int(parts[1])] = int(parts[2])
        elif parts[0] == "F" and len(parts) == 6:
            u, v, i, j, a = map(int, parts[1:])
            phi[(u, v)] = ((i, j), a)
    return ReducedMap(lam=lam, phi=phi)


def glued_lines(cfg: GluedConfiguration) -> list[str]:
    lines = ["G-indices " + " ".join(str(i) for i in cfg.indices)]
    for (j, k), v in sorted(cfg.alpha.items()):
        lines.append(f"G {j} {k} {v}")
    lines.append(f"G-prime 2 3 {cfg.alpha23_prime}")
    lines.append(f"G-prime 2 4 {cfg.alpha24_prime}")
    return lines


def parse_glued(text: str) -> GluedConfiguration:
    indices = None
    alpha: dict[tuple[int, int], int] = {}
    primes: dict[tuple[int, int], int] = {}
    for raw in text.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "G-indices" and len(parts) == 5:
            indices = tuple(int(x) for x in parts[1:])
        elif parts[0] == "G" and len(parts) == 4:
            alpha[(int(parts[1]), int(parts[2]))] = int(parts[3])
        elif parts[0] == "G-prime" and len(parts) == 4:
            primes[(int(parts[1]), int(parts[2]))] = int(parts[3])
    if indices is None or len(alpha) != 6 or set(primes) != {(2, 3), (2, 4)}:
        raise DomainError("incomplete glued-configuration lines")
    return GluedConfiguration(indices=indices, alpha=alpha,
                              alpha23_prime=primes[(2, 3)],
                              alpha24_prime=primes[(2, 4)])


def _read_host(path: str) -> ReducedHypergraph:
    return fileio.parse_host(Path(path).read_text())


def _read_pattern(value: str) -> Pattern:
    if Path(value).is_file():
        return fileio.parse_pattern(Path(value).read_text())
    return pattern_catalog(value)


def _pattern_label(value: str, pattern: Pattern) -> str:
    if pattern.name:
        return pattern.name
    return f"sha256:{fileio.pattern_digest(pattern)}"


def build_parser() -> _Parser:
    parser = _Parser(prog="redhyp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", help="write the report to this file")
        p.add_argument("--deterministic", action="store_true",
                       help="suppress timing lines for reproducible reports")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("density", help="check (d, box)-density of a host")
    p.add_argument("--host", required=True)
    p.add_argument("--d", required=True)
    common(p)

    p = sub.add_parser("find", help="search for a reduced image of a pattern")
    p.add_argument("--host", required=True)
    p.add_argument("--pattern", required=True,
                   help="catalog name (Fstar, K4minus, K4, single_edge) or file")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--count-all", action="store_true")
    common(p)

    p = sub.add_parser("oracle", help="exhaustively count reduced images")
    p.add_argument("--host", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--cap", type=int, default=10 ** 9)
    common(p)

    p = sub.add_parser("pipeline", help="clean, prepare rows, and embed the five-vertex target")
    p.add_argument("--host", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--delta", required=True)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--m-star", type=int, default=None, dest="m_star")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--min-final", type=int, default=3, dest="min_final")
    p.add_argument("--trace", help="write the stage trace to this file")
    common(p)

    p = sub.add_parser("glue", help="clean, prepare all-pairs rows, and build a glued configuration")
    p.add_argument("--host", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--delta", required=True)
    p.add_argument("--ladder", required=True,
                   help="comma-separated decreasing spine targets, e.g. 5,4,3")
    p.add_argument("--m-star", type=int, default=None, dest="m_star")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--min-final", type=int, default=3, dest="min_final")
    p.add_argument("--trace")
    common(p)

    p = sub.add_parser("glue-oracle", help="brute-force glued configurations")
    p.add_argument("--host", required=True)
    p.add_argument("--cap", type=int, default=10 ** 9)
    common(p)

    p = sub.add_parser("gen", help="generate hosts, tournaments, and blow-ups")
    p.add_argument("--kind", required=True,
                   choices=("random", "orientation", "blowup", "tournament3"))
    p.add_argument("--m", type=int)
    p.add_argument("--class-size", type=int, default=2, dest="class_size")
    p.add_argument("--d")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int)
    p.add_argument("--host", help="input host for --kind blowup")
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--out", help="output file ('-' or omitted: write to stdout)")
    common(p)

    p = sub.add_parser("audit", help="audit uniform density of a plain 3-graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--d", required=True)
    p.add_argument("--eta", required=True)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", help="comma-separated subset sizes for sampling")
    p.add_argument("--cap", type=int, default=20)
    common(p)

    return parser


def _finish(args, lines: list[str], code: int, started: float) -> tuple[int, str]:
    if not getattr(args, "deterministic", False):
        lines.append(f"wall-ms {int((time.perf_counter() - started) * 1000)}")
    lines.append(f"exit {code}")
    text = "\n".join(lines) + "\n"
    return code, text


def _cmd_density(args, started) -> tuple[int, str]:
    host = _read_host(args.host)
    d = parse_fraction(args.d)
    lines = ["command density",
             f"host sha256:{fileio.host_digest(host)}",
             f"d {format_fraction(d)}"]
    ok, witness = is_box_dense(host, d)
    if ok:
        lines.append("outcome dense")
        return _finish(args, lines, EXIT_OK, started)
    lines.append("outcome not-dense")
    lines.append(f"witness {witness[0]} {witness[1]} {witness[2]}")
    lines.append(f"witness-density {format_fraction(constituent_density(host, witness))}")
    return _finish(args, lines, EXIT_NEGATIVE, started)


def _cmd_find(args, started) -> tuple[int, str]:
    host = _read_host(args.host)
    pattern = _read_pattern(args.pattern)
    lines = ["command find",
             f"host sha256:{fileio.host_digest(host)}",
             f"pattern {_pattern_label(args.pattern, pattern)}",
             f"budget {args.budget if args.budget is not None else 'none'}",
             f"count-all {'true' if args.count_all else 'false'}",
             f"threads {args.threads}",
             f"deterministic {'true' if args.deterministic else 'false'}"]
    result = find_reduced_image(host, pattern, budget=args.budget,
                                count_all=args.count_all,
                                deterministic=args.deterministic,
                                threads=args.threads)
    lines.append(f"outcome {result.status}")
    lines.append(f"nodes {result.nodes}")
    if result.count is not None:
        lines.append(f"count {result.count}")
    if result.certificate is not None:
        lines.extend(certificate_lines(result.certificate.rmap))
    code = {"found": EXIT_OK, "not-found": EXIT_NEGATIVE,
            "budget-exhausted": EXIT_EXHAUSTED}[result.status]
    return _finish(args, lines, code, started)


def _cmd_oracle(args, started) -> tuple[int, str]:
    host = _read_host(args.host)
    pattern = _read_pattern(args.pattern)
    lines = ["command oracle",
             f"host sha256:{fileio.host_digest(host)}",
             f"pattern {_pattern_label(args.pattern, pattern)}",
             f"cap {args.cap}"]
    result = exhaustive_oracle(host, pattern, cap=args.cap)
    lines.append(f"outcome {'found' if result.found else 'not-found'}")
    lines.append(f"count {result.count}")
    lines.append(f"leaves {result.leaves}")
    return _finish(args, lines, EXIT_OK if result.found else EXIT_NEGATIVE, started)


def _pipeline_config(args, host) -> PipelineConfig:
    m_star = args.m_star if args.m_star is not None else host.index_count
    m = args.m if args.m is not None else m_star
    return PipelineConfig(eps=parse_fraction(args.eps),
                          delta=parse_fraction(args.delta),
                          ramsey_target_1=m_star, ramsey_target_2=m,
                          rounds=args.rounds, min_final_indices=args.min_final)


def _cmd_pipeline(args, started) -> tuple[int, str]:
    host = _read_host(args.host)
    config = _pipeline_config(args, host)
    lines = ["command pipeline",
             f"host sha256:{fileio.host_digest(host)}",
             f"eps {format_fraction(config.eps)}",
             f"delta {format_fraction(config.delta)}",
             f"rounds {config.effective_rounds}",
             f"m-star {config.ramsey_target_1}",
             f"m {config.ramsey_target_2}",
             f"min-final {config.min_final_indices}"]
    result = find_fstar(host, config, threads=args.threads)
    if args.trace:
        Path(args.trace).write_text("\n".join(result.trace) + "\n")
    if result.ok:
        lines.append("outcome found")
        system = result.clean.system
        lines.append("surviving " + ",".join(str(i) for i in system.to_original))
        lines.append(f"r-star {system.r_star}")
        for row in result.rows:
            lines.append(f"row {row.index} r={row.row_index} x={row.apex} "
                         f"y={row.connector} next={row.r_next} "
                         f"J={','.join(str(j) for j in row.surviving)}")
        lines.append(f"pigeonhole v={result.pigeonhole['vertex']} "
                     f"rows={','.join(str(r) for r in result.pigeonhole['rows'])}")
        lines.extend(certificate_lines(result.certificate.rmap))
        return _finish(args, lines, EXIT_OK, started)
    lines.append("outcome failure")
    lines.append(f"stage {result.failure.stage}")
    lines.append(f"reason {result.failure.reason}")
    return _finish(args, lines, EXIT_NEGATIVE, started)


def _cmd_glue(args, started) -> tuple[int, str]:
    host = _read_host(args.host)
    try:
        ladder = tuple(int(x) for x in args.ladder.split(","))
    except ValueError:
        raise DomainError(f"bad ladder {args.ladder!r}") from None
    m_star = args.m_star if args.m_star is not None else host.index_count
    m = args.m if args.m is not None else m_star
    config = GlueConfig(eps=parse_fraction(args.eps),
                        delta=parse_fraction(args.delta), ladder=ladder,
                        ramsey_target_1=m_star, ramsey_target_2=m,
                        min_final_indices=args.min_final)
    lines = ["command glue",
             f"host sha256:{fileio.host_digest(host)}",
             f"eps {format_fraction(config.eps)}",
             f"delta {format_fraction(config.delta)}",
             f"ladder {','.join(str(x) for x in config.ladder)}",
             f"m-star {config.ramsey_target_1}",
             f"m {config.ramsey_target_2}"]
    result = find_glued(host, config, threads=args.threads)
    if args.trace:
        Path(args.trace).write_text("\n".join(result.trace) + "\n")
    if result.ok:
        lines.append("outcome found")
        system = result.clean.system
        lines.append("surviving " + ",".join(str(i) for i in system.to_original))
        lines.append(f"r-star {system.r_star}")
        lines.append(f"pigeonhole v={result.pigeonhole['vertex']} "
                     f"rows={','.join(str(r) for r in result.pigeonhole['rows'])}")
        lines.extend(glued_lines(result.configuration))
        return _finish(args, lines, EXIT_OK, started)
    lines.append("outcome failure")
    lines.append(f"stage {result.failure.stage}")
    lines.append(f"reason {result.failure.reason}")
    return _finish(args, lines, EXIT_NEGATIVE, started)


def _cmd_glue_oracle(args, started) -> tuple[int, str]:
    host = _read_host(args.host)
    lines = ["command glue-oracle",
             f"host sha256:{fileio.host_digest(host)}",
             f"cap {args.cap}"]
    found, count = brute_force_glued(host, cap=args.cap)
    lines.append(f"outcome {'found' if found else 'not-found'}")
    lines.append(f"count {count}")
    return _finish(args, lines, EXIT_OK if found else EXIT_NEGATIVE, started)


def _cmd_gen(args, started) -> tuple[int, str]:
    if args.kind == "random":
        if args.m is None or args.d is None:
            raise DomainError("gen --kind random needs --m and --d")
        host = random_box_dense(args.m, args.class_size, parse_fraction(args.d),
                                args.seed)
        payload = fileio.write_host(host)
        digest = fileio.host_digest(host)
    elif args.kind == "orientation":
        if args.m is None:
            raise DomainError("gen --kind orientation needs --m")
        host = orientation_reduced(args.m)
        payload = fileio.write_host(host)
        digest = fileio.host_digest(host)
    elif args.kind == "blowup":
        if args.host is None:
            raise DomainError("gen --kind blowup needs --host")
        host = reduced_blow_up(_read_host(args.host), args.t)
        payload = fileio.write_host(host)
        digest = fileio.host_digest(host)
    else:  # tournament3
        if args.n is None:
            raise DomainError("gen --kind tournament3 needs --n")
        graph = cyclic_triple_3graph(random_tournament(args.n, args.seed))
        payload = fileio.write_plain3(graph)
        digest = fileio.plain3_digest(graph)
    if args.out and args.out != "-":
        Path(args.out).write_text(payload)
        lines = ["command gen", f"kind {args.kind}", f"rng {RNG_ALGORITHM}",
                 f"seed {args.seed}", f"out {args.out}", f"digest sha256:{digest}"]
        return _finish(args, lines, EXIT_OK, started)
    return EXIT_OK, payload


def _cmd_audit(args, started) -> tuple[int, str]:
    graph = fileio.parse_plain3(Path(args.graph).read_text())
    d = parse_fraction(args.d)
    eta = parse_fraction(args.eta)
    mode = "exhaustive" if args.exhaustive or args.samples == 0 else "sampled"
    sizes = None
    if args.sizes:
        sizes = [int(x) for x in args.sizes.split(",")]
    lines = ["command audit",
             f"graph sha256:{fileio.plain3_digest(graph)}",
             f"d {format_fraction(d)}",
             f"eta {format_fraction(eta)}",
             f"mode {mode}"]
    result = uniform_density_audit(graph, d, eta, mode=mode,
                                   samples=args.samples, seed=args.seed,
                                   sizes=sizes, vertex_cap=args.cap,
                                   threads=args.threads)
    lines.append(f"outcome {result.status}")
    lines.append(f"subsets-checked {result.subsets_checked}")
    if result.status == "fail":
        lines.append("witness " + ",".join(str(v) for v in result.witness))
        lines.append(f"deficiency {format_fraction(result.deficiency)}")
        return _finish(args, lines, EXIT_NEGATIVE, started)
    return _finish(args, lines, EXIT_OK, started)


_HANDLERS = {
    "density": _cmd_density,
    "find": _cmd_find,
    "oracle": _cmd_oracle,
    "pipeline": _cmd_pipeline,
    "glue": _cmd_glue,
    "glue-oracle": _cmd_glue_oracle,
    "gen": _cmd_gen,
    "audit": _cmd_audit,
}


def dispatch(argv: list[str]) -> tuple[int, str]:
    """Run one command; returns (exit code, stdout text)."""
    started = time.perf_counter()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return EXIT_INPUT, f"error {exc}\n"
    try:
        code, text = _HANDLERS[args.command](args, started)
    except CapExceeded as exc:
        return EXIT_EXHAUSTED, f"error cap-exceeded: {exc}\n"
    except (ParseError, DomainError) as exc:
        return EXIT_INPUT, f"error {exc}\n"
    except FileNotFoundError as exc:
        return EXIT_INPUT, f"error missing file: {exc.filename}\n"
    except RedhypError as exc:
        return EXIT_INPUT, f"error {exc}\n"
    if getattr(args, "report", None):
        Path(args.report).write_text(text)
        return code, ""
    return code, text


def main(argv: list[str] | None = None) -> int:
    code, text = dispatch(sys.argv[1:] if argv is None else argv)
    if text:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
