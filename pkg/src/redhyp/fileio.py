"""Text formats for hosts, patterns, and plain 3-graphs.

Host files are line oriented:

    M <index_count>
    P <i> <j> <size>            one line per pair, i < j
    E <i> <j> <k> <a> <b> <c>   one line per constituent edge, i < j < k,
                                a in P^{ij}, b in P^{ik}, c in P^{jk}

Pattern and plain-graph files share one format:

    V <n>
    T <u> <v> <w>               one line per triple

Blank lines and lines starting with '#' are ignored.  Malformed or
out-of-range lines raise ParseError with the line number.  Writers emit a
canonical form: P lines then E lines, each sorted lexicographically.
"""

from __future__ import annotations

import hashlib

from .core import Pattern, ReducedHypergraph
from .errors import ParseError
from .plain import Plain3Graph


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()


def _ints(lineno: int, parts: list[str], expect: int, what: str) -> list[int]:
    if len(parts) != expect:
        raise ParseError(lineno, f"{what} line needs {expect} fields, got {len(parts)}")
    out = []
    for p in parts:
        try:
            out.append(int(p))
        except ValueError:
            raise ParseError(lineno, f"{what} line has non-integer field {p!r}") from None
    return out


def parse_host(text: str) -> ReducedHypergraph:
    m = None
    sizes: dict[tuple[int, int], int] = {}
    cons: dict[tuple[int, int, int], list[tuple[int, int, int]]] = {}
    edge_seen: set[tuple] = set()
    for lineno, parts in _tokens(text):
        tag = parts[0]
        if tag == "M":
            if m is not None:
                raise ParseError(lineno, "duplicate M line")
            (m,) = _ints(lineno, parts[1:], 1, "M")
            if m < 2:
                raise ParseError(lineno, f"index count must be >= 2, got {m}")
        elif tag == "P":
            if m is None:
                raise ParseError(lineno, "P line before M line")
            i, j, s = _ints(lineno, parts[1:], 3, "P")
            if not (1 <= i < j <= m):
                raise ParseError(lineno, f"pair ({i}, {j}) not sorted within 1..{m}")
            if (i, j) in sizes:
                raise ParseError(lineno, f"duplicate P line for pair ({i}, {j})")
            if s < 1:
                raise ParseError(lineno, f"class size must be >= 1, got {s}")
            sizes[(i, j)] = s
        elif tag == "E":
            if m is None:
                raise ParseError(lineno, "E line before M line")
            i, j, k, a, b, c = _ints(lineno, parts[1:], 6, "E")
            if not (1 <= i < j < k <= m):
                raise ParseError(lineno, f"triple ({i}, {j}, {k}) not sorted within 1..{m}")
            for (x, y), v in (((i, j), a), ((i, k), b), ((j, k), c)):
                if (x, y) not in sizes:
                    raise ParseError(lineno, f"E line uses pair ({x}, {y}) with no P line")
                if not (0 <= v < sizes[(x, y)]):
                    raise ParseError(
                        lineno, f"vertex {v} out of range for class P^{{{x},{y}}} "
                        f"of size {sizes[(x, y)]}")
            key = (i, j, k, a, b, c)
            if key in edge_seen:
                raise ParseError(lineno, f"duplicate edge {key}")
            edge_seen.add(key)
            cons.setdefault((i, j, k), []).append((a, b, c))
        else:
            raise ParseError(lineno, f"unknown line tag {tag!r}")
    if m is None:
        raise ParseError(1, "missing M line")
    missing = [p for p in
               ((i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1))
               if p not in sizes]
    if missing:
        raise ParseError(1, f"missing P line for pair {missing[0]}")
    return ReducedHypergraph(m, sizes, cons)


def write_host(host: ReducedHypergraph) -> str:
    lines = [f"M {host.index_count}"]
    for i, j in host.pairs():
        lines.append(f"P {i} {j} {host.class_size(i, j)}")
    for t in host.triples():
        for a, b, c in sorted(host.edges(t)):
            lines.append(f"E {t[0]} {t[1]} {t[2]} {a} {b} {c}")
    return "\n".join(lines) + "\n"


def _parse_vertex_triples(text: str) -> tuple[int, list[tuple[int, int, int]]]:
    n = None
    triples: list[tuple[int, int, int]] = []
    seen: set[tuple[int, int, int]] = set()
    for lineno, parts in _tokens(text):
        tag = parts[0]
        if tag == "V":
            if n is not None:
                raise ParseError(lineno, "duplicate V line")
            (n,) = _ints(lineno, parts[1:], 1, "V")
            if n < 1:
                raise ParseError(lineno, f"vertex count must be >= 1, got {n}")
        elif tag == "T":
            if n is None:
                raise ParseError(lineno, "T line before V line")
            u, v, w = _ints(lineno, parts[1:], 3, "T")
            if len({u, v, w}) != 3:
                raise ParseError(lineno, f"triple ({u}, {v}, {w}) has repeated vertices")
            if not all(1 <= x <= n for x in (u, v, w)):
                raise ParseError(lineno, f"triple ({u}, {v}, {w}) out of range 1..{n}")
            key = tuple(sorted((u, v, w)))
            if key in seen:
                raise ParseError(lineno, f"duplicate triple {key}")
            seen.add(key)
            triples.append(key)
        else:
            raise ParseError(lineno, f"unknown line tag {tag!r}")
    if n is None:
        raise ParseError(1, "missing V line")
    return n, triples


def parse_pattern(text: str) -> Pattern:
    n, triples = _parse_vertex_triples(text)
    return Pattern(n, triples)


def write_pattern(pattern: Pattern) -> str:
    lines = [f"V {pattern.vertex_count}"]
    for u, v, w in sorted(pattern.edges):
        lines.append(f"T {u} {v} {w}")
    return "\n".join(lines) + "\n"


def parse_plain3(text: str) -> Plain3Graph:
    n, triples = _parse_vertex_triples(text)
    return Plain3Graph(n, triples)


def write_plain3(graph: Plain3Graph) -> str:
    lines = [f"V {graph.vertex_count}"]
    for u, v, w in sorted(graph.edges):
        lines.append(f"T {u} {v} {w}")
    return "\n".join(lines) + "\n"


def host_digest(host: ReducedHypergraph) -> str:
    """sha256 of the canonical serialization; stable across formatting."""
    return hashlib.sha256(write_host(host).encode()).hexdigest()


def pattern_digest(pattern: Pattern) -> str:
    return hashlib.sha256(write_pattern(pattern).encode()).hexdigest()


def plain3_digest(graph: Plain3Graph) -> str:
    return hashlib.sha256(write_plain3(graph).encode()).hexdigest()
