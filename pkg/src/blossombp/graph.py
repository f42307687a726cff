"""Problem instances, the text format, and seeded weight perturbation."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable

from .errors import ParseError

#: default width of the per-edge integer noise
DEFAULT_NOISE_RANGE = 1 << 20


@dataclass(frozen=True)
class Edge:
    id: int
    u: int
    v: int
    w: int


@dataclass(frozen=True)
class WeightedGraph:
    """Simple undirected graph on vertices ``0..vertex_count-1`` with integer weights."""

    vertex_count: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("vertex_count must be positive")
        seen = set()
        for i, e in enumerate(self.edges):
            if e.id != i:
                raise ValueError(f"edge ids must be 0..m-1 in order (got {e.id} at {i})")
            if not (0 <= e.u < self.vertex_count and 0 <= e.v < self.vertex_count):
                raise ValueError(f"edge {i} endpoint out of range")
            if e.u == e.v:
                raise ValueError(f"edge {i} is a self-loop")
            key = (min(e.u, e.v), max(e.u, e.v))
            if key in seen:
                raise ValueError(f"duplicate edge ({key[0] + 1},{key[1] + 1})")
            seen.add(key)

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[tuple[int, int, int]]) -> WeightedGraph:
        """Build from 0-based ``(u, v, w)`` triples, numbering edges in order."""
        return cls(vertex_count, tuple(Edge(i, u, v, w) for i, (u, v, w) in enumerate(edges)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in (e.u, e.v))

    def edge_between(self, u: int, v: int) -> Edge | None:
        for e in self.edges:
            if (e.u, e.v) in ((u, v), (v, u)):
                return e
        return None


def parse_instance(text: str | Iterable[str]) -> WeightedGraph:
    """Parse the ``p edge n m`` / ``e u v w`` format (1-based vertices, ``c`` comments)."""
    lines = text.splitlines() if isinstance(text, str) else text
    n = m = None
    header_line = None
    edges: list[tuple[int, int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(lines, start=1):
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        kind = tokens[0]
        if kind == "p":
            if n is not None:
                raise ParseError("second problem line", lineno)
            if len(tokens) != 4 or tokens[1] != "edge":
                raise ParseError("expected 'p edge <n> <m>'", lineno)
            n, m = _ints(tokens[2:], lineno)
            if n < 1 or m < 0:
                raise ParseError("vertex count must be positive and edge count non-negative", lineno)
            header_line = lineno
        elif kind == "e":
            if n is None:
                raise ParseError("edge line before problem line", lineno)
            if len(tokens) != 4:
                raise ParseError("expected 'e <u> <v> <w>'", lineno)
            u, v, w = _ints(tokens[1:], lineno)
            for x in (u, v):
                if not 1 <= x <= n:
                    raise ParseError(f"endpoint {x} out of range 1..{n}", lineno)
            if u == v:
                raise ParseError(f"self-loop at vertex {u}", lineno)
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ParseError(f"duplicate edge ({key[0]},{key[1]}), first at line {seen[key]}", lineno)
            seen[key] = lineno
            edges.append((u - 1, v - 1, w))
        else:
            raise ParseError(f"unknown line type {kind!r}", lineno)
    if n is None:
        raise ParseError("missing 'p edge' line")
    if len(edges) != m:
        raise ParseError(f"header declares {m} edges but {len(edges)} were given", header_line)
    return WeightedGraph.from_edges(n, edges)


def _ints(tokens: list[str], lineno: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"expected integers, got {' '.join(tokens)!r}", lineno) from None


def format_instance(g: WeightedGraph) -> str:
    out = [f"p edge {g.vertex_count} {g.edge_count}"]
    out += [f"e {e.u + 1} {e.v + 1} {e.w}" for e in g.edges]
    return "\n".join(out) + "\n"


def read_instance(path) -> WeightedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def positive_shift(g: WeightedGraph) -> int:
    """Constant that makes every weight at least 1 when added to all edges."""
    if not g.edges:
        return 0
    return max(0, 1 - min(e.w for e in g.edges))


def shifted(g: WeightedGraph, shift: int) -> WeightedGraph:
    if shift == 0:
        return g
    return WeightedGraph(g.vertex_count, tuple(Edge(e.id, e.u, e.v, e.w + shift) for e in g.edges))


@dataclass(frozen=True)
class PerturbedGraph:
    """Integer-scaled weights ``W_e = w_e * scale + noise_e`` with ``sum(noise) < scale``."""

    base: WeightedGraph
    scale: int
    noise: tuple[int, ...]
    weights: tuple[int, ...]
    seed: int
    noise_range: int


def perturb(g: WeightedGraph, seed: int, noise_range: int = DEFAULT_NOISE_RANGE) -> PerturbedGraph:
    """Scale weights by ``B = |E|*R + 1`` and add seeded noise drawn from ``[0, R)``.

    The noise stream is Python's MT19937 (``random.Random(seed)``), one
    ``randrange(R)`` per edge in edge-id order; identical inputs give
    identical weights on every platform.
    """
    if noise_range < 1:
        raise ValueError("noise_range must be >= 1")
    if not g.edges:
        raise ValueError("cannot perturb a graph without edges")
    scale = g.edge_count * noise_range + 1
    rng = random.Random(seed)
    noise = tuple(rng.randrange(noise_range) if noise_range > 1 else 0 for _ in g.edges)
    weights = tuple(e.w * scale + r for e, r in zip(g.edges, noise))
    return PerturbedGraph(g, scale, noise, weights, seed, noise_range)
