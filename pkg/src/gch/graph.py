"""Finite multigraphs with explicit half-edge incidence.

A graph here is a 1-dimensional CW complex: loops and parallel edges are
allowed, every edge carries exactly two half-edges, and the declaration
order of vertices, edges and half-edges is part of the model (it fixes the
sign conventions of every chain complex built on top of it).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

__all__ = [
    "Graph",
    "GraphError",
    "GraphFormatError",
    "EdgePartition",
    "RamosResult",
    "parse_graph",
    "load_graph",
    "essential_vertices",
    "tails",
    "subdivide",
    "explode",
    "component_partition",
    "ramos_number",
    "is_well_separating",
    "first_betti",
    "disjoint_union",
]

_TOKEN = re.compile(r"^[A-Za-z0-9_]+$")

VertexSet = tuple  # vertex ids, ordered as in the graph


class GraphError(ValueError):
    pass


class GraphFormatError(GraphError):
    pass


class HalfEdge(NamedTuple):
    id: str
    vertex: str
    edge: str


@dataclass(frozen=True)
class Graph:
    vertices: tuple[str, ...]
    edges: tuple[str, ...]
    half_edges: tuple[HalfEdge, ...]

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex id")
        if len(set(self.edges)) != len(self.edges):
            raise GraphError("duplicate edge id")
        ids = [h.id for h in self.half_edges]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate half-edge id")
        vset, eset = set(self.vertices), set(self.edges)
        count = dict.fromkeys(self.edges, 0)
        for h in self.half_edges:
            if h.vertex not in vset:
                raise GraphError(f"half-edge {h.id} references unknown vertex {h.vertex}")
            if h.edge not in eset:
                raise GraphError(f"half-edge {h.id} references unknown edge {h.edge}")
            count[h.edge] += 1
        bad = [e for e, c in count.items() if c != 2]
        if bad:
            raise GraphError(f"edge {bad[0]} does not have exactly two half-edges")

    @classmethod
    def from_edges(cls, vertices: Iterable[str], edges: Iterable[tuple[str, str, str]]) -> "Graph":
        """Build a graph from ``(edge_id, end0, end1)`` triples.

        Half-edges are named ``<edge>.0`` and ``<edge>.1`` and listed edge by
        edge.
        """
        edges = list(edges)
        half = []
        for e, a, b in edges:
            half.append(HalfEdge(f"{e}.0", a, e))
            half.append(HalfEdge(f"{e}.1", b, e))
        return cls(tuple(vertices), tuple(e for e, _, _ in edges), tuple(half))

    # -- incidence -------------------------------------------------------

    @cached_property
    def _half_index(self) -> dict[str, HalfEdge]:
        return {h.id: h for h in self.half_edges}

    @cached_property
    def _at_vertex(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {v: [] for v in self.vertices}
        for h in self.half_edges:
            out[h.vertex].append(h.id)
        return {v: tuple(hs) for v, hs in out.items()}

    @cached_property
    def _edge_halves(self) -> dict[str, tuple[str, str]]:
        out: dict[str, list[str]] = {e: [] for e in self.edges}
        for h in self.half_edges:
            out[h.edge].append(h.id)
        return {e: (hs[0], hs[1]) for e, hs in out.items()}

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v: n for n, v in enumerate(self.vertices)}

    @cached_property
    def edge_index(self) -> dict[str, int]:
        return {e: n for n, e in enumerate(self.edges)}

    def half_edges_at(self, v: str) -> tuple[str, ...]:
        return self._at_vertex[v]

    def degree(self, v: str) -> int:
        return len(self._at_vertex[v])

    def vertex_of(self, h: str) -> str:
        return self._half_index[h].vertex

    def edge_of(self, h: str) -> str:
        return self._half_index[h].edge

    def halves_of(self, e: str) -> tuple[str, str]:
        return self._edge_halves[e]

    def ends(self, e: str) -> tuple[str, str]:
        h0, h1 = self._edge_halves[e]
        return self.vertex_of(h0), self.vertex_of(h1)

    def opposite(self, h: str) -> str:
        h0, h1 = self._edge_halves[self.edge_of(h)]
        return h1 if h == h0 else h0

    def has_half_edge(self, h: str) -> bool:
        return h in self._half_index

    def edges_at(self, v: str) -> list[str]:
        """Edges incident on ``v`` in half-edge order, without repetition."""
        return list(dict.fromkeys(self.edge_of(h) for h in self._at_vertex[v]))

    def sort_vertices(self, vs: Iterable[str]) -> VertexSet:
        vs = set(vs)
        unknown = vs - set(self.vertices)
        if unknown:
            raise GraphError(f"unknown vertex {sorted(unknown)[0]}")
        return tuple(sorted(vs, key=self.vertex_index.__getitem__))

    # -- global invariants ---------------------------------------------

    def components(self) -> list[list[str]]:
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            a, b = self.ends(e)
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra
        groups: dict[str, list[str]] = {}
        for v in self.vertices:
            groups.setdefault(find(v), []).append(v)
        return list(groups.values())

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def to_text(self) -> str:
        lines = [f"vertex {v}" for v in self.vertices]
        lines += ["edge {} {} {}".format(e, *self.ends(e)) for e in self.edges]
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"id": e, "ends": list(self.ends(e))} for e in self.edges],
        }

    @cached_property
    def digest(self) -> str:
        """Short content hash; stable across runs and used to label outputs."""
        payload = "\n".join(
            [" ".join(self.vertices), " ".join(self.edges)]
            + [" ".join(h) for h in self.half_edges]
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# parsing


def parse_graph(text: str) -> Graph:
    """Parse the line format (``vertex <id>`` / ``edge <id> <u> <v>``) or its
    JSON equivalent. Isolated vertices are rejected."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"parse error: {exc}") from None
        try:
            vertices = [str(v) for v in doc["vertices"]]
            edges = [(str(e["id"]), str(e["ends"][0]), str(e["ends"][1])) for e in doc["edges"]]
            if any(len(e["ends"]) != 2 for e in doc["edges"]):
                raise GraphFormatError("parse error: an edge needs exactly two ends")
        except (KeyError, TypeError, IndexError) as exc:
            raise GraphFormatError(f"parse error: malformed JSON graph ({exc})") from None
    else:
        vertices, edges = [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "vertex" and len(parts) == 2:
                vertices.append(parts[1])
            elif parts[0] == "edge" and len(parts) == 4:
                edges.append((parts[1], parts[2], parts[3]))
            else:
                raise GraphFormatError(f"parse error: line {lineno}: {raw.strip()!r}")
    return _build_checked(vertices, edges)


def _build_checked(vertices: Sequence[str], edges: Sequence[tuple[str, str, str]]) -> Graph:
    for tok in itertools.chain(vertices, (e for e, _, _ in edges)):
        if not _TOKEN.match(tok):
            raise GraphFormatError(f"parse error: bad id {tok!r}")
    seen: set[str] = set()
    for v in vertices:
        if v in seen:
            raise GraphFormatError(f"duplicate id {v!r}")
        seen.add(v)
    eseen: set[str] = set()
    used: set[str] = set()
    for e, a, b in edges:
        if e in eseen:
            raise GraphFormatError(f"duplicate id {e!r}")
        eseen.add(e)
        for x in (a, b):
            if x not in seen:
                raise GraphFormatError(f"edge {e} references undeclared vertex {x!r}")
            used.add(x)
    for v in vertices:
        if v not in used:
            raise GraphFormatError(f"isolated vertex {v!r}")
    return Graph.from_edges(vertices, edges)


def load_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


# ---------------------------------------------------------------------------
# combinatorics


def essential_vertices(g: Graph) -> VertexSet:
    return tuple(v for v in g.vertices if g.degree(v) >= 3)


def tails(g: Graph) -> set[str]:
    return {e for e in g.edges if any(g.degree(x) == 1 for x in g.ends(e))}


def first_betti(g: Graph) -> int:
    return len(g.edges) - len(g.vertices) + len(g.components())


def _fresh(base: str, taken: set[str]) -> str:
    name = base
    n = 0
    while name in taken:
        n += 1
        name = f"{base}{n}"
    return name


def subdivide(g: Graph, e: str) -> tuple[Graph, str, tuple[str, str]]:
    """Split ``e`` at a new bivalent vertex.

    The two new edges take the place of ``e`` in the edge order and the new
    vertex is appended; a self-loop becomes a pair of parallel edges.
    """
    if e not in g.edge_index:
        raise GraphError(f"unknown edge {e!r}")
    a, b = g.ends(e)
    taken = set(g.vertices) | set(g.edges)
    mid = _fresh(f"{e}m", taken)
    taken.add(mid)
    e0 = _fresh(f"{e}a", taken)
    taken.add(e0)
    e1 = _fresh(f"{e}b", taken)
    edges = []
    for f in g.edges:
        if f == e:
            edges += [(e0, a, mid), (e1, mid, b)]
        else:
            edges.append((f, *g.ends(f)))
    return Graph.from_edges(g.vertices + (mid,), edges), mid, (e0, e1)


def explode(g: Graph, w: Iterable[str]) -> Graph:
    """Replace each vertex of ``w`` by one degree-1 stub per half-edge.

    Edges and half-edges keep their ids; the stub carrying half-edge ``h``
    of ``u`` is named ``u/h`` and sits where ``u`` was in the vertex order.
    """
    w = set(g.sort_vertices(w))
    vertices: list[str] = []
    stub: dict[str, str] = {}
    for v in g.vertices:
        if v in w:
            for h in g.half_edges_at(v):
                stub[h] = f"{v}/{h}"
                vertices.append(stub[h])
        else:
            vertices.append(v)
    half = tuple(HalfEdge(h.id, stub.get(h.id, h.vertex), h.edge) for h in g.half_edges)
    return Graph(tuple(vertices), g.edges, half)


@dataclass(frozen=True)
class EdgePartition:
    blocks: tuple[frozenset, ...]

    def __post_init__(self):
        seen: set = set()
        for b in self.blocks:
            if not b:
                raise GraphError("empty block")
            if seen & b:
                raise GraphError("blocks overlap")
            seen |= b

    def __len__(self) -> int:
        return len(self.blocks)

    @cached_property
    def block_of(self) -> dict[str, int]:
        return {e: n for n, b in enumerate(self.blocks) for e in b}

    def same_block(self, e1: str, e2: str) -> bool:
        return self.block_of[e1] == self.block_of[e2]


def component_partition(g: Graph, w: Iterable[str] = ()) -> EdgePartition:
    """Partition of the edges by connected component of ``explode(g, w)``.

    Blocks are listed in order of their first edge. Edges meeting at a vertex
    outside ``w`` are in the same block.
    """
    w = set(g.sort_vertices(w))
    parent = {e: e for e in g.edges}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in g.vertices:
        if v in w:
            continue
        es = g.edges_at(v)
        for other in es[1:]:
            ra, rb = find(es[0]), find(other)
            if ra != rb:
                parent[rb] = ra
    groups: dict[str, list[str]] = {}
    for e in g.edges:
        groups.setdefault(find(e), []).append(e)
    return EdgePartition(tuple(frozenset(b) for b in groups.values()))


class RamosResult(NamedTuple):
    delta: int
    maximizers: list[VertexSet]


def ramos_number(g: Graph, i: int) -> RamosResult:
    """Maximum number of components of ``g`` minus ``i`` essential vertices,
    with every maximizing vertex set (exhaustive search)."""
    if i < 0:
        raise GraphError("i must be non-negative")
    if not g.is_connected():
        raise GraphError("graph is disconnected; compute Ramos numbers per component")
    ess = essential_vertices(g)
    if i > len(ess):
        raise GraphError(f"i={i} exceeds the number of essential vertices ({len(ess)})")
    best, winners = 0, []
    for w in itertools.combinations(ess, i):
        n = len(component_partition(g, w))
        if n > best:
            best, winners = n, [w]
        elif n == best:
            winners.append(w)
    return RamosResult(best, winners)


def is_well_separating(g: Graph, w: Iterable[str]) -> bool:
    w = g.sort_vertices(w)
    for u in w:
        if g.degree(u) < 3:
            raise GraphError(f"vertex {u!r} is not essential")
    part = component_partition(g, w)
    return all(len({part.block_of[e] for e in g.edges_at(u)}) >= 2 for u in w)


def disjoint_union(g1: Graph, g2: Graph, prefixes: tuple[str, str] = ("L", "R")) -> Graph:
    """Disjoint union with ids prefixed to keep them apart."""
    p, q = prefixes
    vertices = [p + v for v in g1.vertices] + [q + v for v in g2.vertices]
    edges = [(p + e, *(p + x for x in g1.ends(e))) for e in g1.edges]
    edges += [(q + e, *(q + x for x in g2.ends(e))) for e in g2.edges]
    return Graph.from_edges(vertices, edges)
