"""Loop, star and torus classes, their standard chain representatives, and
certification of the relations among them.

Conventions fixed here (homology ranks do not depend on them):

* a loop walk is given by the half-edges it departs through; its
  representative sums ``h_out - h_in`` over the vertices it passes;
* a star triple ``(h1, h2, h3)`` has representative
  ``e3 (h1 - h2) + e2 (h3 - h1) + e1 (h2 - h3)``;
* tori are external products of stars in vertex order, times a monomial.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb, prod

from .complex import (
    REDUCED,
    ChainVector,
    ComplexVariant,
    basis,
    differential_matrix,
    encode_chain,
    external_product,
    multiply_monomial,
)
from .graph import Graph, GraphError, component_partition, is_well_separating, tails
from .homology import boundary_witness
from .linalg import QQ, Field, SparseMatrix, quotient_rank

__all__ = [
    "StarSpec",
    "TorusSpec",
    "AWFamily",
    "RelationReport",
    "loop_class",
    "walk_from_edges",
    "star_class",
    "star_class_privileged",
    "torus_class",
    "a_w_family",
    "is_rigid",
    "top_row_image",
    "verify_relation",
    "torus_module_dimension",
    "aw_span_rank",
    "verify_aw_freeness",
]


class ClassError(ValueError):
    pass


@dataclass(frozen=True)
class StarSpec:
    vertex: str
    halves: tuple[str, str, str]
    sign: int = 1

    def validate(self, g: Graph) -> None:
        if self.vertex not in g.vertex_index:
            raise ClassError(f"unknown vertex {self.vertex!r}")
        if g.degree(self.vertex) < 3:
            raise ClassError(f"vertex {self.vertex!r} is not essential")
        if len(set(self.halves)) != 3:
            raise ClassError("star half-edges must be distinct")
        for h in self.halves:
            if not g.has_half_edge(h) or g.vertex_of(h) != self.vertex:
                raise ClassError(f"half-edge {h!r} is not at {self.vertex!r}")
        if self.sign not in (1, -1):
            raise ClassError("sign must be +1 or -1")


@dataclass(frozen=True)
class TorusSpec:
    stars: tuple[StarSpec, ...]
    monomial: tuple[tuple[str, int], ...] = ()

    @property
    def vertices(self) -> tuple[str, ...]:
        return tuple(s.vertex for s in self.stars)

    @property
    def bidegree(self) -> tuple[int, int]:
        n = len(self.stars)
        return n, 2 * n + sum(x for _, x in self.monomial)

    def times(self, monomial: dict[str, int]) -> "TorusSpec":
        mono = dict(self.monomial)
        for e, x in monomial.items():
            mono[e] = mono.get(e, 0) + x
        return TorusSpec(self.stars, tuple(sorted((e, x) for e, x in mono.items() if x)))


@dataclass
class AWFamily:
    W: tuple[str, ...]
    fixed: dict[str, tuple[str, str]]  # per w, the two half-edges in distinct blocks
    members: list[TorusSpec] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)


# ---------------------------------------------------------------------------
# representatives


def walk_from_edges(g: Graph, start: str, edges: list[str]) -> list[str]:
    """Departure half-edges of the closed walk from ``start`` along ``edges``."""
    out = []
    at = start
    for e in edges:
        a, b = g.halves_of(e)
        if g.vertex_of(a) == at:
            h = a
        elif g.vertex_of(b) == at:
            h = b
        else:
            raise ClassError(f"edge {e!r} does not leave {at!r}")
        out.append(h)
        at = g.vertex_of(g.opposite(h))
    if at != start:
        raise ClassError("walk is not closed")
    return out


def loop_class(g: Graph, walk: list[str], var: ComplexVariant = REDUCED, field: Field = QQ) -> ChainVector:
    """Standard representative of the loop class of a closed walk, given as
    the list of half-edges it departs through."""
    if not walk:
        raise ClassError("empty walk")
    for h in walk:
        if not g.has_half_edge(h):
            raise ClassError(f"unknown half-edge {h!r}")
    terms = []
    n = len(walk)
    for j in range(n):
        h_in = g.opposite(walk[j - 1])
        h_out = walk[j]
        if g.vertex_of(h_in) != g.vertex_of(h_out):
            raise ClassError("walk is not closed" if j == 0 else "walk is not consecutive")
        if h_in != h_out:
            terms.append((1, [("diff", h_out, h_in)]))
    c = encode_chain(g, var, terms, field)
    if c.is_zero():
        return ChainVector(g, var, (1, 1), {}, field)
    return c


def _edges3(g: Graph, spec: StarSpec) -> tuple[str, str, str]:
    return tuple(g.edge_of(h) for h in spec.halves)


def star_class(spec: StarSpec, g: Graph, var: ComplexVariant = REDUCED, field: Field = QQ) -> ChainVector:
    """``e3 (h1 - h2) + e2 (h3 - h1) + e1 (h2 - h3)``, times the sign."""
    spec.validate(g)
    h1, h2, h3 = spec.halves
    e1, e2, e3 = _edges3(g, spec)
    s = spec.sign
    terms = [
        (s, [("edge", e3, 1), ("diff", h1, h2)]),
        (s, [("edge", e2, 1), ("diff", h3, h1)]),
        (s, [("edge", e1, 1), ("diff", h2, h3)]),
    ]
    return encode_chain(g, var, terms, field)


def star_class_privileged(spec: StarSpec, g: Graph, var: ComplexVariant = REDUCED,
                          field: Field = QQ) -> ChainVector:
    """The same cycle written as ``(e1 - e3)(h2 - h1) - (e1 - e2)(h3 - h1)``."""
    spec.validate(g)
    h1, h2, h3 = spec.halves
    e1, e2, e3 = _edges3(g, spec)
    s = spec.sign
    terms = [
        (s, [("edge", e1, 1), ("diff", h2, h1)]),
        (-s, [("edge", e3, 1), ("diff", h2, h1)]),
        (-s, [("edge", e1, 1), ("diff", h3, h1)]),
        (s, [("edge", e2, 1), ("diff", h3, h1)]),
    ]
    return encode_chain(g, var, terms, field)


def torus_class(spec: TorusSpec, g: Graph, var: ComplexVariant = REDUCED, field: Field = QQ) -> ChainVector:
    if not spec.stars:
        raise ClassError("a torus needs at least one star")
    if len(set(spec.vertices)) != len(spec.vertices):
        raise ClassError("torus stars must sit at distinct vertices")
    out = None
    for s in sorted(spec.stars, key=lambda s: g.vertex_index[s.vertex]):
        a = star_class(s, g, var, field)
        out = a if out is None else external_product(out, a)
    if spec.monomial:
        out = multiply_monomial(out, dict(spec.monomial))
    return out


# ---------------------------------------------------------------------------
# tori over a well-separating set


def _check_ws(g: Graph, W) -> tuple[str, ...]:
    W = tuple(sorted(set(W), key=lambda v: g.vertex_index[v]))
    for w in W:
        if w not in g.vertex_index:
            raise GraphError(f"unknown vertex {w!r}")
    if not is_well_separating(g, W):
        raise ClassError(f"{set(W) or '{}'} is not well-separating")
    return W


def _default_pair(g: Graph, w: str, part, tail_edges) -> tuple[str, str]:
    halves = g.half_edges_at(w)
    best = None
    for a, b in combinations(range(len(halves)), 2):
        ea, eb = g.edge_of(halves[a]), g.edge_of(halves[b])
        if part.same_block(ea, eb):
            continue
        n_tails = (ea in tail_edges) + (eb in tail_edges)
        key = (n_tails, a, b)
        if best is None or key < best[0]:
            best = (key, (halves[a], halves[b]))
    if best is None:
        raise ClassError(f"no two half-edges at {w!r} lie in distinct blocks")
    if best[0][0] == 2:
        warnings.warn(f"both fixed edges at {w!r} are tails", stacklevel=3)
    return best[1]


def a_w_family(g: Graph, W, choices: dict[str, tuple[str, str]] | None = None) -> AWFamily:
    """The ``prod(d(w) - 2)`` tori built from two fixed half-edges at each
    ``w`` (in distinct blocks of the partition) and one further half-edge.

    ``choices`` may fix the pair at some vertices; elsewhere the lowest pair
    in distinct blocks is used, avoiding pairs of tails when possible.
    """
    W = _check_ws(g, W)
    part = component_partition(g, W)
    tail_edges = tails(g)
    fixed = {}
    for w in W:
        if choices and w in choices:
            a, b = choices[w]
            for h in (a, b):
                if not g.has_half_edge(h) or g.vertex_of(h) != w:
                    raise ClassError(f"half-edge {h!r} is not at {w!r}")
            if a == b or part.same_block(g.edge_of(a), g.edge_of(b)):
                raise ClassError(f"chosen half-edges at {w!r} lie in one block")
            fixed[w] = (a, b)
        else:
            fixed[w] = _default_pair(g, w, part, tail_edges)
    extras = [[h for h in g.half_edges_at(w) if h not in fixed[w]] for w in W]
    members = []
    for pick in product(*extras):
        stars = tuple(StarSpec(w, (fixed[w][0], fixed[w][1], x)) for w, x in zip(W, pick))
        members.append(TorusSpec(stars))
    return AWFamily(W, fixed, members)


def is_rigid(g: Graph, spec: TorusSpec) -> bool:
    """Every star factor uses edges from at least two blocks of the
    partition cut out by the torus's vertex set."""
    W = _check_ws(g, spec.vertices)
    part = component_partition(g, W)
    for s in spec.stars:
        s.validate(g)
        if len({part.block_of[g.edge_of(h)] for h in s.halves}) < 2:
            return False
    return True


def top_row_image(g: Graph, spec: TorusSpec, field: Field = QQ) -> dict:
    """Image of the torus representative in the top filtration quotient,
    free over the block ring on generators with a difference at every
    vertex of ``W``: edge monomials are pushed to block monomials.

    Returns the nonzero coordinates ``{(states, block exponents): coef}``;
    for a well-separating ``W`` the torus is rigid iff this is nonzero.
    """
    W = _check_ws(g, spec.vertices)
    part = component_partition(g, W)
    nb = len(part.blocks)
    block_idx = [part.block_of[e] for e in g.edges]
    wpos = {g.vertex_index[w] for w in W}
    c = torus_class(spec, g, REDUCED, field)
    out: dict = {}
    for el, coef in c.terms.items():
        if {n for n, s in enumerate(el.states) if s} != wpos:
            continue
        bexp = [0] * nb
        for e, x in enumerate(el.exps):
            bexp[block_idx[e]] += x
        key = (el.states, tuple(bexp))
        out[key] = out.get(key, 0) + coef
    return {k: v for k, v in out.items() if field.coerce(v)}


# ---------------------------------------------------------------------------
# relations


@dataclass
class RelationReport:
    kind: str
    parameters: dict
    bidegree: tuple[int, int] | None
    is_boundary: bool
    witness_found: bool

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "parameters": self.parameters,
            "bidegree": list(self.bidegree) if self.bidegree else None,
            "is_boundary": self.is_boundary,
            "witness_found": self.witness_found,
        }
        return json.dumps(doc, sort_keys=True)


def _essential_at_least(g: Graph, d: int) -> list[str]:
    return [v for v in g.vertices if g.degree(v) >= d]


def _bridges_at(g: Graph, w: str) -> list[str]:
    """Half-edges at ``w`` whose edge disconnects its component."""
    out = []
    for h in g.half_edges_at(w):
        e = g.edge_of(h)
        a, b = g.ends(e)
        if a == b:
            continue
        seen = {a}
        stack = [a]
        while stack:
            u = stack.pop()
            for f in g.edges_at(u):
                if f == e:
                    continue
                for x in g.ends(f):
                    if x not in seen:
                        seen.add(x)
                        stack.append(x)
        if b not in seen:
            out.append(h)
    return out


def _loop_through(g: Graph, out_h: str) -> list[str]:
    """Follow a subdivided circle from ``out_h`` back to its vertex."""
    w = g.vertex_of(out_h)
    walk = [out_h]
    at = g.opposite(out_h)
    while g.vertex_of(at) != w:
        v = g.vertex_of(at)
        if g.degree(v) != 2:
            raise ClassError("loop must pass only through bivalent vertices")
        nxt = [h for h in g.half_edges_at(v) if h != at][0]
        walk.append(nxt)
        at = g.opposite(nxt)
        if len(walk) > len(g.edges):
            raise ClassError("loop does not return")
    return walk


def _relation_q(g: Graph, params: dict, var, field):
    if "vertex" in params:
        w = params["vertex"]
    else:
        cand = _essential_at_least(g, 3)
        if len(cand) != 1:
            raise ClassError("Q-relation needs a lollipop: pass parameters.vertex")
        w = cand[0]
    if g.degree(w) != 3:
        raise ClassError(f"junction {w!r} must be trivalent")
    bridges = _bridges_at(g, w)
    stick = params.get("stick") or (bridges[0] if len(bridges) == 1 else None)
    if stick is None:
        raise ClassError("no unique stick at the junction")
    loop_halves = [h for h in g.half_edges_at(w) if h != stick]
    out_h = params.get("out", loop_halves[0])
    if out_h not in loop_halves:
        raise ClassError(f"{out_h!r} is not a loop half-edge at {w!r}")
    walk = _loop_through(g, out_h)
    in_h = g.opposite(walk[-1])
    gamma = loop_class(g, walk, var, field)
    e, e2 = g.edge_of(stick), g.edge_of(out_h)
    lhs = multiply_monomial(gamma, {e: 1}) - multiply_monomial(gamma, {e2: 1})
    alpha = star_class(StarSpec(w, (stick, out_h, in_h)), g, var, field)
    used = {"vertex": w, "stick": stick, "out": out_h, "in": in_h}
    return lhs - alpha, used


def _relation_theta(g: Graph, params: dict, var, field):
    cand = _essential_at_least(g, 3)
    top = params.get("top", cand[0] if len(cand) == 2 else None)
    bottom = params.get("bottom", cand[1] if len(cand) == 2 else None)
    if top is None or bottom is None:
        raise ClassError("theta relation needs parameters.top and parameters.bottom")
    strands = [e for e in g.edges if set(g.ends(e)) == {top, bottom}]
    if len(strands) != 3:
        raise ClassError("theta relation needs exactly three strands between top and bottom")

    def half(e, v):
        return next(h for h in g.halves_of(e) if g.vertex_of(h) == v)

    s1, s2, s3 = strands
    # the same rotational sense at both ends of the strands
    a = star_class(StarSpec(top, (half(s1, top), half(s3, top), half(s2, top))), g, var, field)
    a2 = star_class(StarSpec(bottom, (half(s1, bottom), half(s2, bottom), half(s3, bottom))), g, var, field)
    return a - a2, {"top": top, "bottom": bottom, "strands": strands}


def _four_halves(g: Graph, params: dict):
    if "vertex" in params:
        w = params["vertex"]
    else:
        cand = _essential_at_least(g, 4)
        if not cand:
            raise ClassError("X relations need a vertex of degree at least 4")
        w = cand[0]
    hs = params.get("halves") or g.half_edges_at(w)[:4]
    hs = tuple(hs)
    if len(hs) != 4 or len(set(hs)) != 4:
        raise ClassError("X relations need four distinct half-edges")
    return w, hs


def _relation_x(kind: str, g: Graph, params: dict, var, field):
    w, (h1, h2, h3, h4) = _four_halves(g, params)
    e1, e2, e3, e4 = (g.edge_of(h) for h in (h1, h2, h3, h4))

    def al(*t):
        return star_class(StarSpec(w, t), g, var, field)

    def mul(e, c):
        return multiply_monomial(c, {e: 1})

    a123, a124, a134, a234 = al(h1, h2, h3), al(h1, h2, h4), al(h1, h3, h4), al(h2, h3, h4)
    if kind == "unstableX":
        c = a123 - a124 + a134 - a234
    elif kind == "stableX":
        c = mul(e4, a123) - mul(e3, a124) + mul(e2, a134) - mul(e1, a234)
    else:
        c = ((mul(e4, a123) - mul(e1, a123)) - (mul(e3, a124) - mul(e1, a124))
             + (mul(e2, a134) - mul(e1, a134)))
    return c, {"vertex": w, "halves": [h1, h2, h3, h4]}


def _relation_star(g: Graph, params: dict, var, field):
    if "vertex" in params:
        w = params["vertex"]
    else:
        cand = _essential_at_least(g, 3)
        if not cand:
            raise ClassError("no essential vertex")
        w = cand[0]
    hs = tuple(params.get("halves") or g.half_edges_at(w)[:3])
    return star_class(StarSpec(w, hs), g, var, field), {"vertex": w, "halves": list(hs)}


RELATIONS = ("Q", "theta", "unstableX", "stableX", "combinedX", "star")


def verify_relation(g: Graph, kind: str, parameters: dict | None = None,
                    var: ComplexVariant = REDUCED, field: Field = QQ) -> RelationReport:
    """Build the chain-level combination named by ``kind`` and decide
    whether it bounds. ``star`` is the bare star class, a negative control."""
    params = dict(parameters or {})
    if kind == "Q":
        c, used = _relation_q(g, params, var, field)
    elif kind == "theta":
        c, used = _relation_theta(g, params, var, field)
    elif kind in ("unstableX", "stableX", "combinedX"):
        c, used = _relation_x(kind, g, params, var, field)
    elif kind == "star":
        c, used = _relation_star(g, params, var, field)
    else:
        raise ClassError(f"unknown relation {kind!r}; expected one of {', '.join(RELATIONS)}")
    # the witness is re-verified against the differential when it is solved for
    x = boundary_witness(c)
    return RelationReport(kind, used, c.bidegree, x is not None, x is not None and not c.is_zero())


# ---------------------------------------------------------------------------
# counting


def torus_module_dimension(g: Graph, fam: AWFamily, k: int) -> int:
    """``C(k - 2|W| + D - 1, D - 1) * prod(d(w) - 2)`` with ``D`` the block
    count of the partition cut out by ``W``; zero below weight ``2|W|``."""
    n = len(fam.W)
    if k < 2 * n:
        return 0
    D = len(component_partition(g, fam.W).blocks)
    return comb(k - 2 * n + D - 1, D - 1) * prod(g.degree(w) - 2 for w in fam.W)


def _monomials(nvars: int, deg: int):
    if nvars == 0:
        if deg == 0:
            yield ()
        return
    if nvars == 1:
        yield (deg,)
        return
    for a in range(deg, -1, -1):
        for rest in _monomials(nvars - 1, deg - a):
            yield (a,) + rest


def aw_span_rank(g: Graph, fam: AWFamily, field: Field, k: int) -> int:
    """Dimension, in ``H_{|W|}(B_k)``, of the span of block-monomial
    multiples of the family (one representative edge per block)."""
    n = len(fam.W)
    if k < 2 * n:
        return 0
    part = component_partition(g, fam.W)
    reps = [min(b, key=lambda e: g.edge_index[e]) for b in part.blocks]
    vecs = []
    for spec in fam.members:
        base = torus_class(spec, g, REDUCED, field)
        for mono in _monomials(len(reps), k - 2 * n):
            c = multiply_monomial(base, {e: x for e, x in zip(reps, mono) if x})
            vecs.append(c.coordinates(n, k))
    dim_up = len(basis(g, REDUCED, n + 1, k))
    nrows = len(basis(g, REDUCED, n, k))
    up = differential_matrix(g, REDUCED, n + 1, k, field) if dim_up else SparseMatrix.zeros(nrows, 0, field)
    down = differential_matrix(g, REDUCED, n, k, field)
    return quotient_rank(vecs, up, down)


def verify_aw_freeness(g: Graph, fam: AWFamily, field: Field, k: int) -> bool:
    return aw_span_rank(g, fam, field, k) == torus_module_dimension(g, fam, k)
