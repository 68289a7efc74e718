"""Full and reduced Świątkowski complexes of a graph.

A basis element is a choice of local state at every vertex together with an
exponent for every edge. Full states are ``empty``, ``occupied`` and
``half(h)`` for ``h`` at the vertex; reduced states are ``empty`` and
``diff(h)`` standing for ``h - h1`` where ``h1`` is the vertex's privileged
half-edge. The bidegree is ``(i, k)`` with ``i`` the number of half/diff
states and ``k = sum(exponents) + #occupied + i``.

Signs: a differential acting at the ``j``-th half/diff vertex (0-based, in
vertex order) carries ``(-1)**j``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Sequence

from .graph import Graph, GraphError
from .linalg import QQ, Field, SparseMatrix

__all__ = [
    "ComplexVariant",
    "FULL",
    "REDUCED",
    "BasisElement",
    "ChainVector",
    "ChainError",
    "Basis",
    "enumerate_basis",
    "basis",
    "differential_matrix",
    "stabilization_matrix",
    "inclusion_matrix",
    "encode_chain",
    "apply_differential",
    "external_product",
    "multiply_monomial",
    "describe",
    "matrix_to_triplets",
]


class ChainError(ValueError):
    pass


@dataclass(frozen=True)
class ComplexVariant:
    """``full`` or ``reduced``; the reduced variant may override the
    privileged half-edge (default: first half-edge at the vertex)."""

    tag: str = "reduced"
    overrides: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.tag not in ("full", "reduced"):
            raise ChainError(f"unknown complex variant {self.tag!r}")
        if self.overrides and self.tag == "full":
            raise ChainError("the full complex has no privileged half-edges")

    @classmethod
    def reduced(cls, privileged: dict[str, str] | None = None) -> "ComplexVariant":
        return cls("reduced", tuple(sorted((privileged or {}).items())))

    @property
    def is_reduced(self) -> bool:
        return self.tag == "reduced"

    def privileged(self, g: Graph, v: str) -> str | None:
        for u, h in self.overrides:
            if u == v:
                if h not in g.half_edges_at(v):
                    raise ChainError(f"privileged half-edge {h} is not at {v}")
                return h
        hs = g.half_edges_at(v)
        return hs[0] if hs else None


FULL = ComplexVariant("full")
REDUCED = ComplexVariant("reduced")


class BasisElement(NamedTuple):
    states: tuple[int, ...]  # per vertex, encoding as in the module docstring
    exps: tuple[int, ...]  # per edge


class _Local(NamedTuple):
    """Per-vertex data a variant needs: the half-edges its states name."""

    halves: tuple[str, ...]  # full: H(v); reduced: H(v) minus h1
    h1: str | None


@lru_cache(maxsize=None)
def _locals(g: Graph, var: ComplexVariant) -> tuple[_Local, ...]:
    out = []
    for v in g.vertices:
        hs = g.half_edges_at(v)
        if var.is_reduced:
            h1 = var.privileged(g, v)
            out.append(_Local(tuple(h for h in hs if h != h1), h1))
        else:
            out.append(_Local(hs, None))
    return tuple(out)


def _state_code(var: ComplexVariant, n: int) -> int:
    # code of the n-th half (full) / diff (reduced) state
    return n + 2 if not var.is_reduced else n + 1


def _state_half(var: ComplexVariant, loc: _Local, s: int) -> str | None:
    if var.is_reduced:
        return loc.halves[s - 1] if s else None
    return loc.halves[s - 2] if s >= 2 else None


@lru_cache(maxsize=None)
def _compositions(m: int, n: int) -> tuple[tuple[int, ...], ...]:
    """Weak compositions of ``m`` into ``n`` parts, lexicographically."""
    if n == 0:
        return ((),) if m == 0 else ()
    if n == 1:
        return ((m,),)
    out = []
    for a in range(m + 1):
        out.extend((a,) + rest for rest in _compositions(m - a, n - 1))
    return tuple(out)


def _state_tuples(g: Graph, var: ComplexVariant, i: int, max_occ: int) -> Iterator[tuple[tuple[int, ...], int]]:
    """Vertex-state tuples with exactly ``i`` half/diff states and at most
    ``max_occ`` occupied vertices, in lexicographic order, paired with their
    occupied count."""
    locs = _locals(g, var)
    n = len(locs)
    choices = []
    for loc in locs:
        if var.is_reduced:
            choices.append([(0, 0, 0)] + [(s, 1, 0) for s in range(1, len(loc.halves) + 1)])
        else:
            choices.append([(0, 0, 0), (1, 0, 1)] + [(s, 1, 0) for s in range(2, len(loc.halves) + 2)])
    # how many half/diff states the suffix starting at each vertex can host
    room = [0] * (n + 1)
    for idx in range(n - 1, -1, -1):
        room[idx] = room[idx + 1] + (1 if len(choices[idx]) > (1 if var.is_reduced else 2) else 0)

    def rec(idx, need, occ_left, prefix, occ):
        if idx == n:
            if need == 0:
                yield tuple(prefix), occ
            return
        if need > room[idx]:
            return
        for s, dh, do in choices[idx]:
            if dh > need or do > occ_left:
                continue
            prefix.append(s)
            yield from rec(idx + 1, need - dh, occ_left - do, prefix, occ + do)
            prefix.pop()

    yield from rec(0, i, max_occ, [], 0)


@dataclass
class Basis:
    graph: Graph
    variant: ComplexVariant
    i: int
    k: int
    elements: list[BasisElement]
    index: dict[BasisElement, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.elements)


def count_basis(g: Graph, var: ComplexVariant, i: int, k: int) -> int:
    """Size of the (i, k) basis without materialising it."""
    if i < 0 or k < i:
        return 0
    ne = len(g.edges)
    total = 0
    for _, occ in _state_tuples(g, var, i, k - i):
        m = k - i - occ
        total += _binom(m + ne - 1, ne - 1) if ne else (1 if m == 0 else 0)
    return total


def _binom(n: int, r: int) -> int:
    from math import comb

    return comb(n, r) if 0 <= r <= n else 0


@lru_cache(maxsize=64)
def basis(g: Graph, var: ComplexVariant, i: int, k: int) -> Basis:
    elems: list[BasisElement] = []
    if i >= 0 and k >= i:
        ne = len(g.edges)
        for states, occ in _state_tuples(g, var, i, k - i):
            for exps in _compositions(k - i - occ, ne):
                elems.append(BasisElement(states, exps))
    return Basis(g, var, i, k, elems, {e: n for n, e in enumerate(elems)})


def enumerate_basis(g: Graph, var: ComplexVariant, i: int, k: int) -> list[BasisElement]:
    """Ordered basis of bidegree ``(i, k)``; the column order of every matrix
    built at that bidegree."""
    return list(basis(g, var, i, k).elements)


def _boundary_terms(g: Graph, var: ComplexVariant, el: BasisElement) -> Iterator[tuple[BasisElement, int]]:
    locs = _locals(g, var)
    eidx = g.edge_index
    states, exps = el
    j = 0
    for vi, s in enumerate(states):
        if var.is_reduced:
            if s == 0:
                continue
        elif s < 2:
            continue
        sign = -1 if j % 2 else 1
        j += 1
        loc = locs[vi]
        h = _state_half(var, loc, s)
        st = list(states)
        st[vi] = 0
        st = tuple(st)
        eh = eidx[g.edge_of(h)]
        up = list(exps)
        up[eh] += 1
        if var.is_reduced:
            e1 = eidx[g.edge_of(loc.h1)]
            if e1 == eh:
                continue  # both ends of one loop: d(h - h1) = e - e = 0
            down = list(exps)
            down[e1] += 1
            yield BasisElement(st, tuple(up)), sign
            yield BasisElement(st, tuple(down)), -sign
        else:
            yield BasisElement(st, tuple(up)), sign
            occ = list(states)
            occ[vi] = 1
            yield BasisElement(tuple(occ), exps), -sign


@lru_cache(maxsize=64)
def _differential_int(g: Graph, var: ComplexVariant, i: int, k: int) -> tuple:
    src = basis(g, var, i, k)
    tgt = basis(g, var, i - 1, k)
    cols = []
    for el in src.elements:
        col: dict[int, int] = {}
        for t, c in _boundary_terms(g, var, el):
            r = tgt.index[t]
            v = col.get(r, 0) + c
            if v:
                col[r] = v
            else:
                del col[r]
        cols.append(col)
    return len(tgt), tuple(cols)


def differential_matrix(g: Graph, var: ComplexVariant, i: int, k: int, field: Field = QQ) -> SparseMatrix:
    """Matrix of the differential ``(i, k) -> (i - 1, k)``."""
    if i < 1:
        raise ChainError("the differential starts in degree 1")
    nrows, cols = _differential_int(g, var, i, k)
    return SparseMatrix.from_columns(nrows, cols, field)


def stabilization_matrix(g: Graph, var: ComplexVariant, e: str, i: int, k: int,
                         field: Field = QQ) -> SparseMatrix:
    """Multiplication by the edge ``e``: ``(i, k) -> (i, k + 1)``."""
    if e not in g.edge_index:
        raise ChainError(f"unknown edge {e!r}")
    ei = g.edge_index[e]
    src = basis(g, var, i, k)
    tgt = basis(g, var, i, k + 1)
    cols = []
    for states, exps in src.elements:
        up = list(exps)
        up[ei] += 1
        cols.append({tgt.index[BasisElement(states, tuple(up))]: 1})
    return SparseMatrix.from_columns(len(tgt), cols, field)


def inclusion_matrix(g: Graph, red: ComplexVariant, i: int, k: int, field: Field = QQ) -> SparseMatrix:
    """Inclusion of the reduced complex in the full one at ``(i, k)``:
    ``diff(h) -> half(h) - half(h1)`` at every diff vertex."""
    if not red.is_reduced:
        raise ChainError("source must be a reduced variant")
    rlocs = _locals(g, red)
    flocs = _locals(g, FULL)
    src = basis(g, red, i, k)
    tgt = basis(g, FULL, i, k)
    cols = []
    for states, exps in src.elements:
        partial = [((), 1)]
        for vi, s in enumerate(states):
            if s == 0:
                partial = [(st + (0,), c) for st, c in partial]
                continue
            h = _state_half(red, rlocs[vi], s)
            h1 = rlocs[vi].h1
            a = 2 + flocs[vi].halves.index(h)
            b = 2 + flocs[vi].halves.index(h1)
            partial = [(st + (a,), c) for st, c in partial] + [(st + (b,), -c) for st, c in partial]
        col: dict[int, int] = {}
        for st, c in partial:
            r = tgt.index[BasisElement(st, exps)]
            col[r] = col.get(r, 0) + c
        cols.append(col)
    return SparseMatrix.from_columns(len(tgt), cols, field)


# ---------------------------------------------------------------------------
# chain vectors


@dataclass
class ChainVector:
    graph: Graph
    variant: ComplexVariant
    bidegree: tuple[int, int] | None  # None for the zero vector
    terms: dict[BasisElement, object]
    field: Field = QQ

    def __post_init__(self):
        f = self.field
        clean = {}
        for el, c in self.terms.items():
            c = f.coerce(c)
            if c:
                clean[el] = c
        self.terms = clean
        if not clean:
            return
        degs = {_bidegree(self.variant, el) for el in clean}
        if len(degs) != 1:
            raise ChainError(f"mixed bidegrees {sorted(degs)}")
        deg = degs.pop()
        if self.bidegree is None:
            self.bidegree = deg
        elif self.bidegree != deg:
            raise ChainError(f"terms have bidegree {deg}, expected {self.bidegree}")

    def is_zero(self) -> bool:
        return not self.terms

    def __neg__(self) -> "ChainVector":
        return self.scale(-1)

    def scale(self, c) -> "ChainVector":
        return ChainVector(self.graph, self.variant, self.bidegree,
                           {el: v * c for el, v in self.terms.items()}, self.field)

    def __add__(self, other: "ChainVector") -> "ChainVector":
        self._compatible(other)
        out = dict(self.terms)
        for el, v in other.terms.items():
            out[el] = out.get(el, 0) + v
        deg = self.bidegree if self.bidegree is not None else other.bidegree
        if other.bidegree is not None and deg != other.bidegree:
            raise ChainError("cannot add chains of different bidegrees")
        return ChainVector(self.graph, self.variant, deg, out, self.field)

    def __sub__(self, other: "ChainVector") -> "ChainVector":
        return self + (-other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChainVector):
            return NotImplemented
        return (self.graph == other.graph and self.variant == other.variant
                and self.terms == other.terms)

    def _compatible(self, other: "ChainVector") -> None:
        if self.graph != other.graph or self.variant != other.variant or self.field != other.field:
            raise ChainError("chains live in different complexes")

    def to_dense(self) -> list:
        """Coordinates in the basis of the chain's bidegree."""
        if self.bidegree is None:
            raise ChainError("the zero chain has no bidegree; use coordinates(i, k)")
        return self.coordinates(*self.bidegree)

    def coordinates(self, i: int, k: int) -> list:
        if self.terms and self.bidegree != (i, k):
            raise ChainError("chain is not in the requested bidegree")
        b = basis(self.graph, self.variant, i, k)
        out = [0] * len(b)
        for el, c in self.terms.items():
            out[b.index[el]] = c
        return out

    def over(self, field: Field) -> "ChainVector":
        return ChainVector(self.graph, self.variant, self.bidegree, dict(self.terms), field)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for el in sorted(self.terms):
            parts.append(f"{self.terms[el]}*{describe(self.graph, self.variant, el)}")
        return " + ".join(parts)


def _bidegree(var: ComplexVariant, el: BasisElement) -> tuple[int, int]:
    if var.is_reduced:
        i = sum(1 for s in el.states if s)
        occ = 0
    else:
        i = sum(1 for s in el.states if s >= 2)
        occ = sum(1 for s in el.states if s == 1)
    return i, sum(el.exps) + occ + i


def describe(g: Graph, var: ComplexVariant, el: BasisElement) -> str:
    """Human-readable monomial, e.g. ``AC^2 (CD.0-AC.1)``."""
    locs = _locals(g, var)
    parts = []
    for e, x in zip(g.edges, el.exps):
        if x:
            parts.append(e if x == 1 else f"{e}^{x}")
    for v, loc, s in zip(g.vertices, locs, el.states):
        if s == 0:
            continue
        if not var.is_reduced and s == 1:
            parts.append("{" + v + "}")
        elif var.is_reduced:
            parts.append(f"({_state_half(var, loc, s)}-{loc.h1})")
        else:
            parts.append(f"[{_state_half(var, loc, s)}]")
    return " ".join(parts) or "1"


def apply_differential(c: ChainVector) -> ChainVector:
    out: dict[BasisElement, object] = {}
    for el, coef in c.terms.items():
        for t, s in _boundary_terms(c.graph, c.variant, el):
            out[t] = out.get(t, 0) + s * coef
    deg = None if c.bidegree is None else (c.bidegree[0] - 1, c.bidegree[1])
    if deg is not None and deg[0] < 0:
        return ChainVector(c.graph, c.variant, None, {}, c.field)
    return ChainVector(c.graph, c.variant, deg, out, c.field)


def multiply_monomial(c: ChainVector, monomial: dict[str, int]) -> ChainVector:
    """Multiply by a product of edges (edge stabilization)."""
    g = c.graph
    add = [0] * len(g.edges)
    for e, x in monomial.items():
        if e not in g.edge_index:
            raise ChainError(f"unknown edge {e!r}")
        add[g.edge_index[e]] += x
    shift = sum(add)
    out = {BasisElement(el.states, tuple(a + b for a, b in zip(el.exps, add))): v
           for el, v in c.terms.items()}
    deg = None if c.bidegree is None else (c.bidegree[0], c.bidegree[1] + shift)
    return ChainVector(g, c.variant, deg, out, c.field)


def _half_positions(var: ComplexVariant, states: Sequence[int]) -> list[int]:
    if var.is_reduced:
        return [n for n, s in enumerate(states) if s]
    return [n for n, s in enumerate(states) if s >= 2]


def external_product(a: ChainVector, b: ChainVector) -> ChainVector:
    """Product of chains supported at disjoint vertex sets, with the Koszul
    sign of shuffling their half/diff generators into vertex order."""
    a._compatible(b)
    out: dict[BasisElement, object] = {}
    for ea, ca in a.terms.items():
        pa = _half_positions(a.variant, ea.states)
        for eb, cb in b.terms.items():
            if any(x and y for x, y in zip(ea.states, eb.states)):
                raise ChainError("external product of chains sharing a vertex")
            pb = _half_positions(b.variant, eb.states)
            inversions = sum(1 for x in pa for y in pb if y < x)
            sign = -1 if inversions % 2 else 1
            st = tuple(x or y for x, y in zip(ea.states, eb.states))
            ex = tuple(x + y for x, y in zip(ea.exps, eb.exps))
            el = BasisElement(st, ex)
            out[el] = out.get(el, 0) + sign * ca * cb
    deg = None
    if a.bidegree is not None and b.bidegree is not None:
        deg = (a.bidegree[0] + b.bidegree[0], a.bidegree[1] + b.bidegree[1])
    return ChainVector(a.graph, a.variant, deg, out, a.field)


# ---------------------------------------------------------------------------
# encoding human-readable terms

_FACTOR = re.compile(
    r"""\(\s*(?P<dp>[^()\s-]+)\s*-\s*(?P<dm>[^()\s]+)\s*\)   # (h-h')
      | \[(?P<half>[^\]\s]+)\]                              # [h]
      | \{(?P<occ>[^}\s]+)\}                                # {v}
      | (?P<edge>[A-Za-z0-9_]+)(?:\^(?P<pow>\d+))?          # e or e^n
    """,
    re.VERBOSE,
)
_COEF = re.compile(r"^\s*(?P<sign>[+-])?\s*(?P<num>\d+(?:/\d+)?)?\s*\*?\s*")


def _parse_term(text: str) -> tuple[Fraction, list[tuple]]:
    m = _COEF.match(text)
    sign = -1 if m.group("sign") == "-" else 1
    coef = Fraction(m.group("num")) if m.group("num") else Fraction(1)
    rest = text[m.end():]
    factors = []
    pos = 0
    while pos < len(rest):
        if rest[pos] in " *\t":
            pos += 1
            continue
        fm = _FACTOR.match(rest, pos)
        if not fm:
            raise ChainError(f"cannot parse {rest[pos:]!r} in term {text!r}")
        if fm.group("dp"):
            factors.append(("diff", fm.group("dp"), fm.group("dm")))
        elif fm.group("half"):
            factors.append(("half", fm.group("half")))
        elif fm.group("occ"):
            factors.append(("occ", fm.group("occ")))
        else:
            factors.append(("edge", fm.group("edge"), int(fm.group("pow") or 1)))
        pos = fm.end()
    return sign * coef, factors


def _expand_term(g: Graph, var: ComplexVariant, coef, factors) -> list[tuple[BasisElement, object]]:
    locs = _locals(g, var)
    vidx = g.vertex_index
    exps = [0] * len(g.edges)
    # per vertex: list of (state, coefficient) alternatives
    local: dict[int, list[tuple[int, int]]] = {}
    order: list[int] = []  # vertex indices of degree-1 factors, as written

    def claim(v: str) -> int:
        vi = vidx[v]
        if vi in local:
            raise ChainError(f"two generators at vertex {v}")
        return vi

    def half_state(vi: int, h: str) -> list[tuple[int, int]]:
        loc = locs[vi]
        if var.is_reduced:
            if h == loc.h1:
                return []
            return [(1 + loc.halves.index(h), 1)]
        return [(2 + loc.halves.index(h), 1)]

    for f in factors:
        kind = f[0]
        if kind == "edge":
            if f[1] not in g.edge_index:
                raise ChainError(f"unknown edge {f[1]!r}")
            exps[g.edge_index[f[1]]] += f[2]
        elif kind == "occ":
            if var.is_reduced:
                raise ChainError("occupied-vertex generators exist only in the full complex")
            if f[1] not in vidx:
                raise ChainError(f"unknown vertex {f[1]!r}")
            local[claim(f[1])] = [(1, 1)]
        elif kind == "half":
            if var.is_reduced:
                raise ChainError("single half-edges are not in the reduced complex; use (h-h')")
            h = f[1]
            if not g.has_half_edge(h):
                raise ChainError(f"unknown half-edge {h!r}")
            vi = claim(g.vertex_of(h))
            local[vi] = half_state(vi, h)
            order.append(vi)
        else:
            hp, hm = f[1], f[2]
            for h in (hp, hm):
                if not g.has_half_edge(h):
                    raise ChainError(f"unknown half-edge {h!r}")
            if g.vertex_of(hp) != g.vertex_of(hm):
                raise ChainError(f"{hp} and {hm} are at different vertices")
            vi = claim(g.vertex_of(hp))
            alt: dict[int, int] = {}
            for s, c in half_state(vi, hp):
                alt[s] = alt.get(s, 0) + c
            for s, c in half_state(vi, hm):
                alt[s] = alt.get(s, 0) - c
            local[vi] = [(s, c) for s, c in alt.items() if c]
            order.append(vi)
    # Koszul sign of sorting the degree-1 factors into vertex order
    inversions = sum(1 for a in range(len(order)) for b in range(a + 1, len(order)) if order[a] > order[b])
    sign = -1 if inversions % 2 else 1
    combos = [((0,) * len(g.vertices), sign * coef)]
    for vi, alts in local.items():
        nxt = []
        for st, c in combos:
            for s, cs in alts:
                lst = list(st)
                lst[vi] = s
                nxt.append((tuple(lst), c * cs))
        combos = nxt
    return [(BasisElement(st, tuple(exps)), c) for st, c in combos]


def encode_chain(g: Graph, var: ComplexVariant, terms: Iterable, field: Field = QQ) -> ChainVector:
    """Build a chain from human-readable terms.

    A term is a string such as ``"-2 AC^2 (CD.0-AC.1)"``: an optional
    rational coefficient, edge powers, half-edge differences ``(h-h')``,
    and, in the full complex only, half-edges ``[h]`` and occupied vertices
    ``{v}``. Generators at different vertices are read left to right and
    reordered with Koszul signs.
    """
    out: dict[BasisElement, object] = {}
    degs = set()
    for term in terms:
        if isinstance(term, str):
            coef, factors = _parse_term(term)
        else:
            coef, factors = term
        n_half = sum(1 for f in factors if f[0] in ("diff", "half"))
        n_occ = sum(1 for f in factors if f[0] == "occ")
        weight = sum(f[2] for f in factors if f[0] == "edge") + n_occ + n_half
        degs.add((n_half, weight))
        for el, c in _expand_term(g, var, coef, factors):
            out[el] = out.get(el, 0) + c
    if len(degs) > 1:
        raise ChainError(f"terms of mixed bidegree {sorted(degs)}")
    deg = degs.pop() if degs else None
    return ChainVector(g, var, deg, out, field)


def matrix_to_triplets(m: SparseMatrix, g: Graph, var: ComplexVariant, i: int, k: int,
                       kind: str = "differential") -> str:
    """Coordinate-triplet text: a ``#`` header then ``row col value`` lines."""
    lines = [
        f"# graph {g.digest}",
        f"# variant {var.tag}",
        f"# map {kind}",
        f"# bidegree {i} {k}",
        f"# field {m.field}",
        f"# shape {m.nrows} {m.ncols}",
    ]
    lines += [f"{r} {c} {v}" for r, c, v in m.triplets()]
    return "\n".join(lines) + "\n"
