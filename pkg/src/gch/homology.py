"""Betti numbers and integral homology of unordered configuration spaces.

Everything is computed from ranks of the differentials of the (reduced, by
default) Świątkowski complex, one bidegree ``(i, k)`` at a time: ``i`` is
the homological degree and ``k`` the number of particles.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

from .complex import (
    REDUCED,
    BasisElement,
    ChainVector,
    ComplexVariant,
    apply_differential,
    basis,
    count_basis,
    differential_matrix,
    stabilization_matrix,
)
from .graph import Graph, GraphError, disjoint_union, explode
from .linalg import (
    QQ,
    ZZ,
    Field,
    LinalgError,
    SparseMatrix,
    kernel_basis,
    matvec,
    quotient_rank,
    rank,
    smith_normal_form,
    solve_in_image,
)

__all__ = [
    "BettiTable",
    "DEFAULT_CAP",
    "ResourceLimitError",
    "check_cap",
    "default_workers",
    "betti",
    "betti_table",
    "integral_homology",
    "is_boundary",
    "boundary_witness",
    "les_check",
    "LESReport",
    "kunneth_check",
    "cycles",
    "euler_characteristic",
]

DEFAULT_CAP = 200_000


class ResourceLimitError(RuntimeError):
    pass


def check_cap(g: Graph, var: ComplexVariant, i: int, k: int, cap: int | None) -> None:
    if cap is None:
        return
    for deg in (i, i + 1):
        n = count_basis(g, var, deg, k)
        if n > cap:
            raise ResourceLimitError(
                f"basis at ({deg},{k}) has {n} elements, over the cap of {cap}; "
                "lower --kmax/--imax or raise --cap"
            )


@lru_cache(maxsize=4096)
def _rank(g: Graph, var: ComplexVariant, field: Field, i: int, k: int) -> int:
    # rank of d: (i, k) -> (i - 1, k)
    if i < 1 or k < i or not len(basis(g, var, i, k)):
        return 0
    return rank(differential_matrix(g, var, i, k, field))


@lru_cache(maxsize=4096)
def _snf(g: Graph, var: ComplexVariant, i: int, k: int) -> tuple[int, tuple[int, ...]]:
    if i < 1 or k < i or not len(basis(g, var, i, k)):
        return 0, ()
    res = smith_normal_form(differential_matrix(g, var, i, k, ZZ))
    return res.rank, tuple(res.torsion())


def betti(g: Graph, field: Field = QQ, i: int = 0, k: int = 0,
          var: ComplexVariant = REDUCED, cap: int | None = None) -> int:
    """``dim H_i(B_k(g); field)``."""
    if not field.is_field:
        raise LinalgError("betti needs a field; use integral_homology over Z")
    if i < 0 or k < 0:
        raise ValueError("degrees must be non-negative")
    check_cap(g, var, i, k, cap)
    dim = len(basis(g, var, i, k))
    return dim - _rank(g, var, field, i, k) - _rank(g, var, field, i + 1, k)


def integral_homology(g: Graph, i: int, k: int, var: ComplexVariant = REDUCED,
                      cap: int | None = None) -> tuple[int, list[int]]:
    """``H_i(B_k(g); Z)`` as (free rank, torsion invariant factors > 1)."""
    check_cap(g, var, i, k, cap)
    dim = len(basis(g, var, i, k))
    r_out, _ = _snf(g, var, i, k)
    r_in, torsion = _snf(g, var, i + 1, k)
    return dim - r_out - r_in, list(torsion)


def euler_characteristic(g: Graph, k: int, var: ComplexVariant = REDUCED) -> int:
    return sum((-1) ** i * len(basis(g, var, i, k)) for i in range(len(g.vertices) + 1))


# ---------------------------------------------------------------------------
# tables


@dataclass
class BettiTable:
    graph: str  # digest of the graph
    field: str
    entries: dict[tuple[int, int], int] = field(default_factory=dict)
    torsion: dict[tuple[int, int], list[int]] | None = None

    def __getitem__(self, ik: tuple[int, int]) -> int:
        return self.entries[ik]

    def row(self, i: int) -> list[int]:
        ks = sorted(k for (j, k) in self.entries if j == i)
        return [self.entries[(i, k)] for k in ks]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["graph", "field", "i", "k", "betti", "torsion"])
        for (i, k) in sorted(self.entries):
            tors = (self.torsion or {}).get((i, k), [])
            w.writerow([self.graph, self.field, i, k, self.entries[(i, k)], ";".join(map(str, tors))])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "graph": self.graph,
            "field": self.field,
            "cells": [
                {"i": i, "k": k, "betti": self.entries[(i, k)],
                 "torsion": list((self.torsion or {}).get((i, k), []))}
                for (i, k) in sorted(self.entries)
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "BettiTable":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty table")
        t = cls(rows[0]["graph"], rows[0]["field"], {}, {})
        for r in rows:
            ik = (int(r["i"]), int(r["k"]))
            t.entries[ik] = int(r["betti"])
            if r["torsion"]:
                t.torsion[ik] = [int(x) for x in r["torsion"].split(";")]
        return t


def _cell(args):
    g, field, i, k, var, cap = args
    if field.kind == "Z":
        return (i, k), integral_homology(g, i, k, var, cap)
    return (i, k), (betti(g, field, i, k, var, cap), [])


def betti_table(g: Graph, field: Field = QQ, i_max: int = 0, k_max: int = 0,
                var: ComplexVariant = REDUCED, workers: int = 1,
                cap: int | None = None) -> BettiTable:
    """Betti numbers on the rectangle ``0 <= i <= i_max``, ``0 <= k <= k_max``.

    Over Z the ``entries`` hold free ranks and ``torsion`` the invariant
    factors. Cells are independent and may be farmed out to ``workers``
    processes.
    """
    cells = [(g, field, i, k, var, cap) for i in range(i_max + 1) for k in range(k_max + 1)]
    if cap is not None:
        for _, _, i, k, _, _ in cells:
            check_cap(g, var, i, k, cap)
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell, cells))
    else:
        results = [_cell(c) for c in cells]
    table = BettiTable(g.digest, str(field), {}, {} if field.kind == "Z" else None)
    for ik, (b, tors) in results:
        table.entries[ik] = b
        if table.torsion is not None and tors:
            table.torsion[ik] = list(tors)
    return table


def default_workers() -> int:
    env = os.environ.get("GCH_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# boundaries


def boundary_witness(c: ChainVector) -> list | None:
    """A chain ``b`` with ``d b = c`` (coordinates), or ``None``."""
    if not c.field.is_field:
        raise LinalgError("boundary tests need a field")
    if c.is_zero():
        return []
    if not apply_differential(c).is_zero():
        raise LinalgError("chain is not a cycle")
    i, k = c.bidegree
    up = differential_matrix(c.graph, c.variant, i + 1, k, c.field)
    return solve_in_image(up, c.to_dense())


def is_boundary(c: ChainVector) -> bool:
    return boundary_witness(c) is not None


def cycles(g: Graph, var: ComplexVariant, field: Field, i: int, k: int) -> list[list]:
    """A basis of the cycles at ``(i, k)``."""
    n = len(basis(g, var, i, k))
    if i == 0:
        return [[1 if r == c else 0 for r in range(n)] for c in range(n)]
    return kernel_basis(differential_matrix(g, var, i, k, field))


# ---------------------------------------------------------------------------
# vertex explosion sequence


@dataclass
class LESReport:
    vertex: str
    i: int
    k: int
    field: str
    dims: dict[str, int]
    checks: dict[str, bool]

    @property
    def exact(self) -> bool:
        return all(self.checks.values())


def _map_matrix(src_elems, tgt_index, nrows, image, field) -> SparseMatrix:
    cols = []
    for el in src_elems:
        col = {}
        for t, c in image(el):
            r = tgt_index[t]
            col[r] = col.get(r, 0) + c
        cols.append(col)
    return SparseMatrix.from_columns(nrows, cols, field)


class _Homology:
    """Cycle basis and boundary matrix of one cell."""

    def __init__(self, g: Graph, var: ComplexVariant, field: Field, i: int, k: int):
        self.g, self.var, self.field, self.i, self.k = g, var, field, i, k
        if i < 0:  # the zero group past the end of the sequence
            self.n, self.z, self.b, self.dim = 0, [], SparseMatrix.zeros(0, 0, field), 0
            return
        self.n = len(basis(g, var, i, k)) if k >= 0 else 0
        self.z = cycles(g, var, field, i, k) if self.n else []
        m = len(basis(g, var, i + 1, k))
        self.b = (differential_matrix(g, var, i + 1, k, field) if m
                  else SparseMatrix.zeros(self.n, 0, field))
        self.dim = len(self.z) - (rank(self.b) if m else 0)

    def image_rank(self, vectors) -> int:
        return quotient_rank(vectors, self.b)


def les_check(g: Graph, v: str, i: int, k: int, field: Field = QQ) -> LESReport:
    """Check exactness of the vertex-explosion sequence at a bivalent vertex

        H_i B_{k-1}(G_v) -(e-e')-> H_i B_k(G_v) -iota-> H_i B_k(G)
            -psi-> H_{i-1} B_{k-1}(G_v) -(e-e')-> H_{i-1} B_k(G_v)

    at its three interior spots, computing every map on chains.
    """
    if g.degree(v) != 2:
        raise GraphError(f"vertex {v!r} is not bivalent")
    if i < 0 or k < 1:
        raise ValueError("need i >= 0 and k >= 1")
    h, h2 = g.half_edges_at(v)
    e, e2 = g.edge_of(h), g.edge_of(h2)
    gv = explode(g, [v])
    var = ComplexVariant.reduced({v: h2})  # diff state at v is h - h'
    var_v = REDUCED
    vpos = g.vertex_index[v]

    def to_g(states):
        # states of G_v (v replaced by two stubs, both empty) -> states of G
        return states[:vpos] + (0,) + states[vpos + 2:]

    def to_gv(states):
        return states[:vpos] + (0, 0) + states[vpos + 1:]

    def iota(el):
        yield BasisElement(to_g(el.states), el.exps), 1

    def psi(el):
        if el.states[vpos] == 0:
            return
        before = sum(1 for s in el.states[:vpos] if s)
        st = el.states[:vpos] + (0,) + el.states[vpos + 1:]
        yield BasisElement(to_gv(st), el.exps), (-1 if before % 2 else 1)

    def stab_diff(deg, wt):
        a = stabilization_matrix(gv, var_v, e, deg, wt, field)
        b = stabilization_matrix(gv, var_v, e2, deg, wt, field)
        cols = []
        for ca, cb in zip(a.cols, b.cols):
            col = dict(ca)
            for r, x in cb.items():
                col[r] = col.get(r, 0) - x
            cols.append(col)
        return SparseMatrix.from_columns(a.nrows, cols, field)

    HA = _Homology(gv, var_v, field, i, k - 1)
    HB = _Homology(gv, var_v, field, i, k)
    HC = _Homology(g, var, field, i, k)
    HD = _Homology(gv, var_v, field, i - 1, k - 1)
    HE = _Homology(gv, var_v, field, i - 1, k)

    f_ab = stab_diff(i, k - 1)
    src_b = basis(gv, var_v, i, k)
    f_bc = _map_matrix(src_b.elements, basis(g, var, i, k).index, HC.n, iota, field)
    src_c = basis(g, var, i, k)
    if i > 0:
        f_cd = _map_matrix(src_c.elements, basis(gv, var_v, i - 1, k - 1).index, HD.n, psi, field)
        f_de = stab_diff(i - 1, k - 1)
    else:
        f_cd = SparseMatrix.zeros(0, HC.n, field)
        f_de = SparseMatrix.zeros(0, 0, field)

    def push(m, vecs):
        return [matvec(m, z) for z in vecs]

    im_ab = HB.image_rank(push(f_ab, HA.z))
    im_bc = HC.image_rank(push(f_bc, HB.z))
    im_cd = HD.image_rank(push(f_cd, HC.z))
    im_de = HE.image_rank(push(f_de, HD.z))

    checks = {
        # composites vanish on homology
        "iota_after_stab": HC.image_rank(push(f_bc, push(f_ab, HA.z))) == 0,
        "psi_after_iota": HD.image_rank(push(f_cd, push(f_bc, HB.z))) == 0,
        "stab_after_psi": HE.image_rank(push(f_de, push(f_cd, HC.z))) == 0,
        # and the kernels are no larger than the images
        "exact_at_H(G_v)": im_ab == HB.dim - im_bc,
        "exact_at_H(G)": im_bc == HC.dim - im_cd,
        "exact_at_H(G_v)[i-1]": im_cd == HD.dim - im_de,
        "dim_split": HC.dim == im_bc + im_cd,
    }
    dims = {
        "H_i(B_{k-1}(G_v))": HA.dim,
        "H_i(B_k(G_v))": HB.dim,
        "H_i(B_k(G))": HC.dim,
        "H_{i-1}(B_{k-1}(G_v))": HD.dim,
        "H_{i-1}(B_k(G_v))": HE.dim,
        "im(e-e')": im_ab,
        "im(iota)": im_bc,
        "im(psi)": im_cd,
        "im(e-e')[i-1]": im_de,
    }
    return LESReport(v, i, k, str(field), dims, checks)


# ---------------------------------------------------------------------------
# Kunneth


def kunneth_check(g1: Graph, g2: Graph, field: Field = QQ, i_max: int = 1, k_max: int = 3,
                  var: ComplexVariant = REDUCED) -> bool:
    """The table of ``g1 + g2`` is the bigraded convolution of the two
    tables."""
    t1 = betti_table(g1, field, i_max, k_max, var)
    t2 = betti_table(g2, field, i_max, k_max, var)
    tu = betti_table(disjoint_union(g1, g2), field, i_max, k_max, var)
    for i in range(i_max + 1):
        for k in range(k_max + 1):
            conv = sum(t1[(a, b)] * t2[(i - a, k - b)]
                       for a in range(i + 1) for b in range(k + 1))
            if conv != tu[(i, k)]:
                return False
    return True
