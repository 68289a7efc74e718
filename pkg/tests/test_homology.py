from __future__ import annotations

import pytest
from sympy import ZZ as SZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors

from gch.complex import FULL, REDUCED, apply_differential, differential_matrix, encode_chain
from gch.graph import disjoint_union, subdivide
from gch.homology import (
    BettiTable,
    ResourceLimitError,
    betti,
    betti_table,
    boundary_witness,
    cycles,
    euler_characteristic,
    integral_homology,
    is_boundary,
    kunneth_check,
    les_check,
)
from gch.linalg import GF, QQ, ZZ, LinalgError, matvec, rank, smith_normal_form

from conftest import discrete_betti, graph


def test_betti_examples():
    assert [betti(graph("banana4"), QQ, i, 3) for i in range(3)] == [1, 6, 1]
    assert betti(graph("s3"), QQ, 1, 2) == 1
    assert betti(graph("triangle"), QQ, 1, 3) == 1
    assert betti(graph("s3"), QQ, 0, 0) == 1
    assert betti(graph("s3"), QQ, 2, 2) == 0
    with pytest.raises(LinalgError):
        betti(graph("s3"), ZZ, 1, 2)
    with pytest.raises(ValueError):
        betti(graph("s3"), QQ, -1, 2)


# small cases only: the cube complex grows quickly with k
@pytest.mark.parametrize("name, k", [("s3", 2), ("triangle", 2), ("banana4", 2), ("theta3", 2),
                                     ("lollipop", 2), ("s3", 3)])
def test_betti_against_discrete_model(name, k):
    g = graph(name)
    ours = [betti(g, QQ, i, k) for i in range(k + 1)]
    theirs = discrete_betti(g, k)
    theirs += [0] * (len(ours) - len(theirs))
    assert ours == theirs


@pytest.mark.parametrize("name", ["s3", "theta3", "lollipop", "k5", "tree7"])
def test_euler_characteristic_is_variant_independent(name):
    g = graph(name)
    for k in range(5):
        chi = euler_characteristic(g, k, REDUCED)
        assert chi == euler_characteristic(g, k, FULL)
        assert chi == sum((-1) ** i * betti(g, QQ, i, k) for i in range(len(g.vertices) + 1))


def test_field_independence_on_planar_graphs():
    for name in ("banana4", "theta3", "fig5"):
        g = graph(name)
        for k in range(4):
            for i in range(3):
                b = betti(g, QQ, i, k)
                assert betti(g, GF(2), i, k) == b == betti(g, GF(3), i, k)


def test_k5_torsion_and_universal_coefficients():
    g = graph("k5")
    free, tors = integral_homology(g, 1, 2)
    assert free == betti(g, QQ, 1, 2) == 6 and tors == [2]
    assert betti(g, GF(2), 1, 2) == 7
    assert betti(g, GF(3), 1, 2) == 6


def test_snf_of_boundary_matrix_matches_sympy():
    d = differential_matrix(graph("k5"), REDUCED, 2, 2, ZZ)
    dense = d.to_dense()
    dm = DomainMatrix([[SZZ(x) for x in r] for r in dense], d.shape, SZZ)
    assert smith_normal_form(d).invariant_factors == [int(x) for x in invariant_factors(dm) if x]


def test_betti_table_examples():
    t = betti_table(graph("s3"), QQ, 1, 4)
    assert t[(1, 2)] == 1
    assert t.row(1) == [0, 0, 1, 3, 6]
    empty = betti_table(graph("s3"), QQ, -1, -1)
    assert empty.to_csv() == "graph,field,i,k,betti,torsion\n"


def test_betti_table_parallel_matches_serial():
    g = graph("htree")
    a = betti_table(g, QQ, 2, 5, workers=1)
    b = betti_table(g, QQ, 2, 5, workers=3)
    assert a.to_csv() == b.to_csv()


def test_table_csv_round_trip():
    t = betti_table(graph("k5"), ZZ, 1, 2)
    assert t.torsion == {(1, 2): [2]}
    back = BettiTable.from_csv(t.to_csv())
    assert back.entries == t.entries and back.torsion == t.torsion
    assert back.to_csv() == t.to_csv()


def test_resource_cap():
    with pytest.raises(ResourceLimitError):
        betti(graph("k5"), QQ, 2, 6, cap=100)
    with pytest.raises(ResourceLimitError):
        betti_table(graph("k5"), ZZ, 2, 6, cap=100)


def test_boundaries():
    g = graph("s3")
    star = encode_chain(g, REDUCED, ["cd (cb.0-ca.0)", "cb (ca.0-cd.0)", "ca (cd.0-cb.0)"])
    assert apply_differential(star).is_zero()
    assert not is_boundary(star)
    assert boundary_witness(encode_chain(g, REDUCED, [])) == []
    with pytest.raises(LinalgError):
        is_boundary(encode_chain(g, REDUCED, ["ca (cb.0-ca.0)"]))
    # a boundary by construction, with a checked witness
    c = apply_differential(encode_chain(graph("htree"), REDUCED, ["(ua.0-m.0) (vc.0-m.1)"]))
    w = boundary_witness(c)
    assert w is not None
    assert matvec(differential_matrix(c.graph, REDUCED, 2, 2, QQ), w) == c.to_dense()


def test_cycles_span_kernel():
    g = graph("theta3")
    d = differential_matrix(g, REDUCED, 1, 3, QQ)
    z = cycles(g, REDUCED, QQ, 1, 3)
    assert len(z) == d.ncols - rank(d)
    assert all(not any(matvec(d, v)) for v in z)


@pytest.mark.parametrize("name, v", [("lollipop_sub", "p"), ("lollipop_sub", "q"),
                                     ("theta3sub", "m"), ("path3", "m")])
def test_vertex_explosion_sequence_is_exact(name, v):
    for i in range(3):
        for k in range(1, 5):
            rep = les_check(graph(name), v, i, k)
            assert rep.exact, rep


def test_les_check_errors():
    with pytest.raises(Exception, match="bivalent"):
        les_check(graph("s3"), "c", 1, 2)
    with pytest.raises(ValueError):
        les_check(graph("path3"), "m", 1, 0)


def test_les_check_over_finite_field():
    assert les_check(graph("theta3sub"), "m", 1, 3, GF(2)).exact


def test_kunneth():
    assert kunneth_check(graph("interval"), graph("interval"), QQ, 1, 4)
    assert betti(disjoint_union(graph("interval"), graph("interval")), QQ, 0, 4) == 5
    assert kunneth_check(graph("triangle"), graph("triangle"), QQ, 2, 3)
    assert kunneth_check(graph("s3"), graph("triangle"), QQ, 2, 3)


def test_variants_and_subdivision_agree_small():
    for name in ("s3", "theta3", "lollipop", "banana4"):
        g = graph(name)
        sub, _, _ = subdivide(g, g.edges[0])
        for i in range(3):
            for k in range(5):
                b = betti(g, QQ, i, k, REDUCED)
                assert b == betti(g, QQ, i, k, FULL) == betti(sub, QQ, i, k, REDUCED)
