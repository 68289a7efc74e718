from __future__ import annotations

import pytest
import sympy

from gch.complex import (
    FULL,
    REDUCED,
    ChainError,
    ComplexVariant,
    apply_differential,
    count_basis,
    differential_matrix,
    encode_chain,
    enumerate_basis,
    external_product,
    inclusion_matrix,
    matrix_to_triplets,
    multiply_monomial,
    stabilization_matrix,
)
from gch.linalg import ZZ, matmul, matvec, rank

from conftest import graph

SMALL = ["s3", "s4", "htree", "banana4", "triangle", "lollipop", "lollipop_sub", "theta3",
         "theta3sub", "interval", "path3"]
LARGE = ["fig5", "k5", "tree7", "s5"]


def generating_count(g, var, i, k):
    """Coefficient of x^i t^k in the product of per-vertex state series and
    one geometric series per edge."""
    x, t = sympy.symbols("x t")
    f = sympy.Integer(1)
    for v in g.vertices:
        d = g.degree(v)
        f *= (1 + (d - 1) * x * t) if var.is_reduced else (1 + t + d * x * t)
    f *= sum(t**j for j in range(k + 1)) ** len(g.edges)
    poly = sympy.Poly(sympy.expand(f), x, t)
    return int(poly.coeff_monomial(x**i * t**k))


def test_basis_examples():
    s3 = graph("s3")
    assert len(enumerate_basis(s3, REDUCED, 1, 1)) == 2
    assert len(enumerate_basis(graph("fig5"), REDUCED, 0, 0)) == 1
    assert len(enumerate_basis(graph("interval"), FULL, 0, 2)) == 4
    assert enumerate_basis(s3, REDUCED, 3, 2) == []
    assert enumerate_basis(s3, REDUCED, 2, 5) == []  # only one vertex can host a difference


def test_basis_order_is_lexicographic():
    for name in ("theta3", "lollipop"):
        for var in (FULL, REDUCED):
            els = enumerate_basis(graph(name), var, 1, 3)
            assert els == sorted(els)


@pytest.mark.parametrize("name", SMALL + ["fig5", "k5"])
@pytest.mark.parametrize("var", [FULL, REDUCED], ids=["full", "reduced"])
def test_counts_agree_with_generating_function(name, var):
    g = graph(name)
    for i in range(3):
        for k in range(5):
            n = count_basis(g, var, i, k)
            assert n == len(enumerate_basis(g, var, i, k)) == generating_count(g, var, i, k)


@pytest.mark.parametrize("name", SMALL)
@pytest.mark.parametrize("var", [FULL, REDUCED], ids=["full", "reduced"])
def test_d_squared_zero(name, var):
    g = graph(name)
    for i in range(2, 4):
        for k in range(9):
            a = differential_matrix(g, var, i - 1, k, ZZ)
            b = differential_matrix(g, var, i, k, ZZ)
            assert matmul(a, b).is_zero()


@pytest.mark.parametrize("name", LARGE)
def test_d_squared_zero_large(name):
    g = graph(name)
    top = 5 if name == "k5" else 7
    for var in (FULL, REDUCED):
        for i in range(2, 4):
            for k in range(top if var is FULL else top + 2):
                assert matmul(differential_matrix(g, var, i - 1, k, ZZ),
                              differential_matrix(g, var, i, k, ZZ)).is_zero()


def test_s3_reduced_differential():
    d = differential_matrix(graph("s3"), REDUCED, 1, 1)
    assert d.shape == (3, 2)
    assert rank(d) == 2
    with pytest.raises(ChainError):
        differential_matrix(graph("s3"), REDUCED, 0, 1)


@pytest.mark.parametrize("name", SMALL)
def test_augmentation_kills_degree_one(name):
    g = graph(name)
    for k in range(1, 5):
        d = differential_matrix(g, FULL, 1, k, ZZ)
        assert all(sum(col.values()) == 0 for col in d.cols)


@pytest.mark.parametrize("name", ["s3", "theta3", "lollipop", "htree"])
@pytest.mark.parametrize("var", [FULL, REDUCED], ids=["full", "reduced"])
def test_stabilization_commutes(name, var):
    g = graph(name)
    for e in g.edges:
        for i in range(1, 3):
            for k in range(5):
                left = matmul(stabilization_matrix(g, var, e, i - 1, k, ZZ), differential_matrix(g, var, i, k, ZZ))
                right = matmul(differential_matrix(g, var, i, k + 1, ZZ), stabilization_matrix(g, var, e, i, k, ZZ))
                assert left.cols == right.cols


def test_stabilization_examples():
    g = graph("s3")
    m = stabilization_matrix(g, REDUCED, "cb", 0, 0)
    assert m.shape == (3, 1) and m.nnz == 1
    m = stabilization_matrix(g, REDUCED, "ca", 1, 1)
    assert m.shape[1] == 2 and rank(m) == 2


@pytest.mark.parametrize("name", ["s3", "s4", "theta3", "lollipop", "lollipop_sub", "banana4"])
def test_inclusion_is_chain_map(name):
    g = graph(name)
    for var in (REDUCED, ComplexVariant.reduced({v: g.half_edges_at(v)[-1] for v in g.vertices})):
        for i in range(1, 3):
            for k in range(5):
                a = matmul(differential_matrix(g, FULL, i, k, ZZ), inclusion_matrix(g, var, i, k, ZZ))
                b = matmul(inclusion_matrix(g, var, i - 1, k, ZZ), differential_matrix(g, var, i, k, ZZ))
                assert a.cols == b.cols


def test_encode_chain_examples():
    g = graph("s3")
    zero = encode_chain(g, REDUCED, [])
    assert zero.is_zero()
    unit = encode_chain(g, REDUCED, ["(cb.0-ca.0)"])
    assert list(unit.terms.values()) == [1] and unit.bidegree == (1, 1)
    assert encode_chain(g, REDUCED, ["2 ca (cb.0-ca.0)", "-2 ca (cb.0-ca.0)"]).is_zero()
    with pytest.raises(ChainError):
        encode_chain(g, REDUCED, ["ca", "(cb.0-ca.0)"])
    with pytest.raises(ChainError):
        encode_chain(g, REDUCED, ["nope"])
    with pytest.raises(ChainError):
        encode_chain(g, REDUCED, ["[ca.0]"])


def test_encode_full_and_differential():
    g = graph("interval")
    c = encode_chain(g, FULL, ["[ab.0]"])
    d = apply_differential(c)
    assert d == encode_chain(g, FULL, ["ab", "-{a}"])


def test_reduced_difference_expands_through_privileged():
    g = graph("s3")
    lhs = encode_chain(g, REDUCED, ["(cb.0-cd.0)"])
    rhs = encode_chain(g, REDUCED, ["(cb.0-ca.0)", "-(cd.0-ca.0)"])
    assert lhs == rhs


def test_koszul_sign_of_reordering():
    g = graph("htree")
    a = encode_chain(g, REDUCED, ["(ua.0-m.0) (vc.0-m.1)"])
    b = encode_chain(g, REDUCED, ["(vc.0-m.1) (ua.0-m.0)"])
    assert a == -b
    x = encode_chain(g, REDUCED, ["(ua.0-m.0)"])
    y = encode_chain(g, REDUCED, ["(vc.0-m.1)"])
    assert external_product(x, y) == a
    assert external_product(y, x) == b


def test_multiply_monomial_matches_stabilization():
    g = graph("theta3")
    c = encode_chain(g, REDUCED, ["L (M.0-L.0)", "M (R.1-L.1)"])
    m = stabilization_matrix(g, REDUCED, "R", 1, 2)
    assert matvec(m, c.to_dense()) == multiply_monomial(c, {"R": 1}).to_dense()


def test_triplet_export_golden():
    g = graph("s3")
    text = matrix_to_triplets(differential_matrix(g, REDUCED, 1, 1), g, REDUCED, 1, 1)
    assert text == (
        f"# graph {g.digest}\n# variant reduced\n# map differential\n# bidegree 1 1\n"
        "# field Q\n# shape 3 2\n0 1 1\n1 0 1\n2 0 -1\n2 1 -1\n"
    )
