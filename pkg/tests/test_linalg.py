from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from sympy import GF as SGF, ZZ as SZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors

from gch.linalg import (
    GF,
    QQ,
    ZZ,
    Field,
    LinalgError,
    SparseMatrix,
    kernel_basis,
    matvec,
    parse_field,
    quotient_rank,
    rank,
    smith_normal_form,
    solve_in_image,
)

from conftest import sympy_rank

small_ints = st.integers(min_value=-4, max_value=4)


def int_matrices(max_rows=7, max_cols=7):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small_ints, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def sparse_int_matrices():
    # mostly zeros, like boundary matrices
    entry = st.one_of(st.just(0), st.just(0), st.just(0), small_ints)
    return st.integers(1, 9).flatmap(
        lambda r: st.integers(1, 9).flatmap(
            lambda c: st.lists(st.lists(entry, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def sympy_invariants(rows):
    dm = DomainMatrix([[SZZ(x) for x in r] for r in rows], (len(rows), len(rows[0])), SZZ)
    return [int(x) for x in invariant_factors(dm) if x]


def sympy_rank_mod(rows, p):
    K = SGF(p)
    return DomainMatrix([[K(x) for x in r] for r in rows], (len(rows), len(rows[0])), K).rank()


def test_rank_examples():
    assert rank(SparseMatrix.zeros(3, 5)) == 0
    assert rank(SparseMatrix.from_dense([[1 if i == j else 0 for j in range(6)] for i in range(6)])) == 6
    assert rank(SparseMatrix.from_dense([[1, 2], [2, 4]])) == 1
    with pytest.raises(LinalgError):
        rank(SparseMatrix.from_dense([[1]], ZZ))


def test_kernel_examples():
    eye = SparseMatrix.from_dense([[1, 0], [0, 1]])
    assert kernel_basis(eye) == []
    assert len(kernel_basis(SparseMatrix.zeros(2, 3))) == 3
    (v,) = kernel_basis(SparseMatrix.from_dense([[1, 1]]))
    assert v[0] == -v[1] != 0


def test_solve_examples():
    m = SparseMatrix.from_dense([[1, 0], [0, 1]])
    assert solve_in_image(m, [0, 0]) == [0, 0]
    assert solve_in_image(m, [3, Fraction(1, 2)]) == [3, Fraction(1, 2)]
    assert solve_in_image(SparseMatrix.from_dense([[2]]), [1]) == [Fraction(1, 2)]
    assert solve_in_image(SparseMatrix.from_dense([[1], [1]]), [1, 0]) is None
    with pytest.raises(LinalgError):
        solve_in_image(m, [1])


def test_snf_examples():
    assert smith_normal_form(SparseMatrix.from_dense([[1, 0], [0, 1]], ZZ)).invariant_factors == [1, 1]
    assert smith_normal_form(SparseMatrix.from_dense([[2, 4], [6, 8]], ZZ)).invariant_factors == [2, 4]
    assert smith_normal_form(SparseMatrix.zeros(3, 2, ZZ)).invariant_factors == []
    r = smith_normal_form(SparseMatrix.from_dense([[2, 0, 0], [0, 3, 0], [0, 0, 0]], ZZ))
    assert r.invariant_factors == [1, 6] and r.rank == 2 and r.torsion() == [6]


def test_quotient_rank_examples():
    b = SparseMatrix.from_dense([[1], [1], [0]])
    assert quotient_rank([], b) == 0
    assert quotient_rank([[2, 2, 0]], b) == 0
    assert quotient_rank([[1, -1, 0]], b) == 1
    d = SparseMatrix.from_dense([[1, 1, 0]])
    with pytest.raises(LinalgError):
        quotient_rank([[1, 0, 0]], b, d)


def test_fields():
    assert parse_field("q") == QQ
    assert parse_field("fp:7") == GF(7)
    assert parse_field("z") == ZZ
    with pytest.raises(ValueError):
        parse_field("fp:8")
    with pytest.raises(ValueError):
        Field("F", 2**64 + 13)
    assert GF(5).coerce(Fraction(1, 2)) == 3


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_rank_q_matches_sympy(rows):
    assert rank(SparseMatrix.from_dense(rows)) == sympy_rank(rows)


@settings(max_examples=150, deadline=None)
@given(sparse_int_matrices(), st.sampled_from([2, 3, 5, 7]))
def test_rank_mod_p_matches_sympy(rows, p):
    assert rank(SparseMatrix.from_dense(rows, GF(p))) == sympy_rank_mod(rows, p)


@settings(max_examples=150, deadline=None)
@given(sparse_int_matrices())
def test_snf_matches_sympy(rows):
    res = smith_normal_form(SparseMatrix.from_dense(rows, ZZ))
    assert res.invariant_factors == sympy_invariants(rows)
    assert all(b % a == 0 for a, b in zip(res.invariant_factors, res.invariant_factors[1:]))


@settings(max_examples=100, deadline=None)
@given(int_matrices(), st.sampled_from([2, 3, 5]))
def test_rank_universal_coefficients(rows, p):
    # rank over F_p drops exactly by the invariant factors p divides
    res = smith_normal_form(SparseMatrix.from_dense(rows, ZZ))
    rq = rank(SparseMatrix.from_dense(rows))
    rp = rank(SparseMatrix.from_dense(rows, GF(p)))
    assert rq == res.rank
    assert rp == rq - sum(1 for d in res.invariant_factors if d % p == 0)


@settings(max_examples=100, deadline=None)
@given(int_matrices())
def test_rank_independent_of_column_order(rows):
    m = SparseMatrix.from_dense(rows)
    rev = SparseMatrix.from_columns(m.nrows, list(reversed(m.cols)), QQ)
    tr = SparseMatrix.from_dense([list(c) for c in zip(*rows)])
    assert rank(m) == rank(rev) == rank(tr)


@settings(max_examples=100, deadline=None)
@given(int_matrices(), st.sampled_from(["Q", 3]))
def test_kernel_is_kernel(rows, f):
    field = QQ if f == "Q" else GF(f)
    m = SparseMatrix.from_dense(rows, field)
    ker = kernel_basis(m)
    assert len(ker) == m.ncols - rank(m)
    for v in ker:
        assert not any(matvec(m, v))
    if ker:
        assert rank(SparseMatrix.from_dense([list(r) for r in zip(*ker)], field)) == len(ker)


@settings(max_examples=100, deadline=None)
@given(int_matrices(), st.lists(small_ints, min_size=7, max_size=7))
def test_solve_in_image_round_trip(rows, coeffs):
    m = SparseMatrix.from_dense(rows)
    x = coeffs[: m.ncols]
    v = matvec(m, x)
    sol = solve_in_image(m, v)
    assert sol is not None and matvec(m, sol) == v
    # a unit vector is in the image exactly when appending it keeps the rank
    for r in range(m.nrows):
        e = [1 if j == r else 0 for j in range(m.nrows)]
        grows = sympy_rank([row + [e[n]] for n, row in enumerate(rows)]) > rank(m)
        assert (solve_in_image(m, e) is None) == grows


def test_large_entries_stay_exact():
    big = 10**30 + 7
    m = SparseMatrix.from_dense([[big, 1], [1, 0]], ZZ)
    assert smith_normal_form(m).invariant_factors == [1, 1]
    m = SparseMatrix.from_dense([[big, 0], [0, big * 2]], ZZ)
    assert smith_normal_form(m).invariant_factors == [big, 2 * big]
    assert rank(SparseMatrix.from_dense([[big, big + 1], [big - 1, big]])) == 2
