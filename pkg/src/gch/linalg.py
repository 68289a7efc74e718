"""Exact sparse linear algebra over Q, F_p and Z.

Matrices are stored column-wise as ``{row: value}`` dicts. Values are Python
ints (reduced into ``[0, p)`` over F_p) or ``Fraction`` over Q; nothing here
ever touches floating point.

Rank and Smith form share one right-looking elimination kernel
(:func:`_schur_eliminate`): it repeatedly picks a unit pivot of low Markowitz
cost and takes the Schur complement. Over F_p every nonzero entry is a unit;
over Z and Q only +-1 qualifies, and whatever survives is finished densely
(rational elimination for Q, a Smith reduction for Z).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, NamedTuple, Sequence

__all__ = [
    "Field",
    "QQ",
    "ZZ",
    "GF",
    "parse_field",
    "SparseMatrix",
    "SNFResult",
    "LinalgError",
    "rank",
    "kernel_basis",
    "solve_in_image",
    "smith_normal_form",
    "quotient_rank",
    "matvec",
    "matmul",
]


class LinalgError(ValueError):
    pass


@dataclass(frozen=True)
class Field:
    """Coefficient ring tag: ``"Q"``, ``"Z"`` or ``"F"`` with a prime ``p``."""

    kind: str
    p: int = 0

    def __post_init__(self):
        if self.kind not in ("Q", "Z", "F"):
            raise ValueError(f"unknown coefficient ring {self.kind!r}")
        if self.kind == "F":
            if not (2 <= self.p < 2**63) or not _is_prime(self.p):
                raise ValueError(f"{self.p} is not a word-sized prime")

    @property
    def is_field(self) -> bool:
        return self.kind != "Z"

    def __str__(self) -> str:
        return {"Q": "Q", "Z": "Z"}.get(self.kind, f"F{self.p}")

    def cli_name(self) -> str:
        return {"Q": "q", "Z": "z"}.get(self.kind, f"fp:{self.p}")

    def coerce(self, x):
        if self.kind == "F":
            if isinstance(x, Fraction):
                return x.numerator * pow(x.denominator, -1, self.p) % self.p
            return int(x) % self.p
        if self.kind == "Z":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise LinalgError(f"{x} is not an integer")
                return x.numerator
            return int(x)
        if isinstance(x, Fraction):
            return x.numerator if x.denominator == 1 else x
        return int(x)

    def neg(self, x):
        return (-x) % self.p if self.kind == "F" else -x


QQ = Field("Q")
ZZ = Field("Z")


def GF(p: int) -> Field:
    return Field("F", p)


def parse_field(text: str) -> Field:
    """``q`` | ``z`` | ``fp:P`` (also ``Q``, ``Z``, ``F7``, ``GF7``)."""
    t = text.strip().lower()
    if t in ("q", "qq", "rationals"):
        return QQ
    if t in ("z", "zz", "integers"):
        return ZZ
    for prefix in ("fp:", "gf", "f"):
        if t.startswith(prefix) and t[len(prefix):].isdigit():
            return GF(int(t[len(prefix):]))
    raise ValueError(f"unknown field selector {text!r}")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:  # deterministic for n < 3.3e24
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass
class SparseMatrix:
    nrows: int
    ncols: int
    cols: list[dict[int, object]]
    field: Field = QQ

    def __post_init__(self):
        if len(self.cols) != self.ncols:
            raise LinalgError("column count does not match ncols")

    @classmethod
    def from_columns(cls, nrows: int, cols: Iterable[dict], field: Field = QQ) -> "SparseMatrix":
        clean = []
        for col in cols:
            c = {}
            for r, v in col.items():
                if not 0 <= r < nrows:
                    raise LinalgError(f"row index {r} out of range")
                v = field.coerce(v)
                if v:
                    c[r] = v
            clean.append(c)
        return cls(nrows, len(clean), clean, field)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence], field: Field = QQ) -> "SparseMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        cols = [{r: rows[r][c] for r in range(nrows) if rows[r][c]} for c in range(ncols)]
        return cls.from_columns(nrows, cols, field)

    @classmethod
    def zeros(cls, nrows: int, ncols: int, field: Field = QQ) -> "SparseMatrix":
        return cls(nrows, ncols, [{} for _ in range(ncols)], field)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self.cols)

    def to_dense(self) -> list[list]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for c, col in enumerate(self.cols):
            for r, v in col.items():
                out[r][c] = v
        return out

    def triplets(self) -> list[tuple[int, int, object]]:
        return sorted((r, c, v) for c, col in enumerate(self.cols) for r, v in col.items())

    def over(self, field: Field) -> "SparseMatrix":
        """Same entries, reinterpreted in another coefficient ring."""
        return SparseMatrix.from_columns(self.nrows, self.cols, field)

    def hstack(self, other: "SparseMatrix") -> "SparseMatrix":
        if other.nrows != self.nrows:
            raise LinalgError("row counts differ")
        return SparseMatrix(self.nrows, self.ncols + other.ncols,
                            [dict(c) for c in self.cols] + [dict(c) for c in other.cols], self.field)

    def is_zero(self) -> bool:
        return not any(self.cols)


def matvec(m: SparseMatrix, x: Sequence) -> list:
    f = m.field
    out = [0] * m.nrows
    for c, col in enumerate(m.cols):
        xc = x[c]
        if not xc:
            continue
        for r, v in col.items():
            out[r] += v * xc
    return [f.coerce(v) for v in out]


def matmul(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    if a.ncols != b.nrows:
        raise LinalgError(f"cannot multiply {a.shape} by {b.shape}")
    f = a.field
    cols = []
    for col in b.cols:
        acc: dict[int, object] = {}
        for k, v in col.items():
            for r, w in a.cols[k].items():
                acc[r] = acc.get(r, 0) + w * v
        cols.append(acc)
    return SparseMatrix.from_columns(a.nrows, cols, f)


# ---------------------------------------------------------------------------
# right-looking elimination


def _schur_eliminate(m: SparseMatrix, mode: str):
    """Eliminate pivots until none qualifies.

    ``mode`` is ``"p"`` (entries mod p, every nonzero is a pivot), ``"snf"``
    (integers; a pivot must divide every entry of its row and column, so the
    step is unimodular and keeps the Smith form) or ``"ff"`` (integers,
    fraction-free: any nonzero pivot, rows rescaled; rank-safe over Q only).

    Returns ``(pivot_values, residual_rows)``. Each step removes one row and
    one column and replaces the rest by the (scaled) Schur complement.
    """
    p = m.field.p if mode == "p" else 0
    snf = mode == "snf"
    ff = mode == "ff"
    rows: dict[int, dict[int, int]] = {}
    colrows: dict[int, set[int]] = {}
    for c, col in enumerate(m.cols):
        if not col:
            continue
        colrows[c] = set(col)
        for r, v in col.items():
            rows.setdefault(r, {})[c] = v

    heap = [(len(rs), c) for c, rs in colrows.items()]
    heapq.heapify(heap)
    pivots: list[int] = []

    while heap:
        n, c = heapq.heappop(heap)
        rs = colrows.get(c)
        if rs is None or len(rs) != n:
            continue
        # Markowitz-style choice inside the sparsest column: shortest row,
        # and over the integers the smallest magnitude first
        best, best_key = -1, None
        for r in rs:
            v = rows[r][c]
            key = (abs(v), len(rows[r])) if p == 0 else len(rows[r])
            if best < 0 or key < best_key:
                if snf and v != 1 and v != -1 and not _divides_cross(v, rows, rows[r], rs, c):
                    continue
                best, best_key = r, key
        if best < 0:
            # parked; any later update to this column pushes it back
            continue
        prow = rows.pop(best)
        pv = prow.pop(c)
        pivots.append(pv)
        del colrows[c]
        for c2 in prow:
            colrows[c2].discard(best)
        unit = pv == 1 or pv == -1
        inv = pow(pv, -1, p) if p else pv
        touched: set[int] = set()
        for r in rs:
            if r == best:
                continue
            row = rows[r]
            a = row.pop(c)
            if p or unit:
                factor = a * inv % p if p else a * inv
            elif snf:
                factor = a // pv
            else:
                # row <- pv*row - a*prow, then strip the content
                for c2 in row:
                    row[c2] *= pv
                factor = a
            for c2, v in prow.items():
                old = row.get(c2)
                if old is None:
                    new = -factor * v
                    if p:
                        new %= p
                    row[c2] = new
                    colrows[c2].add(r)
                else:
                    new = old - factor * v
                    if p:
                        new %= p
                    if new:
                        row[c2] = new
                    else:
                        del row[c2]
                        colrows[c2].discard(r)
                touched.add(c2)
            if not row:
                del rows[r]
            elif ff and not unit:
                g = 0
                for v in row.values():
                    g = gcd(g, v)
                    if g == 1:
                        break
                if g > 1:
                    for c2 in row:
                        row[c2] //= g
        touched.update(prow)
        for c2 in touched:
            rs2 = colrows.get(c2)
            if rs2 is None:
                continue
            if not rs2:
                del colrows[c2]
            else:
                heapq.heappush(heap, (len(rs2), c2))
    return pivots, rows


def _divides_cross(v: int, rows: dict, row: dict, col_rows, c: int) -> bool:
    return all(x % v == 0 for x in row.values()) and all(rows[r][c] % v == 0 for r in col_rows)


def _residual_dense(rows: dict[int, dict[int, object]]) -> list[list]:
    cols = sorted({c for row in rows.values() for c in row})
    cidx = {c: n for n, c in enumerate(cols)}
    out = []
    for row in rows.values():
        dense = [0] * len(cols)
        for c, v in row.items():
            dense[cidx[c]] = v
        out.append(dense)
    return out


def _integral(m: SparseMatrix) -> SparseMatrix | None:
    """Scale a rational matrix column-wise to integers (rank-preserving)."""
    cols = []
    for col in m.cols:
        den = 1
        for v in col.values():
            if isinstance(v, Fraction):
                den = den * v.denominator // gcd(den, v.denominator)
        cols.append({r: int(v * den) for r, v in col.items()})
    return SparseMatrix(m.nrows, m.ncols, cols, ZZ)


def rank(m: SparseMatrix) -> int:
    """Exact rank over Q or F_p."""
    if m.field.kind == "Z":
        raise LinalgError("rank over Z is not defined here; use smith_normal_form")
    if m.field.kind == "F":
        pivots, rest = _schur_eliminate(m, "p")
    else:
        pivots, rest = _schur_eliminate(_integral(m), "ff")
    assert not rest
    return len(pivots)


# ---------------------------------------------------------------------------
# left-looking reduction with transform tracking (kernels, solving)


class _Reducer:
    """Column echelon form built incrementally, remembering for every stored
    pivot column which combination of input columns produced it."""

    def __init__(self, field: Field):
        if not field.is_field:
            raise LinalgError("kernel and solve need a field")
        self.field = field
        self.p = field.p if field.kind == "F" else 0
        self.pivot: dict[int, tuple[dict, dict]] = {}  # row -> (column, combination)

    def _scale(self, vec: dict, s) -> dict:
        p = self.p
        if p:
            return {k: v * s % p for k, v in vec.items()}
        return {k: v * s for k, v in vec.items()}

    def _axpy(self, y: dict, a, x: dict) -> None:
        # y += a * x, dropping zeros
        p = self.p
        for k, v in x.items():
            new = y.get(k, 0) + a * v
            if p:
                new %= p
            if new:
                y[k] = new
            else:
                y.pop(k, None)

    def reduce(self, col: dict, comb: dict) -> tuple[dict, dict]:
        col, comb = dict(col), dict(comb)
        p = self.p
        while col:
            hit = [r for r in col if r in self.pivot]
            if not hit:
                break
            r = min(hit)
            pcol, pcomb = self.pivot[r]
            a = -col[r]  # stored pivots are normalised to 1
            if p:
                a %= p
            self._axpy(col, a, pcol)
            self._axpy(comb, a, pcomb)
        return col, comb

    def insert(self, col: dict, comb: dict) -> None:
        r = min(col)
        v = col[r]
        inv = pow(v, -1, self.p) if self.p else 1 / Fraction(v)
        self.pivot[r] = (self._scale(col, inv), self._scale(comb, inv))


def kernel_basis(m: SparseMatrix) -> list[list]:
    """Basis of the right kernel, as dense coordinate lists."""
    red = _Reducer(m.field)
    out = []
    for c, col in enumerate(m.cols):
        rest, comb = red.reduce(col, {c: 1})
        if rest:
            red.insert(rest, comb)
        else:
            vec = [0] * m.ncols
            for k, v in comb.items():
                vec[k] = m.field.coerce(v)
            out.append(vec)
    return out


def solve_in_image(m: SparseMatrix, v: Sequence) -> list | None:
    """Some ``x`` with ``m x = v``, or ``None`` if ``v`` is not in the image."""
    if len(v) != m.nrows:
        raise LinalgError(f"vector of length {len(v)} against {m.nrows} rows")
    f = m.field
    red = _Reducer(f)
    for c, col in enumerate(m.cols):
        rest, comb = red.reduce(col, {c: 1})
        if rest:
            red.insert(rest, comb)
    target = {r: f.coerce(x) for r, x in enumerate(v) if f.coerce(x)}
    rest, comb = red.reduce(target, {})
    if rest:
        return None
    x = [0] * m.ncols
    for k, val in comb.items():
        x[k] = f.coerce(-val if not red.p else (-val) % red.p)
    if matvec(m, x) != [f.coerce(y) for y in v]:
        raise AssertionError("solve_in_image produced a wrong witness")
    return x


def quotient_rank(cycles: Sequence[Sequence], boundary: SparseMatrix,
                  differential: SparseMatrix | None = None) -> int:
    """Dimension of the span of ``cycles`` modulo the column space of
    ``boundary``. If ``differential`` is given every cycle is checked to be
    in its kernel first."""
    f = boundary.field
    if differential is not None:
        for z in cycles:
            if any(matvec(differential, z)):
                raise LinalgError("a supplied cycle has nonzero boundary")
    if not cycles:
        return 0
    zcols = [{r: x for r, x in enumerate(z) if f.coerce(x)} for z in cycles]
    both = SparseMatrix.from_columns(boundary.nrows, list(boundary.cols) + zcols, f)
    return rank(both) - rank(boundary)


# ---------------------------------------------------------------------------
# Smith normal form


class SNFResult(NamedTuple):
    invariant_factors: list[int]
    rank: int

    def torsion(self) -> list[int]:
        return [d for d in self.invariant_factors if d > 1]


def _dense_diagonal(a: list[list[int]]) -> list[int]:
    """Diagonalise an integer matrix by unimodular row/column operations,
    always pivoting on the entry of smallest absolute value."""
    a = [list(map(int, row)) for row in a]
    diag = []
    while a and a[0]:
        nr, nc = len(a), len(a[0])
        best = None
        for i in range(nr):
            for j in range(nc):
                x = a[i][j]
                if x and (best is None or abs(x) < abs(a[best[0]][best[1]])):
                    best = (i, j)
                    if abs(x) == 1:
                        break
            if best and abs(a[best[0]][best[1]]) == 1:
                break
        if best is None:
            break
        i, j = best
        a[0], a[i] = a[i], a[0]
        for row in a:
            row[0], row[j] = row[j], row[0]
        while True:
            piv = a[0][0]
            done = True
            for i in range(1, nr):
                if a[i][0]:
                    q = a[i][0] // piv
                    if q:
                        ri, r0 = a[i], a[0]
                        for j in range(nc):
                            ri[j] -= q * r0[j]
                    if a[i][0]:
                        done = False
            for j in range(1, nc):
                if a[0][j]:
                    q = a[0][j] // piv
                    if q:
                        for row in a:
                            row[j] -= q * row[0]
                    if a[0][j]:
                        done = False
            if done:
                break
            # a smaller remainder appeared: move it into the pivot slot
            small = None
            for i in range(1, nr):
                if a[i][0] and (small is None or abs(a[i][0]) < abs(small[1])):
                    small = (("r", i), a[i][0])
            for j in range(1, nc):
                if a[0][j] and (small is None or abs(a[0][j]) < abs(small[1])):
                    small = (("c", j), a[0][j])
            (kind, idx), _ = small
            if kind == "r":
                a[0], a[idx] = a[idx], a[0]
            else:
                for row in a:
                    row[0], row[idx] = row[idx], row[0]
        diag.append(abs(a[0][0]))
        a = [row[1:] for row in a[1:]]
    return diag


def _smith_chain(diag: list[int]) -> list[int]:
    """Turn any nonzero diagonal into the divisibility chain it is equivalent
    to (diag(a, b) ~ diag(gcd, lcm))."""
    ones = sum(1 for x in diag if abs(x) == 1)
    d = sorted(abs(x) for x in diag if abs(x) > 1)
    n = len(d)
    for i in range(n):
        for j in range(i + 1, n):
            g = gcd(d[i], d[j])
            if g != d[i]:
                d[i], d[j] = g, d[i] * d[j] // g
    return [1] * ones + d


def smith_normal_form(m: SparseMatrix) -> SNFResult:
    """Invariant factors of an integer matrix (arbitrary precision)."""
    if m.field.kind != "Z":
        m = m.over(ZZ)
    pivots, rest = _schur_eliminate(m, "snf")
    diag = [abs(v) for v in pivots]
    if rest:
        diag += _dense_diagonal(_residual_dense(rest))
    factors = _smith_chain(diag)
    return SNFResult(factors, len(factors))
