"""Leading coefficient of Betti-number growth and its empirical check.

For a connected graph with an essential vertex and Ramos number
``D = Delta^i > 1``, ``dim H_i(B_k)`` agrees for large ``k`` with a
polynomial of exact degree ``D - 1`` whose leading coefficient is

    sum over maximizing W of prod_{w in W} (d(w) - 2), divided by (D - 1)!

Equivalently the ``(D - 1)``-th forward difference of the Betti row is
eventually the constant ``sum prod (d(w) - 2)``. Nothing bounds where
"eventually" starts, so the check here is a heuristic on a finite row.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb, factorial, prod

from .graph import Graph, GraphError, essential_vertices, ramos_number
from .homology import betti_table, check_cap, integral_homology
from .complex import REDUCED, ComplexVariant
from .linalg import QQ, Field

__all__ = [
    "HypothesisError",
    "LeadingCoefficient",
    "GrowthReport",
    "leading_coefficient",
    "finite_differences",
    "verify_growth",
    "partition_dimension",
    "smallness_check",
    "torsion_growth_scan",
    "TorsionScan",
]

STABLE_RUN = 3


class HypothesisError(ValueError):
    pass


@dataclass
class LeadingCoefficient:
    i: int
    delta: int
    maximizers: list[tuple[list[str], int]]  # (W, prod(d(w) - 2))
    target: int  # the sum of the products
    coefficient: Fraction


def leading_coefficient(g: Graph, i: int) -> LeadingCoefficient:
    if not g.is_connected():
        raise HypothesisError("graph is disconnected; treat components separately (Kunneth)")
    if not essential_vertices(g):
        raise HypothesisError("graph has no essential vertex")
    try:
        r = ramos_number(g, i)
    except GraphError as exc:
        raise HypothesisError(str(exc)) from exc
    if r.delta <= 1:
        raise HypothesisError(
            f"Ramos number Delta^{i} = {r.delta}; the formula needs Delta > 1 "
            "(the Delta = 1 case is described by Ko-Park and behaves differently)"
        )
    maxi = []
    for W in r.maximizers:
        Ws = sorted(W, key=lambda v: g.vertex_index[v])
        maxi.append((Ws, prod(g.degree(w) - 2 for w in Ws)))
    target = sum(p for _, p in maxi)
    return LeadingCoefficient(i, r.delta, maxi, target, Fraction(target, factorial(r.delta - 1)))


def finite_differences(seq, r: int) -> list[int]:
    """The ``r``-fold forward difference."""
    if r < 0:
        raise ValueError("order must be non-negative")
    if r > len(seq):
        raise ValueError(f"order {r} exceeds sequence length {len(seq)}")
    out = list(seq)
    for _ in range(r):
        out = [b - a for a, b in zip(out, out[1:])]
    return out


def _stable_tail(seq, run: int = STABLE_RUN):
    """Value of the last ``run`` entries if they agree, else None."""
    if len(seq) < run:
        return None
    tail = seq[-run:]
    return tail[0] if all(x == tail[0] for x in tail) else None


def partition_dimension(b: int, k: int) -> int:
    """Weight-``k`` dimension of polynomials in ``b`` weight-one variables."""
    if b < 1:
        raise ValueError("need at least one block")
    if k < 0:
        return 0
    return comb(k + b - 1, b - 1)


def smallness_check(seq, n: int) -> bool:
    """Observed proxy for ``n``-smallness: the ``n``-th difference ends in
    zeros (the last three values, or all of them if fewer remain)."""
    if n >= len(seq):
        return False
    d = finite_differences(seq, n)
    tail = d[-STABLE_RUN:]
    return all(x == 0 for x in tail)


@dataclass
class GrowthReport:
    graph: str
    field: str
    i: int
    delta: int
    maximizers: list[tuple[list[str], int]]
    target: int
    coefficient: Fraction
    k_max: int
    row: list[int]
    differences: list[int]  # order delta - 1
    next_differences: list[int]  # order delta
    observed: int | None
    onset: int | None
    verdict: str  # pass / fail / inconclusive

    def to_dict(self) -> dict:
        d = asdict(self)
        d["coefficient"] = str(self.coefficient)
        d["maximizers"] = [{"W": W, "product": p} for W, p in self.maximizers]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary(self) -> str:
        ws = ", ".join("{" + ",".join(W) + "}" for W, _ in self.maximizers)
        lines = [
            f"graph {self.graph}  field {self.field}  i={self.i}",
            f"Ramos number {self.delta}; maximizers {ws}",
            f"predicted: order-{self.delta - 1} difference -> {self.target}, "
            f"leading coefficient {self.coefficient}",
            f"betti row k=0..{self.k_max}: {self.row}",
            f"order-{self.delta - 1} differences: {self.differences}",
            f"order-{self.delta} differences: {self.next_differences}",
            f"observed {self.observed}, polynomial from k={self.onset}" if self.onset is not None
            else f"observed {self.observed}, no polynomial onset in range",
            f"verdict: {self.verdict}",
        ]
        return "\n".join(lines) + "\n"

    def differences_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "betti", f"diff{self.delta - 1}", f"diff{self.delta}"])
        for k, b in enumerate(self.row):
            d1 = self.differences[k] if k < len(self.differences) else ""
            d2 = self.next_differences[k] if k < len(self.next_differences) else ""
            w.writerow([k, b, d1, d2])
        return buf.getvalue()


def verify_growth(g: Graph, field: Field = QQ, i: int = 1, k_max: int = 10,
                  var: ComplexVariant = REDUCED, workers: int = 1,
                  cap: int | None = None) -> GrowthReport:
    """Compute the Betti row and compare its eventual ``(D-1)``-th
    difference with the predicted integer.

    The row counts as stabilized when the last three ``(D-1)``-th
    differences agree and the last three ``D``-th differences vanish; a
    stabilized value equal to the prediction passes, any other stabilized
    value fails, and no stabilization is inconclusive.
    """
    lc = leading_coefficient(g, i)
    D = lc.delta
    table = betti_table(g, field, i, k_max, var, workers=workers, cap=cap)
    row = [table[(i, k)] for k in range(k_max + 1)]
    d1 = finite_differences(row, D - 1) if len(row) >= D - 1 else []
    d2 = finite_differences(row, D) if len(row) >= D else []
    settled = _stable_tail(d2) == 0
    observed = _stable_tail(d1) if settled else None
    onset = None
    if d2 and d2[-1] == 0:
        onset = len(d2)
        while onset > 0 and d2[onset - 1] == 0:
            onset -= 1
    if observed is None:
        verdict = "inconclusive"
    else:
        verdict = "pass" if observed == lc.target else "fail"
    return GrowthReport(g.digest, str(field), i, D, lc.maximizers, lc.target, lc.coefficient,
                        k_max, row, d1, d2, observed, onset, verdict)


@dataclass
class TorsionScan:
    graph: str
    i: int
    k_max: int
    exponents: dict[int, dict[int, int]] = field(default_factory=dict)  # k -> p -> f(k)
    free_ranks: dict[int, int] = field(default_factory=dict)
    delta: int | None = None
    slow_growth: dict[int, bool] | None = None  # per prime, degree < delta - 1 observed

    def primes(self) -> list[int]:
        return sorted({p for row in self.exponents.values() for p in row})

    def to_json(self) -> str:
        doc = {
            "graph": self.graph,
            "i": self.i,
            "k_max": self.k_max,
            "delta": self.delta,
            "rows": [
                {"k": k, "free_rank": self.free_ranks[k],
                 "p_exponents": {str(p): f for p, f in sorted(self.exponents[k].items())}}
                for k in sorted(self.exponents)
            ],
            "slow_growth": None if self.slow_growth is None
            else {str(p): ok for p, ok in sorted(self.slow_growth.items())},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def torsion_growth_scan(g: Graph, i: int, k_max: int, var: ComplexVariant = REDUCED,
                        cap: int | None = None) -> TorsionScan:
    """Per ``k``, the exponent ``f(k)`` with ``|p-torsion of H_i(B_k; Z)| = p^f(k)``.

    When the growth hypotheses hold, also records whether each prime's
    exponent sequence looks like a polynomial of degree below ``D - 1``.
    """
    scan = TorsionScan(g.digest, i, k_max)
    for k in range(k_max + 1):
        check_cap(g, var, i, k, cap)
    for k in range(k_max + 1):
        free, torsion = integral_homology(g, i, k, var, cap)
        scan.free_ranks[k] = free
        exps: dict[int, int] = {}
        for d in torsion:
            for p, e in _factor(d).items():
                exps[p] = exps.get(p, 0) + e
        scan.exponents[k] = exps
    try:
        scan.delta = leading_coefficient(g, i).delta
    except HypothesisError:
        return scan
    scan.slow_growth = {}
    for p in scan.primes():
        seq = [scan.exponents[k].get(p, 0) for k in range(k_max + 1)]
        scan.slow_growth[p] = smallness_check(seq, scan.delta - 1)
    return scan
