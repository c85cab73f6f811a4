"""Closedness, degree-bounded exactness, graded dimensions, and the homotopy
that witnesses connection-independence.

Exactness over a chart with even coordinates is only semidecidable, so the
solver answers relative to an ansatz: all tensors of the right signature and
parity whose even-coordinate degree does not exceed a caller-supplied bound.
The verdict is ``exact-with-witness`` (with the witness re-verified by
recomputing its coboundary) or ``not-exact-within-bound``; on purely odd
charts the ansatz space is everything, and the verdict is conclusive.  The
underlying linear algebra is exact Gaussian elimination over the rationals --
no tolerances exist anywhere in this module.

``transgression`` makes the connection-independence argument executable: the
chart is extended by an even/odd pair (t, th_aux), the field is shifted by
th_aux d_t, the two connections are joined along the segment
t . Gamma_1 + (1-t) . Gamma_0, and the requested cocycle is computed once on
the extended chart.  Its th_aux-linear part, integrated exactly over t in
[0,1] and restricted back, is a potential whose coboundary equals the
difference of the two cocycles on the nose; the residual is recomputed and
returned rather than trusted.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional

from .algebra import (
    Chart,
    ChartMismatchError,
    Monomial,
    ParityError,
    SuperPolynomial,
    mono_sort_key,
)
from .cocycles import compute_series
from .connection import Connection
from .lie import HomologicalField, coboundary
from .models import ModelDescriptor, extend_with_r11
from .tensor import TensorField

EXACTNESS_STATUS = ("exact-with-witness", "not-exact-within-bound", "not-closed")


class ResourceCapExceeded(RuntimeError):
    """The exactness ansatz space grew beyond the configured cap."""


@dataclass
class ExactnessVerdict:
    status: str
    bound: int
    witness: Optional[TensorField] = None
    conclusive: bool = False

    @property
    def is_exact(self) -> bool:
        return self.status == "exact-with-witness"


@dataclass
class TransgressionResult:
    """psi with coboundary(psi) = difference; residual recomputed, must be zero."""

    psi: TensorField
    difference: TensorField
    residual: TensorField

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


def is_closed(q: HomologicalField, t: TensorField) -> TensorField:
    """Return the coboundary of t; the caller checks it against zero."""
    return coboundary(q, t)


# ---------------------------------------------------------------------------
# exact linear algebra over Q
# ---------------------------------------------------------------------------

def solve_exact(rows: list[dict[int, Fraction]], rhs: list[Fraction],
                n_cols: int) -> Optional[list[Fraction]]:
    """One solution of a sparse rational linear system, or None.

    Plain Gaussian elimination with exact Fraction arithmetic; rows are
    dictionaries column -> coefficient.
    """
    work = [dict(row) for row in rows]
    target = list(rhs)
    pivot_of_col: dict[int, int] = {}
    pivot_rows: list[int] = []
    for r in range(len(work)):
        row = work[r]
        # eliminate known pivots
        for col in sorted(set(row) & set(pivot_of_col)):
            coeff = row.get(col)
            if not coeff:
                continue
            p = pivot_of_col[col]
            factor = coeff / work[p][col]
            for c2, v2 in work[p].items():
                acc = row.get(c2, Fraction(0)) - factor * v2
                if acc:
                    row[c2] = acc
                else:
                    row.pop(c2, None)
            target[r] = target[r] - factor * target[p]
        if row:
            col = min(row)
            pivot_of_col[col] = r
            pivot_rows.append(r)
        elif target[r]:
            return None  # inconsistent: 0 = nonzero
    solution = [Fraction(0)] * n_cols
    # back-substitute in reverse pivot order
    for r in reversed(pivot_rows):
        row = work[r]
        col = min(row)
        acc = target[r]
        for c2, v2 in row.items():
            if c2 != col:
                acc -= v2 * solution[c2]
        solution[col] = acc / row[col]
    return solution


def rank_exact(rows: list[dict[int, Fraction]]) -> int:
    """Rank of a sparse rational matrix by exact elimination."""
    pivots: dict[int, dict[int, Fraction]] = {}
    for row in rows:
        work = dict(row)
        while work:
            col = min(work)
            pivot = pivots.get(col)
            if pivot is None:
                pivots[col] = work
                break
            factor = work[col] / pivot[col]
            for c2, v2 in pivot.items():
                acc = work.get(c2, Fraction(0)) - factor * v2
                if acc:
                    work[c2] = acc
                else:
                    work.pop(c2, None)
    return len(pivots)


# ---------------------------------------------------------------------------
# exactness
# ---------------------------------------------------------------------------

def _monomials_up_to(chart: Chart, parity: int, degree_bound: int):
    """All normal-form monomials of given parity with even degree <= bound."""
    evens = chart.even_indices
    odds = chart.odd_indices

    def even_parts(budget: int, pool: tuple[int, ...]):
        if not pool:
            yield ()
            return
        head, rest = pool[0], pool[1:]
        for e in range(budget + 1):
            for tail in even_parts(budget - e, rest):
                yield (((head, e),) + tail if e else tail)

    for size in range(len(odds) + 1):
        if (size & 1) != parity:
            continue
        for odd in itertools.combinations(odds, size):
            for even in even_parts(degree_bound, evens):
                yield (tuple(even), tuple(odd))


def _vectorize(t: TensorField) -> dict[tuple, Fraction]:
    out: dict[tuple, Fraction] = {}
    for key, poly in t.components.items():
        for mono, coeff in poly.terms.items():
            out[(key, mono)] = coeff
    return out


def exactness_witness(q: HomologicalField, t: TensorField, degree_bound: int,
                      *, basis_cap: int = 20000) -> ExactnessVerdict:
    """Decide whether t = coboundary(s) has a solution s in the ansatz space.

    The ansatz runs over tensors of t's signature and opposite parity with
    even-coordinate degree <= degree_bound.  A returned witness always
    satisfies coboundary(witness) == t exactly (recomputed here).
    """
    chart = t.chart
    if q.chart != chart:
        raise ChartMismatchError("field and tensor on different charts")
    conclusive = not chart.even_indices
    if not coboundary(q, t).is_zero():
        return ExactnessVerdict("not-closed", degree_bound, conclusive=conclusive)

    witness_parity = (t.parity + 1) & 1
    n, m = t.signature
    basis: list[TensorField] = []
    index_tuples_upper = list(itertools.product(range(chart.dim), repeat=n))
    index_tuples_lower = list(itertools.product(range(chart.dim), repeat=m))
    for upper in index_tuples_upper:
        for lower in index_tuples_lower:
            comp_parity = (witness_parity + chart.total_parity(upper)
                           + chart.total_parity(lower)) & 1
            for mono in _monomials_up_to(chart, comp_parity, degree_bound):
                poly = SuperPolynomial(chart, {mono: Fraction(1)},
                                       _normalized=True)
                basis.append(TensorField(chart, n, m, witness_parity,
                                         {(upper, lower): poly},
                                         _validated=True))
                if len(basis) > basis_cap:
                    raise ResourceCapExceeded(
                        f"exactness ansatz exceeded {basis_cap} basis tensors")

    columns = [_vectorize(coboundary(q, b)) for b in basis]
    target = _vectorize(t)
    coords = sorted(set(target) | {c for col in columns for c in col},
                    key=lambda kc: (kc[0], mono_sort_key(kc[1])))
    coord_index = {c: r for r, c in enumerate(coords)}
    rows: list[dict[int, Fraction]] = [{} for _ in coords]
    for col_idx, col in enumerate(columns):
        for c, val in col.items():
            rows[coord_index[c]][col_idx] = val
    rhs = [target.get(c, Fraction(0)) for c in coords]

    solution = solve_exact(rows, rhs, len(basis))
    if solution is None:
        return ExactnessVerdict("not-exact-within-bound", degree_bound,
                                conclusive=conclusive)
    witness = TensorField.zero(chart, n, m, witness_parity)
    for coeff, b in zip(solution, basis):
        if coeff:
            witness = witness + b.scale(coeff)
    if coboundary(q, witness) != t:
        raise AssertionError("solver returned a witness that fails re-verification")
    return ExactnessVerdict("exact-with-witness", degree_bound, witness=witness,
                            conclusive=conclusive)


# ---------------------------------------------------------------------------
# graded scalar cohomology on purely odd charts
# ---------------------------------------------------------------------------

def function_cohomology_dims(q: HomologicalField) -> list[int]:
    """Dimensions of the scalar cohomology by odd degree (purely odd charts).

    Requires the differential to raise the monomial degree by exactly one
    (true for every quadratic field a builder produces); degrees run 0..q.
    """
    chart = q.chart
    if chart.even_indices:
        raise ParityError("graded dimensions need a purely odd chart")
    odds = chart.odd_indices
    dim = len(odds)
    basis_by_degree: list[list[Monomial]] = [
        [((), combo) for combo in itertools.combinations(odds, d)]
        for d in range(dim + 1)
    ]
    ranks: list[int] = []
    for d in range(dim + 1):
        targets = {mono: idx for idx, mono in enumerate(
            basis_by_degree[d + 1] if d + 1 <= dim else [])}
        rows = []
        for mono in basis_by_degree[d]:
            image = q(SuperPolynomial(chart, {mono: Fraction(1)},
                                      _normalized=True))
            row: dict[int, Fraction] = {}
            for out_mono, coeff in image.terms.items():
                if out_mono not in targets:
                    raise ParityError(
                        "differential is not homogeneous of degree +1 on this "
                        "chart; graded dimensions are not defined")
                row[targets[out_mono]] = coeff
            rows.append(row)
        # rank of delta restricted to degree d (transpose has equal rank)
        ranks.append(rank_exact([r for r in rows if r]))
    dims = []
    for d in range(dim + 1):
        below = ranks[d - 1] if d >= 1 else 0
        dims.append(comb(dim, d) - ranks[d] - below)
    return dims


# ---------------------------------------------------------------------------
# the connection-independence homotopy
# ---------------------------------------------------------------------------

TRANSGRESSABLE = ("B", "C", "P")


def _lift_connection(c0: Connection, c1: Connection,
                     big: Chart, t_index: int) -> Connection:
    """The segment t . Gamma_1 + (1 - t) . Gamma_0 on the extended chart,
    zero in every direction touching the auxiliary coordinates."""
    t = SuperPolynomial.coordinate(big, t_index)
    one_minus_t = SuperPolynomial.one(big) - t
    gamma: dict[tuple[int, int, int], SuperPolynomial] = {}
    for key, val in c1.gamma.items():
        gamma[key] = t * SuperPolynomial(big, val.terms, _normalized=True)
    for key, val in c0.gamma.items():
        lifted = one_minus_t * SuperPolynomial(big, val.terms, _normalized=True)
        gamma[key] = gamma.get(key, SuperPolynomial.zero(big)) + lifted
    return Connection(big, {k: v for k, v in gamma.items() if not v.is_zero()})


def transgression(series: str, order: int, q: HomologicalField,
                  c0: Connection, c1: Connection) -> TransgressionResult:
    """Produce psi with coboundary(psi) = series(c1) - series(c0), exactly.

    Only the connection-dependent series are meaningful here; the tensor
    powers of the field do not see the connection at all, so for them the
    trivial result (psi = 0, difference = 0) is returned.
    """
    chart = q.chart
    if c0.chart != chart or c1.chart != chart:
        raise ChartMismatchError("connections must live on the field's chart")
    if series == "Qpow":
        value = compute_series(series, order, q, None)
        zero = TensorField.zero(chart, value.n_upper, value.m_lower,
                                (value.parity + 1) & 1)
        diff = TensorField.zero(chart, value.n_upper, value.m_lower, value.parity)
        return TransgressionResult(psi=zero, difference=diff, residual=diff)
    if series not in TRANSGRESSABLE:
        raise ValueError(
            f"series {series!r} cannot be transgressed by the segment "
            f"construction; supported: {TRANSGRESSABLE} and 'Qpow'")

    model = ModelDescriptor(kind="chart", chart=chart, hq=q)
    extended = extend_with_r11(model)
    big = extended.chart
    t_index, th_index = chart.dim, chart.dim + 1
    segment = _lift_connection(c0, c1, big, t_index)

    lifted = compute_series(series, order, extended.hq, segment)

    # th_aux-linear part of the original-index components (left derivative),
    # then exact integration of the segment parameter over [0, 1], then
    # restriction back to the original chart.
    psi_comps: dict[tuple, SuperPolynomial] = {}
    for (upper, lower), poly in lifted.components.items():
        if any(i >= chart.dim for i in upper + lower):
            continue
        part = poly.partial(th_index).integrate_even_unit_interval(t_index)
        if part.is_zero():
            continue
        if part.max_index_used() >= chart.dim:
            raise AssertionError(
                "the homotopy left auxiliary-coordinate dependence behind")
        psi_comps[(upper, lower)] = SuperPolynomial(chart, part.terms,
                                                    _normalized=True)
    psi = TensorField(chart, lifted.n_upper, lifted.m_lower,
                      (lifted.parity + 1) & 1, psi_comps)

    difference = (compute_series(series, order, q, c1)
                  - compute_series(series, order, q, c0))
    residual = coboundary(q, psi) - difference
    return TransgressionResult(psi=psi, difference=difference, residual=residual)
