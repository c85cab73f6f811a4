"""Symmetric connections, covariant derivatives, and curvature.

A connection is stored through its Christoffel symbols in the canonical form
``D_i e_j = sum_k Gamma^k_{ij} . e_k`` (coefficients in left position).
Torsion-freeness is the graded symmetry Gamma^k_{ij} = (-1)^{eps_i eps_j}
Gamma^k_{ji}, and each entry is homogeneous of parity eps_i + eps_j + eps_k.

The covariant derivative is extended from scalars, basis vectors, and basis
covectors (by duality) to all tensors through the shared Leibniz engine in
:mod:`qclass.tensor`, and curvature is computed operationally from its
definition as the commutator defect of two covariant derivatives.  The
``verify_*`` functions evaluate the structural identities that must hold
exactly for any symmetric connection on a chart with a certified homological
field; a nonzero residual indicates a broken convention, not bad user input,
which is why they return full residual tensors instead of booleans.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field

from .algebra import (
    Chart,
    ChartMismatchError,
    EVEN,
    Fraction,
    ParityError,
    SuperPolynomial,
    random_superpolynomial,
)
from .lie import HomologicalField, apply_vector, bracket, lie_derivative
from .tensor import (
    SignatureError,
    TensorField,
    assemble_lower_slot,
    endo_commutator,
    endo_compose,
    endo_from_action,
    extend_derivation,
)


class ConnectionError_(ValueError):
    """Malformed Christoffel data (symmetry or parity rule violated)."""


class Connection:
    """Graded-symmetric Christoffel symbols on a chart.

    ``gamma`` maps (k, i, j) to the coefficient of e_k in D_i e_j; absent
    entries are zero.  Instances are immutable apart from an internal
    memoization table for coordinate curvature endomorphisms.
    """

    def __init__(self, chart: Chart, gamma: dict[tuple[int, int, int], SuperPolynomial]):
        self.chart = chart
        clean: dict[tuple[int, int, int], SuperPolynomial] = {}
        parities = chart.parities
        for (k, i, j), value in gamma.items():
            for idx in (k, i, j):
                if not 0 <= idx < chart.dim:
                    raise ConnectionError_(f"index {idx} out of chart range")
            if value.chart != chart:
                raise ChartMismatchError("Christoffel entry on a different chart")
            if value.is_zero():
                continue
            want = (parities[i] + parities[j] + parities[k]) & 1
            got = value.parity()
            if got is None or got != want:
                raise ConnectionError_(
                    f"Gamma^{chart.names[k]}_({chart.names[i]},{chart.names[j]}) "
                    f"must be homogeneous of parity {want}")
            clean[(k, i, j)] = value
        # graded symmetry in the two lower indices
        for (k, i, j), value in clean.items():
            mirror = clean.get((k, j, i), SuperPolynomial.zero(chart))
            expected = -value if (parities[i] & parities[j]) else value
            if mirror != expected:
                raise ConnectionError_(
                    f"Gamma^{chart.names[k]}_({chart.names[i]},{chart.names[j]}) "
                    "violates graded symmetry")
        self.gamma = clean
        self._curvature_memo: dict[tuple[int, int], TensorField] = {}
        self._flat: bool | None = (True if not clean else None)
        self._lock = threading.Lock()

    # -- constructors --------------------------------------------------------

    @classmethod
    def flat(cls, chart: Chart) -> "Connection":
        """The coordinate connection: all Christoffel symbols zero."""
        return cls(chart, {})

    @classmethod
    def random(cls, chart: Chart, seed: int, *, max_degree: int = 2,
               density: float = 0.5) -> "Connection":
        """Seeded random graded-symmetric connection with small sparse entries."""
        rng = random.Random(seed)
        parities = chart.parities
        gamma: dict[tuple[int, int, int], SuperPolynomial] = {}
        for i in range(chart.dim):
            for j in range(i, chart.dim):
                if i == j and parities[i]:
                    continue  # graded symmetry forces Gamma^k_{ii} = 0 for odd i
                for k in range(chart.dim):
                    if rng.random() > density:
                        continue
                    want = (parities[i] + parities[j] + parities[k]) & 1
                    entry = random_superpolynomial(
                        rng=rng, chart=chart, parity=want,
                        max_even_degree=max_degree, max_terms=2, coeff_bound=2)
                    if entry.is_zero():
                        continue
                    gamma[(k, i, j)] = gamma.get(
                        (k, i, j), SuperPolynomial.zero(chart)) + entry
                    if i != j:
                        mirror = -entry if (parities[i] & parities[j]) else entry
                        gamma[(k, j, i)] = gamma.get(
                            (k, j, i), SuperPolynomial.zero(chart)) + mirror
        gamma = {key: val for key, val in gamma.items() if not val.is_zero()}
        return cls(chart, gamma)

    # -- basic access --------------------------------------------------------

    def christoffel(self, k: int, i: int, j: int) -> SuperPolynomial:
        got = self.gamma.get((k, i, j))
        return got if got is not None else SuperPolynomial.zero(self.chart)

    def describe(self) -> str:
        if not self.gamma:
            return "flat (zero Christoffel symbols)"
        return f"connection with {len(self.gamma)} Christoffel entries"

    # -- covariant derivative -------------------------------------------------

    def _actions(self, i: int):
        """Basis-symbol actions of D_i (derived once, then reused)."""
        chart = self.chart
        parities = chart.parities
        e_action: dict[int, dict[int, SuperPolynomial]] = {}
        f_action: dict[int, dict[int, SuperPolynomial]] = {}
        for (k, ii, j), value in self.gamma.items():
            if ii != i:
                continue
            e_action.setdefault(j, {})[k] = value
            # duality: D_i f^k = -(-1)^{eps_k (eps_j + 1)} Gamma^k_{ij} f^j
            flip = (parities[k] & (parities[j] ^ 1)) & 1
            f_action.setdefault(k, {})[j] = value if flip else -value
        return e_action, f_action

    def coordinate_derivative(self, i: int, t: TensorField) -> TensorField:
        """D_i t, the covariant derivative along the basis field e_i."""
        if t.chart != self.chart:
            raise ChartMismatchError("tensor on a different chart")
        e_action, f_action = self._actions(i)
        return extend_derivation(
            t, self.chart.parities[i], lambda c: c.partial(i),
            e_action, f_action)


def covariant_derivative(conn: Connection, t: TensorField) -> TensorField:
    """The (n, m+1) tensor nabla(t); its first lower slot is the direction.

    Plugging a vector field X into the new slot recovers nabla_X t, so the
    assembly sign is fixed by :func:`qclass.tensor.assemble_lower_slot`.
    """
    chart = conn.chart
    values = {
        i: conn.coordinate_derivative(i, t)
        for i in range(chart.dim)
    }
    return assemble_lower_slot(chart, t.parity, values, t.n_upper, t.m_lower)


def covariant_along(conn: Connection, x: TensorField, t: TensorField) -> TensorField:
    """Directional derivative nabla_X t = sum_i X^i . D_i t (function-linear in X)."""
    if not x.is_vector_field():
        raise SignatureError("direction must be a (1,0) tensor")
    if x.chart != conn.chart or t.chart != conn.chart:
        raise ChartMismatchError("operands on different charts")
    out = TensorField.zero(conn.chart, t.n_upper, t.m_lower,
                           (t.parity + x.parity) & 1)
    for ((i,), ()), xi in x.components.items():
        out = out + conn.coordinate_derivative(i, t).scalar_multiply(xi)
    return out


def curvature_endo(conn: Connection, x: TensorField, y: TensorField) -> TensorField:
    """R_{XY} = [nabla_X, nabla_Y] - nabla_{[X,Y]} as an endomorphism.

    Assembled from its action on the coordinate basis fields; in this
    package's convention the components of an endomorphism are exactly those
    images, so no extra signs enter here.
    """
    if x.chart != conn.chart or y.chart != conn.chart:
        raise ChartMismatchError("operands on different charts")
    chart = conn.chart
    both_odd = bool(x.parity & y.parity)
    xy = bracket(x, y)
    images = {}
    for k in range(chart.dim):
        ek = TensorField.coordinate_vector(chart, k)
        first = covariant_along(conn, x, covariant_along(conn, y, ek))
        second = covariant_along(conn, y, covariant_along(conn, x, ek))
        third = covariant_along(conn, xy, ek)
        images[k] = (first + second - third) if both_odd else (first - second - third)
    return endo_from_action(chart, (x.parity + y.parity) & 1, images)


def coordinate_curvature(conn: Connection, i: int, j: int) -> TensorField:
    """Memoized R_{e_i e_j}; the building block reused by flatness tests."""
    with conn._lock:
        memo = conn._curvature_memo.get((i, j))
    if memo is not None:
        return memo
    value = curvature_endo(conn,
                           TensorField.coordinate_vector(conn.chart, i),
                           TensorField.coordinate_vector(conn.chart, j))
    with conn._lock:
        conn._curvature_memo[(i, j)] = value
    return value


def is_flat(conn: Connection) -> bool:
    """True iff the curvature vanishes identically (decided exactly, cached)."""
    if conn._flat is not None:
        return conn._flat
    flat = all(
        coordinate_curvature(conn, i, j).is_zero()
        for i in range(conn.chart.dim)
        for j in range(conn.chart.dim)
    )
    conn._flat = flat
    return flat


def q_covariant_gradient(conn: Connection, q: HomologicalField) -> TensorField:
    """The odd endomorphism X |-> nabla_X Q built from first derivatives of Q."""
    if q.chart != conn.chart:
        raise ChartMismatchError("field and connection on different charts")
    chart = conn.chart
    images = {
        j: conn.coordinate_derivative(j, q.field)
        for j in range(chart.dim)
    }
    return endo_from_action(chart, 1, images)


# ---------------------------------------------------------------------------
# structural identity reports
# ---------------------------------------------------------------------------

@dataclass
class StructureReport:
    """Exact residuals of the geometric identities of a symmetric connection.

    All three must vanish on valid inputs:

    * ``nabla_Q Q = 0``
    * ``nabla_Q Lam = 1/2 R_{QQ} + Lam^2``          (Lam = gradient endo)
    * ``nabla_X R_{QQ} = 2 (R_{[X,Q] Q} - nabla_Q R_{QX})`` for every basis X
    """

    residual_nabla_qq: TensorField
    residual_gradient: TensorField
    residual_curvature_derivative: dict[str, TensorField] = field(default_factory=dict)

    @property
    def all_zero(self) -> bool:
        return (self.residual_nabla_qq.is_zero()
                and self.residual_gradient.is_zero()
                and all(r.is_zero()
                        for r in self.residual_curvature_derivative.values()))

    def summary(self) -> str:
        def mark(ok: bool) -> str:
            return "0" if ok else "NONZERO"
        lines = [
            f"nabla_Q Q residual: {mark(self.residual_nabla_qq.is_zero())}",
            f"gradient identity residual: {mark(self.residual_gradient.is_zero())}",
        ]
        lines.extend(
            f"curvature-derivative residual along {name}: {mark(res.is_zero())}"
            for name, res in sorted(self.residual_curvature_derivative.items()))
        return "\n".join(lines)


def verify_structural_relations(conn: Connection,
                                q: HomologicalField) -> StructureReport:
    chart = conn.chart
    qf = q.field
    grad = q_covariant_gradient(conn, q)
    r_qq = curvature_endo(conn, qf, qf)

    res1 = covariant_along(conn, qf, qf)
    res2 = (covariant_along(conn, qf, grad)
            - r_qq.scale(Fraction(1, 2))
            - endo_compose(grad, grad))

    res3: dict[str, TensorField] = {}
    for k in range(chart.dim):
        x = TensorField.coordinate_vector(chart, k)
        lhs = covariant_along(conn, x, r_qq)
        rhs = (curvature_endo(conn, bracket(x, qf), qf)
               - covariant_along(conn, qf, curvature_endo(conn, qf, x))).scale(2)
        res3[chart.names[k]] = lhs - rhs
    return StructureReport(res1, res2, res3)


def verify_cov_lie_relation(conn: Connection, q: HomologicalField,
                            a: TensorField) -> TensorField:
    """Residual of nabla_Q A = L_Q A + [Lam, A] for an endomorphism A."""
    if not a.is_endomorphism():
        raise SignatureError("the relation is stated for (1,1) tensors")
    grad = q_covariant_gradient(conn, q)
    return (covariant_along(conn, q.field, a)
            - lie_derivative(q.field, a)
            - endo_commutator(grad, a))
