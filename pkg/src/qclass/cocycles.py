"""Universal cocycles attached to a homological field and a connection.

The building block is the endomorphism-valued one-form

    Omega_X = nabla_X Lam - R_{XQ},        Lam(X) = nabla_X Q,

which is closed under the coboundary for every symmetric connection --
a fact this module re-proves numerically on every construction (the
constructor refuses to hand out a one-form whose coboundary is nonzero,
since that can only mean an internal sign inconsistency).

From it:

* ``composition_series(omega, n)``  -- the (1, n+1) tensor whose value on
  (X_1..X_n) is the composition Omega_{X_1} o ... o Omega_{X_n};
* ``trace_series(omega, n)``        -- its supertrace, a (0, n) tensor with a
  graded cyclic symmetry in its arguments;
* ``flat_trace_series(conn, q, n)`` -- Str(Lam^{2n+1}) on flat connections
  (order 0 is the modular-class scalar);
* ``pontryagin_character(conn, q, n)`` -- Str((R_{QQ})^{2n});
* ``field_tensor_power(q, n)``      -- Q (x) ... (x) Q, the connection-free
  cocycles.

All of these are closed; the closedness residual is recomputed and recorded
whenever a :class:`CocycleReport` is produced, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .algebra import SuperPolynomial
from .connection import (
    Connection,
    curvature_endo,
    is_flat,
    q_covariant_gradient,
)
from .lie import HomologicalField, coboundary
from .tensor import (
    TensorField,
    assemble_form,
    assemble_lower_slot,
    endo_compose,
    endo_power,
    supertrace,
    tensor_product,
)

SERIES_TAGS = ("A", "B", "C", "P", "Qpow")


class InternalConventionError(RuntimeError):
    """A construction that is closed by theorem produced a nonzero coboundary."""


class FlatnessError(ValueError):
    """The flat-only series was requested with a curved connection."""


@dataclass(frozen=True)
class CocycleOneForm:
    """The closed endomorphism-valued one-form, as a (1,2) tensor.

    ``values[i]`` is the endomorphism obtained by feeding the i-th basis
    field into the form slot; ``tensor`` is the assembled (1,2) tensor whose
    first lower slot is that form slot.  Intrinsic parity is odd.
    """

    tensor: TensorField
    values: dict[int, TensorField]
    connection: Connection
    hq: HomologicalField

    @property
    def chart(self):
        return self.tensor.chart


def cocycle_one_form(conn: Connection, q: HomologicalField) -> CocycleOneForm:
    chart = conn.chart
    grad = q_covariant_gradient(conn, q)
    values = {}
    for i in range(chart.dim):
        r_iq = curvature_endo(conn, TensorField.coordinate_vector(chart, i),
                              q.field)
        values[i] = conn.coordinate_derivative(i, grad) - r_iq
    tensor = assemble_lower_slot(chart, 1, values, 1, 1)
    residual = coboundary(q, tensor)
    if not residual.is_zero():
        raise InternalConventionError(
            "the gradient one-form failed its closedness self-test; "
            "a sign convention is internally inconsistent")
    return CocycleOneForm(tensor=tensor, values=values, connection=conn, hq=q)


def _composition_values(omega: CocycleOneForm, n: int) -> dict[tuple, TensorField]:
    """Compositions Omega_{i_1} o ... o Omega_{i_n} for all coordinate tuples."""
    chart = omega.chart
    level: dict[tuple, TensorField] = {
        (): TensorField.identity_endomorphism(chart)}
    for _ in range(n):
        nxt: dict[tuple, TensorField] = {}
        for prefix, endo in level.items():
            for i in range(chart.dim):
                nxt[prefix + (i,)] = endo_compose(endo, omega.values[i])
        level = nxt
    return level


def composition_series(omega: CocycleOneForm, n: int) -> TensorField:
    """The (1, n+1) closed tensor of ordered n-fold one-form compositions.

    Order 0 is the identity endomorphism; evaluation on basis tuples is
    multiplicative by construction.
    """
    if n < 0:
        raise ValueError("series order must be >= 0")
    chart = omega.chart
    if n == 0:
        return TensorField.identity_endomorphism(chart)
    values = _composition_values(omega, n)
    return assemble_form(chart, n & 1, n, 1, 1, lambda idx: values[idx])


def trace_series(omega: CocycleOneForm, n: int) -> TensorField:
    """The (0, n) closed tensor of supertraced compositions (n >= 1)."""
    if n < 1:
        raise ValueError("the trace series starts at order 1")
    chart = omega.chart
    values = _composition_values(omega, n)
    scalars = {
        idx: TensorField.scalar(supertrace(endo))
        for idx, endo in values.items()
    }
    return assemble_form(chart, n & 1, n, 0, 0, lambda idx: scalars[idx])


def flat_trace_series(conn: Connection, q: HomologicalField,
                      n: int) -> SuperPolynomial:
    """Str(Lam^{2n+1}) for a flat connection; order 0 is the modular class."""
    if n < 0:
        raise ValueError("series order must be >= 0")
    if not is_flat(conn):
        raise FlatnessError(
            "this series is only defined for flat connections here: its "
            "curvature completion terms are not part of this engine")
    grad = q_covariant_gradient(conn, q)
    return supertrace(endo_power(grad, 2 * n + 1))


def pontryagin_character(conn: Connection, q: HomologicalField,
                         n: int) -> SuperPolynomial:
    """Str((R_{QQ})^{2n}); vanishes identically for flat connections (n >= 1)."""
    if n < 1:
        raise ValueError("the character series starts at order 1")
    r_qq = curvature_endo(conn, q.field, q.field)
    return supertrace(endo_power(r_qq, 2 * n))


def field_tensor_power(q: HomologicalField, n: int) -> TensorField:
    """Q^{(x) n}: the closed (n,0) tensors needing no connection (n >= 1)."""
    if n < 1:
        raise ValueError("tensor power starts at n = 1")
    result = q.field
    for _ in range(n - 1):
        result = tensor_product(result, q.field)
    return result


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class CocycleReport:
    """Serializable record of one computed cocycle.

    ``closedness_residual`` is the actual recomputed coboundary of ``value``
    (stored even when zero), so a report is self-certifying.
    """

    series: str
    order: int
    value: TensorField
    closedness_residual: TensorField
    connection_description: str
    model_description: str
    exactness: Optional[object] = None  # filled by cohomology tasks

    @property
    def is_closed(self) -> bool:
        return self.closedness_residual.is_zero()


def compute_series(series: str, order: int, q: HomologicalField,
                   conn: Optional[Connection]) -> TensorField:
    """Uniform entry point used by reports, tasks, and the homotopy builder."""
    if series == "Qpow":
        return field_tensor_power(q, order)
    if conn is None:
        raise ValueError(f"series {series!r} needs a connection")
    if series == "A":
        return TensorField.scalar(flat_trace_series(conn, q, order))
    if series == "P":
        return TensorField.scalar(pontryagin_character(conn, q, order))
    if series in ("B", "C"):
        omega = cocycle_one_form(conn, q)
        if series == "B":
            return composition_series(omega, order)
        return trace_series(omega, order)
    raise ValueError(f"unknown series tag {series!r}; expected one of {SERIES_TAGS}")


def build_report(series: str, order: int, q: HomologicalField,
                 conn: Optional[Connection], *, model_description: str = "",
                 connection_description: str = "") -> CocycleReport:
    value = compute_series(series, order, q, conn)
    residual = coboundary(q, value)
    if connection_description == "" and conn is not None:
        connection_description = conn.describe()
    return CocycleReport(
        series=series, order=order, value=value,
        closedness_residual=residual,
        connection_description=connection_description,
        model_description=model_description)
