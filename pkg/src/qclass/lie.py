"""Vector-field calculus: brackets, Lie derivatives, and the coboundary.

The bracket and the Lie derivative are defined operationally, not by
hand-placed component formulas: a vector field acts on scalars as a
derivation, the bracket is the graded commutator of two such actions read off
on the coordinate functions, and the Lie derivative is the unique extension of
those two actions to all tensors that satisfies the graded Leibniz rule over
tensor products and commutes with contraction.  The extension runs through
:func:`qclass.tensor.extend_derivation`, so there is exactly one place where
Leibniz signs are produced.

An odd vector field Q with vanishing self-bracket is *homological*; the
associated coboundary is the Lie derivative along Q, which squares to zero.
Certification of the self-bracket is mandatory: every downstream construction
takes a :class:`HomologicalField`, never a raw vector field.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import (
    Chart,
    ChartMismatchError,
    ODD,
    ParityError,
    SuperPolynomial,
)
from .tensor import SignatureError, TensorField, extend_derivation


class NotHomologicalError(ValueError):
    """Raised when a field fails the self-bracket test; carries witnesses."""

    def __init__(self, witnesses: dict[str, SuperPolynomial]):
        self.witnesses = witnesses
        parts = ", ".join(
            f"[Q,Q]^{name} = {poly._plain_str()}"
            for name, poly in sorted(witnesses.items()))
        super().__init__(f"vector field is not homological: {parts}")


def apply_vector(x: TensorField, f: SuperPolynomial) -> SuperPolynomial:
    """Derivation action X(f) = sum_i X^i . (left d_i f)."""
    if not x.is_vector_field():
        raise SignatureError("apply_vector needs a (1,0) tensor")
    if x.chart != f.chart:
        raise ChartMismatchError("vector field and scalar on different charts")
    total = SuperPolynomial.zero(f.chart)
    for ((i,), ()), xi in x.components.items():
        total = total + xi * f.partial(i)
    return total


def bracket(x: TensorField, y: TensorField) -> TensorField:
    """Graded commutator of vector fields, [X,Y]^k = X(Y^k) - (-1)^{|X||Y|} Y(X^k)."""
    if not (x.is_vector_field() and y.is_vector_field()):
        raise SignatureError("bracket needs (1,0) tensors")
    if x.chart != y.chart:
        raise ChartMismatchError("vector fields on different charts")
    chart = x.chart
    both_odd = bool(x.parity & y.parity)
    comps = {}
    for k in range(chart.dim):
        first = apply_vector(x, y.component((k,), ()))
        second = apply_vector(y, x.component((k,), ()))
        value = first + second if both_odd else first - second
        if not value.is_zero():
            comps[((k,), ())] = value
    return TensorField(chart, 1, 0, (x.parity + y.parity) & 1, comps)


def _lie_actions(x: TensorField):
    """Basis-symbol actions of L_X, derived from [X, e_j] and duality."""
    chart = x.chart
    parities = chart.parities
    px = x.parity
    # d_j X^k, sparse over the nonzero components of X
    partials: dict[tuple[int, int], SuperPolynomial] = {}
    for ((k,), ()), xk in x.components.items():
        for j in range(chart.dim):
            d = xk.partial(j)
            if not d.is_zero():
                partials[(j, k)] = d
    e_action: dict[int, dict[int, SuperPolynomial]] = {}
    f_action: dict[int, dict[int, SuperPolynomial]] = {}
    for (j, k), d in partials.items():
        # L_X e_j = -(-1)^{|X| eps_j} (d_j X^k) e_k
        g = -d if not (px & parities[j]) else d
        e_action.setdefault(j, {})[k] = g
        # L_X f^k = (-1)^{|X| eps_j + eps_k eps_j + eps_k} (d_j X^k) f^j
        s = ((px & parities[j]) ^ (parities[k] & parities[j]) ^ parities[k]) & 1
        f_action.setdefault(k, {})[j] = -d if s else d
    return e_action, f_action


def lie_derivative(x: TensorField, t: TensorField) -> TensorField:
    """L_X t for homogeneous X; output parity is |X| + |t|."""
    if not x.is_vector_field():
        raise SignatureError("lie_derivative differentiates along a (1,0) tensor")
    if x.chart != t.chart:
        raise ChartMismatchError("operands on different charts")
    e_action, f_action = _lie_actions(x)
    return extend_derivation(
        t, x.parity, lambda c: apply_vector(x, c), e_action, f_action)


@dataclass(frozen=True)
class HomologicalField:
    """An odd vector field together with evidence that [Q, Q] = 0.

    Instances are only produced by :func:`certify_homological` (and by the
    model builders, which call it); holding one IS the certificate.
    """

    field: TensorField

    @property
    def chart(self) -> Chart:
        return self.field.chart

    def __call__(self, f: SuperPolynomial) -> SuperPolynomial:
        return apply_vector(self.field, f)


def certify_homological(x: TensorField) -> HomologicalField:
    """Check [X, X] = 0 exactly and wrap the field; raise with witnesses else."""
    if not x.is_vector_field():
        raise SignatureError("certification applies to (1,0) tensors")
    if x.parity != ODD:
        raise ParityError("a homological field must be odd")
    self_bracket = bracket(x, x)
    if not self_bracket.is_zero():
        names = x.chart.names
        witnesses = {
            names[key[0][0]]: val
            for key, val in self_bracket.components.items()
        }
        raise NotHomologicalError(witnesses)
    return HomologicalField(x)


def coboundary(q: HomologicalField, t: TensorField) -> TensorField:
    """The differential: Lie derivative along the certified field; flips parity."""
    return lie_derivative(q.field, t)
