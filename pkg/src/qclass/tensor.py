"""Tensor fields with exact polynomial components on a chart.

An (n, m) tensor field of intrinsic parity ``p`` is stored as a sparse map
from index pairs to scalars::

    components : {(upper_tuple, lower_tuple): SuperPolynomial}

with the invariant that every stored component is homogeneous of parity
``p + eps(upper) + eps(lower)`` (mod 2).  Missing entries are zero; zero
entries are never stored.  (0,0) tensors are the scalars themselves, (1,0)
tensors are vector fields, and (1,1) tensors form the associative algebra of
endomorphisms of the vector-field module.

Sign discipline
---------------
Every Koszul sign in this module is derived from ONE ordering convention: a
tensor is the formal word

    coefficient . e_{i_1} ... e_{i_n} f^{j_1} ... f^{j_m}

with the scalar coefficient on the left, the upper (vector) basis symbols
``e_i`` next, and the lower (covector) basis symbols ``f^j`` last.  Reordering
any two symbols of parities ``s`` and ``t`` costs ``(-1)^{s t}``; contraction
pairs a covector with a vector acting from the left, ``<f^j, e_i> = delta``.
With these two rules the identity endomorphism has plain Kronecker components,
composition has the closed form implemented below, and the supertrace is
literally the self-contraction of an endomorphism.  Nothing else in the
package introduces an independent sign choice.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping, Optional

from .algebra import (
    Chart,
    ChartMismatchError,
    Fraction,
    ParityError,
    Parity,
    SuperPolynomial,
)

Key = tuple  # (upper_tuple, lower_tuple)


class SignatureError(ValueError):
    """Operation applied to a tensor of the wrong (n, m) signature."""


class TensorField:
    """Immutable sparse tensor field; see the module docstring."""

    __slots__ = ("chart", "n_upper", "m_lower", "parity", "components")

    def __init__(self, chart: Chart, n_upper: int, m_lower: int, parity: Parity,
                 components: Mapping[Key, SuperPolynomial], *,
                 _validated: bool = False):
        self.chart = chart
        self.n_upper = int(n_upper)
        self.m_lower = int(m_lower)
        self.parity = parity & 1
        if _validated:
            self.components = dict(components)
        else:
            self.components = self._validate(chart, components)

    def _validate(self, chart: Chart,
                  components: Mapping[Key, SuperPolynomial]) -> dict:
        clean: dict[Key, SuperPolynomial] = {}
        dim = chart.dim
        for (upper, lower), value in components.items():
            if len(upper) != self.n_upper or len(lower) != self.m_lower:
                raise SignatureError(
                    f"component key {(upper, lower)} does not match "
                    f"signature ({self.n_upper},{self.m_lower})")
            for i in upper + lower:
                if not 0 <= i < dim:
                    raise SignatureError(f"index {i} out of chart range")
            if value.chart != chart:
                raise ChartMismatchError("component on a different chart")
            if value.is_zero():
                continue
            want = (self.parity + chart.total_parity(upper)
                    + chart.total_parity(lower)) & 1
            got = value.parity()
            if got is None or got != want:
                raise ParityError(
                    f"component at {(upper, lower)} must be homogeneous of "
                    f"parity {want}, got {value._plain_str()!r}")
            clean[(tuple(upper), tuple(lower))] = value
        return clean

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart, n_upper: int, m_lower: int,
             parity: Parity = 0) -> "TensorField":
        return cls(chart, n_upper, m_lower, parity, {}, _validated=True)

    @classmethod
    def scalar(cls, value: SuperPolynomial) -> "TensorField":
        p = value.require_homogeneous() if not value.is_zero() else 0
        comps = {} if value.is_zero() else {((), ()): value}
        return cls(value.chart, 0, 0, p, comps, _validated=True)

    @classmethod
    def vector(cls, chart: Chart, parity: Parity,
               components: Mapping[int, SuperPolynomial]) -> "TensorField":
        return cls(chart, 1, 0, parity,
                   {((i,), ()): v for i, v in components.items()})

    @classmethod
    def one_form(cls, chart: Chart, parity: Parity,
                 components: Mapping[int, SuperPolynomial]) -> "TensorField":
        return cls(chart, 0, 1, parity,
                   {((), (j,)): v for j, v in components.items()})

    @classmethod
    def coordinate_vector(cls, chart: Chart, index: int) -> "TensorField":
        """The basis field along coordinate ``index`` (parity of that coordinate)."""
        one = SuperPolynomial.one(chart)
        return cls(chart, 1, 0, chart.parity_of(index), {((index,), ()): one},
                   _validated=True)

    @classmethod
    def identity_endomorphism(cls, chart: Chart) -> "TensorField":
        one = SuperPolynomial.one(chart)
        comps = {((i,), (i,)): one for i in range(chart.dim)}
        return cls(chart, 1, 1, 0, comps, _validated=True)

    # -- basic structure -----------------------------------------------------

    @property
    def signature(self) -> tuple[int, int]:
        return (self.n_upper, self.m_lower)

    def is_zero(self) -> bool:
        return not self.components

    def component(self, upper: Iterable[int] = (),
                  lower: Iterable[int] = ()) -> SuperPolynomial:
        key = (tuple(upper), tuple(lower))
        got = self.components.get(key)
        return got if got is not None else SuperPolynomial.zero(self.chart)

    def as_scalar(self) -> SuperPolynomial:
        if self.signature != (0, 0):
            raise SignatureError("only (0,0) tensors convert to scalars")
        return self.component()

    def is_endomorphism(self) -> bool:
        return self.signature == (1, 1)

    def is_vector_field(self) -> bool:
        return self.signature == (1, 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorField):
            return NotImplemented
        if (self.chart != other.chart or self.signature != other.signature):
            return False
        if not self.components and not other.components:
            return True  # the zero tensor carries no usable parity
        return self.parity == other.parity and self.components == other.components

    __hash__ = None

    def __repr__(self) -> str:
        body = ", ".join(
            f"{key}: {val._plain_str()}"
            for key, val in sorted(self.components.items()))
        return (f"TensorField({self.n_upper},{self.m_lower}; "
                f"parity={self.parity}; {{{body}}})")

    # -- linear structure ----------------------------------------------------

    def _require_compatible(self, other: "TensorField") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError("tensors live on different charts")
        if self.signature != other.signature:
            raise SignatureError("tensor signatures differ")
        if self.components and other.components and self.parity != other.parity:
            raise ParityError("cannot combine tensors of different parity")

    def __add__(self, other: "TensorField") -> "TensorField":
        self._require_compatible(other)
        parity = self.parity if self.components else other.parity
        out = dict(self.components)
        for key, val in other.components.items():
            acc = out.get(key)
            total = val if acc is None else acc + val
            if total.is_zero():
                out.pop(key, None)
            else:
                out[key] = total
        return TensorField(self.chart, self.n_upper, self.m_lower, parity, out,
                           _validated=True)

    def __neg__(self) -> "TensorField":
        return TensorField(self.chart, self.n_upper, self.m_lower, self.parity,
                           {k: -v for k, v in self.components.items()},
                           _validated=True)

    def __sub__(self, other: "TensorField") -> "TensorField":
        return self + (-other)

    def scale(self, factor) -> "TensorField":
        out = {}
        for key, val in self.components.items():
            scaled = val.scale(factor)
            if not scaled.is_zero():
                out[key] = scaled
        return TensorField(self.chart, self.n_upper, self.m_lower, self.parity,
                           out, _validated=True)

    def scalar_multiply(self, poly: SuperPolynomial) -> "TensorField":
        """Left multiplication by a homogeneous scalar function."""
        if poly.chart != self.chart:
            raise ChartMismatchError("scalar on a different chart")
        if poly.is_zero():
            return TensorField.zero(self.chart, self.n_upper, self.m_lower,
                                    self.parity)
        p = poly.require_homogeneous()
        out = {}
        for key, val in self.components.items():
            prod = poly * val
            if not prod.is_zero():
                out[key] = prod
        return TensorField(self.chart, self.n_upper, self.m_lower,
                           (self.parity + p) & 1, out, _validated=True)


# ---------------------------------------------------------------------------
# multiplicative structure
# ---------------------------------------------------------------------------

def tensor_product(a: TensorField, b: TensorField) -> TensorField:
    """Graded tensor product, components in canonical word order.

    Bringing ``(a-word)(b-word)`` to canonical order moves b's coefficient
    left past a's basis symbols and b's upper symbols left past a's lower
    symbols, which yields the sign implemented here.
    """
    if a.chart != b.chart:
        raise ChartMismatchError("tensors live on different charts")
    chart = a.chart
    eps = chart.total_parity
    out: dict[Key, SuperPolynomial] = {}
    pb = b.parity
    for (ia, ja), ca in a.components.items():
        eia, eja = eps(ia), eps(ja)
        for (ib, jb), cb in b.components.items():
            sign_bit = (((pb ^ eps(ib) ^ eps(jb)) & (eia ^ eja))
                        ^ (eps(ib) & eja))
            prod = ca * cb
            if sign_bit:
                prod = -prod
            if prod.is_zero():
                continue
            key = (ia + ib, ja + jb)
            acc = out.get(key)
            total = prod if acc is None else acc + prod
            if total.is_zero():
                out.pop(key, None)
            else:
                out[key] = total
    return TensorField(chart, a.n_upper + b.n_upper, a.m_lower + b.m_lower,
                       (a.parity + b.parity) & 1, out, _validated=True)


def contract(t: TensorField, upper_slot: int, lower_slot: int) -> TensorField:
    """Contract one upper slot against one lower slot.

    The covector of the lower slot is commuted left until it acts on the
    vector symbol of the upper slot; the moves past the symbols in between
    plus the final pairing flip give the sign.
    """
    if not 0 <= upper_slot < t.n_upper:
        raise SignatureError(f"upper slot {upper_slot} out of range")
    if not 0 <= lower_slot < t.m_lower:
        raise SignatureError(f"lower slot {lower_slot} out of range")
    chart = t.chart
    parities = chart.parities
    eps = chart.total_parity
    out: dict[Key, SuperPolynomial] = {}
    for (upper, lower), val in t.components.items():
        k = upper[upper_slot]
        if k != lower[lower_slot]:
            continue
        crossed = eps(upper[upper_slot + 1:]) ^ eps(lower[:lower_slot]) ^ 1
        term = -val if (parities[k] & crossed) else val
        key = (upper[:upper_slot] + upper[upper_slot + 1:],
               lower[:lower_slot] + lower[lower_slot + 1:])
        acc = out.get(key)
        total = term if acc is None else acc + term
        if total.is_zero():
            out.pop(key, None)
        else:
            out[key] = total
    return TensorField(chart, t.n_upper - 1, t.m_lower - 1, t.parity, out,
                       _validated=True)


# ---------------------------------------------------------------------------
# the endomorphism algebra
# ---------------------------------------------------------------------------

def endo_compose(a: TensorField, b: TensorField) -> TensorField:
    """Composition ``a o b`` of endomorphisms; equals contracting a (x) b."""
    if not (a.is_endomorphism() and b.is_endomorphism()):
        raise SignatureError("composition needs (1,1) tensors")
    if a.chart != b.chart:
        raise ChartMismatchError("endomorphisms on different charts")
    chart = a.chart
    parities = chart.parities
    pb = b.parity
    out: dict[Key, SuperPolynomial] = {}
    for ((i,), (k,)), ca in a.components.items():
        for ((k2,), (j,)), cb in b.components.items():
            if k2 != k:
                continue
            prod = ca * cb
            if (pb ^ parities[j] ^ parities[k]) & (parities[i] ^ parities[k]):
                prod = -prod
            if prod.is_zero():
                continue
            key = ((i,), (j,))
            acc = out.get(key)
            total = prod if acc is None else acc + prod
            if total.is_zero():
                out.pop(key, None)
            else:
                out[key] = total
    return TensorField(chart, 1, 1, (a.parity + b.parity) & 1, out,
                       _validated=True)


def endo_power(a: TensorField, n: int) -> TensorField:
    """n-fold composition of an endomorphism with itself (n >= 1)."""
    if n < 1:
        raise ValueError("endo_power needs n >= 1")
    result = a
    for _ in range(n - 1):
        result = endo_compose(result, a)
    return result


def endo_commutator(a: TensorField, b: TensorField) -> TensorField:
    """Supercommutator [a, b] = a o b - (-1)^{|a||b|} b o a."""
    ab = endo_compose(a, b)
    ba = endo_compose(b, a)
    if a.parity & b.parity:
        return ab + ba
    return ab - ba


def endo_apply(a: TensorField, x: TensorField) -> TensorField:
    """Action of an endomorphism on a vector field from the left."""
    if not a.is_endomorphism():
        raise SignatureError("endo_apply needs a (1,1) tensor")
    if not x.is_vector_field():
        raise SignatureError("endo_apply acts on (1,0) tensors")
    if a.chart != x.chart:
        raise ChartMismatchError("operands on different charts")
    chart = a.chart
    parities = chart.parities
    px = x.parity
    out: dict[Key, SuperPolynomial] = {}
    for ((i,), (k,)), ca in a.components.items():
        xk = x.components.get(((k,), ()))
        if xk is None:
            continue
        prod = ca * xk
        if (px ^ parities[k]) & (parities[i] ^ parities[k]):
            prod = -prod
        if prod.is_zero():
            continue
        key = ((i,), ())
        acc = out.get(key)
        total = prod if acc is None else acc + prod
        if total.is_zero():
            out.pop(key, None)
        else:
            out[key] = total
    return TensorField(chart, 1, 0, (a.parity + x.parity) & 1, out,
                       _validated=True)


def endo_from_action(chart: Chart, parity: Parity,
                     images: Mapping[int, TensorField]) -> TensorField:
    """Endomorphism with prescribed action on the coordinate basis fields.

    In the convention of this module the components of an endomorphism are
    literally the images of the basis fields: a^i_j = (a(e_j))^i.
    """
    comps: dict[Key, SuperPolynomial] = {}
    for j, image in images.items():
        if image.is_zero():
            continue
        if not image.is_vector_field():
            raise SignatureError("basis images must be vector fields")
        want = (parity + chart.parity_of(j)) & 1
        if image.parity != want:
            raise ParityError(
                f"image of basis field {j} has parity {image.parity}, "
                f"expected {want}")
        for ((i,), ()), val in image.components.items():
            comps[((i,), (j,))] = val
    return TensorField(chart, 1, 1, parity, comps)


def supertrace(a: TensorField) -> SuperPolynomial:
    """Alternating-sign sum of the diagonal; kills all supercommutators.

    Coincides with ``contract(a, 0, 0)`` in this module's convention; the
    vanishing on supercommutators is what pins the sign, and is covered by a
    randomized test.
    """
    if not a.is_endomorphism():
        raise SignatureError("supertrace is defined on (1,1) tensors")
    total = SuperPolynomial.zero(a.chart)
    parities = a.chart.parities
    for ((i,), (j,)), val in a.components.items():
        if i != j:
            continue
        total = total + (-val if parities[i] else val)
    return total


# ---------------------------------------------------------------------------
# argument slots: evaluation and assembly
# ---------------------------------------------------------------------------

def plug(t: TensorField, x: TensorField) -> TensorField:
    """Feed a vector field into the first lower slot of ``t``.

    Equal to ``contract(tensor_product(x, t), 0, 0)``; implemented directly.
    """
    if not x.is_vector_field():
        raise SignatureError("plug takes a vector field argument")
    if t.m_lower < 1:
        raise SignatureError("tensor has no lower slot to evaluate")
    if t.chart != x.chart:
        raise ChartMismatchError("operands on different charts")
    chart = t.chart
    parities = chart.parities
    eps = chart.total_parity
    pt = t.parity
    out: dict[Key, SuperPolynomial] = {}
    for (upper, lower), val in t.components.items():
        k = lower[0]
        xk = x.components.get(((k,), ()))
        if xk is None:
            continue
        rest = lower[1:]
        term = xk * val
        if parities[k] & (pt ^ eps(rest)):
            term = -term
        if term.is_zero():
            continue
        key = (upper, rest)
        acc = out.get(key)
        total = term if acc is None else acc + term
        if total.is_zero():
            out.pop(key, None)
        else:
            out[key] = total
    return TensorField(chart, t.n_upper, t.m_lower - 1,
                       (t.parity + x.parity) & 1, out, _validated=True)


def plug_coordinates(t: TensorField, indices: Iterable[int]) -> TensorField:
    """Evaluate leading lower slots on coordinate basis fields, left to right."""
    result = t
    for i in indices:
        result = plug(result, TensorField.coordinate_vector(t.chart, i))
    return result


def assemble_lower_slot(chart: Chart, parity: Parity,
                        values: Mapping[int, TensorField],
                        n_upper: int, m_lower: int) -> TensorField:
    """Inverse of :func:`plug` on coordinate fields.

    Builds the (n_upper, m_lower + 1) tensor S of intrinsic parity ``parity``
    with ``plug(S, e_i) == values[i]``; each value must be an
    (n_upper, m_lower) tensor of parity ``parity + eps_i``.
    """
    parities = chart.parities
    eps = chart.total_parity
    comps: dict[Key, SuperPolynomial] = {}
    for i, value in values.items():
        if value.is_zero():
            continue
        if value.signature != (n_upper, m_lower):
            raise SignatureError("slot value of wrong signature")
        if value.parity != (parity + parities[i]) & 1:
            raise ParityError(f"slot value for index {i} has wrong parity")
        for (upper, lower), val in value.components.items():
            term = -val if (parities[i] & (parity ^ eps(lower))) else val
            comps[(upper, (i,) + lower)] = term
    return TensorField(chart, n_upper, m_lower + 1, parity, comps,
                       _validated=True)


def assemble_form(chart: Chart, parity: Parity, n_args: int,
                  n_upper: int, m_lower: int,
                  value_fn: Callable[[tuple], TensorField]) -> TensorField:
    """Assemble a tensor with ``n_args`` leading lower slots from its values
    on coordinate tuples; ``value_fn(i_1..i_k ...)`` evaluates left to right."""
    def build(prefix: tuple, remaining: int, p: Parity) -> TensorField:
        if remaining == 0:
            return value_fn(prefix)
        values = {
            i: build(prefix + (i,), remaining - 1, (p + chart.parities[i]) & 1)
            for i in range(chart.dim)
        }
        return assemble_lower_slot(chart, p, values, n_upper,
                                   m_lower + remaining - 1)
    return build((), n_args, parity)


# ---------------------------------------------------------------------------
# derivation engine
# ---------------------------------------------------------------------------

def extend_derivation(t: TensorField, d_parity: Parity,
                      coeff_fn: Callable[[SuperPolynomial], SuperPolynomial],
                      e_action: Mapping[int, Mapping[int, SuperPolynomial]],
                      f_action: Mapping[int, Mapping[int, SuperPolynomial]],
                      ) -> TensorField:
    """Extend a derivation to tensors by the graded Leibniz rule over words.

    The derivation is specified by its parity, its action on scalar
    coefficients, and its action on basis symbols::

        D(e_j) = sum_k e_action[j][k] . e_k
        D(f^j) = sum_k f_action[j][k] . f^k

    (each action coefficient homogeneous, written in canonical left position).
    Both the Lie derivative and the covariant derivative are instances; having
    a single Leibniz engine means their signs cannot drift apart.
    """
    chart = t.chart
    parities = chart.parities
    out: dict[Key, SuperPolynomial] = {}

    def acc(key: Key, term: SuperPolynomial) -> None:
        if term.is_zero():
            return
        prev = out.get(key)
        total = term if prev is None else prev + term
        if total.is_zero():
            out.pop(key, None)
        else:
            out[key] = total

    for (upper, lower), c in t.components.items():
        acc((upper, lower), coeff_fn(c))
        w = c.parity()  # stored components are homogeneous, never None
        for a, ia in enumerate(upper):
            action = e_action.get(ia)
            if action:
                for k, g in action.items():
                    gp = g.parity()
                    if gp is None:
                        raise ParityError("derivation action must be homogeneous")
                    term = g * c
                    if (d_parity ^ gp) & w:
                        term = -term
                    acc((upper[:a] + (k,) + upper[a + 1:], lower), term)
            w ^= parities[ia]
        for b, jb in enumerate(lower):
            action = f_action.get(jb)
            if action:
                for k, g in action.items():
                    gp = g.parity()
                    if gp is None:
                        raise ParityError("derivation action must be homogeneous")
                    term = g * c
                    if (d_parity ^ gp) & w:
                        term = -term
                    acc((upper, lower[:b] + (k,) + lower[b + 1:]), term)
            w ^= parities[jb]
    return TensorField(chart, t.n_upper, t.m_lower,
                       (t.parity + d_parity) & 1, out)
