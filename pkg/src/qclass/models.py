"""Builders for the standard chart models carrying a homological field.

Three families cover the interesting desk-scale examples:

* odd tangent charts (x^1..x^n even, th^1..th^n odd) with the de Rham field
  Q = sum th^i d_{x^i}; scalars identify with differential forms on R^n and
  the coboundary with the exterior derivative;
* purely odd charts with the quadratic field of a Lie algebra,
  Q^k = -1/2 c^k_{ij} th^i th^j, homological exactly when the Jacobi identity
  holds;
* mixed charts with an anchor and structure functions (Lie algebroid data),
  degenerating to the two families above.

Every builder funnels its field through :func:`qclass.lie.certify_homological`
and never hands out an uncertified model.  The ``extend_with_r11`` helper
appends one even and one odd coordinate (reserved ``__``-prefixed names) and
shifts the field by th_aux d_t; it is the chart product used by the
connection-independence homotopy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .algebra import Chart, ChartError, EVEN, ODD, SuperPolynomial
from .lie import HomologicalField, NotHomologicalError, certify_homological
from .tensor import TensorField

#: names injected by :func:`extend_with_r11`; user charts must avoid the prefix
RESERVED_PREFIX = "__"
EXTENSION_EVEN = "__t"
EXTENSION_ODD = "__th"


@dataclass(frozen=True)
class ModelDescriptor:
    """A chart with a certified homological field and its provenance."""

    kind: str
    chart: Chart
    hq: HomologicalField
    params: dict = field(default_factory=dict)
    description: str = ""


def build_odd_tangent(base_dim: int) -> ModelDescriptor:
    """Odd tangent chart of R^n with the de Rham field sum th^i d_{x^i}."""
    if base_dim < 1:
        raise ValueError("base dimension must be >= 1")
    coords = [(f"x{i + 1}", EVEN) for i in range(base_dim)]
    coords += [(f"th{i + 1}", ODD) for i in range(base_dim)]
    chart = Chart(coords)
    comps = {
        i: SuperPolynomial.coordinate(chart, base_dim + i)
        for i in range(base_dim)
    }
    q = TensorField.vector(chart, ODD, comps)
    return ModelDescriptor(
        kind="odd-tangent", chart=chart, hq=certify_homological(q),
        params={"base_dim": base_dim},
        description=f"odd tangent chart over R^{base_dim} with de Rham field")


def _quadratic_field(chart: Chart, dim: int,
                     constants: Mapping[tuple[int, int, int], Fraction],
                     offset: int = 0) -> dict[int, SuperPolynomial]:
    """Components Q^k = -1/2 sum c^k_{ij} th^i th^j (indices 0-based)."""
    comps: dict[int, SuperPolynomial] = {}
    for (k, i, j), c in constants.items():
        if not c:
            continue
        th_i = SuperPolynomial.coordinate(chart, offset + i)
        th_j = SuperPolynomial.coordinate(chart, offset + j)
        term = (th_i * th_j).scale(Fraction(-1, 2) * c)
        comps[offset + k] = comps.get(
            offset + k, SuperPolynomial.zero(chart)) + term
    return {k: v for k, v in comps.items() if not v.is_zero()}


def _check_lower_antisymmetry(constants: Mapping[tuple[int, int, int], Fraction],
                              what: str) -> None:
    for (k, i, j), c in constants.items():
        if i == j and c:
            raise ValueError(f"{what}[{k},{i},{j}] must vanish on a repeated pair")
        mirror = constants.get((k, j, i), Fraction(0))
        if mirror != -c:
            raise ValueError(
                f"{what} must be antisymmetric in the lower pair: "
                f"entry ({k},{i},{j}) = {c} but ({k},{j},{i}) = {mirror}")


def build_chevalley_eilenberg(
        dimension: int,
        structure_constants: Mapping[tuple[int, int, int], Fraction],
) -> ModelDescriptor:
    """Purely odd chart th^1..th^q with the quadratic field of a Lie algebra.

    ``structure_constants`` maps 0-based (k, i, j) to c^k_{ij} with
    c^k_{ij} = -c^k_{ji}; certification succeeds exactly when the constants
    satisfy the Jacobi identity, and the raised error names the failing
    self-bracket components otherwise.
    """
    if dimension < 1:
        raise ValueError("algebra dimension must be >= 1")
    constants = {key: Fraction(val) for key, val in structure_constants.items()}
    for (k, i, j) in constants:
        for idx in (k, i, j):
            if not 0 <= idx < dimension:
                raise ValueError(f"structure-constant index {idx} out of range")
    _check_lower_antisymmetry(constants, "structure constants")
    chart = Chart([(f"th{i + 1}", ODD) for i in range(dimension)])
    q = TensorField.vector(chart, ODD, _quadratic_field(chart, dimension, constants))
    return ModelDescriptor(
        kind="chevalley-eilenberg", chart=chart, hq=certify_homological(q),
        params={"dimension": dimension,
                "structure_constants": dict(constants)},
        description=f"quadratic field of a {dimension}-dimensional Lie algebra")


def build_lie_algebroid(
        base_dim: int,
        fiber_dim: int,
        anchor: Mapping[tuple[int, int], SuperPolynomial],
        structure_functions: Mapping[tuple[int, int, int], SuperPolynomial],
        chart: Optional[Chart] = None,
) -> ModelDescriptor:
    """Anchored chart (x^1..x^n even, th^1..th^q odd) with

        Q = sum th^a rho^i_a(x) d_{x^i} - 1/2 sum C^c_{ab}(x) th^a th^b d_{th^c}.

    ``anchor`` maps 0-based (i, a) to rho^i_a; ``structure_functions`` maps
    (c, a, b) to C^c_{ab} with C^c_{ab} = -C^c_{ba}.  All entries must be
    polynomials in the even coordinates only.  Certification succeeds exactly
    when the anchored compatibility identities hold.
    """
    if base_dim < 0 or fiber_dim < 1:
        raise ValueError("need base_dim >= 0 and fiber_dim >= 1")
    if chart is None:
        coords = [(f"x{i + 1}", EVEN) for i in range(base_dim)]
        coords += [(f"th{a + 1}", ODD) for a in range(fiber_dim)]
        chart = Chart(coords)
    elif chart.dim != base_dim + fiber_dim:
        raise ChartError("chart size does not match base_dim + fiber_dim")

    def even_only(poly: SuperPolynomial, what: str) -> SuperPolynomial:
        if any(mono[1] for mono in poly.terms):
            raise ValueError(f"{what} must depend on even coordinates only")
        return poly

    comps: dict[int, SuperPolynomial] = {}
    for (i, a), rho in anchor.items():
        if not (0 <= i < base_dim and 0 <= a < fiber_dim):
            raise ValueError(f"anchor index ({i},{a}) out of range")
        rho = even_only(rho, "anchor entry")
        if rho.is_zero():
            continue
        th_a = SuperPolynomial.coordinate(chart, base_dim + a)
        comps[i] = comps.get(i, SuperPolynomial.zero(chart)) + th_a * rho

    consts: dict[tuple[int, int, int], SuperPolynomial] = {}
    for (c, a, b), value in structure_functions.items():
        if not all(0 <= idx < fiber_dim for idx in (c, a, b)):
            raise ValueError(f"structure-function index ({c},{a},{b}) out of range")
        consts[(c, a, b)] = even_only(value, "structure function")
    for (c, a, b), value in consts.items():
        if a == b and not value.is_zero():
            raise ValueError(
                f"structure function [{c},{a},{b}] must vanish on a repeated pair")
        mirror = consts.get((c, b, a), SuperPolynomial.zero(chart))
        if mirror != -value:
            raise ValueError(
                "structure functions must be antisymmetric in the lower pair")
    for (c, a, b), value in consts.items():
        if value.is_zero():
            continue
        th_a = SuperPolynomial.coordinate(chart, base_dim + a)
        th_b = SuperPolynomial.coordinate(chart, base_dim + b)
        term = (th_a * th_b * value).scale(Fraction(-1, 2))
        key = base_dim + c
        comps[key] = comps.get(key, SuperPolynomial.zero(chart)) + term

    comps = {k: v for k, v in comps.items() if not v.is_zero()}
    q = TensorField.vector(chart, ODD, comps)
    return ModelDescriptor(
        kind="lie-algebroid", chart=chart, hq=certify_homological(q),
        params={"base_dim": base_dim, "fiber_dim": fiber_dim},
        description=f"anchored field on R^{base_dim} with {fiber_dim} odd fibers")


def extend_with_r11(model: ModelDescriptor) -> ModelDescriptor:
    """Chart product with one even and one odd auxiliary coordinate.

    The extended field is Q + th_aux d_t, homological whenever Q is; the
    auxiliary names are reserved and collide with nothing a manifest can
    declare.
    """
    chart = model.chart
    for name in (EXTENSION_EVEN, EXTENSION_ODD):
        if name in chart.names:
            raise ChartError(f"chart already uses the reserved name {name!r}")
    new_chart = Chart(list(chart.coordinates)
                      + [(EXTENSION_EVEN, EVEN), (EXTENSION_ODD, ODD)])
    t_index = chart.dim
    th_index = chart.dim + 1
    comps = {
        key[0][0]: _lift(value, new_chart)
        for key, value in model.hq.field.components.items()
    }
    comps[t_index] = SuperPolynomial.coordinate(new_chart, th_index)
    q = TensorField.vector(new_chart, ODD, comps)
    return ModelDescriptor(
        kind=model.kind + "+R(1,1)", chart=new_chart,
        hq=certify_homological(q), params=dict(model.params),
        description=model.description + ", extended by an even/odd pair")


def _lift(poly: SuperPolynomial, bigger: Chart) -> SuperPolynomial:
    """Reinterpret a polynomial on a chart that extends its own by new trailing
    coordinates (indices are preserved, so terms carry over verbatim)."""
    return SuperPolynomial(bigger, poly.terms, _normalized=True)
