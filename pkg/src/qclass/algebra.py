"""Exact scalar arithmetic over a supermanifold coordinate chart.

Scalars live in the free supercommutative algebra Q[x_1..x_p] (x) L[th_1..th_q]
attached to a chart: polynomials in the even coordinates with rational
coefficients, times Grassmann monomials in the odd coordinates.  Everything is
kept in a canonical normal form -- odd factors in ascending chart order, no
zero coefficients stored -- so that equality of values is literal equality of
term dictionaries and every identity checked downstream is exact.

A monomial is a pair of plain tuples::

    Monomial = (even, odd)
    even     = ((coord_index, exponent), ...)   # sorted by index, exponent >= 1
    odd      = (coord_index, ...)               # strictly ascending, no repeats

Reordering odd factors during multiplication contributes the sign of the
permutation; a repeated odd factor kills the term (th^2 = 0).

The derivative fixed here, and relied on by every module downstream, is the
LEFT partial derivative: for an odd coordinate the factor is commuted to the
front of the monomial, collecting the permutation sign, and then struck; for
an even coordinate it is the usual formal derivative.  See
:mod:`qclass.conventions` for the full sign-convention handbook.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

EVEN = 0
ODD = 1

#: Parities are plain ints 0 (even) / 1 (odd); parity addition is XOR.
Parity = int

EvenPart = tuple
OddPart = tuple
Monomial = tuple

MONO_ONE: Monomial = ((), ())

Scalar = Union[int, Fraction]


class ChartError(ValueError):
    """Malformed chart declaration."""


class ChartMismatchError(ValueError):
    """Operands built over different charts."""


class UnknownCoordinateError(ValueError):
    """Coordinate index or name not present in the chart."""


class ParityError(ValueError):
    """A homogeneous-parity value was required but not supplied."""


def parity_name(p: Parity) -> str:
    return "odd" if p & 1 else "even"


class Chart:
    """An ordered list of named coordinates with parities.

    The declaration order is fixed at construction and never changes: it
    defines both the canonical form of odd monomials and the index order of
    tensor components.  Charts compare equal iff their coordinate lists agree.
    """

    __slots__ = ("coordinates", "names", "parities", "_index")

    def __init__(self, coordinates: Iterable[tuple[str, Parity]]):
        coords = tuple((str(name), int(parity)) for name, parity in coordinates)
        if not coords:
            raise ChartError("chart must declare at least one coordinate")
        names = tuple(name for name, _ in coords)
        if len(set(names)) != len(names):
            raise ChartError("coordinate names must be pairwise distinct")
        for name, parity in coords:
            if parity not in (EVEN, ODD):
                raise ChartError(f"parity of {name!r} must be 0 (even) or 1 (odd)")
            if not name:
                raise ChartError("coordinate names must be nonempty")
        self.coordinates = coords
        self.names = names
        self.parities = tuple(parity for _, parity in coords)
        self._index = {name: i for i, name in enumerate(names)}

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    @property
    def even_indices(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.parities) if p == EVEN)

    @property
    def odd_indices(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.parities) if p == ODD)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownCoordinateError(f"unknown coordinate {name!r}") from None

    def parity_of(self, index: int) -> Parity:
        if not 0 <= index < len(self.parities):
            raise UnknownCoordinateError(f"coordinate index {index} out of range")
        return self.parities[index]

    def total_parity(self, indices: Iterable[int]) -> Parity:
        total = 0
        for i in indices:
            total ^= self.parities[i]
        return total

    def __eq__(self, other) -> bool:
        return isinstance(other, Chart) and self.coordinates == other.coordinates

    def __hash__(self) -> int:
        return hash(self.coordinates)

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}:{parity_name(p)}" for n, p in self.coordinates)
        return f"Chart({inner})"


def require_same_chart(a: "SuperPolynomial", b: "SuperPolynomial") -> None:
    if a.chart != b.chart:
        raise ChartMismatchError("operands live on different charts")


# ---------------------------------------------------------------------------
# monomial helpers
# ---------------------------------------------------------------------------

def mono_parity(m: Monomial) -> Parity:
    return len(m[1]) & 1


def mono_even_degree(m: Monomial) -> int:
    return sum(e for _, e in m[0])


def mono_degree(m: Monomial) -> int:
    return mono_even_degree(m) + len(m[1])


def mono_sort_key(m: Monomial):
    """Deterministic total order used for serialization and reports."""
    return (mono_degree(m), m[0], m[1])


def _merge_even(a: EvenPart, b: EvenPart) -> EvenPart:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for idx, exp in b:
        merged[idx] = merged.get(idx, 0) + exp
    return tuple(sorted(merged.items()))


def _merge_odd(a: OddPart, b: OddPart) -> tuple[int, OddPart]:
    """Concatenate two ascending odd-factor lists into ascending order.

    Returns (sign, merged) where sign is the parity of the permutation used,
    or (0, ()) when a factor repeats (th^2 = 0).
    """
    if not a:
        return 1, b
    if not b:
        return 1, a
    out = []
    i = j = 0
    inversions = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            return 0, ()
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        else:
            # b[j] jumps over the remaining factors of a
            inversions += len(a) - i
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    sign = -1 if inversions & 1 else 1
    return sign, tuple(out)


def mono_mul(a: Monomial, b: Monomial) -> tuple[int, Optional[Monomial]]:
    """Product of monomials in normal form: (sign, monomial) or (0, None)."""
    sign, odd = _merge_odd(a[1], b[1])
    if sign == 0:
        return 0, None
    return sign, (_merge_even(a[0], b[0]), odd)


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

class SuperPolynomial:
    """Element of the supercommutative polynomial algebra on a chart.

    Values are immutable by convention: no method mutates ``terms`` after
    construction, so instances are safe to share freely.
    """

    __slots__ = ("chart", "terms", "_parity_cache")

    def __init__(self, chart: Chart, terms: Mapping[Monomial, Fraction], *,
                 _normalized: bool = False):
        self.chart = chart
        if _normalized:
            self.terms = dict(terms)
        else:
            clean: dict[Monomial, Fraction] = {}
            for mono, coeff in terms.items():
                coeff = Fraction(coeff)
                if coeff:
                    clean[mono] = coeff
            self.terms = clean
        self._parity_cache = -2  # unset

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart) -> "SuperPolynomial":
        return cls(chart, {}, _normalized=True)

    @classmethod
    def constant(cls, chart: Chart, value: Scalar) -> "SuperPolynomial":
        value = Fraction(value)
        if not value:
            return cls.zero(chart)
        return cls(chart, {MONO_ONE: value}, _normalized=True)

    @classmethod
    def one(cls, chart: Chart) -> "SuperPolynomial":
        return cls.constant(chart, 1)

    @classmethod
    def coordinate(cls, chart: Chart, index: int) -> "SuperPolynomial":
        if not 0 <= index < chart.dim:
            raise UnknownCoordinateError(f"coordinate index {index} out of range")
        if chart.parities[index] == ODD:
            mono: Monomial = ((), (index,))
        else:
            mono = (((index, 1),), ())
        return cls(chart, {mono: Fraction(1)}, _normalized=True)

    @classmethod
    def coordinate_named(cls, chart: Chart, name: str) -> "SuperPolynomial":
        return cls.coordinate(chart, chart.index(name))

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def parity(self) -> Optional[Parity]:
        """Common parity of all terms; 0 for the zero polynomial; None if mixed."""
        if self._parity_cache != -2:
            return None if self._parity_cache == -1 else self._parity_cache
        result: Optional[Parity]
        if not self.terms:
            result = EVEN
        else:
            monos = iter(self.terms)
            result = mono_parity(next(monos))
            for mono in monos:
                if mono_parity(mono) != result:
                    result = None
                    break
        self._parity_cache = -1 if result is None else result
        return result

    def require_homogeneous(self) -> Parity:
        p = self.parity()
        if p is None:
            raise ParityError("mixed-parity value where homogeneous parity required")
        return p

    def even_degree(self) -> int:
        return max((mono_even_degree(m) for m in self.terms), default=0)

    def max_index_used(self) -> int:
        """Largest coordinate index appearing in any term, or -1."""
        best = -1
        for even, odd in self.terms:
            if even:
                best = max(best, even[-1][0])
            if odd:
                best = max(best, odd[-1])
        return best

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "SuperPolynomial") -> "SuperPolynomial":
        require_same_chart(self, other)
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            acc = out.get(mono)
            if acc is None:
                out[mono] = coeff
            else:
                acc = acc + coeff
                if acc:
                    out[mono] = acc
                else:
                    del out[mono]
        return SuperPolynomial(self.chart, out, _normalized=True)

    def __neg__(self) -> "SuperPolynomial":
        return SuperPolynomial(
            self.chart, {m: -c for m, c in self.terms.items()}, _normalized=True)

    def __sub__(self, other: "SuperPolynomial") -> "SuperPolynomial":
        return self + (-other)

    def __mul__(self, other) -> "SuperPolynomial":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        require_same_chart(self, other)
        if not self.terms or not other.terms:
            return SuperPolynomial.zero(self.chart)
        a, b = self.terms, other.terms
        out: dict[Monomial, Fraction] = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                sign, mono = mono_mul(ma, mb)
                if sign == 0:
                    continue
                coeff = ca * cb if sign > 0 else -(ca * cb)
                acc = out.get(mono)
                if acc is None:
                    if coeff:
                        out[mono] = coeff
                else:
                    acc = acc + coeff
                    if acc:
                        out[mono] = acc
                    else:
                        del out[mono]
        return SuperPolynomial(self.chart, out, _normalized=True)

    def __rmul__(self, other) -> "SuperPolynomial":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def scale(self, factor: Scalar) -> "SuperPolynomial":
        factor = Fraction(factor)
        if not factor:
            return SuperPolynomial.zero(self.chart)
        return SuperPolynomial(
            self.chart, {m: factor * c for m, c in self.terms.items()},
            _normalized=True)

    def __pow__(self, exponent: int) -> "SuperPolynomial":
        if exponent < 0:
            raise ValueError("negative exponents are not defined")
        result = SuperPolynomial.one(self.chart)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, SuperPolynomial):
            return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    __hash__ = None  # mutable-dict payload; values are compared, never hashed

    # -- calculus -----------------------------------------------------------

    def partial(self, index: int) -> "SuperPolynomial":
        """Left partial derivative along the chart coordinate ``index``."""
        if not 0 <= index < self.chart.dim:
            raise UnknownCoordinateError(f"coordinate index {index} out of range")
        out: dict[Monomial, Fraction] = {}
        if self.chart.parities[index] == EVEN:
            for (even, odd), coeff in self.terms.items():
                for pos, (idx, exp) in enumerate(even):
                    if idx == index:
                        new_even = (even[:pos] + ((idx, exp - 1),) + even[pos + 1:]
                                    if exp > 1 else even[:pos] + even[pos + 1:])
                        mono = (new_even, odd)
                        acc = out.get(mono, Fraction(0)) + coeff * exp
                        if acc:
                            out[mono] = acc
                        elif mono in out:
                            del out[mono]
                        break
        else:
            for (even, odd), coeff in self.terms.items():
                for pos, idx in enumerate(odd):
                    if idx == index:
                        # commute th_index to the front: one transposition per
                        # odd factor standing before it
                        c = -coeff if pos & 1 else coeff
                        mono = (even, odd[:pos] + odd[pos + 1:])
                        acc = out.get(mono, Fraction(0)) + c
                        if acc:
                            out[mono] = acc
                        elif mono in out:
                            del out[mono]
                        break
        return SuperPolynomial(self.chart, out, _normalized=True)

    # -- substitutions used by the homotopy construction ---------------------

    def drop_odd_coordinate(self, index: int) -> "SuperPolynomial":
        """Substitute th_index -> 0 (drop every term containing it)."""
        out = {m: c for m, c in self.terms.items() if index not in m[1]}
        return SuperPolynomial(self.chart, out, _normalized=True)

    def integrate_even_unit_interval(self, index: int) -> "SuperPolynomial":
        """Definite integral over [0, 1] in the even coordinate ``index``."""
        if self.chart.parities[index] != EVEN:
            raise ParityError("unit-interval integration needs an even coordinate")
        out: dict[Monomial, Fraction] = {}
        for (even, odd), coeff in self.terms.items():
            exp = 0
            new_even = even
            for pos, (idx, e) in enumerate(even):
                if idx == index:
                    exp = e
                    new_even = even[:pos] + even[pos + 1:]
                    break
            mono = (new_even, odd)
            acc = out.get(mono, Fraction(0)) + coeff / (exp + 1)
            if acc:
                out[mono] = acc
            elif mono in out:
                del out[mono]
        return SuperPolynomial(self.chart, out, _normalized=True)

    # -- misc ----------------------------------------------------------------

    def __repr__(self) -> str:
        return f"SuperPolynomial({self._plain_str()})"

    def _plain_str(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for mono in sorted(self.terms, key=mono_sort_key):
            coeff = self.terms[mono]
            factors = []
            for idx, exp in mono[0]:
                name = self.chart.names[idx]
                factors.append(name if exp == 1 else f"{name}^{exp}")
            factors.extend(self.chart.names[i] for i in mono[1])
            if not factors:
                bits.append(str(coeff))
            elif coeff == 1:
                bits.append("*".join(factors))
            elif coeff == -1:
                bits.append("-" + "*".join(factors))
            else:
                bits.append(f"{coeff}*" + "*".join(factors))
        return " + ".join(bits).replace("+ -", "- ")


def random_superpolynomial(chart: Chart, rng: random.Random, *,
                           parity: Optional[Parity] = None,
                           max_even_degree: int = 2,
                           max_terms: int = 3,
                           coeff_bound: int = 3) -> SuperPolynomial:
    """Sparse random element with small integer coefficients (tests, seeding).

    When ``parity`` is given the result is homogeneous of that parity, possibly
    zero.  Determinism is entirely in the caller's hands via ``rng``.
    """
    terms: dict[Monomial, Fraction] = {}
    evens = chart.even_indices
    odds = chart.odd_indices
    for _ in range(rng.randint(1, max_terms)):
        even: dict[int, int] = {}
        if evens:
            budget = rng.randint(0, max_even_degree)
            for _ in range(budget):
                i = rng.choice(evens)
                even[i] = even.get(i, 0) + 1
        wanted = parity if parity is not None else rng.randint(0, 1)
        pool = list(odds)
        rng.shuffle(pool)
        size_choices = [k for k in range(len(odds) + 1) if (k & 1) == wanted]
        if not size_choices:
            if wanted == ODD:
                continue  # no odd coordinates: odd part impossible
            size_choices = [0]
        size = rng.choice(size_choices)
        odd = tuple(sorted(pool[:size]))
        coeff = 0
        while coeff == 0:
            coeff = rng.randint(-coeff_bound, coeff_bound)
        mono = (tuple(sorted(even.items())), odd)
        terms[mono] = terms.get(mono, Fraction(0)) + coeff
    return SuperPolynomial(chart, terms)
