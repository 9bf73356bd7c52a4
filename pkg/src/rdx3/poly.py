"""Exact sparse polynomials in three nonnegative variables.

Every certificate in this package reduces to questions about polynomials
in the state ``(x1, x2, x3)`` with exact rational coefficients.  Floats
enter only at evaluation boundaries (grid evaluation in the simulator,
display).  A :class:`Poly3` is immutable and canonical: no stored zero
coefficients, so structural equality is semantic equality.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

Exponents = tuple[int, int, int]
CoeffLike = Union[int, str, Fraction, float]

#: total-degree-first ordering used for serialization and display
def grlex_key(e: Exponents) -> tuple[int, int, int, int]:
    return (e[0] + e[1] + e[2], e[0], e[1], e[2])


def to_fraction(value: CoeffLike) -> Fraction:
    """Coerce a number to an exact Fraction.

    Floats are interpreted through their shortest decimal repr (so 1.1
    becomes 11/10, which is what a human writing a config means), not
    their binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not np.isfinite(value):
            raise ValueError(f"non-finite coefficient: {value!r}")
        return Fraction(str(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational number")


class Poly3:
    """Sparse polynomial in (x1, x2, x3) with exact rational coefficients."""

    __slots__ = ("_terms", "_float_terms", "_integral")

    def __init__(self, terms: Mapping[Exponents, CoeffLike] | Iterable[tuple[Exponents, CoeffLike]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Exponents, Fraction] = {}
        for exps, coeff in items:
            e = (int(exps[0]), int(exps[1]), int(exps[2]))
            if min(e) < 0:
                raise ValueError(f"negative exponent in {e}")
            c = to_fraction(coeff)
            c = acc.get(e, Fraction(0)) + c
            if c == 0:
                acc.pop(e, None)
            else:
                acc[e] = c
        self._terms = acc
        self._float_terms = None
        self._integral = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls) -> "Poly3":
        return cls()

    @classmethod
    def constant(cls, c: CoeffLike) -> "Poly3":
        return cls({(0, 0, 0): c})

    @classmethod
    def variable(cls, axis: int) -> "Poly3":
        """The coordinate polynomial x_axis, axis in {1, 2, 3}."""
        if axis not in (1, 2, 3):
            raise ValueError("axis must be 1, 2 or 3")
        e = [0, 0, 0]
        e[axis - 1] = 1
        return cls({tuple(e): 1})

    @classmethod
    def monomial(cls, exponents: Exponents, coeff: CoeffLike = 1) -> "Poly3":
        return cls({tuple(exponents): coeff})

    # -- inspection ------------------------------------------------------------

    @property
    def terms(self) -> dict[Exponents, Fraction]:
        return dict(self._terms)

    def coefficient(self, exponents: Exponents) -> Fraction:
        return self._terms.get(tuple(exponents), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def total_degree(self) -> int:
        """Max total degree of a stored term; 0 for the zero polynomial."""
        if not self._terms:
            return 0
        return max(e[0] + e[1] + e[2] for e in self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    # -- ring operations --------------------------------------------------------

    def __add__(self, other: "Poly3 | CoeffLike") -> "Poly3":
        other = _as_poly(other)
        acc = dict(self._terms)
        for e, c in other._terms.items():
            s = acc.get(e, Fraction(0)) + c
            if s == 0:
                acc.pop(e, None)
            else:
                acc[e] = s
        return _raw(acc)

    __radd__ = __add__

    def __neg__(self) -> "Poly3":
        return _raw({e: -c for e, c in self._terms.items()})

    def __sub__(self, other: "Poly3 | CoeffLike") -> "Poly3":
        return self + (-_as_poly(other))

    def __rsub__(self, other: CoeffLike) -> "Poly3":
        return _as_poly(other) - self

    def __mul__(self, other: "Poly3 | CoeffLike") -> "Poly3":
        if not isinstance(other, Poly3):
            c = to_fraction(other)
            if c == 0:
                return Poly3.zero()
            return _raw({e: c * v for e, v in self._terms.items()})
        acc: dict[Exponents, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                s = acc.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    acc.pop(e, None)
                else:
                    acc[e] = s
        return _raw(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly3":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Poly3.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def partial_derivative(self, axis: int) -> "Poly3":
        """Formal derivative along axis in {1, 2, 3}."""
        if axis not in (1, 2, 3):
            raise ValueError("axis must be 1, 2 or 3")
        k = axis - 1
        acc: dict[Exponents, Fraction] = {}
        for e, c in self._terms.items():
            if e[k] == 0:
                continue
            new = list(e)
            new[k] -= 1
            acc[tuple(new)] = c * e[k]
        return _raw(acc)

    def substitute_zero(self, axis: int) -> "Poly3":
        """Restriction to the plane x_axis = 0 (terms not involving x_axis)."""
        k = axis - 1
        return _raw({e: c for e, c in self._terms.items() if e[k] == 0})

    def abs_coefficients(self) -> "Poly3":
        """Same support with coefficients replaced by their absolute values."""
        return _raw({e: abs(c) for e, c in self._terms.items()})

    # -- evaluation ---------------------------------------------------------------

    def eval(self, point: tuple) -> Fraction:
        """Exact evaluation; exact whenever the point is rational.

        Integer points with integer coefficients take a pure-int fast path.
        """
        if self._integral is None:
            self._integral = all(c.denominator == 1 for c in self._terms.values())
        if self._integral and all(type(v) is int for v in point):
            x1, x2, x3 = point
            total = 0
            for (e1, e2, e3), c in self._terms.items():
                total += c.numerator * x1**e1 * x2**e2 * x3**e3
            return Fraction(total)
        x1, x2, x3 = (to_fraction(v) for v in point)
        total = Fraction(0)
        for (e1, e2, e3), c in self._terms.items():
            total += c * x1**e1 * x2**e2 * x3**e3
        return total

    def eval_arrays(self, x1, x2, x3):
        """Float evaluation on numpy arrays (or scalars), for the simulator."""
        if self._float_terms is None:
            self._float_terms = [
                (e, float(c)) for e, c in sorted(self._terms.items(), key=lambda t: grlex_key(t[0]))
            ]
        total = np.zeros(np.broadcast(x1, x2, x3).shape)
        for (e1, e2, e3), c in self._float_terms:
            term = np.full_like(total, c) if total.ndim else c
            if e1:
                term = term * x1**e1
            if e2:
                term = term * x2**e2
            if e3:
                term = term * x3**e3
            total = total + term
        return total

    # -- comparison / hashing -------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, str, Fraction)):
            other = _as_poly(other)
        if not isinstance(other, Poly3):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._terms.items(), key=lambda t: grlex_key(t[0]))))

    # -- serialization ----------------------------------------------------------------

    def to_json_obj(self) -> list[dict]:
        """Graded-lex sorted list of {"e": [e1,e2,e3], "c": "num/den"} records."""
        out = []
        for e in sorted(self._terms, key=grlex_key):
            c = self._terms[e]
            out.append({"e": list(e), "c": f"{c.numerator}/{c.denominator}"})
        return out

    @classmethod
    def from_json_obj(cls, obj: Iterable[Mapping]) -> "Poly3":
        terms = {}
        for rec in obj:
            e = tuple(int(v) for v in rec["e"])
            if e in terms:
                raise ValueError(f"duplicate exponent triple {e} in serialized polynomial")
            terms[e] = Fraction(rec["c"])
        return cls(terms)

    def to_text(self, names: tuple[str, str, str] = ("x1", "x2", "x3")) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e in sorted(self._terms, key=grlex_key, reverse=True):
            c = self._terms[e]
            factors = [f"{names[k]}^{e[k]}" if e[k] > 1 else names[k] for k in range(3) if e[k] > 0]
            body = "*".join(factors)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{c}*{body}")
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Poly3({self.to_text()})"


def _raw(terms: dict[Exponents, Fraction]) -> Poly3:
    """Internal constructor for already-canonical term maps."""
    p = Poly3()
    p._terms = terms
    p._integral = None
    return p


def _as_poly(value) -> Poly3:
    return value if isinstance(value, Poly3) else Poly3.constant(value)


X1 = Poly3.variable(1)
X2 = Poly3.variable(2)
X3 = Poly3.variable(3)


def affine_weight() -> Poly3:
    """The weight 1 + x1 + x2 + x3 that all mass/growth bounds are taken against."""
    return Poly3({(0, 0, 0): 1, (1, 0, 0): 1, (0, 1, 0): 1, (0, 0, 1): 1})


def dominates(p: Poly3, q: Poly3) -> bool:
    """Coefficientwise certificate that q <= p on the nonnegative octant.

    True iff every coefficient of q - p is <= 0.  One-way: a False result
    does not mean the pointwise inequality fails.
    """
    return all(c <= 0 for c in (q - p)._terms.values())
