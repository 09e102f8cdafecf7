"""Exact arithmetic in the rational span of square roots of squarefree integers.

Values are finite sums ``sum_m q_m * sqrt(m)`` with rational ``q_m`` and
squarefree integer indices ``m >= 1`` (``m = 1`` is the rational unit).
The representation is canonical: zero coefficients are dropped, so
structural equality coincides with value equality because square roots of
distinct squarefree integers are linearly independent over Q (trusted
fact of this module).

Comparisons that cannot be decided structurally are settled by adaptive
rational enclosures built from Heron bracket chains for each radical.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import InconsistentEnclosureError, ParseError, ResolutionExceededError

Rational = Union[int, Fraction]

#: compare() raises instead of guessing once the separating enclosure is
#: narrower than this.
RESOLUTION_LIMIT = Fraction(1, 10**200)

#: Largest accepted radical index.
MAX_RADICAL_INDEX = 2**63 - 1


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def check_radical_index(m: int) -> int:
    """Validate a radical index: squarefree positive integer below 2**63."""
    if isinstance(m, bool) or not isinstance(m, int):
        raise ParseError(f"radical index must be an integer, got {m!r}")
    if m < 1:
        raise ParseError(f"radical index must be positive, got {m}")
    if m > MAX_RADICAL_INDEX:
        raise ParseError(f"radical index {m} exceeds {MAX_RADICAL_INDEX}")
    n = m
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                raise ParseError(f"radical index {m} is not squarefree ({d}**2 divides it)")
        d += 1 if d == 2 else 2
    return m


class _SqrtBrackets:
    """Shared Heron bracket chains, one per radical.

    The chain for ``m`` starts from the integer bracket
    ``[isqrt(m), isqrt(m) + 1]`` and each step maps ``hi`` to
    ``(hi + m/hi)/2`` and ``lo`` to ``m/hi``, so both endpoints stay
    rational and straddle sqrt(m).  ``bracket(m, eps)`` returns the first
    chain element of width <= eps; the result depends only on ``(m, eps)``
    regardless of request order, which keeps every consumer deterministic.
    """

    def __init__(self) -> None:
        self._chains: dict[int, list[tuple[Fraction, Fraction]]] = {}

    def bracket(self, m: int, eps: Fraction) -> tuple[Fraction, Fraction]:
        chain = self._chains.get(m)
        if chain is None:
            s = math.isqrt(m)
            chain = [(Fraction(s), Fraction(s + 1))]
            self._chains[m] = chain
        for lo, hi in chain:
            if hi - lo <= eps:
                return lo, hi
        lo, hi = chain[-1]
        while hi - lo > eps:
            hi = (hi + Fraction(m) / hi) / 2
            lo = Fraction(m) / hi
            chain.append((lo, hi))
        return lo, hi


_BRACKETS = _SqrtBrackets()

_ZERO = Fraction(0)


class ExactReal:
    """Canonical element of the squarefree radical span.

    Instances are immutable, hashable, and closed under ``+``, ``-`` and
    ``*``; division is only defined by nonzero rational scalars.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, Rational] | Iterable[tuple[int, Rational]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, Fraction] = {}
        for m, q in items:
            check_radical_index(m)
            q = q if isinstance(q, Fraction) else Fraction(q)
            if m in acc:
                acc[m] += q
            else:
                acc[m] = q
        self._terms = {m: q for m, q in sorted(acc.items()) if q}
        self._hash: int | None = None

    @classmethod
    def _raw(cls, data: dict[int, Fraction]) -> "ExactReal":
        # Internal fast path: keys are already-validated squarefree indices.
        obj = cls.__new__(cls)
        obj._terms = {m: q for m, q in sorted(data.items()) if q}
        obj._hash = None
        return obj

    @classmethod
    def from_rational(cls, q: Rational) -> "ExactReal":
        q = q if isinstance(q, Fraction) else Fraction(q)
        return cls._raw({1: q} if q else {})

    @classmethod
    def sqrt(cls, m: int) -> "ExactReal":
        check_radical_index(m)
        return cls._raw({m: Fraction(1)})

    # -- structure ---------------------------------------------------

    @property
    def coefficients(self) -> dict[int, Fraction]:
        """Copy of the term mapping (radical index -> coefficient)."""
        return dict(self._terms)

    def radicals(self) -> tuple[int, ...]:
        """Radical indices with nonzero coefficient, excluding the unit."""
        return tuple(m for m in self._terms if m != 1)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_rational(self) -> bool:
        return all(m == 1 for m in self._terms)

    @property
    def rational_part(self) -> Fraction:
        return self._terms.get(1, _ZERO)

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self.rational_part

    # -- arithmetic --------------------------------------------------

    @staticmethod
    def _coerce(other) -> "ExactReal | None":
        if isinstance(other, ExactReal):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return ExactReal.from_rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        data = dict(self._terms)
        for m, q in o._terms.items():
            if m in data:
                data[m] += q
            else:
                data[m] = q
        return ExactReal._raw(data)

    __radd__ = __add__

    def __neg__(self):
        return ExactReal._raw({m: -q for m, q in self._terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        data: dict[int, Fraction] = {}
        for m, qm in self._terms.items():
            for n, qn in o._terms.items():
                # sqrt(m) * sqrt(n) = d * sqrt((m/d) * (n/d)) with d = gcd(m, n);
                # the reduced index is again squarefree.
                d = math.gcd(m, n)
                key = (m // d) * (n // d)
                coef = qm * qn * d
                if key in data:
                    data[key] += coef
                else:
                    data[key] = coef
        return ExactReal._raw(data)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                raise ZeroDivisionError("division of ExactReal by zero")
            inv = Fraction(1, 1) / Fraction(other)
            return ExactReal._raw({m: q * inv for m, q in self._terms.items()})
        return NotImplemented  # field division is deliberately unsupported

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = ExactReal.from_rational(1)
        for _ in range(n):
            out = out * self
        return out

    def __abs__(self):
        return -self if compare(self, _ZERO_EXACT) is Ordering.LESS else self

    # -- comparison --------------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._terms == o._terms

    def __hash__(self):
        if self._hash is None:
            if self.is_rational:
                self._hash = hash(self.rational_part)
            else:
                self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return compare(self, o) is Ordering.LESS

    def __le__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return compare(self, o) is not Ordering.GREATER

    def __gt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return compare(self, o) is Ordering.GREATER

    def __ge__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return compare(self, o) is not Ordering.LESS

    def __bool__(self):
        return bool(self._terms)

    # -- enclosures --------------------------------------------------

    def bounds(self, eps: Fraction) -> tuple[Fraction, Fraction]:
        """Rational lo <= value <= hi with hi - lo <= eps."""
        lo = hi = self._terms.get(1, _ZERO)
        irr = [(m, q) for m, q in self._terms.items() if m != 1]
        if not irr:
            return lo, hi
        per = eps / len(irr)
        for m, q in irr:
            blo, bhi = _BRACKETS.bracket(m, per / abs(q))
            if q > 0:
                lo += q * blo
                hi += q * bhi
            else:
                lo += q * bhi
                hi += q * blo
        return lo, hi

    def __float__(self):
        lo, hi = self.bounds(Fraction(1, 10**17))
        return float((lo + hi) / 2)

    # -- text --------------------------------------------------------

    def literal(self) -> str:
        """Canonical literal, terms in increasing radical index."""
        if not self._terms:
            return "0"
        parts = []
        for m, q in self._terms.items():
            parts.append(str(q) if m == 1 else f"{q}*sqrt({m})")
        return " + ".join(parts)

    def __str__(self):
        return self.literal()

    def __repr__(self):
        return f"ExactReal({self.literal()!r})"

    @classmethod
    def parse(cls, text: str) -> "ExactReal":
        """Parse a literal such as ``3/2 + -1*sqrt(2)`` or ``2-sqrt(2)``."""
        compact = "".join(text.split())
        if not compact:
            raise ParseError("empty ExactReal literal")
        acc: dict[int, Fraction] = {}
        i, n = 0, len(compact)
        while i < n:
            sign = 1
            while i < n and compact[i] in "+-":
                if compact[i] == "-":
                    sign = -sign
                i += 1
            j = i
            while j < n and compact[j] not in "+-":
                j += 1
            body = compact[i:j]
            if not body:
                raise ParseError(f"dangling sign in literal {text!r}")
            m, coef = _parse_term(body, text)
            coef *= sign
            if m in acc:
                acc[m] += coef
            else:
                acc[m] = coef
            i = j
        return cls(acc)


def _parse_term(body: str, original: str) -> tuple[int, Fraction]:
    if "sqrt(" in body:
        head, _, tail = body.partition("sqrt(")
        if not tail.endswith(")"):
            raise ParseError(f"unclosed sqrt(...) in {original!r}")
        digits = tail[:-1]
        if not digits.isdigit():
            raise ParseError(f"bad radical index in {original!r}")
        m = check_radical_index(int(digits))
        head = head.rstrip("*")
        coef = Fraction(1) if head == "" else parse_rational(head)
        return m, coef
    return 1, parse_rational(body)


def parse_rational(text: str) -> Fraction:
    """Parse a rational literal (``3/2``, ``-7``, ``0.25``, ``1e-8``)."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational literal {text!r}") from exc


_ZERO_EXACT = ExactReal()
ZERO = _ZERO_EXACT
ONE = ExactReal.from_rational(1)


def compare(a: "ExactReal | Rational", b: "ExactReal | Rational") -> Ordering:
    """Decidable three-way comparison.

    Equality is structural (canonical form); otherwise the sign of the
    difference is found by refining a rational enclosure until zero is
    strictly outside.  Raises ResolutionExceededError past the cap.
    """
    ea = a if isinstance(a, ExactReal) else ExactReal.from_rational(a)
    eb = b if isinstance(b, ExactReal) else ExactReal.from_rational(b)
    if ea._terms == eb._terms:
        return Ordering.EQUAL
    d = ea - eb
    positive = negative = False
    for q in d._terms.values():
        if q > 0:
            positive = True
        else:
            negative = True
    if not negative:
        return Ordering.GREATER
    if not positive:
        return Ordering.LESS
    eps = Fraction(1)
    while True:
        lo, hi = d.bounds(eps)
        if lo > 0:
            return Ordering.GREATER
        if hi < 0:
            return Ordering.LESS
        if eps < RESOLUTION_LIMIT:
            raise ResolutionExceededError(
                f"could not separate {ea} and {eb} above width {RESOLUTION_LIMIT}"
            )
        eps /= 16


def exact_min(a: ExactReal, b: ExactReal) -> ExactReal:
    return a if compare(a, b) is not Ordering.GREATER else b


def exact_max(a: ExactReal, b: ExactReal) -> ExactReal:
    return a if compare(a, b) is not Ordering.LESS else b


@dataclass(frozen=True)
class Enclosure:
    """A certified interval ``[lo, hi]`` known to contain an exact value.

    ``enclose`` always produces rational endpoints; the extension engine
    reuses the same type with exact (possibly irrational) endpoints so
    that values it knows exactly get genuine zero-width enclosures.
    """

    lo: ExactReal
    hi: ExactReal

    def __post_init__(self):
        if compare(self.lo, self.hi) is Ordering.GREATER:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: ExactReal) -> "Enclosure":
        return cls(x, x)

    @classmethod
    def from_rational_bounds(cls, lo: Fraction, hi: Fraction) -> "Enclosure":
        return cls(ExactReal.from_rational(lo), ExactReal.from_rational(hi))

    @property
    def width(self) -> ExactReal:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: "ExactReal | Rational") -> bool:
        v = x if isinstance(x, ExactReal) else ExactReal.from_rational(x)
        return (
            compare(self.lo, v) is not Ordering.GREATER
            and compare(v, self.hi) is not Ordering.GREATER
        )

    def contains_enclosure(self, other: "Enclosure") -> bool:
        return (
            compare(self.lo, other.lo) is not Ordering.GREATER
            and compare(other.hi, self.hi) is not Ordering.GREATER
        )

    def intersect(self, other: "Enclosure") -> "Enclosure":
        lo = exact_max(self.lo, other.lo)
        hi = exact_min(self.hi, other.hi)
        if compare(lo, hi) is Ordering.GREATER:
            raise InconsistentEnclosureError(
                f"enclosures [{self.lo}, {self.hi}] and [{other.lo}, {other.hi}] are disjoint"
            )
        return Enclosure(lo, hi)

    def overlaps(self, other: "Enclosure") -> bool:
        return (
            compare(self.lo, other.hi) is not Ordering.GREATER
            and compare(other.lo, self.hi) is not Ordering.GREATER
        )

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo - other.hi, self.hi - other.lo)

    def shift(self, x: ExactReal) -> "Enclosure":
        return Enclosure(self.lo + x, self.hi + x)

    def scale(self, q: Rational) -> "Enclosure":
        q = Fraction(q)
        if q >= 0:
            return Enclosure(self.lo * q, self.hi * q)
        return Enclosure(self.hi * q, self.lo * q)

    def divide(self, q: Rational) -> "Enclosure":
        q = Fraction(q)
        if q == 0:
            raise ZeroDivisionError("division of enclosure by zero")
        return self.scale(Fraction(1) / q)

    def rational_bounds(self) -> tuple[Fraction, Fraction]:
        return self.lo.as_fraction(), self.hi.as_fraction()

    def to_jsonable(self) -> dict:
        return {"lo": self.lo.literal(), "hi": self.hi.literal()}

    @classmethod
    def from_jsonable(cls, d: dict) -> "Enclosure":
        return cls(ExactReal.parse(d["lo"]), ExactReal.parse(d["hi"]))

    def __repr__(self):
        return f"Enclosure[{self.lo}, {self.hi}]"


def enclose(x: "ExactReal | Rational", eps: Rational) -> Enclosure:
    """Rational-endpoint enclosure of ``x`` with width <= eps (eps > 0)."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    v = x if isinstance(x, ExactReal) else ExactReal.from_rational(x)
    lo, hi = v.bounds(eps)
    return Enclosure.from_rational_bounds(lo, hi)
