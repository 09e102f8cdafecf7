"""Exactly evaluable function instances and their seeded generator.

Three families:

* ``Decomposable`` -- convex catalog part (quadratic + affine + hinge sum)
  plus a Q-linear additive map; the ground-truth family.
* ``AbsAdditive`` -- absolute value of an additive map; midpoint convex by
  the triangle inequality but not a convex-plus-additive sum.
* ``Spiked`` -- a base instance lifted at a single point; the stock
  counterexample for midpoint convexity checkers.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Union

from .domain import Interval, rational_anchors
from .errors import OutOfDomainError, OutOfSpanError, ParseError
from .exactreal import ExactReal, Ordering, check_radical_index, compare, parse_rational

_SQUAREFREE_POOL = (2, 3, 5, 6, 7, 10, 11, 13, 14, 15)


@dataclass(frozen=True)
class ConvexSpec:
    """Convex catalog function a*x^2 + b*x + c0 + sum_i w_i * max(0, x - k_i)."""

    quad: Fraction = Fraction(0)
    slope: ExactReal = ExactReal()
    offset: ExactReal = ExactReal()
    hinges: tuple[tuple[ExactReal, Fraction], ...] = ()

    def value(self, x: ExactReal) -> ExactReal:
        v = x * x * self.quad + self.slope * x + self.offset
        for knot, weight in self.hinges:
            if compare(x, knot) is Ordering.GREATER:
                v = v + (x - knot) * weight
        return v

    def with_extra_slope(self, c: ExactReal) -> "ConvexSpec":
        return ConvexSpec(self.quad, self.slope + c, self.offset, self.hinges)

    def validate(self) -> None:
        if self.quad < 0:
            raise ValueError(f"quadratic coefficient must be >= 0, got {self.quad}")
        prev = None
        for knot, weight in self.hinges:
            if weight <= 0:
                raise ValueError(f"hinge weight must be > 0, got {weight}")
            if prev is not None and compare(prev, knot) is not Ordering.LESS:
                raise ValueError("hinge knots must be strictly increasing")
            prev = knot

    def used_radicals(self) -> set[int]:
        rad = set(self.slope.radicals()) | set(self.offset.radicals())
        for knot, _ in self.hinges:
            rad |= set(knot.radicals())
        return rad


@dataclass(frozen=True)
class AdditiveMap:
    """Q-linear map determined by its values on basis radicals.

    ``coeffs`` maps a squarefree index m to A(sqrt(m)); the action on a
    span element sum_m q_m*sqrt(m) is sum_m q_m * A(sqrt(m)).  The
    normalized form has A(1) = 0, i.e. the map vanishes on Q.
    """

    coeffs: tuple[tuple[int, ExactReal], ...] = ()

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, ExactReal | int | Fraction]) -> "AdditiveMap":
        items = []
        for m, c in sorted(mapping.items()):
            check_radical_index(m)
            cv = c if isinstance(c, ExactReal) else ExactReal.from_rational(c)
            if not cv.is_zero:
                items.append((m, cv))
        return cls(tuple(items))

    def coefficient(self, m: int) -> ExactReal:
        for k, c in self.coeffs:
            if k == m:
                return c
        return ExactReal()

    @property
    def rational_slope(self) -> ExactReal:
        """A(1); zero exactly when the map vanishes on Q."""
        return self.coefficient(1)

    def value(self, x: ExactReal) -> ExactReal:
        out = ExactReal()
        for m, q in x.coefficients.items():
            c = self.coefficient(m)
            if not c.is_zero:
                out = out + c * q
        return out

    def normalized(self) -> "AdditiveMap":
        """The unique shift by a linear map making A(1) = 0."""
        c1 = self.rational_slope
        if c1.is_zero:
            return self
        out = {}
        for m, c in self.coeffs:
            if m == 1:
                continue
            adjusted = c - c1 * ExactReal.sqrt(m)
            if not adjusted.is_zero:
                out[m] = adjusted
        return AdditiveMap.from_mapping(out)

    def used_radicals(self) -> set[int]:
        rad = set()
        for m, c in self.coeffs:
            if m != 1:
                rad.add(m)
            rad |= set(c.radicals())
        return rad

    def validate(self) -> None:
        for m, c in self.coeffs:
            check_radical_index(m)
            if c.is_zero:
                raise ValueError("stored additive coefficients must be nonzero")


class _FunctionBase:
    interval: Interval
    basis: tuple[int, ...]

    def evaluate(self, x: ExactReal) -> ExactReal:
        if not self.interval.contains(x):
            raise OutOfDomainError(f"{x} is outside {self.interval.literal()}")
        allowed = set(self.basis)
        for m in x.radicals():
            if m not in allowed:
                raise OutOfSpanError(f"{x} uses radical {m} outside basis {self.basis}")
        return self._value(x)

    def _value(self, x: ExactReal) -> ExactReal:
        raise NotImplementedError

    def _validate_basis(self, used: set[int]) -> None:
        basis = set(self.basis)
        for m in self.basis:
            check_radical_index(m)
            if m == 1:
                raise ValueError("basis lists proper radicals only (1 is implicit)")
        for e in (self.interval.lo, self.interval.hi):
            if e is not None:
                used |= set(e.radicals())
        missing = used - basis
        if missing:
            raise ValueError(f"radicals {sorted(missing)} used but absent from basis {self.basis}")


@dataclass(frozen=True)
class Decomposable(_FunctionBase):
    interval: Interval
    basis: tuple[int, ...]
    convex: ConvexSpec
    additive: AdditiveMap = AdditiveMap()

    def _value(self, x: ExactReal) -> ExactReal:
        return self.convex.value(x) + self.additive.value(x)

    def validate(self) -> None:
        self.convex.validate()
        self.additive.validate()
        self._validate_basis(self.convex.used_radicals() | self.additive.used_radicals())


@dataclass(frozen=True)
class AbsAdditive(_FunctionBase):
    interval: Interval
    basis: tuple[int, ...]
    additive: AdditiveMap

    def _value(self, x: ExactReal) -> ExactReal:
        v = self.additive.value(x)
        return -v if compare(v, 0) is Ordering.LESS else v

    def validate(self) -> None:
        self.additive.validate()
        self._validate_basis(self.additive.used_radicals())


@dataclass(frozen=True)
class Spiked(_FunctionBase):
    interval: Interval
    basis: tuple[int, ...]
    base: "FunctionDef"
    at: ExactReal
    lift: Fraction

    def _value(self, x: ExactReal) -> ExactReal:
        v = self.base.evaluate(x)
        if x == self.at:
            v = v + self.lift
        return v

    def validate(self) -> None:
        if self.lift <= 0:
            raise ValueError(f"spike lift must be > 0, got {self.lift}")
        self.base.validate()
        if not self.interval.contains(self.at):
            raise ValueError("spike point must lie in the interval")
        self._validate_basis(set(self.at.radicals()) | set(self.base.basis))


FunctionDef = Union[Decomposable, AbsAdditive, Spiked]


def evaluate(f: FunctionDef, x: ExactReal) -> ExactReal:
    return f.evaluate(x)


# -- seeded generator ----------------------------------------------------


def generate(
    seed: int,
    *,
    kind: str = "decomposable",
    basis_size: int = 2,
    basis: tuple[int, ...] | None = None,
    max_hinges: int = 4,
    nonzero_rational_part: bool = False,
    interval: Interval | None = None,
) -> FunctionDef:
    """Deterministic instance satisfying every invariant of its family.

    ``nonzero_rational_part`` gives the additive map a nonzero value on Q,
    exercising the normalization the decomposition pipeline must apply.
    An explicit ``basis`` overrides the sampled one.
    """
    if basis is not None:
        basis = tuple(sorted({check_radical_index(m) for m in basis}))
        basis_size = len(basis)
    if not 1 <= basis_size <= 4:
        raise ValueError("basis_size must be between 1 and 4")
    if not 0 <= max_hinges <= 8:
        raise ValueError("max_hinges must be between 0 and 8")
    rng = random.Random(seed)
    if basis is None:
        basis = tuple(sorted(rng.sample(_SQUAREFREE_POOL, basis_size)))
    else:
        rng.sample(_SQUAREFREE_POOL, basis_size)  # keep the draw sequence aligned
    if interval is None:
        lo = -Fraction(rng.randrange(8, 25), 2)
        hi = Fraction(rng.randrange(8, 25), 2)
        interval = Interval.open(lo, hi)

    def small(lo_i: int, hi_i: int, den: int = 8) -> Fraction:
        return Fraction(rng.randrange(lo_i * den, hi_i * den + 1), den)

    def span_value(scale: int = 2) -> ExactReal:
        coeffs: dict[int, Fraction] = {1: small(-scale, scale)}
        for m in basis:
            if rng.random() < 0.4:
                c = small(-1, 1)
                if c:
                    coeffs[m] = c
        return ExactReal(coeffs)

    a, b = rational_anchors(interval)

    def convex_part() -> ConvexSpec:
        quad = abs(small(0, 2))
        slope = span_value()
        offset = span_value()
        knots: list[ExactReal] = []
        for _ in range(rng.randrange(0, max_hinges + 1)):
            base_pt = a + Fraction(rng.randrange(1, 64), 64) * (b - a)
            knot = ExactReal.from_rational(base_pt)
            if rng.random() < 0.3:
                m = rng.choice(basis)
                bump = knot + ExactReal({m: small(-1, 1)})
                if interval.contains(bump):
                    knot = bump
            if all(compare(knot, k) is not Ordering.EQUAL for k in knots):
                knots.append(knot)
        changed = True
        while changed:
            changed = False
            for i in range(len(knots) - 1):
                if compare(knots[i], knots[i + 1]) is Ordering.GREATER:
                    knots[i], knots[i + 1] = knots[i + 1], knots[i]
                    changed = True
        hinges = tuple((k, small(1, 24) / 8 + Fraction(1, 8)) for k in knots)
        return ConvexSpec(quad, slope, offset, hinges)

    def additive_part(include_rational: bool) -> AdditiveMap:
        coeffs: dict[int, ExactReal] = {}
        for m in basis:
            if rng.random() < 0.75:
                c: ExactReal = ExactReal.from_rational(small(-3, 3))
                if rng.random() < 0.3:
                    c = c + ExactReal({rng.choice(basis): small(-1, 1)})
                if not c.is_zero:
                    coeffs[m] = c
        if include_rational:
            c1 = Fraction(0)
            while c1 == 0:
                c1 = small(-2, 2, den=4)
            coeffs[1] = ExactReal.from_rational(c1)
        return AdditiveMap.from_mapping(coeffs)

    kind = kind.replace("-", "_")
    if kind == "decomposable":
        inst: FunctionDef = Decomposable(
            interval, basis, convex_part(), additive_part(nonzero_rational_part)
        )
    elif kind == "abs_additive":
        add = additive_part(False)
        if not add.coeffs:
            add = AdditiveMap.from_mapping({basis[0]: 1})
        inst = AbsAdditive(interval, basis, add)
    elif kind == "spiked":
        base = Decomposable(interval, basis, convex_part(), additive_part(False))
        at = a + Fraction(rng.randrange(1, 16), 16) * (b - a)
        lift = small(1, 4) + Fraction(1, 8)
        inst = Spiked(interval, basis, base, ExactReal.from_rational(at), lift)
    else:
        raise ValueError(f"unknown instance kind {kind!r}")
    inst.validate()
    return inst


# -- instance files ------------------------------------------------------


def _convex_to_jsonable(c: ConvexSpec) -> dict:
    return {
        "quad": str(c.quad),
        "slope": c.slope.literal(),
        "offset": c.offset.literal(),
        "hinges": [{"knot": k.literal(), "weight": str(w)} for k, w in c.hinges],
    }


def _convex_from_jsonable(d: dict) -> ConvexSpec:
    hinges = tuple(
        (ExactReal.parse(h["knot"]), parse_rational(h["weight"])) for h in d.get("hinges", [])
    )
    return ConvexSpec(
        parse_rational(d.get("quad", "0")),
        ExactReal.parse(d.get("slope", "0")),
        ExactReal.parse(d.get("offset", "0")),
        hinges,
    )


def _additive_to_jsonable(add: AdditiveMap) -> dict:
    return {str(m): c.literal() for m, c in add.coeffs}


def _additive_from_jsonable(d: dict) -> AdditiveMap:
    return AdditiveMap.from_mapping({int(k): ExactReal.parse(v) for k, v in d.items()})


def instance_to_jsonable(f: FunctionDef) -> dict:
    doc: dict = {
        "interval": f.interval.literal(),
        "basis": list(f.basis),
    }
    if isinstance(f, Decomposable):
        doc["variant"] = "decomposable"
        doc["convex"] = _convex_to_jsonable(f.convex)
        doc["additive"] = _additive_to_jsonable(f.additive)
    elif isinstance(f, AbsAdditive):
        doc["variant"] = "abs_additive"
        doc["additive"] = _additive_to_jsonable(f.additive)
    elif isinstance(f, Spiked):
        doc["variant"] = "spiked"
        base = f.base
        if isinstance(base, Decomposable):
            doc["convex"] = _convex_to_jsonable(base.convex)
            doc["additive"] = _additive_to_jsonable(base.additive)
        elif isinstance(base, AbsAdditive):
            doc["additive"] = _additive_to_jsonable(base.additive)
        else:
            raise ValueError("instance files support one level of spiking only")
        doc["spike"] = {"at": f.at.literal(), "lift": str(f.lift)}
    else:
        raise ValueError(f"unknown instance type {type(f)!r}")
    return doc


def instance_from_jsonable(doc: dict) -> FunctionDef:
    try:
        variant = doc["variant"]
        interval = Interval.parse(doc["interval"])
        basis = tuple(sorted(int(m) for m in doc["basis"]))
        additive = _additive_from_jsonable(doc.get("additive", {}))
        if variant == "decomposable":
            inst: FunctionDef = Decomposable(
                interval, basis, _convex_from_jsonable(doc["convex"]), additive
            )
        elif variant == "abs_additive":
            inst = AbsAdditive(interval, basis, additive)
        elif variant == "spiked":
            if "convex" in doc:
                base: FunctionDef = Decomposable(
                    interval, basis, _convex_from_jsonable(doc["convex"]), additive
                )
            else:
                base = AbsAdditive(interval, basis, additive)
            spike = doc["spike"]
            inst = Spiked(
                interval,
                basis,
                base,
                ExactReal.parse(spike["at"]),
                parse_rational(spike["lift"]),
            )
        else:
            raise ParseError(f"unknown variant {variant!r}")
    except KeyError as exc:
        raise ParseError(f"instance document missing field {exc}") from exc
    inst.validate()
    return inst


def dumps_instance(f: FunctionDef) -> str:
    return json.dumps(instance_to_jsonable(f), sort_keys=True, indent=2) + "\n"


def loads_instance(text: str) -> FunctionDef:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid instance JSON: {exc}") from exc
    return instance_from_jsonable(doc)


def dump_instance(f: FunctionDef, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(f), encoding="utf-8")


def load_instance(path: str | Path) -> FunctionDef:
    return loads_instance(Path(path).read_text(encoding="utf-8"))
