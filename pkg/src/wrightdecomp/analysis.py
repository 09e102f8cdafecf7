"""Difference operators, exact convexity checkers and violation certificates.

Every checker reports either a clean pass over its finite sample or the
first violation in a deterministic sweep order, as a self-verifying
certificate carrying the exact witness points and both sides of the
violated inequality.  A pass is always evidence over the sampled grid,
never a proof.

Certificate convention: the checked inequality is written ``lhs >= rhs``;
a violation means ``lhs < rhs`` exactly.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .domain import SampleGrid
from .errors import (
    BracketViolationError,
    DegeneratePairError,
    NonPositiveStepError,
    OutOfDomainError,
)
from .exactreal import ExactReal, Ordering, compare
from .funcspec import FunctionDef

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class SlopeFraction:
    """A divided difference num/den kept unevaluated (den != 0).

    The span has no field division, so every comparison cross-multiplies
    and corrects for the sign of the product of denominators.
    """

    num: ExactReal
    den: ExactReal

    def __post_init__(self):
        if compare(self.den, 0) is Ordering.EQUAL:
            raise ValueError("SlopeFraction denominator must be nonzero")

    def compare(self, other: "SlopeFraction") -> Ordering:
        lhs = self.num * other.den
        rhs = other.num * self.den
        if compare(self.den * other.den, 0) is Ordering.LESS:
            lhs, rhs = rhs, lhs
        return compare(lhs, rhs)

    def compare_rational(self, q: Fraction) -> Ordering:
        return self.compare(SlopeFraction(ExactReal.from_rational(q), ExactReal.from_rational(1)))

    def abs(self) -> "SlopeFraction":
        num, den = self.num, self.den
        if compare(den, 0) is Ordering.LESS:
            num, den = -num, -den
        if compare(num, 0) is Ordering.LESS:
            num = -num
        return SlopeFraction(num, den)

    def as_fraction(self) -> Fraction:
        return self.num.as_fraction() / self.den.as_fraction()

    def rational_upper_bound(self, eps: Fraction = Fraction(1, 64)) -> Fraction:
        """A rational q with |self| <= q."""
        a = self.abs()
        num_hi = a.num.bounds(eps)[1]
        scale = Fraction(1)
        while True:
            den_lo = a.den.bounds(eps * scale)[0]
            if den_lo > 0:
                return num_hi / den_lo
            scale /= 4

    def __repr__(self):
        return f"SlopeFraction(({self.num}) / ({self.den}))"


@dataclass(frozen=True)
class ViolationCertificate:
    """Exact witness of a violated inequality; re-checkable in isolation."""

    kind: str  # 'wright' | 'jensen' | 'monotone'
    witness: tuple[ExactReal, ...]
    lhs: ExactReal
    rhs: ExactReal
    context: tuple[tuple[str, ExactReal], ...] = ()

    def context_value(self, key: str) -> ExactReal | None:
        for k, v in self.context:
            if k == key:
                return v
        return None

    def violation_amount(self) -> ExactReal:
        """lhs - rhs; strictly negative for a genuine violation."""
        return self.lhs - self.rhs

    def recompute_sides(self, f: FunctionDef) -> tuple[ExactReal, ExactReal]:
        if self.kind == "wright":
            x, u, v = self.witness
            lhs = f.evaluate(x + u + v) + f.evaluate(x)
            rhs = f.evaluate(x + u) + f.evaluate(x + v)
        elif self.kind == "jensen":
            x, y = self.witness
            t = self.context_value("t")
            tq = Fraction(1, 2) if t is None else t.as_fraction()
            lhs = f.evaluate(x) * tq + f.evaluate(y) * (1 - tq)
            rhs = f.evaluate(x * tq + y * (1 - tq))
        elif self.kind == "monotone":
            step = self.context_value("v")
            if step is not None and len(self.witness) == 2:
                x1, x2 = self.witness
                lhs = delta(f, step, x2)
                rhs = delta(f, step, x1)
            else:
                x, u, y = self.witness
                lhs = (f.evaluate(y) - f.evaluate(u)) * (u - x)
                rhs = (f.evaluate(u) - f.evaluate(x)) * (y - u)
        else:
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        return lhs, rhs

    def verify(self, f: FunctionDef) -> bool:
        """True iff re-evaluation reproduces both sides and the violation."""
        try:
            lhs, rhs = self.recompute_sides(f)
        except Exception:
            return False
        return lhs == self.lhs and rhs == self.rhs and compare(lhs, rhs) is Ordering.LESS

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "witness": [w.literal() for w in self.witness],
            "lhs": self.lhs.literal(),
            "rhs": self.rhs.literal(),
            "violation": self.violation_amount().literal(),
            "context": {k: v.literal() for k, v in self.context},
        }

    @classmethod
    def from_jsonable(cls, d: dict) -> "ViolationCertificate":
        return cls(
            d["kind"],
            tuple(ExactReal.parse(w) for w in d["witness"]),
            ExactReal.parse(d["lhs"]),
            ExactReal.parse(d["rhs"]),
            tuple((k, ExactReal.parse(v)) for k, v in sorted(d.get("context", {}).items())),
        )


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a grid sweep: pass over the sample, or first violation."""

    passed: bool
    certificate: ViolationCertificate | None
    checked: int

    @property
    def description(self) -> str:
        return "no violation found on grid" if self.passed else "violation found on grid"

    def to_jsonable(self) -> dict:
        return {
            "passed": self.passed,
            "checked": self.checked,
            "description": self.description,
            "certificate": None if self.certificate is None else self.certificate.to_jsonable(),
        }


def delta(f: FunctionDef, w: ExactReal | int | Fraction, x: ExactReal) -> ExactReal:
    """(step-w difference) f(x + w) - f(x)."""
    wv = w if isinstance(w, ExactReal) else ExactReal.from_rational(w)
    if not f.interval.contains(x) or not f.interval.contains(x + wv):
        raise OutOfDomainError(f"delta step {wv} leaves {f.interval.literal()} from {x}")
    return f.evaluate(x + wv) - f.evaluate(x)


def double_delta(
    f: FunctionDef,
    u: ExactReal | int | Fraction,
    v: ExactReal | int | Fraction,
    x: ExactReal,
) -> ExactReal:
    """f(x+u+v) - f(x+u) - f(x+v) + f(x) for positive steps u, v."""
    uv = u if isinstance(u, ExactReal) else ExactReal.from_rational(u)
    vv = v if isinstance(v, ExactReal) else ExactReal.from_rational(v)
    if compare(uv, 0) is not Ordering.GREATER or compare(vv, 0) is not Ordering.GREATER:
        raise NonPositiveStepError(f"steps must be positive, got {uv}, {vv}")
    top = x + uv + vv
    if not f.interval.contains(x) or not f.interval.contains(top):
        raise OutOfDomainError(
            f"triple ({x}, {uv}, {vv}) leaves {f.interval.literal()}"
        )
    return f.evaluate(top) - f.evaluate(x + uv) - f.evaluate(x + vv) + f.evaluate(x)


def build_steps(
    grid: SampleGrid,
    explicit: Sequence[ExactReal] = (),
    *,
    use_grid_differences: bool = True,
    max_grid_steps: int | None = None,
) -> tuple[ExactReal, ...]:
    """Step profile: explicit steps first (in the given order), then the
    positive pairwise grid differences, ascending and deduplicated.

    Counterexample hunting usually needs explicit steps aligned with the
    kernel structure of the suspected additive part; random grid
    differences almost never hit them.
    """
    steps: list[ExactReal] = []
    seen: set[ExactReal] = set()
    for s in explicit:
        sv = s if isinstance(s, ExactReal) else ExactReal.from_rational(s)
        if compare(sv, 0) is Ordering.GREATER and sv not in seen:
            steps.append(sv)
            seen.add(sv)
    if use_grid_differences:
        pts = grid.points()
        diffs: set[ExactReal] = set()
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                d = pts[j] - pts[i]
                if not d.is_zero:
                    diffs.add(d)
        ordered = _sorted_exact(diffs - seen)
        if max_grid_steps is not None:
            ordered = ordered[:max_grid_steps]
        steps.extend(ordered)
    return tuple(steps)


def _sorted_exact(values: Iterable[ExactReal]) -> list[ExactReal]:
    return sorted(values, key=functools.cmp_to_key(lambda a, b: int(compare(a, b))))


def wright_check(
    f: FunctionDef,
    grid: SampleGrid,
    steps: Sequence[ExactReal] = (),
    *,
    use_grid_differences: bool = True,
    max_grid_steps: int | None = None,
) -> CheckReport:
    """Exact sweep of the double difference over all admissible triples.

    Triples (x, u, v) take x from the grid in ascending order and u, v
    from the step profile in profile order; the first triple whose double
    difference is negative becomes the certificate.
    """
    step_list = build_steps(
        grid, steps, use_grid_differences=use_grid_differences, max_grid_steps=max_grid_steps
    )
    cache: dict[ExactReal, ExactReal] = {}

    def ev(p: ExactReal) -> ExactReal:
        val = cache.get(p)
        if val is None:
            val = f.evaluate(p)
            cache[p] = val
        return val

    interval = f.interval
    checked = 0
    for x in grid.points():
        fx = ev(x)
        for u in step_list:
            xu = x + u
            fxu = None
            for v in step_list:
                top = xu + v
                if not interval.contains(top):
                    continue
                if fxu is None:
                    fxu = ev(xu)
                dd = ev(top) - fxu - ev(x + v) + fx
                checked += 1
                if compare(dd, 0) is Ordering.LESS:
                    cert = ViolationCertificate(
                        kind="wright",
                        witness=(x, u, v),
                        lhs=ev(top) + fx,
                        rhs=fxu + ev(x + v),
                    )
                    return CheckReport(False, cert, checked)
    return CheckReport(True, None, checked)


def jensen_check(f: FunctionDef, grid: SampleGrid) -> CheckReport:
    """Exact midpoint-convexity sweep over all grid pairs."""
    pts = grid.points()
    cache: dict[ExactReal, ExactReal] = {}

    def ev(p: ExactReal) -> ExactReal:
        val = cache.get(p)
        if val is None:
            val = f.evaluate(p)
            cache[p] = val
        return val

    checked = 0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            x, y = pts[i], pts[j]
            mid = (x + y) * _HALF
            lhs = (ev(x) + ev(y)) * _HALF
            rhs = ev(mid)
            checked += 1
            if compare(lhs, rhs) is Ordering.LESS:
                cert = ViolationCertificate(
                    kind="jensen",
                    witness=(x, y),
                    lhs=lhs,
                    rhs=rhs,
                    context=(("t", ExactReal.from_rational(_HALF)),),
                )
                return CheckReport(False, cert, checked)
    return CheckReport(True, None, checked)


def chord_slope(f: FunctionDef, x: ExactReal, y: ExactReal) -> SlopeFraction:
    """(f(y) - f(x)) / (y - x), unevaluated."""
    if compare(x, y) is Ordering.EQUAL:
        raise DegeneratePairError(f"chord slope needs distinct points, got {x} twice")
    return SlopeFraction(f.evaluate(y) - f.evaluate(x), y - x)


def chord_slope_monotone_check(f: FunctionDef, grid: SampleGrid) -> CheckReport:
    """Check slope(x, u) <= slope(u, y) for all ascending grid triples."""
    pts = grid.points()
    cache: dict[ExactReal, ExactReal] = {}

    def ev(p: ExactReal) -> ExactReal:
        val = cache.get(p)
        if val is None:
            val = f.evaluate(p)
            cache[p] = val
        return val

    checked = 0
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                x, u, y = pts[i], pts[j], pts[k]
                # slope(u,y) >= slope(x,u) cross-multiplied by the positive
                # denominators (u-x) and (y-u).
                lhs = (ev(y) - ev(u)) * (u - x)
                rhs = (ev(u) - ev(x)) * (y - u)
                checked += 1
                if compare(lhs, rhs) is Ordering.LESS:
                    cert = ViolationCertificate(
                        kind="monotone", witness=(x, u, y), lhs=lhs, rhs=rhs
                    )
                    return CheckReport(False, cert, checked)
    return CheckReport(True, None, checked)


def lipschitz_bound(
    f: FunctionDef,
    a: Fraction,
    b: Fraction,
    bracket: tuple[Fraction, Fraction, Fraction, Fraction],
) -> SlopeFraction:
    """Lipschitz modulus for f on the rationals of [a, b].

    With bracket rationals a' < a'' <= a < b <= b' < b'' inside the
    interval, the modulus is max(|alpha|, |beta|) where alpha is the
    divided difference over (a', a'') and beta over (b', b'').  For a
    midpoint-convex restriction this bounds |f(x) - f(y)| / |x - y| over
    all rationals x, y in [a, b].
    """
    a1, a2, b1, b2 = (Fraction(q) for q in bracket)
    if not (a1 < a2 <= a < b <= b1 < b2):
        raise BracketViolationError(
            f"bracket ({a1}, {a2}, {b1}, {b2}) fails a' < a'' <= a < b <= b' < b''"
        )
    for q in (a1, a2, b1, b2):
        if not f.interval.contains(q):
            raise BracketViolationError(f"bracket point {q} outside {f.interval.literal()}")
    ea = [ExactReal.from_rational(q) for q in (a1, a2, b1, b2)]
    alpha = SlopeFraction(f.evaluate(ea[1]) - f.evaluate(ea[0]), ea[1] - ea[0]).abs()
    beta = SlopeFraction(f.evaluate(ea[3]) - f.evaluate(ea[2]), ea[3] - ea[2]).abs()
    return beta if alpha.compare(beta) is Ordering.LESS else alpha
