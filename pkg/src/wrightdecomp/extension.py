"""Certified enclosures of the continuous extension of f restricted to Q.

A midpoint-convex restriction of f to the rationals of an open interval
is locally Lipschitz there, hence admits a unique continuous (convex)
extension.  This engine makes that limit quantitative: to enclose the
extension at an irrational x it

1. places a compact rational window [a, b] around x, strictly inside the
   interval, together with outer bracket rationals a' < a and b'' > b;
2. derives a Lipschitz modulus L for the rationals of [a, b] from the
   bracket divided differences, and widens it to a rational upper bound
   so no field division is ever needed;
3. probes f at rational midpoints x_r of shrinking enclosures of x and
   intersects the certified intervals [f(x_r) - L*d, f(x_r) + L*d],
   where d bounds |x - x_r|.

Every value f is probed at is rational; at rational x the enclosure is
the exact point value.  The refinement chain for a given x is a pure
function of x, so cached and fresh evaluations agree and enclosures for
shrinking eps are nested.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .analysis import ViolationCertificate, CheckReport, delta, jensen_check, lipschitz_bound
from .domain import SampleGrid, shifted_intersection
from .errors import (
    BracketUnavailableError,
    NonPositiveStepError,
    NotJensenConvexError,
    OutOfDomainError,
)
from .exactreal import Enclosure, ExactReal, Ordering, compare
from .funcspec import FunctionDef

_CONVEXITY_WEIGHTS = (
    Fraction(1, 4),
    Fraction(1, 3),
    Fraction(1, 2),
    Fraction(2, 3),
    Fraction(3, 4),
)


@dataclass(frozen=True)
class BracketPolicy:
    """Deterministic knobs for window and bracket placement."""

    initial_eps: Fraction = Fraction(1, 4)  # first enclosure width requested for x
    margin_divisor: int = 8  # bracket margin = available room / divisor
    margin_cap: Fraction = Fraction(1)  # margin seed when the room is unbounded
    slope_eps: Fraction = Fraction(1, 64)  # enclosure width when bounding the modulus
    max_shrink: int = 500


@dataclass
class _Chain:
    window: tuple[Fraction, Fraction]  # [a, b], rational, strictly inside I
    lipschitz_bar: Fraction  # rational upper bound of the window modulus
    deltas: list[Fraction] = field(default_factory=list)
    enclosures: list[Enclosure] = field(default_factory=list)  # running intersections
    probes: list[tuple[Fraction, ExactReal]] = field(default_factory=list)


class ExtensionHandle:
    """On-demand certified enclosures of the extension of ``source``\\|Q.

    The source is only ever evaluated at rational points.  The cache is a
    performance artifact: results are identical with or without it.
    """

    def __init__(
        self,
        source: FunctionDef,
        policy: BracketPolicy | None = None,
        *,
        precheck_grid: SampleGrid | None = None,
        record_probes: bool = False,
    ):
        self.source = source
        self.interval = source.interval
        self.policy = policy or BracketPolicy()
        self.record_probes = record_probes
        self._chains: dict[ExactReal, _Chain] = {}
        if precheck_grid is not None:
            report = jensen_check(source, precheck_grid.rational_only())
            if not report.passed:
                raise NotJensenConvexError(report.certificate)

    # -- source access (rational points only) -------------------------

    def f_rational(self, r: Fraction) -> ExactReal:
        return self.source.evaluate(ExactReal.from_rational(r))

    # -- public API ----------------------------------------------------

    def extend_eval(self, x: ExactReal, eps: Fraction) -> Enclosure:
        """Enclosure of the extension at x with width <= eps."""
        eps = Fraction(eps)
        if eps <= 0:
            raise ValueError(f"eps must be positive, got {eps}")
        if not self.interval.contains(x):
            raise OutOfDomainError(f"{x} outside {self.interval.literal()}")
        if x.is_rational:
            # The extension agrees with f on the rationals.
            return Enclosure.point(self.f_rational(x.rational_part))
        chain = self._chains.get(x)
        if chain is None:
            chain = self._start_chain(x)
            self._chains[x] = chain
        for enc in chain.enclosures:
            if compare(enc.width, eps) is not Ordering.GREATER:
                return enc
        while True:
            enc = self._refine(x, chain)
            if compare(enc.width, eps) is not Ordering.GREATER:
                return enc

    def probe_log(self, x: ExactReal) -> tuple[tuple[Fraction, ExactReal], ...]:
        """(x_r, f(x_r)) pairs used for x so far (record_probes only)."""
        chain = self._chains.get(x)
        return tuple(chain.probes) if chain else ()

    def window_modulus(self, x: ExactReal) -> tuple[tuple[Fraction, Fraction], Fraction]:
        """The window [a, b] and rational Lipschitz bound used for x."""
        chain = self._chains[x]
        return chain.window, chain.lipschitz_bar

    # -- internals -------------------------------------------------------

    def _strict_inside(self, lo: Fraction, hi: Fraction) -> bool:
        i = self.interval
        if i.lo is not None and compare(i.lo, ExactReal.from_rational(lo)) is not Ordering.LESS:
            return False
        if i.hi is not None and compare(ExactReal.from_rational(hi), i.hi) is not Ordering.LESS:
            return False
        return True

    def _margin_seed(self, pt: Fraction, endpoint: ExactReal | None, width: Fraction) -> Fraction:
        if endpoint is None:
            return max(width, self.policy.margin_cap)
        room = ExactReal.from_rational(pt) - endpoint
        room_hi = abs(room).bounds(Fraction(1))[1]
        return max(width, room_hi / self.policy.margin_divisor)

    def _fit_margin(self, seed: Fraction, fits) -> Fraction:
        m = seed
        for _ in range(self.policy.max_shrink):
            if m > 0 and fits(m):
                return m
            m /= 2
        raise BracketUnavailableError("no rational bracket fits inside the interval")

    def _start_chain(self, x: ExactReal) -> _Chain:
        # Shrink the first enclosure of x until it sits strictly inside I.
        d = self.policy.initial_eps
        for _ in range(self.policy.max_shrink):
            a, b = x.bounds(d)
            if a < b and self._strict_inside(a, b):
                break
            d /= 2
        else:
            raise BracketUnavailableError(
                f"could not fit a rational window around {x} inside {self.interval.literal()}"
            )
        width = b - a
        m_left = self._fit_margin(
            self._margin_seed(a, self.interval.lo, width),
            lambda m: self._strict_inside(a - m, b),
        )
        m_right = self._fit_margin(
            self._margin_seed(b, self.interval.hi, width),
            lambda m: self._strict_inside(a, b + m),
        )
        bracket = (a - m_left, a, b, b + m_right)
        modulus = lipschitz_bound(self.source, a, b, bracket)
        lbar = modulus.rational_upper_bound(self.policy.slope_eps)
        chain = _Chain(window=(a, b), lipschitz_bar=lbar, deltas=[d])
        self._seed_round(x, chain, a, b)
        return chain

    def _seed_round(self, x: ExactReal, chain: _Chain, lo: Fraction, hi: Fraction) -> None:
        mid = (lo + hi) / 2
        half = (hi - lo) / 2
        fx = self.f_rational(mid)
        slack = chain.lipschitz_bar * half
        enc = Enclosure(fx - slack, fx + slack)
        if chain.enclosures:
            enc = chain.enclosures[-1].intersect(enc)
        chain.enclosures.append(enc)
        if self.record_probes:
            chain.probes.append((mid, fx))

    def _refine(self, x: ExactReal, chain: _Chain) -> Enclosure:
        d = chain.deltas[-1] / 2
        chain.deltas.append(d)
        lo, hi = x.bounds(d)
        self._seed_round(x, chain, lo, hi)
        return chain.enclosures[-1]


def extend_eval(handle: ExtensionHandle, x: ExactReal, eps: Fraction) -> Enclosure:
    return handle.extend_eval(x, eps)


def convexity_certificate(handle: ExtensionHandle, grid: SampleGrid) -> CheckReport:
    """Exact rational-weight convexity sweep over the grid's rationals.

    Checks f(t*x + (1-t)*y) <= t*f(x) + (1-t)*f(y) for the fixed weight
    set {1/4, 1/3, 1/2, 2/3, 3/4}; everything stays rational, so every
    comparison is exact.
    """
    f = handle.source
    pts = [ExactReal.from_rational(q) for q in grid.rationals]
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
            for t in _CONVEXITY_WEIGHTS:
                mix = x * t + y * (1 - t)
                lhs = ev(x) * t + ev(y) * (1 - t)
                rhs = ev(mix)
                checked += 1
                if compare(lhs, rhs) is Ordering.LESS:
                    cert = ViolationCertificate(
                        kind="jensen",
                        witness=(x, y),
                        lhs=lhs,
                        rhs=rhs,
                        context=(("t", ExactReal.from_rational(t)),),
                    )
                    return CheckReport(False, cert, checked)
    return CheckReport(True, None, checked)


@dataclass(frozen=True)
class TransferReport:
    """Evidence that the step-v difference of f transfers to the extension.

    Monotonicity and the rational-point equalities are exact; at
    irrational probes only a certified bound is honest, so that is what
    is reported (worst case over the probes).
    """

    v: Fraction
    eps: Fraction
    monotone_passed: bool
    monotone_certificate: ViolationCertificate | None
    rational_points_checked: int
    rational_equal: bool
    probes_checked: int
    worst_certified_bound: Fraction
    within_twice_eps: bool

    def to_jsonable(self) -> dict:
        return {
            "v": str(self.v),
            "eps": str(self.eps),
            "monotone_passed": self.monotone_passed,
            "monotone_certificate": (
                None
                if self.monotone_certificate is None
                else self.monotone_certificate.to_jsonable()
            ),
            "rational_points_checked": self.rational_points_checked,
            "rational_equal": self.rational_equal,
            "probes_checked": self.probes_checked,
            "worst_certified_bound": str(self.worst_certified_bound),
            "within_twice_eps": self.within_twice_eps,
        }


def difference_transfer_check(
    f: FunctionDef,
    handle: ExtensionHandle,
    v: Fraction,
    grid: SampleGrid,
    eps: Fraction,
) -> TransferReport:
    """Check that x -> f(x+v) - f(x) is nondecreasing and agrees with the
    extension difference: exactly at rational grid points, and within a
    certified enclosure bound at irrational probes.

    A nondecreasing function and a continuous function that agree on a
    dense set agree everywhere; the finite grid stands in for the dense
    set, so the result is evidence, not proof.
    """
    v = Fraction(v)
    if v <= 0:
        raise NonPositiveStepError(f"transfer step must be positive, got {v}")
    eps = Fraction(eps)
    sub = shifted_intersection(f.interval, v)
    for p in grid.points():
        if not sub.contains(p):
            raise OutOfDomainError(f"grid point {p} outside {sub.literal()}")

    pts = grid.points()
    deltas = [delta(f, v, p) for p in pts]
    monotone_passed = True
    monotone_cert = None
    for i in range(len(pts) - 1):
        if compare(deltas[i], deltas[i + 1]) is Ordering.GREATER:
            monotone_passed = False
            monotone_cert = ViolationCertificate(
                kind="monotone",
                witness=(pts[i], pts[i + 1]),
                lhs=deltas[i + 1],
                rhs=deltas[i],
                context=(("v", ExactReal.from_rational(v)),),
            )
            break

    v_exact = ExactReal.from_rational(v)
    rational_equal = True
    rational_checked = 0
    for q in grid.rationals:
        x = ExactReal.from_rational(q)
        lhs = delta(f, v, x)
        e_hi = handle.extend_eval(x + v_exact, eps)
        e_lo = handle.extend_eval(x, eps)
        rational_checked += 1
        if not (e_hi.is_point and e_lo.is_point and lhs == e_hi.lo - e_lo.lo):
            rational_equal = False

    worst_exact = ExactReal()
    worst_ub = Fraction(0)
    probes = 0
    for x in grid.irrationals:
        d_exact = delta(f, v, x)
        diff = handle.extend_eval(x + v_exact, eps) - handle.extend_eval(x, eps)
        # Whatever the true extension difference is, it lies in ``diff``,
        # so the distance from d_exact to the farther endpoint certifies
        # |d_exact - true difference|.
        lo_gap = abs(d_exact - diff.lo)
        hi_gap = abs(d_exact - diff.hi)
        gap = lo_gap if compare(lo_gap, hi_gap) is Ordering.GREATER else hi_gap
        if compare(gap, worst_exact) is Ordering.GREATER:
            worst_exact = gap
        worst_ub = max(worst_ub, gap.bounds(eps / 16)[1])
        probes += 1

    return TransferReport(
        v=v,
        eps=eps,
        monotone_passed=monotone_passed,
        monotone_certificate=monotone_cert,
        rational_points_checked=rational_checked,
        rational_equal=rational_equal,
        probes_checked=probes,
        worst_certified_bound=worst_ub,
        within_twice_eps=compare(worst_exact, 2 * eps) is not Ordering.GREATER,
    )
