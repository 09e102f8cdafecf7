"""Recovery of the additive part and verification of the decomposition.

Pipeline for a midpoint-convex instance f on an open interval: build the
certified extension g of f restricted to the rationals, probe the
residual f - g, and recover the additive coefficient on each basis
radical from a single span point r + q*sqrt(m).  The recovered additive
part vanishes on Q by construction: the residual is exactly zero at
every rational because g agrees with f there, which also forces the
rational coefficient and the midpoint-equation constant to zero.

The residual is never materialized as a function; its additive part is
in general everywhere-discontinuous, so pointwise enclosures are the
only honest representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .analysis import jensen_check
from .domain import Interval, SampleGrid, make_grid, rational_anchors, shifted_intersection
from .errors import (
    BracketUnavailableError,
    EmptyDomainError,
    InconsistentEnclosureError,
    NotJensenConvexError,
)
from .exactreal import Enclosure, ExactReal, Ordering, compare
from .extension import BracketPolicy, ExtensionHandle, TransferReport, difference_transfer_check
from .funcspec import Decomposable, FunctionDef

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class ResidualOracle:
    """Pointwise enclosures of f minus its certified extension."""

    f: FunctionDef
    handle: ExtensionHandle

    def value(self, x: ExactReal, eps: Fraction) -> Enclosure:
        fx = self.f.evaluate(x)
        ext = self.handle.extend_eval(x, eps)
        return Enclosure(fx - ext.hi, fx - ext.lo)


@dataclass(frozen=True)
class JensenEquationReport:
    """Worst certified bound on the midpoint-equation residual of f - g."""

    pairs_checked: int
    worst_bound: Fraction
    within_tolerance: bool  # exact comparison against 3 * eps

    def to_jsonable(self) -> dict:
        return {
            "pairs_checked": self.pairs_checked,
            "worst_bound": str(self.worst_bound),
            "within_tolerance": self.within_tolerance,
        }


@dataclass(frozen=True)
class DecompositionResult:
    additive_hat: dict[int, Enclosure]
    rational_coefficient: Fraction  # exactly 0 by normalization
    constant: Fraction  # exactly 0 by normalization
    eps: Fraction
    grid_seed: int
    rational_zero_witnesses: tuple[Fraction, ...]
    recovery_points: dict[int, tuple[Fraction, Fraction]]  # m -> (r, q)
    jensen_residual: JensenEquationReport
    transfer_reports: tuple[TransferReport, ...]

    def to_jsonable(self) -> dict:
        return {
            "additive": {str(m): enc.to_jsonable() for m, enc in sorted(self.additive_hat.items())},
            "rational_coefficient": str(self.rational_coefficient),
            "constant": str(self.constant),
            "eps": str(self.eps),
            "seed": self.grid_seed,
            "recovery_points": {
                str(m): {"r": str(r), "q": str(q)}
                for m, (r, q) in sorted(self.recovery_points.items())
            },
            "residuals": {
                "rational_zero_witnesses": [str(q) for q in self.rational_zero_witnesses],
                "jensen_equation": self.jensen_residual.to_jsonable(),
                "transfer": [t.to_jsonable() for t in self.transfer_reports],
            },
        }


def _dyadic_floor(q: Fraction, den: int = 64) -> Fraction:
    return Fraction(math.floor(q * den), den)


def _recovery_point(interval: Interval, m: int) -> tuple[Fraction, Fraction]:
    """Rationals (r, q), q > 0, with r + q*sqrt(m) inside the interval.

    The coefficient error of the recovery divides by q, so q is taken as
    large as the interval allows (largest power of two fitting a quarter
    of the usable window), with r a dyadic rational near the center.
    """
    a, b = rational_anchors(interval)
    center = (a + b) / 2
    r = _dyadic_floor(center)
    if r <= a:
        r = center
    room = (b - a) / 4
    s = ExactReal.sqrt(m)
    q = Fraction(1)
    while compare(s * (q * 2), room) is not Ordering.GREATER:
        q *= 2
    guard = 0
    while compare(s * q, room) is Ordering.GREATER:
        q /= 2
        guard += 1
        if guard > 200:
            raise BracketUnavailableError(f"interval too narrow to probe sqrt({m})")
    probe = ExactReal.from_rational(r) + s * q
    while not interval.contains(probe):
        q /= 2
        guard += 1
        if guard > 200:
            raise BracketUnavailableError(f"interval too narrow to probe sqrt({m})")
        probe = ExactReal.from_rational(r) + s * q
    return r, q


def _spot_check_pairs(
    grid: SampleGrid, cap: int = 16
) -> list[tuple[ExactReal, ExactReal]]:
    pairs: list[tuple[ExactReal, ExactReal]] = []
    irr = grid.irrationals
    # Reflections of each probe about a rational grid point put the pair
    # midpoint on Q, where the residual vanishes exactly; any additive
    # inconsistency at the probe then shows up undamped.
    for x in irr:
        for q in grid.rationals:
            y = ExactReal.from_rational(2 * q) - x
            if grid.interval.contains(y) and compare(x, y) is not Ordering.EQUAL:
                pairs.append((x, y))
                break
    for i in range(len(irr)):
        for j in range(i + 1, len(irr)):
            if len(pairs) >= cap - 4:
                break
            pairs.append((irr[i], irr[j]))
    for q in grid.rationals[:2]:
        for x in irr[:2]:
            if len(pairs) >= cap:
                break
            pairs.append((ExactReal.from_rational(q), x))
    return pairs


def decompose(
    f: FunctionDef,
    eps: Fraction,
    grid: SampleGrid,
    policy: BracketPolicy | None = None,
) -> DecompositionResult:
    """Recover the additive part of f vanishing on Q, with certified error.

    Precondition: f is midpoint convex on the grid's rational points
    (checked first; failure aborts, since such an f cannot be a sum of a
    convex and an additive function).  Each basis radical coefficient is
    recovered as (f(r + q*sqrt(m)) - g-enclosure) / q with enclosure
    width eps * q, so every reported coefficient enclosure has width at
    most eps.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if len(grid.rationals) < 2:
        raise ValueError("decomposition needs at least two rational grid points")

    gate = jensen_check(f, grid.rational_only())
    if not gate.passed:
        raise NotJensenConvexError(gate.certificate)

    handle = ExtensionHandle(f, policy)
    oracle = ResidualOracle(f, handle)

    additive_hat: dict[int, Enclosure] = {}
    recovery_points: dict[int, tuple[Fraction, Fraction]] = {}
    for m in f.basis:
        r, q = _recovery_point(f.interval, m)
        probe = ExactReal.from_rational(r) + ExactReal.sqrt(m) * q
        ext = handle.extend_eval(probe, eps * q)
        fp = f.evaluate(probe)
        additive_hat[m] = Enclosure(fp - ext.hi, fp - ext.lo).divide(q)
        recovery_points[m] = (r, q)

    for qpt in grid.rationals:
        residual = oracle.value(ExactReal.from_rational(qpt), eps)
        if not (residual.lo.is_zero and residual.hi.is_zero):
            raise InconsistentEnclosureError(
                f"residual at rational {qpt} is not exactly zero"
            )

    worst_exact = ExactReal()
    worst_ub = Fraction(0)
    pairs = _spot_check_pairs(grid)
    for x, y in pairs:
        mid = (x + y) * _HALF
        combined = oracle.value(mid, eps) - (
            oracle.value(x, eps) + oracle.value(y, eps)
        ).scale(_HALF)
        lo_a, hi_a = abs(combined.lo), abs(combined.hi)
        bound = lo_a if compare(lo_a, hi_a) is Ordering.GREATER else hi_a
        if compare(bound, worst_exact) is Ordering.GREATER:
            worst_exact = bound
        worst_ub = max(worst_ub, bound.bounds(eps / 16)[1])
    jensen_report = JensenEquationReport(
        pairs_checked=len(pairs),
        worst_bound=worst_ub,
        within_tolerance=compare(worst_exact, 3 * eps) is not Ordering.GREATER,
    )

    transfer_reports: list[TransferReport] = []
    steps = sorted(
        {q2 - q1 for i, q1 in enumerate(grid.rationals) for q2 in grid.rationals[i + 1 :]}
    )
    for v in steps[:2]:
        try:
            sub_interval = shifted_intersection(f.interval, v)
        except EmptyDomainError:
            continue
        sub = grid.restricted_to(sub_interval)
        if len(sub.points()) < 2:
            continue
        transfer_reports.append(difference_transfer_check(f, handle, v, sub, eps))

    return DecompositionResult(
        additive_hat=additive_hat,
        rational_coefficient=Fraction(0),
        constant=Fraction(0),
        eps=eps,
        grid_seed=grid.seed,
        rational_zero_witnesses=tuple(grid.rationals),
        recovery_points=recovery_points,
        jensen_residual=jensen_report,
        transfer_reports=tuple(transfer_reports),
    )


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    failures: tuple[str, ...]
    radicals_checked: int
    probes_checked: int

    def to_jsonable(self) -> dict:
        return {
            "passed": self.passed,
            "failures": list(self.failures),
            "radicals_checked": self.radicals_checked,
            "probes_checked": self.probes_checked,
        }


def verify_against_truth(result: DecompositionResult, instance: FunctionDef) -> VerificationReport:
    """Check a decomposition against the generator's ground truth.

    The unique decomposition with additive part vanishing on Q absorbs
    any rational-linear action c1 * x of the instance's additive map into
    the convex part, so the expected coefficient on sqrt(m) is
    c_m - c1 * sqrt(m) and the expected extension is g_true(x) + c1 * x.
    """
    if not isinstance(instance, Decomposable):
        raise ValueError("ground-truth verification needs a Decomposable instance")
    failures: list[str] = []
    c1 = instance.additive.rational_slope

    for m, enc in sorted(result.additive_hat.items()):
        truth = instance.additive.coefficient(m) - c1 * ExactReal.sqrt(m)
        if not enc.contains(truth):
            failures.append(
                f"additive[{m}]: enclosure [{enc.lo}, {enc.hi}] misses true value {truth}"
            )
        if compare(enc.width, result.eps) is Ordering.GREATER:
            failures.append(f"additive[{m}]: width {enc.width} exceeds eps {result.eps}")

    if result.rational_coefficient != 0:
        failures.append("rational coefficient is not exactly 0")
    if result.constant != 0:
        failures.append("constant is not exactly 0")

    probe_grid = make_grid(
        instance.interval, 3, 4, instance.basis, seed=result.grid_seed + 1
    )
    handle = ExtensionHandle(instance)
    probes = 0
    for x in probe_grid.points():
        enc = handle.extend_eval(x, result.eps)
        truth_ext = instance.convex.value(x) + c1 * x
        probes += 1
        if not enc.contains(truth_ext):
            failures.append(f"extension at {x} misses true value {truth_ext}")
        if x.is_rational and not enc.is_point:
            failures.append(f"extension at rational {x} is not zero-width")

    return VerificationReport(
        passed=not failures,
        failures=tuple(failures),
        radicals_checked=len(result.additive_hat),
        probes_checked=probes,
    )


@dataclass(frozen=True)
class UniquenessReport:
    """Agreement of two independent decomposition runs."""

    passed: bool
    radical_overlaps: dict[int, bool]
    probes_checked: int
    probe_failures: tuple[str, ...]
    first: DecompositionResult
    second: DecompositionResult

    def to_jsonable(self) -> dict:
        return {
            "passed": self.passed,
            "radical_overlaps": {str(m): ok for m, ok in sorted(self.radical_overlaps.items())},
            "probes_checked": self.probes_checked,
            "probe_failures": list(self.probe_failures),
        }


def uniqueness_check(
    f: FunctionDef,
    eps: Fraction,
    seeds: tuple[int, int],
    *,
    grid_shape: tuple[int, int] = (8, 4),
) -> UniquenessReport:
    """Run the recovery twice with different grids and bracket policies;
    agreement means every pair of coefficient enclosures intersects and
    the two extension enclosures overlap at every probe point."""
    s1, s2 = seeds
    n_r, n_i = grid_shape
    policy_a = BracketPolicy()
    policy_b = BracketPolicy(
        initial_eps=Fraction(1, 8), margin_divisor=16, slope_eps=Fraction(1, 128)
    )
    grid_a = make_grid(f.interval, n_r, n_i, f.basis, s1)
    grid_b = make_grid(f.interval, n_r + 2, n_i, f.basis, s2)
    first = decompose(f, eps, grid_a, policy_a)
    second = decompose(f, eps, grid_b, policy_b)

    radical_overlaps = {
        m: first.additive_hat[m].overlaps(second.additive_hat[m]) for m in first.additive_hat
    }

    handle_a = ExtensionHandle(f, policy_a)
    handle_b = ExtensionHandle(f, policy_b)
    probe_grid = make_grid(f.interval, 3, 3, f.basis, seed=1_000_003 * s1 + s2)
    probe_failures: list[str] = []
    probes = 0
    for x in probe_grid.points():
        ea = handle_a.extend_eval(x, eps)
        eb = handle_b.extend_eval(x, eps)
        probes += 1
        if not ea.overlaps(eb):
            probe_failures.append(f"extension enclosures at {x} are disjoint")

    passed = all(radical_overlaps.values()) and not probe_failures
    return UniquenessReport(
        passed=passed,
        radical_overlaps=radical_overlaps,
        probes_checked=probes,
        probe_failures=tuple(probe_failures),
        first=first,
        second=second,
    )
