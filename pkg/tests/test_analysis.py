import random
from fractions import Fraction

import pytest

from wrightdecomp import (
    AbsAdditive,
    AdditiveMap,
    ConvexSpec,
    Decomposable,
    ExactReal,
    Interval,
    Ordering,
    SampleGrid,
    SlopeFraction,
    Spiked,
    ViolationCertificate,
    build_steps,
    chord_slope,
    chord_slope_monotone_check,
    compare,
    delta,
    double_delta,
    jensen_check,
    lipschitz_bound,
    make_grid,
    wright_check,
)
from wrightdecomp.errors import (
    BracketViolationError,
    DegeneratePairError,
    NonPositiveStepError,
    OutOfDomainError,
)

R = ExactReal.from_rational
SQRT = ExactReal.sqrt
I_10 = Interval.open(-10, 10)


def square(additive=None, basis=(2,), interval=I_10):
    return Decomposable(
        interval, tuple(basis), ConvexSpec(quad=Fraction(1)), additive or AdditiveMap()
    )


def abs_fixture():
    """|A| with A(sqrt2) = 1, vanishing on Q, on (-10, 10)."""
    return AbsAdditive(I_10, (2,), AdditiveMap.from_mapping({2: 1}))


def affine(slope=Fraction(3, 2)):
    return Decomposable(I_10, (2,), ConvexSpec(slope=R(slope)))


# -- difference operators ------------------------------------------------------


def test_delta_examples():
    f = square()
    assert delta(f, R(1), R(0)) == R(1)
    assert delta(f, SQRT(2), R(0)) == R(2)
    # purely additive instance vanishing on Q: rational steps give 0
    g = Decomposable(I_10, (2,), ConvexSpec(), AdditiveMap.from_mapping({2: 3}))
    assert delta(g, Fraction(5, 3), R(1)) == ExactReal()


def test_delta_domain_error():
    with pytest.raises(OutOfDomainError):
        delta(square(), R(5), R(6))


def test_double_delta_square_is_2uv():
    f = square()
    assert double_delta(f, R(1), R(1), R(0)) == R(2)
    u, v = SQRT(2), R(2) - SQRT(2)
    x = R(-3)
    assert double_delta(f, u, v, x) == (u * v) * 2


def test_double_delta_additive_cancellation():
    add = AdditiveMap.from_mapping({2: SQRT(2) + R(1), 1: Fraction(1, 3)})
    with_add = square(additive=add)
    without = square()
    rng = random.Random(4)
    for _ in range(25):
        x = R(Fraction(rng.randrange(-40, 20), 8)) + SQRT(2) * Fraction(rng.randrange(-4, 5), 4)
        u = R(Fraction(rng.randrange(1, 16), 8))
        v = SQRT(2) * Fraction(rng.randrange(1, 4), 4) + R(Fraction(rng.randrange(0, 8), 8))
        top = x + u + v
        if not (I_10.contains(x) and I_10.contains(top)):
            continue
        assert double_delta(with_add, u, v, x) == double_delta(without, u, v, x)


def test_double_delta_abs_additive_negative():
    f = abs_fixture()
    value = double_delta(f, SQRT(2), R(2) - SQRT(2), R(0))
    assert value == R(-2)


def test_double_delta_step_validation():
    with pytest.raises(NonPositiveStepError):
        double_delta(square(), R(0), R(1), R(0))
    with pytest.raises(OutOfDomainError):
        double_delta(square(), R(9), R(9), R(0))


# -- wright_check ----------------------------------------------------------------


def test_wright_check_decomposable_passes():
    for seed in (0, 1, 2):
        inst = generate_decomposable(seed)
        grid = make_grid(inst.interval, 8, 2, inst.basis, seed)
        report = wright_check(inst, grid, max_grid_steps=10)
        assert report.passed, report.certificate
        assert report.checked > 0
        assert report.description == "no violation found on grid"


def generate_decomposable(seed):
    from wrightdecomp import generate

    return generate(seed, kind="decomposable", nonzero_rational_part=(seed % 2 == 0))


def test_wright_check_zero_function_all_zero():
    zero = Decomposable(I_10, (2,), ConvexSpec())
    grid = make_grid(I_10, 5, 0, (2,), seed=0)
    report = wright_check(zero, grid)
    assert report.passed
    assert double_delta(zero, R(1), SQRT(2), R(0)) == ExactReal()


def test_wright_check_generated_abs_additive_with_kernel_steps():
    # for |A| with A vanishing on Q, steps u = sqrt(m), v = q - sqrt(m)
    # give exactly -2*|A(sqrt(m))| at rational x: a constructed certificate
    from wrightdecomp import generate

    for seed in (0, 1, 2):
        inst = generate(seed, kind="abs_additive", basis_size=2)
        m, coeff = inst.additive.coeffs[0]
        u = SQRT(m)
        v = R(4) - u  # positive for every basis radical (sqrt(15) < 4)
        grid = SampleGrid(inst.interval, (Fraction(-2),), (), seed=seed)
        report = wright_check(inst, grid, (u, v), use_grid_differences=False)
        assert not report.passed
        cert = report.certificate
        assert cert.violation_amount() == abs(coeff) * -2
        assert cert.verify(inst)


def test_wright_check_finds_abs_additive_violation():
    f = abs_fixture()
    grid = SampleGrid(I_10, (Fraction(0),), (), seed=0)
    steps = (SQRT(2), R(2) - SQRT(2))
    report = wright_check(f, grid, steps, use_grid_differences=False)
    assert not report.passed
    cert = report.certificate
    assert cert.kind == "wright"
    assert cert.witness == (R(0), SQRT(2), R(2) - SQRT(2))
    assert cert.violation_amount() == R(-2)
    assert cert.verify(f)


def test_wright_check_random_steps_miss_the_kernel():
    # the violation needs steps aligned with the additive kernel; plain
    # rational grid differences never reveal it
    f = abs_fixture()
    grid = make_grid(I_10, 8, 0, (2,), seed=1)
    report = wright_check(f, grid, max_grid_steps=12)
    assert report.passed


def test_certificate_json_round_trip_and_self_verify():
    f = abs_fixture()
    grid = SampleGrid(I_10, (Fraction(0),), (), seed=0)
    report = wright_check(f, grid, (SQRT(2), R(2) - SQRT(2)), use_grid_differences=False)
    doc = report.certificate.to_jsonable()
    again = ViolationCertificate.from_jsonable(doc)
    assert again == report.certificate
    assert again.verify(f)
    # a doctored certificate must not verify
    forged = ViolationCertificate(
        again.kind, again.witness, again.lhs + R(1), again.rhs, again.context
    )
    assert not forged.verify(f)


# -- jensen_check ------------------------------------------------------------------


def test_jensen_abs_additive_passes():
    f = abs_fixture()
    grid = make_grid(I_10, 6, 6, (2,), seed=2)
    report = jensen_check(f, grid)
    assert report.passed
    assert report.checked == 66


def test_jensen_spiked_violation_at_midpoint():
    base = square()
    spiked = Spiked(I_10, (2,), base, R(0), Fraction(10))
    grid = SampleGrid(I_10, (Fraction(-1), Fraction(0), Fraction(1)), (), seed=0)
    report = jensen_check(spiked, grid)
    assert not report.passed
    cert = report.certificate
    assert cert.kind == "jensen"
    assert cert.witness == (R(-1), R(1))
    assert cert.verify(spiked)


def test_jensen_affine_exact_equality():
    f = affine()
    grid = make_grid(I_10, 6, 0, (2,), seed=0)
    report = jensen_check(f, grid)
    assert report.passed
    for x, y in ((R(-2), R(5)), (R(0), SQRT(2))):
        lhs = (f.evaluate(x) + f.evaluate(y)) * Fraction(1, 2)
        assert lhs == f.evaluate((x + y) * Fraction(1, 2))


# -- chord slopes --------------------------------------------------------------------


def test_chord_slope_examples():
    f = square()
    s = chord_slope(f, R(0), R(2))
    assert s.num == R(4) and s.den == R(2)
    assert s.as_fraction() == Fraction(2)
    s1 = chord_slope(f, R(0), R(1))
    s2 = chord_slope(f, R(1), R(2))
    assert s1.compare(s2) is Ordering.LESS


def test_chord_slope_affine_constant():
    f = affine(Fraction(3, 2))
    for x, y in ((R(-1), R(4)), (R(0), SQRT(2))):
        assert chord_slope(f, x, y).compare(
            SlopeFraction(R(Fraction(3, 2)), R(1))
        ) is Ordering.EQUAL


def test_chord_slope_degenerate():
    with pytest.raises(DegeneratePairError):
        chord_slope(square(), SQRT(2), SQRT(2))


def test_slope_fraction_requires_nonzero_denominator():
    with pytest.raises(ValueError):
        SlopeFraction(R(1), ExactReal())


def test_chord_slope_monotone_convex_passes():
    # convex catalog only: slope monotonicity is a property of the convex
    # part, not of instances carrying an additive summand
    base = generate_decomposable(5)
    inst = Decomposable(base.interval, base.basis, base.convex)
    grid = make_grid(inst.interval, 7, 2, inst.basis, seed=5)
    report = chord_slope_monotone_check(inst, grid)
    assert report.passed


def test_chord_slope_monotone_concave_fails():
    # -x^2 built directly, outside the ConvexSpec invariants
    concave = Decomposable(I_10, (2,), ConvexSpec(quad=Fraction(-1)))
    grid = SampleGrid(I_10, (Fraction(-1), Fraction(0), Fraction(1)), (), seed=0)
    report = chord_slope_monotone_check(concave, grid)
    assert not report.passed
    assert report.certificate.kind == "monotone"
    assert report.certificate.verify(concave)


# -- lipschitz_bound ------------------------------------------------------------------


def bracket_fixture():
    return (Fraction(-1), Fraction(-1, 2), Fraction(3, 2), Fraction(7, 4))


def test_lipschitz_bound_square_is_13_over_4():
    f = square(interval=Interval.open(-2, 2))
    L = lipschitz_bound(f, Fraction(0), Fraction(1), bracket_fixture())
    assert L.as_fraction() == Fraction(13, 4)


def test_lipschitz_bound_affine_is_abs_slope():
    f = Decomposable(I_10, (2,), ConvexSpec(slope=R(Fraction(-7, 3))))
    L = lipschitz_bound(f, Fraction(0), Fraction(1), bracket_fixture())
    assert L.as_fraction() == Fraction(7, 3)


def test_lipschitz_guarantee_on_rational_pairs():
    f = square(interval=Interval.open(-2, 2))
    L = lipschitz_bound(f, Fraction(0), Fraction(1), bracket_fixture())
    num, den = L.num, L.den
    # spot instance from the bound's contract
    assert abs(f.evaluate(R(Fraction(3, 4))) - f.evaluate(R(Fraction(1, 4)))).as_fraction() == Fraction(1, 2)
    grid = make_grid(Interval.open(0, 1), 10, 0, (), seed=0)
    for i, x in enumerate(grid.rationals):
        for y in grid.rationals[i + 1 :]:
            gap = abs(f.evaluate(R(x)) - f.evaluate(R(y)))
            assert compare(gap * den, num * (y - x)) is not Ordering.GREATER


def test_lipschitz_bracket_validation():
    f = square(interval=Interval.open(-2, 2))
    with pytest.raises(BracketViolationError):
        lipschitz_bound(f, Fraction(0), Fraction(1), (Fraction(0), Fraction(0), Fraction(1), Fraction(2)))
    with pytest.raises(BracketViolationError):
        lipschitz_bound(f, Fraction(0), Fraction(1), (Fraction(-3), Fraction(-5, 2), Fraction(3, 2), Fraction(7, 4)))


# -- the (x, y, t) and double-difference forms agree ------------------------------------


def test_wright_form_equivalence():
    inst = generate_decomposable(9)
    rng = random.Random(9)
    pts = make_grid(inst.interval, 6, 3, inst.basis, seed=9).points()
    checked = 0
    for _ in range(60):
        x, y = rng.choice(pts), rng.choice(pts)
        if compare(x, y) is not Ordering.LESS:
            continue
        t = Fraction(rng.randrange(1, 8), 8)
        u = (y - x) * t
        v = (y - x) * (1 - t)
        # direct two-point form
        lhs = inst.evaluate(x * t + y * (1 - t)) + inst.evaluate(x * (1 - t) + y * t)
        rhs = inst.evaluate(x) + inst.evaluate(y)
        direct_holds = compare(lhs, rhs) is not Ordering.GREATER
        dd_holds = compare(double_delta(inst, u, v, x), 0) is not Ordering.LESS
        assert direct_holds == dd_holds == True
        checked += 1
    assert checked > 10


def test_monotone_differences_along_grid():
    inst = generate_decomposable(11)
    grid = make_grid(inst.interval, 9, 3, inst.basis, seed=11)
    for v in (Fraction(1, 2), Fraction(2, 3)):
        pts = [p for p in grid.points() if inst.interval.contains(p + R(v))]
        values = [delta(inst, v, p) for p in pts]
        for a, b in zip(values, values[1:]):
            assert compare(a, b) is not Ordering.GREATER


# -- step profile -------------------------------------------------------------------


def test_build_steps_explicit_first_then_sorted_differences():
    grid = SampleGrid(I_10, (Fraction(0), Fraction(1), Fraction(3)), (), seed=0)
    steps = build_steps(grid, (SQRT(2), R(2) - SQRT(2)))
    assert steps[0] == SQRT(2)
    assert steps[1] == R(2) - SQRT(2)
    assert steps[2:] == (R(1), R(2), R(3))
    capped = build_steps(grid, (), max_grid_steps=2)
    assert capped == (R(1), R(2))


def test_build_steps_filters_nonpositive():
    grid = SampleGrid(I_10, (Fraction(0),), (), seed=0)
    steps = build_steps(grid, (R(-1), ExactReal(), R(2)), use_grid_differences=False)
    assert steps == (R(2),)
