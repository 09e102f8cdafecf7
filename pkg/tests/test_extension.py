from fractions import Fraction

import pytest

from wrightdecomp import (
    AbsAdditive,
    AdditiveMap,
    BracketPolicy,
    ConvexSpec,
    Decomposable,
    ExactReal,
    ExtensionHandle,
    Interval,
    Ordering,
    SampleGrid,
    Spiked,
    compare,
    convexity_certificate,
    difference_transfer_check,
    generate,
    make_grid,
)
from wrightdecomp.errors import (
    NonPositiveStepError,
    NotJensenConvexError,
    OutOfDomainError,
)

R = ExactReal.from_rational
SQRT = ExactReal.sqrt
I_10 = Interval.open(-10, 10)

EPS6 = Fraction(1, 10**6)
EPS_SET = (Fraction(1, 100), Fraction(1, 10**4), Fraction(1, 10**8))


def square(additive=None, interval=I_10, basis=(2,)):
    return Decomposable(
        interval, tuple(basis), ConvexSpec(quad=Fraction(1)), additive or AdditiveMap()
    )


def test_extend_square_at_sqrt2_encloses_2():
    h = ExtensionHandle(square())
    enc = h.extend_eval(SQRT(2), EPS6)
    assert compare(enc.width, EPS6) is not Ordering.GREATER
    assert enc.contains(R(2))  # the continuous extension of x^2|Q is x^2


def test_extend_rational_point_is_exact():
    f = square(additive=AdditiveMap.from_mapping({2: 3}))
    h = ExtensionHandle(f)
    x = R(Fraction(3, 4))
    enc = h.extend_eval(x, Fraction(1))
    assert enc.is_point
    assert enc.lo == f.evaluate(x) == R(Fraction(9, 16))


def test_extend_absorbs_rational_linear_part():
    # additive part with value 1/2 on 1: f|Q = x^2 + x/2, so the extension
    # at sqrt2 must enclose 2 + sqrt2/2 rather than 2
    f = square(additive=AdditiveMap.from_mapping({1: Fraction(1, 2), 2: 3}))
    h = ExtensionHandle(f)
    enc = h.extend_eval(SQRT(2), Fraction(1, 10**8))
    truth = R(2) + SQRT(2) * Fraction(1, 2)
    assert enc.contains(truth)
    assert not enc.contains(R(2))


def test_extend_nesting_across_eps():
    f = generate(31, kind="decomposable")
    h = ExtensionHandle(f)
    grid = make_grid(f.interval, 0, 3, f.basis, seed=31)
    for x in grid.irrationals:
        encs = [h.extend_eval(x, eps) for eps in EPS_SET]
        for outer, inner in zip(encs, encs[1:]):
            assert outer.contains_enclosure(inner)


def test_extend_cache_matches_fresh_run():
    f = generate(32, kind="decomposable")
    x = make_grid(f.interval, 0, 1, f.basis, seed=32).irrationals[0]
    warm = ExtensionHandle(f)
    for eps in (Fraction(1, 10), *EPS_SET):
        fresh = ExtensionHandle(f)
        assert warm.extend_eval(x, eps) == fresh.extend_eval(x, eps)


def test_extend_out_of_domain():
    h = ExtensionHandle(square())
    with pytest.raises(OutOfDomainError):
        h.extend_eval(R(11), Fraction(1))


def test_extend_bracket_unavailable_on_sliver_interval():
    from wrightdecomp.errors import BracketUnavailableError

    tiny = Fraction(1, 10**160)
    sliver = Interval(SQRT(2) - R(tiny), SQRT(2) + R(tiny))
    f = Decomposable(sliver, (2,), ConvexSpec(quad=Fraction(1)))
    h = ExtensionHandle(f)
    with pytest.raises(BracketUnavailableError):
        h.extend_eval(SQRT(2), Fraction(1, 100))


def test_intermediate_probes_respect_modulus():
    f = generate(33, kind="decomposable", nonzero_rational_part=True)
    h = ExtensionHandle(f, record_probes=True)
    x = make_grid(f.interval, 0, 2, f.basis, seed=33).irrationals[0]
    h.extend_eval(x, Fraction(1, 10**8))
    probes = h.probe_log(x)
    assert len(probes) >= 3
    (_, lbar) = h.window_modulus(x)[0], h.window_modulus(x)[1]
    for i, (r1, v1) in enumerate(probes):
        for r2, v2 in probes[i + 1 :]:
            gap = abs(v1 - v2)
            assert compare(gap, R(lbar * abs(r1 - r2))) is not Ordering.GREATER


def test_uniqueness_surrogate_policies_overlap():
    f = generate(34, kind="decomposable", nonzero_rational_part=True)
    h1 = ExtensionHandle(f, BracketPolicy())
    h2 = ExtensionHandle(
        f, BracketPolicy(initial_eps=Fraction(1, 8), margin_divisor=16, slope_eps=Fraction(1, 128))
    )
    grid = make_grid(f.interval, 2, 4, f.basis, seed=34)
    for x in grid.points():
        for eps in EPS_SET:
            assert h1.extend_eval(x, eps).overlaps(h2.extend_eval(x, eps))


def test_handle_precheck_gate():
    base = square()
    spiked = Spiked(I_10, (2,), base, R(0), Fraction(10))
    grid = SampleGrid(I_10, (Fraction(-1), Fraction(0), Fraction(1)), (), seed=0)
    with pytest.raises(NotJensenConvexError):
        ExtensionHandle(spiked, precheck_grid=grid)
    ExtensionHandle(base, precheck_grid=grid)  # clean source passes


# -- convexity certificate ----------------------------------------------------


def test_convexity_certificate_decomposable_passes():
    f = generate(35, kind="decomposable")
    h = ExtensionHandle(f)
    grid = make_grid(f.interval, 8, 0, f.basis, seed=35)
    report = convexity_certificate(h, grid)
    assert report.passed
    assert report.checked == 8 * 7 // 2 * 5


def test_convexity_certificate_spiked_violation():
    base = square()
    spiked = Spiked(I_10, (2,), base, R(0), Fraction(10))
    h = ExtensionHandle(spiked)
    grid = SampleGrid(I_10, (Fraction(-1), Fraction(0), Fraction(1)), (), seed=0)
    report = convexity_certificate(h, grid)
    assert not report.passed
    assert report.certificate.verify(spiked)


def test_convexity_certificate_affine_equalities():
    f = Decomposable(I_10, (2,), ConvexSpec(slope=R(Fraction(5, 4)), offset=R(1)))
    h = ExtensionHandle(f)
    grid = SampleGrid(I_10, (Fraction(-2), Fraction(0), Fraction(3)), (), seed=0)
    report = convexity_certificate(h, grid)
    assert report.passed
    # equality at every tuple for affine sources
    for t in (Fraction(1, 4), Fraction(1, 2)):
        x, y = R(-2), R(3)
        mix = x * t + y * (1 - t)
        assert f.evaluate(x) * t + f.evaluate(y) * (1 - t) == f.evaluate(mix)


# -- difference transfer -------------------------------------------------------


def test_transfer_decomposable_exact_and_certified():
    f = square(additive=AdditiveMap.from_mapping({2: 3}))
    h = ExtensionHandle(f)
    v = Fraction(1, 2)
    from wrightdecomp import shifted_intersection

    sub = shifted_intersection(f.interval, v)
    grid = make_grid(sub, 5, 3, f.basis, seed=36)
    eps = Fraction(1, 10**6)
    report = difference_transfer_check(f, h, v, grid, eps)
    assert report.monotone_passed
    assert report.rational_equal
    assert report.probes_checked == 3
    assert report.within_twice_eps
    assert report.worst_certified_bound <= 2 * eps + eps  # reported rational bound


def test_transfer_pure_convex_trivial():
    f = generate(37, kind="decomposable")
    f = Decomposable(f.interval, f.basis, f.convex)
    h = ExtensionHandle(f)
    from wrightdecomp import shifted_intersection

    v = Fraction(1)
    sub = shifted_intersection(f.interval, v)
    grid = make_grid(sub, 4, 2, f.basis, seed=37)
    report = difference_transfer_check(f, h, v, grid, Fraction(1, 10**4))
    assert report.monotone_passed and report.rational_equal and report.within_twice_eps


def test_transfer_monotone_fails_for_abs_additive():
    # A(p + q*sqrt2) = p - q: then delta with step 1 jumps from
    # |A(1)|-|A(0)| = 1 at x=0 down to |A(1+sqrt2)|-|A(sqrt2)| = -1 at
    # x=sqrt2, an exact decreasing pair.
    f = AbsAdditive(I_10, (2,), AdditiveMap.from_mapping({1: 1, 2: -1}))
    h = ExtensionHandle(f)
    v = Fraction(1)
    from wrightdecomp import shifted_intersection

    sub = shifted_intersection(I_10, v)
    grid = SampleGrid(sub, (), (ExactReal(), SQRT(2)), seed=0)
    report = difference_transfer_check(f, h, v, grid, Fraction(1, 100))
    assert not report.monotone_passed
    cert = report.monotone_certificate
    assert cert is not None
    assert cert.witness == (ExactReal(), SQRT(2))
    assert cert.lhs == R(-1) and cert.rhs == R(1)
    assert compare(cert.lhs, cert.rhs) is Ordering.LESS
    assert cert.verify(f)


def test_transfer_rejects_bad_grid_and_step():
    f = square()
    h = ExtensionHandle(f)
    grid = make_grid(I_10, 4, 0, (2,), seed=0)  # not inside the shifted domain
    with pytest.raises(OutOfDomainError):
        difference_transfer_check(f, h, Fraction(8), grid, Fraction(1, 100))
    with pytest.raises(NonPositiveStepError):
        difference_transfer_check(f, h, Fraction(-1), grid, Fraction(1, 100))
