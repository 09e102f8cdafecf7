from fractions import Fraction

import pytest

from wrightdecomp import (
    AbsAdditive,
    AdditiveMap,
    ConvexSpec,
    Decomposable,
    Enclosure,
    ExactReal,
    ExtensionHandle,
    Interval,
    Ordering,
    ResidualOracle,
    SampleGrid,
    Spiked,
    compare,
    decompose,
    generate,
    make_grid,
    uniqueness_check,
    verify_against_truth,
)
from wrightdecomp.errors import NotJensenConvexError

R = ExactReal.from_rational
SQRT = ExactReal.sqrt
EPS8 = Fraction(1, 10**8)


def fixture_square_additive(c1=Fraction(0)):
    coeffs = {2: 3}
    if c1:
        coeffs[1] = c1
    return Decomposable(
        Interval.open(0, 10),
        (2,),
        ConvexSpec(quad=Fraction(1)),
        AdditiveMap.from_mapping(coeffs),
    )


def grid_for(f, seed=0, n_r=6, n_i=4):
    return make_grid(f.interval, n_r, n_i, f.basis, seed)


def test_decompose_recovers_sqrt2_coefficient():
    f = fixture_square_additive()
    result = decompose(f, EPS8, grid_for(f))
    enc = result.additive_hat[2]
    assert compare(enc.width, EPS8) is not Ordering.GREATER
    assert enc.contains(R(3))


def test_decompose_pure_convex_encloses_zero():
    f = Decomposable(Interval.open(-5, 5), (2, 3), ConvexSpec(quad=Fraction(2)))
    result = decompose(f, EPS8, grid_for(f))
    for m in (2, 3):
        assert result.additive_hat[m].contains(R(0))


def test_decompose_normalizes_rational_linear_part():
    # additive value 1/2 on Q: the unique decomposition with the additive
    # part vanishing on Q moves x/2 into the convex part, so the
    # recovered sqrt2 coefficient is 3 - sqrt2/2 and the extension tracks
    # x^2 + x/2.
    f = fixture_square_additive(c1=Fraction(1, 2))
    result = decompose(f, EPS8, grid_for(f))
    truth = R(3) - SQRT(2) * Fraction(1, 2)
    enc = result.additive_hat[2]
    assert enc.contains(truth)
    assert not enc.contains(R(3))
    assert result.rational_coefficient == 0
    assert result.constant == 0
    h = ExtensionHandle(f)
    x = SQRT(2)
    ext = h.extend_eval(x, EPS8)
    assert ext.contains(R(2) + SQRT(2) * Fraction(1, 2))
    report = verify_against_truth(result, f)
    assert report.passed, report.failures


def test_decompose_residual_zero_on_rationals():
    f = fixture_square_additive(c1=Fraction(1, 2))
    grid = grid_for(f, seed=3)
    result = decompose(f, EPS8, grid)
    assert result.rational_zero_witnesses == grid.rationals
    oracle = ResidualOracle(f, ExtensionHandle(f))
    for q in grid.rationals:
        enc = oracle.value(R(q), EPS8)
        assert enc == Enclosure.point(ExactReal())


def test_decompose_jensen_residual_within_tolerance():
    f = generate(41, kind="decomposable", nonzero_rational_part=True)
    result = decompose(f, EPS8, grid_for(f, seed=41))
    assert result.jensen_residual.within_tolerance
    assert result.jensen_residual.worst_bound <= 3 * EPS8 + EPS8


def test_decompose_transfer_reports_clean():
    f = generate(42, kind="decomposable")
    result = decompose(f, EPS8, grid_for(f, seed=42))
    assert result.transfer_reports
    for rep in result.transfer_reports:
        assert rep.monotone_passed
        assert rep.rational_equal
        assert rep.within_twice_eps


def test_round_trip_random_instances():
    for seed in range(6):
        f = generate(seed + 100, kind="decomposable", nonzero_rational_part=(seed % 3 == 0))
        result = decompose(f, EPS8, grid_for(f, seed=seed))
        report = verify_against_truth(result, f)
        assert report.passed, (seed, report.failures)


def test_verify_flags_corrupted_entry():
    f = fixture_square_additive()
    result = decompose(f, EPS8, grid_for(f))
    shifted = {
        m: Enclosure(enc.lo + R(1), enc.hi + R(1)) for m, enc in result.additive_hat.items()
    }
    import dataclasses

    corrupted = dataclasses.replace(result, additive_hat=shifted)
    report = verify_against_truth(corrupted, f)
    assert not report.passed
    assert any("additive[2]" in msg for msg in report.failures)
    assert len([m for m in report.failures if "misses" in m]) == 1


def test_decompose_gate_rejects_spiked():
    base = Decomposable(Interval.open(-10, 10), (2,), ConvexSpec(quad=Fraction(1)))
    spiked = Spiked(Interval.open(-10, 10), (2,), base, R(0), Fraction(10))
    grid = SampleGrid(
        Interval.open(-10, 10), (Fraction(-1), Fraction(0), Fraction(1)), (), seed=0
    )
    with pytest.raises(NotJensenConvexError) as info:
        decompose(spiked, EPS8, grid)
    assert info.value.certificate.verify(spiked)


def test_decompose_abs_additive_flagged_by_jensen_residual():
    # |A| is midpoint convex, so the gate passes and recovery runs; the
    # residual then fails the midpoint equation at sign-mixing probes.
    f = AbsAdditive(Interval.open(-10, 10), (2,), AdditiveMap.from_mapping({2: 1}))
    grid = SampleGrid(
        Interval.open(-10, 10),
        (Fraction(-1), Fraction(0), Fraction(1)),
        (SQRT(2), -SQRT(2)),
        seed=0,
    )
    result = decompose(f, Fraction(1, 10**4), grid)
    assert not result.jensen_residual.within_tolerance
    assert result.jensen_residual.worst_bound >= Fraction(1, 2)


def test_decompose_abs_additive_flagged_on_default_grids():
    # reflection pairs put the spot-check midpoint on Q, so generated
    # grids expose the family without hand-picked probes
    for seed in (0, 1, 2):
        f = generate(seed, kind="abs_additive", basis_size=2)
        grid = grid_for(f, seed=seed)
        result = decompose(f, Fraction(1, 10**4), grid)
        assert not result.jensen_residual.within_tolerance, seed


def test_uniqueness_check_passes_and_nests():
    f = generate(55, kind="decomposable", nonzero_rational_part=True)
    coarse = uniqueness_check(f, Fraction(1, 10**4), (1, 2))
    fine = uniqueness_check(f, EPS8, (1, 2))
    assert coarse.passed and fine.passed
    for m, enc in fine.first.additive_hat.items():
        wide = coarse.first.additive_hat[m]
        meet_fine = enc.intersect(fine.second.additive_hat[m])
        meet_coarse = wide.intersect(coarse.second.additive_hat[m])
        assert meet_coarse.contains_enclosure(meet_fine)


def test_refinement_never_widens():
    f = generate(56, kind="decomposable")
    g1 = grid_for(f, seed=7, n_r=5, n_i=2)
    g2 = grid_for(f, seed=7, n_r=10, n_i=4)
    r1 = decompose(f, Fraction(1, 10**4), g1)
    r2 = decompose(f, EPS8, g2)
    for m, enc in r1.additive_hat.items():
        assert enc.contains_enclosure(r2.additive_hat[m])


def test_result_jsonable_shape():
    f = fixture_square_additive()
    result = decompose(f, EPS8, grid_for(f))
    doc = result.to_jsonable()
    assert set(doc) >= {
        "additive",
        "rational_coefficient",
        "constant",
        "residuals",
        "eps",
        "seed",
    }
    assert doc["rational_coefficient"] == "0"
    assert doc["constant"] == "0"
    assert "2" in doc["additive"]
    assert {"lo", "hi"} == set(doc["additive"]["2"])
