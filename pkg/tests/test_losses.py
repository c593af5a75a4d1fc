"""Loss model: frozen oracle values, comparison semantics, and order laws."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from aptgames import (
    CategoricalLoss,
    ComparisonError,
    DerivativeSequence,
    DeterministicLoss,
    EmpiricalSample,
    KdeLoss,
    MixtureLoss,
    RiskScale,
    cdf,
    compare_categorical,
    compare_det_vs_random,
    compare_lex,
    compare_losses,
    derivative_sequence,
    hermite,
    kde_density,
    kde_derivative,
    moment,
    select_best,
    silverman_bandwidth,
    support_upper,
    upper_tail_mass,
    zero_day_mass,
)

LMH = RiskScale(categories=("L", "M", "H"))


def cat(*mass):
    return CategoricalLoss(scale=LMH, mass=mass)


# ---------------------------------------------------------------------------
# bandwidth rule
# ---------------------------------------------------------------------------


class TestSilvermanBandwidth:
    def test_pinned_value_3332(self):
        # sd = 0.5, IQR = 0.25 -> 0.9 * (0.25/1.34) * 4^(-1/5)
        h = silverman_bandwidth([3, 3, 3, 2])
        assert h == pytest.approx(0.9 * (0.25 / 1.34) * 4 ** (-0.2), rel=1e-15)
        assert h == pytest.approx(0.12725232368091027, rel=1e-15)

    def test_degenerate_sample_falls_back_to_first_point(self):
        assert silverman_bandwidth([3, 3, 3, 3]) == pytest.approx(
            0.9 * 3 * 4 ** (-0.2), rel=1e-15
        )

    def test_interquartile_branch(self):
        # sd wins over IQR/1.34 when the spread is concentrated
        h = silverman_bandwidth([1, 1, 2, 2, 2])
        sd = np.std([1, 1, 2, 2, 2], ddof=1)
        assert h == pytest.approx(0.9 * min(sd, 1 / 1.34) * 5 ** (-0.2))

    def test_single_point_rejected(self):
        with pytest.raises(ValueError):
            silverman_bandwidth([5.0])

    def test_zero_iqr_nonzero_sd(self):
        # IQR = 0 but sd > 0: min(sd, 0) = 0, chain falls through to sd
        pts = [1, 3, 3, 3, 3, 3, 3, 3, 3]
        assert silverman_bandwidth(pts) == pytest.approx(
            0.9 * np.std(pts, ddof=1) * len(pts) ** (-0.2)
        )

    @given(
        pts=st.lists(st.floats(1.0, 9.0), min_size=2, max_size=12),
        p=st.sampled_from([0.25, 0.5, 0.75]),
    )
    @settings(max_examples=150, deadline=None)
    def test_quantiles_match_linear_interpolation_convention(self, pts, p):
        from aptgames.losses import _quantile

        assert _quantile(pts, p) == pytest.approx(
            float(np.percentile(pts, 100 * p)), rel=1e-12, abs=1e-12
        )


# ---------------------------------------------------------------------------
# Hermite polynomials and kernel derivatives
# ---------------------------------------------------------------------------


class TestHermite:
    def test_base_cases(self):
        assert hermite(0, 7.3) == 1.0
        assert hermite(1, 2.0) == 4.0

    def test_order_three(self):
        # H_3(x) = 8x^3 - 12x
        assert hermite(3, 1.0) == -4.0

    @pytest.mark.parametrize("x", [-1.7, 0.0, 0.4, 2.2])
    def test_against_explicit_polynomials(self, x):
        assert hermite(2, x) == pytest.approx(4 * x**2 - 2, rel=1e-12, abs=1e-12)
        assert hermite(4, x) == pytest.approx(
            16 * x**4 - 48 * x**2 + 12, rel=1e-12, abs=1e-12
        )
        assert hermite(5, x) == pytest.approx(
            32 * x**5 - 160 * x**3 + 120 * x, rel=1e-12, abs=1e-12
        )

    def test_vectorized(self):
        xs = np.array([0.0, 1.0])
        np.testing.assert_allclose(hermite(3, xs), [0.0, -4.0])


ONE_POINT = KdeLoss(sample=EmpiricalSample((2.0,)), bandwidth=1.0, cutoff=2.0)


class TestKdeDensity:
    def test_peak_at_own_sample_point(self):
        assert kde_density(ONE_POINT, 2.0) == pytest.approx(
            1.0 / math.sqrt(2 * math.pi), rel=1e-15
        )

    def test_one_bandwidth_away(self):
        assert kde_density(ONE_POINT, 3.0) == pytest.approx(
            math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-15
        )

    def test_pinned_survey_cell(self):
        kde = KdeLoss.from_points([3, 3, 3, 2])
        assert kde_density(kde, 3.0) == pytest.approx(2.351286810693924, rel=1e-14)

    def test_normalization(self):
        kde = KdeLoss.from_points([1, 1, 2, 2, 2, 3])
        lo = 1 - 10 * kde.bandwidth
        hi = 3 + 10 * kde.bandwidth
        total, _ = quad(lambda x: kde_density(kde, x), lo, hi, limit=200)
        assert total == pytest.approx(1.0, abs=1e-8)


def _fd4(f, x, step):
    return (-f(x + 2 * step) + 8 * f(x + step) - 8 * f(x - step) + f(x - 2 * step)) / (
        12 * step
    )


class TestKdeDerivative:
    def test_order_zero_is_density(self):
        kde = KdeLoss.from_points([3, 3, 3, 2])
        for x in (1.0, 2.4, 3.0):
            assert kde_derivative(kde, 0, x) == pytest.approx(
                kde_density(kde, x), rel=1e-14
            )

    def test_symmetry_kills_first_derivative(self):
        assert kde_derivative(ONE_POINT, 1, 2.0) == 0.0

    def test_second_derivative_matches_finite_difference(self):
        kde = KdeLoss.from_points([3, 3, 3, 2])
        exact = kde_derivative(kde, 2, kde.cutoff)
        approx = _fd4(lambda t: kde_derivative(kde, 1, t), kde.cutoff, 1e-4)
        assert abs(approx - exact) / abs(exact) < 1e-6

    def test_random_orders_match_finite_differences(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            pts = rng.uniform(1.0, 3.0, size=rng.integers(2, 8))
            kde = KdeLoss(
                sample=EmpiricalSample(tuple(pts)),
                bandwidth=rng.uniform(0.2, 0.8),
                cutoff=3.0,
            )
            x = rng.uniform(1.0, 3.0)
            for k in range(1, 6):
                exact = kde_derivative(kde, k, x)
                approx = _fd4(lambda t: kde_derivative(kde, k - 1, t), x, 1e-4)
                assert abs(approx - exact) / max(abs(exact), 1e-300) < 1e-6


class TestDerivativeSequence:
    def test_depth_zero(self):
        kde = KdeLoss.from_points([3, 3, 3, 2])
        seq = derivative_sequence(kde, 0)
        assert seq.coefficients == (kde_density(kde, 3.0),)
        assert seq.depth == 0

    def test_symmetric_single_kernel(self):
        seq = derivative_sequence(ONE_POINT, 1)
        assert seq.coefficients[0] == pytest.approx(1 / math.sqrt(2 * math.pi))
        assert seq.coefficients[1] == 0.0

    def test_pinned_survey_cell_depth_four(self):
        kde = KdeLoss.from_points([3, 3, 3, 2])
        expected = (
            2.351286810693924,
            1.883801970714771e-12,
            -145.20252372071437,
            6.835100164469125e-09,
            26900.72448752858,
        )
        got = derivative_sequence(kde, 4).coefficients
        np.testing.assert_allclose(got, expected, rtol=1e-12)

    def test_alternating_signs_definition(self):
        kde = KdeLoss.from_points([1, 2, 2, 3])
        seq = derivative_sequence(kde, 3)
        for k, y in enumerate(seq.coefficients):
            assert y == pytest.approx(
                (-1.0) ** k * kde_derivative(kde, k, kde.cutoff), rel=1e-14
            )


# ---------------------------------------------------------------------------
# comparisons
# ---------------------------------------------------------------------------


def seq(*coeffs, cutoff=3.0):
    return DerivativeSequence(coefficients=coeffs, cutoff=cutoff)


class TestCompareLex:
    def test_first_entry_decides(self):
        verdict = compare_lex(seq(0.1, 0.5), seq(0.2, 0.0))
        assert verdict.is_less and verdict.depth == 0

    def test_second_entry_decides(self):
        verdict = compare_lex(seq(0.1, 0.5), seq(0.1, 0.7))
        assert verdict.is_less and verdict.depth == 1

    def test_identical_is_tie_at_depth(self):
        verdict = compare_lex(seq(0.1, 0.5), seq(0.1, 0.5))
        assert verdict.is_tie and verdict.depth == 1

    def test_tolerance_absorbs_noise(self):
        verdict = compare_lex(seq(0.1 + 1e-13, 0.5), seq(0.1, 0.9))
        assert verdict.is_less and verdict.depth == 1

    def test_mismatched_cutoff_rejected(self):
        with pytest.raises(ComparisonError):
            compare_lex(seq(0.1, cutoff=3.0), seq(0.1, cutoff=2.0))

    def test_mismatched_depth_rejected(self):
        with pytest.raises(ComparisonError):
            compare_lex(seq(0.1, 0.2), seq(0.1,))


class TestCompareCategorical:
    def test_top_rank_decides(self):
        verdict = compare_categorical(cat(0.5, 0.3, 0.2), cat(0.4, 0.3, 0.3))
        assert verdict.is_less and verdict.depth == 0

    def test_tie_at_top_decided_at_middle(self):
        # equal chance of extreme damage; the lighter middle-rank mass wins
        verdict = compare_categorical(cat(0.3, 0.2, 0.5), cat(0.1, 0.4, 0.5))
        assert verdict.is_less and verdict.depth == 1
        flipped = compare_categorical(cat(0.1, 0.4, 0.5), cat(0.3, 0.2, 0.5))
        assert flipped.is_greater and flipped.depth == 1

    def test_identical_masses_tie(self):
        verdict = compare_categorical(cat(0.3, 0.2, 0.5), cat(0.3, 0.2, 0.5))
        assert verdict.is_tie and verdict.depth == 2

    def test_scale_mismatch_rejected(self):
        other = CategoricalLoss(
            scale=RiskScale(categories=("low", "high")), mass=(0.5, 0.5)
        )
        with pytest.raises(ComparisonError):
            compare_categorical(cat(0.5, 0.3, 0.2), other)


class TestCompareDetVsRandom:
    def test_constant_above_support_prefers_random(self):
        kde = KdeLoss.from_points([1, 2, 3])
        assert compare_det_vs_random(5.0, kde).is_greater

    def test_constant_inside_support_prefers_constant(self):
        kde = KdeLoss.from_points([1, 2, 3])
        assert compare_det_vs_random(2.0, kde).is_less

    def test_boundary_prefers_random(self):
        kde = KdeLoss.from_points([1, 2, 3])
        assert compare_det_vs_random(3.0, kde).is_greater

    def test_categorical_support_end(self):
        loss = cat(0.5, 0.5, 0.0)  # support [1, 2]
        assert compare_det_vs_random(2.0, loss).is_greater
        assert compare_det_vs_random(1.5, loss).is_less

    def test_degenerate_random_loss_compares_values(self):
        point = cat(0.0, 1.0, 0.0)  # all mass on rank 2
        assert compare_det_vs_random(1.0, point).is_less
        assert compare_det_vs_random(3.0, point).is_greater
        assert compare_det_vs_random(2.0, point).is_tie

    def test_constant_below_one_rejected(self):
        with pytest.raises(ValueError):
            compare_det_vs_random(0.5, cat(0.5, 0.3, 0.2))


class TestSelectBest:
    def test_single_element(self):
        assert select_best([cat(0.5, 0.3, 0.2)]) == 0

    def test_categorical_least_top_mass(self):
        choices = [cat(0.5, 0.3, 0.2), cat(0.4, 0.3, 0.3), cat(0.2, 0.3, 0.5)]
        assert select_best(choices) == 0

    def test_kde_triple_with_moment_cross_check(self):
        kdes = [
            KdeLoss.from_points(pts, cutoff=3.0)
            for pts in ([1, 1, 2], [2, 2, 3], [3, 3, 3])
        ]
        assert select_best(kdes) == 0
        # Def. 2 oracle: eventual moment order equals the lexicographic order
        big = [moment(k, 40) for k in kdes]
        assert big[0] == min(big)
        order_by_moment = sorted(range(3), key=big.__getitem__)
        for a, b in zip(order_by_moment, order_by_moment[1:]):
            assert compare_losses(kdes[a], kdes[b]).is_less

    def test_ties_keep_lowest_index(self):
        a, b = cat(0.5, 0.3, 0.2), cat(0.5, 0.3, 0.2)
        assert select_best([a, b]) == 0

    def test_mixed_kinds_rejected(self):
        with pytest.raises(ComparisonError):
            select_best([cat(0.5, 0.3, 0.2), KdeLoss.from_points([1, 2, 3])])

    def test_deterministic_among_kdes(self):
        kde = KdeLoss.from_points([1, 2, 3])
        assert select_best([DeterministicLoss(2.0), kde]) == 0
        assert select_best([DeterministicLoss(3.0), kde]) == 1


class TestPointMassMixtures:
    def test_single_valued_mixture_acts_as_constant(self):
        merged = MixtureLoss(
            components=((0.4, DeterministicLoss(2.0)), (0.6, DeterministicLoss(2.0)))
        )
        assert compare_losses(merged, DeterministicLoss(3.0)).is_less
        assert compare_losses(merged, KdeLoss.from_points([1, 2, 3])).is_less

    def test_spread_mixture_vs_constant_uses_support_rule(self):
        spread = MixtureLoss(
            components=((0.5, DeterministicLoss(1.5)), (0.5, DeterministicLoss(2.5)))
        )
        assert compare_losses(DeterministicLoss(2.0), spread).is_less
        assert compare_losses(DeterministicLoss(3.0), spread).is_greater

    def test_spread_mixture_vs_kde_needs_smoothing(self):
        spread = MixtureLoss(
            components=((0.5, DeterministicLoss(1.5)), (0.5, DeterministicLoss(2.5)))
        )
        with pytest.raises(ComparisonError, match="smoothing"):
            compare_losses(spread, KdeLoss.from_points([1, 2, 3]))


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------


class TestMoment:
    def test_deterministic(self):
        assert moment(DeterministicLoss(2.5), 3) == pytest.approx(2.5**3)

    def test_order_below_one_rejected(self):
        with pytest.raises(ValueError):
            moment(DeterministicLoss(2.5), 0)

    def test_categorical_expectation(self):
        two = RiskScale(categories=("lo", "hi"))
        loss = CategoricalLoss(scale=two, mass=(0.5, 0.5))
        assert moment(loss, 1) == pytest.approx(1.5)

    def test_pinned_kde_second_moment(self):
        kde = KdeLoss.from_points([3, 3, 3, 2])
        assert moment(kde, 2) == pytest.approx(4.15667222629597, abs=1e-8)

    def test_mixture_linearity(self):
        a = KdeLoss.from_points([1, 1, 2], cutoff=3.0)
        b = KdeLoss.from_points([2, 3, 3], cutoff=3.0)
        mix = MixtureLoss(components=((0.25, a), (0.75, b)))
        assert moment(mix, 2) == pytest.approx(
            0.25 * moment(a, 2) + 0.75 * moment(b, 2), rel=1e-12
        )


class TestZeroDayMass:
    def test_single_sample_is_exactly_half(self):
        kde = KdeLoss(sample=EmpiricalSample((2.0,)), bandwidth=0.4, cutoff=2.0)
        assert abs(zero_day_mass(kde) - 0.5) <= 1e-12

    def test_two_equal_samples(self):
        kde = KdeLoss(sample=EmpiricalSample((2.0, 2.0)), bandwidth=0.4, cutoff=2.0)
        assert abs(zero_day_mass(kde) - 0.5) <= 1e-12

    def test_pinned_survey_cell(self):
        kde = KdeLoss.from_points([3, 3, 3, 2])
        assert zero_day_mass(kde) == pytest.approx(0.375, abs=1e-12)

    def test_monotone_in_threshold_and_bounded(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            pts = rng.uniform(1.0, 3.0, size=rng.integers(2, 7))
            kde = KdeLoss(
                sample=EmpiricalSample(tuple(pts)),
                bandwidth=rng.uniform(0.1, 0.9),
                cutoff=3.5,
            )
            zs = np.linspace(1.0, 4.0, 25)
            masses = [upper_tail_mass(kde, z) for z in zs]
            assert all(a >= b - 1e-15 for a, b in zip(masses, masses[1:]))
            zdm = zero_day_mass(kde)
            assert 0.0 < zdm <= 0.5


class TestCdfAndSupport:
    def test_kde_cdf_tends_to_one(self):
        kde = KdeLoss.from_points([1, 2, 3])
        assert cdf(kde, 3 + 20 * kde.bandwidth) == pytest.approx(1.0, abs=1e-12)

    def test_categorical_cdf_steps(self):
        loss = cat(0.2, 0.3, 0.5)
        assert cdf(loss, 0.5) == 0.0
        assert cdf(loss, 1.0) == pytest.approx(0.2)
        assert cdf(loss, 2.7) == pytest.approx(0.5)
        assert cdf(loss, 3.0) == pytest.approx(1.0)

    def test_support_upper(self):
        assert support_upper(cat(0.5, 0.5, 0.0)) == 2.0
        assert support_upper(DeterministicLoss(4.0)) == 4.0
        assert support_upper(KdeLoss.from_points([1, 2], cutoff=5.0)) == 5.0


# ---------------------------------------------------------------------------
# order laws and scale invariance
# ---------------------------------------------------------------------------


def _random_mass(rng):
    raw = rng.dirichlet((1.0, 1.0, 1.0))
    return tuple(float(v) for v in raw)


class TestOrderLaws:
    def test_categorical_totality_and_antisymmetry(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            a, b = cat(*_random_mass(rng)), cat(*_random_mass(rng))
            ab, ba = compare_categorical(a, b), compare_categorical(b, a)
            assert ab.relation in ("less", "greater", "tie")
            if ab.is_tie:
                assert ba.is_tie
            else:
                assert ba.relation == ("greater" if ab.is_less else "less")

    def test_categorical_transitivity(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            a, b, c = (cat(*_random_mass(rng)) for _ in range(3))
            trio = [a, b, c]
            trio.sort(key=lambda x: sum(compare_categorical(x, y).is_less for y in trio), reverse=True)
            x, y, z = trio
            if compare_categorical(x, y).is_less and compare_categorical(y, z).is_less:
                assert compare_categorical(x, z).is_less


@given(
    coeffs_a=st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    coeffs_b=st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    scale=st.floats(0.1, 10.0),
)
@settings(max_examples=200, deadline=None)
def test_scale_invariance_of_lex_verdict(coeffs_a, coeffs_b, scale):
    diffs = [abs(x - y) for x, y in zip(coeffs_a, coeffs_b)]
    assume(all(d == 0.0 or d > 1e-6 for d in diffs))
    base = compare_lex(seq(*coeffs_a), seq(*coeffs_b))
    scaled = compare_lex(
        seq(*(scale * c for c in coeffs_a)), seq(*(scale * c for c in coeffs_b))
    )
    assert scaled.relation == base.relation


@given(st.floats(1.0, 8.0), st.floats(1.0, 8.0))
@settings(max_examples=100, deadline=None)
def test_deterministic_comparison_is_value_order(u, v):
    verdict = compare_losses(DeterministicLoss(u), DeterministicLoss(v))
    if abs(u - v) <= 1e-12:
        assert verdict.is_tie
    elif u < v:
        assert verdict.is_less
    else:
        assert verdict.is_greater


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


class TestValidation:
    def test_sample_below_one_rejected(self):
        with pytest.raises(ValueError):
            EmpiricalSample((0.5, 2.0))

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            EmpiricalSample(())

    def test_masses_must_sum_to_one(self):
        with pytest.raises(ValueError):
            cat(0.5, 0.3, 0.3)

    def test_scale_needs_two_categories(self):
        with pytest.raises(ValueError):
            RiskScale(categories=("only",))

    def test_bandwidth_positive(self):
        with pytest.raises(ValueError):
            KdeLoss(sample=EmpiricalSample((2.0,)), bandwidth=0.0, cutoff=2.0)

    def test_cutoff_above_one(self):
        with pytest.raises(ValueError):
            KdeLoss(sample=EmpiricalSample((1.0,)), bandwidth=0.5, cutoff=1.0)

    def test_deterministic_below_one_rejected(self):
        with pytest.raises(ValueError):
            DeterministicLoss(0.2)

    def test_default_cutoff_is_sample_max(self):
        kde = KdeLoss.from_points([1, 2, 2.5])
        assert kde.cutoff == 2.5
