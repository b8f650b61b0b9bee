import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairtrees.metrics import (
    CurveMetrics,
    TradeoffCurve,
    TradeoffPoint,
    auroc,
    autoc,
    curve_metrics,
    pareto_count,
    pareto_mask,
    spd,
    unique_count,
    unique_pareto_count,
    variance_pairwise,
    welch_t_test,
)
from oracles import (
    oracle_auroc,
    oracle_autoc,
    oracle_pareto_flags,
    oracle_unique_count,
    oracle_unique_pareto_count,
    oracle_variance_pairwise,
    oracle_welch_p,
)


def curve_from(aurocs, spds, method="test"):
    points = tuple(
        TradeoffPoint(gamma=float(i), auroc=float(a), spd=float(v))
        for i, (a, v) in enumerate(zip(aurocs, spds))
    )
    return TradeoffCurve(method=method, points=points)


def random_curve(rng, n=None, lo=0.5):
    n = n or int(rng.integers(1, 51))
    aurocs = rng.uniform(lo, 1.0, n)
    spds = rng.uniform(0.0, 1.0, n)
    return curve_from(aurocs, spds)


class TestAuroc:
    def test_perfect_ranking(self):
        assert auroc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_all_ties(self):
        assert auroc([0.5, 0.5, 0.5, 0.5], [0, 1, 0, 1]) == 0.5

    def test_four_point_example(self):
        assert auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

    def test_single_class_degenerate(self):
        assert auroc([0.1, 0.9], [1, 1]) == 0.5

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            auroc([0.1], [0, 1])

    def test_matches_pairwise_oracle(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 40))
            scores = np.round(rng.uniform(0, 1, n), 2)  # rounding forces ties
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                continue
            assert auroc(scores, labels) == pytest.approx(
                oracle_auroc(scores.tolist(), labels.tolist()), abs=1e-12
            )

    def test_monotone_transform_invariance(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 50))
            scores = rng.uniform(0, 1, n)
            labels = rng.integers(0, 2, n)
            base = auroc(scores, labels)
            assert auroc(2.0 * scores + 1.0, labels) == base
            assert auroc(np.exp(scores), labels) == base


class TestSpd:
    def test_equal_rates(self):
        assert spd([1, 0, 1, 0], [0, 0, 1, 1]) == 0.0

    def test_extreme_gap(self):
        assert spd([1, 1, 0, 0], [0, 0, 1, 1]) == 1.0

    def test_half_gap_example(self):
        assert spd([1, 1, 0, 1], [0, 0, 1, 1]) == pytest.approx(0.5)

    def test_empty_group_degenerate(self):
        assert spd([1, 0, 1], [1, 1, 1]) == 0.0

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=40))
    @settings(max_examples=60, deadline=None)
    def test_group_relabel_symmetry(self, pairs):
        preds = [p for p, _ in pairs]
        groups = [g for _, g in pairs]
        flipped = [1 - g for g in groups]
        assert spd(preds, groups) == pytest.approx(spd(preds, flipped), abs=1e-12)


class TestAutoc:
    def test_single_point_spd_zero(self):
        assert autoc(curve_from([0.75], [0.0])) == pytest.approx(0.5, abs=1e-15)

    def test_flat_at_chance(self):
        curve = curve_from([0.5] * 5, [0.0] * 5)
        assert autoc(curve) == pytest.approx(0.5, abs=1e-15)

    def test_two_point_hand_value(self):
        curve = curve_from([0.6, 0.8], [0.1, 0.3])
        assert autoc(curve) == pytest.approx(0.39, abs=1e-12)

    def test_matches_oracle(self, rng):
        for _ in range(50):
            curve = random_curve(rng)
            expected = oracle_autoc(
                [p.auroc for p in curve.points], [p.spd for p in curve.points]
            )
            assert autoc(curve) == pytest.approx(expected, abs=1e-12)

    def test_range_bound(self, rng):
        for _ in range(50):
            curve = random_curve(rng)  # AUROC >= 0.5 domain per construction
            value = autoc(curve)
            assert 0.0 <= value <= 0.5 + 1e-12

    def test_duplication_invariance(self, rng):
        aurocs = rng.uniform(0.5, 1.0, 7)
        spds = rng.uniform(0, 1, 7)
        once = autoc(curve_from(aurocs, spds))
        doubled = autoc(curve_from(np.tile(aurocs, 2), np.tile(spds, 2)))
        assert doubled == pytest.approx(once, abs=1e-12)


class TestPareto:
    def test_identical_points_all_pareto(self):
        curve = curve_from([0.7] * 50, [0.2] * 50)
        assert pareto_count(curve) == 50

    def test_chain_all_pareto(self):
        aurocs = np.linspace(0.5, 0.9, 10)
        spds = np.linspace(0.1, 0.5, 10)  # 1-spd decreasing as auroc increases
        assert pareto_count(curve_from(aurocs, spds)) == 10

    def test_matches_oracle(self, rng):
        for _ in range(40):
            curve = random_curve(rng)
            flags = oracle_pareto_flags(
                [p.auroc for p in curve.points], [p.spd for p in curve.points]
            )
            assert pareto_mask(curve).tolist() == flags

    def test_permutation_invariant_membership(self, rng):
        aurocs = rng.uniform(0.5, 1, 12)
        spds = rng.uniform(0, 1, 12)
        base = pareto_mask(curve_from(aurocs, spds))
        perm = rng.permutation(12)
        shuffled = pareto_mask(curve_from(aurocs[perm], spds[perm]))
        assert shuffled.tolist() == base[perm].tolist()


class TestUnique:
    def test_all_identical(self):
        assert unique_count(curve_from([0.6] * 9, [0.1] * 9)) == 1

    def test_all_distinct(self, rng):
        aurocs = np.linspace(0.5, 1.0, 20)
        spds = np.linspace(0.0, 0.9, 20)
        assert unique_count(curve_from(aurocs, spds)) == 20

    def test_tiny_differences_collapse(self):
        curve = curve_from([0.6, 0.6 + 1e-9], [0.1, 0.1 - 1e-9])
        assert unique_count(curve) == 1

    def test_unique_pareto_composed(self, rng):
        for _ in range(40):
            curve = random_curve(rng)
            aurocs = [p.auroc for p in curve.points]
            spds = [p.spd for p in curve.points]
            assert unique_count(curve) == oracle_unique_count(aurocs, spds)
            assert unique_pareto_count(curve) == oracle_unique_pareto_count(aurocs, spds)

    def test_order_relations(self, rng):
        for _ in range(30):
            curve = random_curve(rng)
            u = unique_count(curve)
            p = pareto_count(curve)
            up = unique_pareto_count(curve)
            assert up <= min(u, p)
            assert u <= len(curve.points)


class TestVariancePairwise:
    def test_identical_points(self):
        assert variance_pairwise(curve_from([0.7] * 5, [0.3] * 5)) == 0.0

    def test_two_points(self):
        assert variance_pairwise(curve_from([0.6, 0.9], [0.1, 0.4])) == pytest.approx(0.0)

    def test_three_collinear_equally_spaced(self):
        d = 0.1 * np.sqrt(2.0)
        curve = curve_from([0.5, 0.6, 0.7], [0.0, 0.1, 0.2])
        assert variance_pairwise(curve) == pytest.approx(2 * d * d / 9, abs=1e-12)

    def test_matches_oracle(self, rng):
        for _ in range(30):
            curve = random_curve(rng)
            expected = oracle_variance_pairwise(
                [p.auroc for p in curve.points], [p.spd for p in curve.points]
            )
            assert variance_pairwise(curve) == pytest.approx(expected, abs=1e-12)


class TestWelch:
    def test_identical_samples(self):
        assert welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0

    def test_separated_samples(self, rng):
        a = rng.normal(0.0, 0.1, 15)
        b = rng.normal(10.0, 0.1, 15)
        assert welch_t_test(a, b) < 1e-6

    def test_matches_incomplete_beta_oracle(self):
        a = [0.41, 0.44, 0.40, 0.43, 0.45, 0.42]
        b = [0.39, 0.40, 0.41, 0.38, 0.42, 0.37]
        assert welch_t_test(a, b) == pytest.approx(oracle_welch_p(a, b), abs=1e-10)

    def test_oracle_agreement_random(self, rng):
        for _ in range(20):
            a = rng.normal(0, 1, int(rng.integers(2, 20))).tolist()
            b = rng.normal(0.5, 2, int(rng.integers(2, 20))).tolist()
            assert welch_t_test(a, b) == pytest.approx(oracle_welch_p(a, b), abs=1e-9)

    def test_zero_variance_guard(self):
        assert welch_t_test([2.0, 2.0], [2.0, 2.0]) == 1.0
        assert welch_t_test([2.0, 2.0], [3.0, 3.0]) == 0.0

    def test_short_samples_rejected(self):
        with pytest.raises(ValueError):
            welch_t_test([1.0], [1.0, 2.0])


class TestCurveTypes:
    def test_gammas_must_increase(self):
        with pytest.raises(ValueError):
            TradeoffCurve(
                method="m",
                points=(
                    TradeoffPoint(0.5, 0.6, 0.1),
                    TradeoffPoint(0.5, 0.7, 0.2),
                ),
            )

    def test_metrics_bundle(self, rng):
        curve = random_curve(rng, n=20)
        m = curve_metrics(curve)
        assert isinstance(m, CurveMetrics)
        assert m.autoc == autoc(curve)
        assert m.pareto_points == pareto_count(curve)
        assert m.unique_points == unique_count(curve)
        assert m.unique_pareto_points == unique_pareto_count(curve)
        assert m.distance_variance == variance_pairwise(curve)
