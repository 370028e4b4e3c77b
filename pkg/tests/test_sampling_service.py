"""Tests for the pair analysis, the Monte Carlo estimator and the disjoint-pair sampler."""
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.services.degseq_service import DegreeSequence, tree_sequences
from app.services.errors import DomainError, InfeasibleError, ResourceGuardError
from app.services.packing_service import common_edges
from app.services.sampling_service import (
    analyze_pair,
    common_edge_total,
    disjoint_probability,
    empirical_distribution,
    enumerate_disjoint_pairs,
    estimate_disjoint_count,
    exact_disjoint_count,
    expected_common_general,
    required_samples,
    sample_disjoint_pair,
    sample_disjoint_pair_outcome,
    tv_distance,
)
from app.services.tree_service import count_trees, random_tree

PATHS = (DegreeSequence.of([2, 2, 1, 1]), DegreeSequence.of([1, 1, 2, 2]))
SEVEN = (DegreeSequence.of([4, 3, 1, 1, 1, 1, 1]), DegreeSequence.of([1, 1, 3, 3, 2, 1, 1]))


def seq(*values):
    return DegreeSequence.of(values)


def complementary_pairs(n):
    sequences = list(tree_sequences(n))
    for first, second in product(sequences, repeat=2):
        if all(min(a, b) == 1 for a, b in zip(first.degrees, second.degrees)):
            yield first, second


def nonstar(first, second):
    n = first.n
    return max(first.degrees) < n - 1 and max(second.degrees) < n - 1


class TestAnalyzePair:
    def test_paths(self):
        analysis = analyze_pair(*PATHS)
        assert analysis.a == {1, 2}
        assert analysis.b == {3, 4}
        assert analysis.expected_common == 1
        assert analysis.p_lower == Fraction(1, 4)

    def test_stars(self):
        analysis = analyze_pair(seq(3, 1, 1, 1), seq(1, 3, 1, 1))
        assert analysis.expected_common == 1
        assert analysis.p_lower == 0

    def test_shared_hubs_give_empty_sum(self):
        analysis = analyze_pair(seq(2, 2, 1, 1), seq(2, 2, 1, 1))
        assert analysis.a == analysis.b == frozenset()
        assert analysis.expected_common == 0

    def test_rejects_small_n(self):
        with pytest.raises(DomainError):
            analyze_pair(seq(2, 1, 1), seq(1, 2, 1))

    @pytest.mark.parametrize("n", range(4, 8))
    def test_expected_common_is_one(self, n):
        for first, second in complementary_pairs(n):
            assert analyze_pair(first, second).expected_common == 1

    @pytest.mark.slow
    def test_expected_common_is_one_eight(self):
        for first, second in complementary_pairs(8):
            assert analyze_pair(first, second).expected_common == 1


class TestExpectedCommon:
    @pytest.mark.parametrize(
        "d, f, expected",
        [
            ((2, 1, 1), (2, 1, 1), 2),
            ((2, 2, 1, 1), (1, 1, 2, 2), 1),
            ((3, 1, 1, 1), (1, 3, 1, 1), 1),
        ],
    )
    def test_examples(self, d, f, expected):
        assert expected_common_general(seq(*d), seq(*f)) == expected

    @settings(max_examples=80, deadline=None)
    @given(st.integers(min_value=3, max_value=6).flatmap(
        lambda n: st.tuples(st.sampled_from(list(tree_sequences(n))), st.sampled_from(list(tree_sequences(n))))
    ))
    def test_matches_enumeration(self, pair):
        first, second = pair
        total = expected_common_general(first, second) * count_trees(first) * count_trees(second)
        assert total == common_edge_total(first, second)

    @pytest.mark.slow
    @pytest.mark.parametrize("pair", [PATHS, SEVEN, (seq(3, 2, 2, 1, 1, 1), seq(2, 2, 1, 2, 1, 2))])
    def test_monte_carlo_mean(self, pair):
        first, second = pair
        rng = np.random.default_rng(99)
        draws = 100_000
        shared = sum(len(common_edges(random_tree(first, rng), random_tree(second, rng))) for _ in range(draws))
        assert abs(shared / draws - float(expected_common_general(first, second))) <= 0.03


class TestRequiredSamples:
    @pytest.mark.parametrize(
        "p, epsilon, delta, expected",
        [
            (Fraction(1, 2), 0.1, 0.05, 1476),
            (Fraction(1, 4), 0.2, 0.1, 1798),
            (Fraction(1), 0.1, 0.05, 738),
        ],
    )
    def test_values(self, p, epsilon, delta, expected):
        assert required_samples(p, epsilon, delta) == expected

    @pytest.mark.parametrize(
        "p, epsilon, delta",
        [(Fraction(0), 0.1, 0.1), (Fraction(3, 2), 0.1, 0.1), (Fraction(1, 2), 0, 0.1), (Fraction(1, 2), 0.1, 1)],
    )
    def test_out_of_range(self, p, epsilon, delta):
        with pytest.raises(DomainError):
            required_samples(p, epsilon, delta)


class TestExactCount:
    @pytest.mark.parametrize(
        "d, f, expected",
        [
            ((2, 2, 1, 1), (1, 1, 2, 2), 2),
            ((2, 1, 1), (2, 1, 1), 0),
            ((3, 1, 1, 1), (1, 3, 1, 1), 0),
        ],
    )
    def test_examples(self, d, f, expected):
        assert exact_disjoint_count(seq(*d), seq(*f)) == expected

    def test_guard(self):
        star = DegreeSequence.of([8] + [1] * 8)
        with pytest.raises(ResourceGuardError):
            exact_disjoint_count(star, star)
        assert exact_disjoint_count(star, star, guard_n=9) == 0

    def test_enumeration_matches_count(self):
        pairs = list(enumerate_disjoint_pairs(*SEVEN))
        assert len(pairs) == exact_disjoint_count(*SEVEN)
        assert all(not left.edges & right.edges for left, right in pairs)

    @pytest.mark.parametrize("n", [4, 5, 6])
    def test_p_lower_is_a_lower_bound(self, n):
        for first, second in complementary_pairs(n):
            if nonstar(first, second):
                assert disjoint_probability(first, second) >= analyze_pair(first, second).p_lower

    @pytest.mark.slow
    def test_p_lower_is_a_lower_bound_seven(self):
        for first, second in complementary_pairs(7):
            if nonstar(first, second):
                assert disjoint_probability(first, second) >= analyze_pair(first, second).p_lower


class TestEstimate:
    def test_paths(self):
        report = estimate_disjoint_count(*PATHS, epsilon=0.2, delta=0.1, seed=7)
        assert report.samples_used == 1798
        assert report.count_estimate == report.p_hat * 4
        assert Fraction(2) / Fraction(6, 5) <= report.count_estimate <= Fraction(12, 5)
        assert (report.seed, report.workers, report.batch_size) == (7, 1, 4096)

    def test_deterministic(self):
        first = estimate_disjoint_count(*PATHS, epsilon=0.2, delta=0.1, seed=11)
        second = estimate_disjoint_count(*PATHS, epsilon=0.2, delta=0.1, seed=11)
        assert first == second

    def test_worker_count_does_not_change_hits(self):
        single = estimate_disjoint_count(*PATHS, epsilon=0.2, delta=0.1, seed=5, workers=1, batch_size=300)
        pooled = estimate_disjoint_count(*PATHS, epsilon=0.2, delta=0.1, seed=5, workers=2, batch_size=300)
        assert single.hits == pooled.hits
        assert pooled.workers == 2

    def test_star_is_a_domain_error(self):
        with pytest.raises(DomainError):
            estimate_disjoint_count(seq(4, 1, 1, 1, 1), seq(1, 2, 2, 2, 1), epsilon=0.1, delta=0.1, seed=0)

    def test_shared_hub_is_a_domain_error(self):
        with pytest.raises(DomainError):
            estimate_disjoint_count(seq(2, 2, 1, 1), seq(2, 1, 2, 1), epsilon=0.1, delta=0.1, seed=0)

    @pytest.mark.slow
    def test_seven_vertices_within_factor(self):
        truth = exact_disjoint_count(*SEVEN)
        report = estimate_disjoint_count(*SEVEN, epsilon=0.25, delta=0.1, seed=3)
        assert truth / 1.25 <= report.count_estimate <= truth * 1.25

    @pytest.mark.slow
    @pytest.mark.parametrize("pair", [PATHS, SEVEN], ids=["paths", "seven"])
    def test_twenty_runs_mostly_within_factor(self, pair):
        truth = exact_disjoint_count(*pair)
        estimates = [
            estimate_disjoint_count(*pair, epsilon=0.2, delta=0.1, seed=seed).count_estimate for seed in range(20)
        ]
        assert sum(truth / 1.2 <= estimate <= truth * 1.2 for estimate in estimates) >= 18


class TestSample:
    def test_star_is_infeasible(self):
        with pytest.raises(InfeasibleError):
            sample_disjoint_pair(seq(4, 1, 1, 1, 1), seq(1, 2, 2, 2, 1), epsilon=0.1, seed=0)

    def test_outcome_reports_attempts(self):
        outcome = sample_disjoint_pair_outcome(*PATHS, epsilon=0.01, seed=4)
        assert outcome.budget == 19
        assert 1 <= outcome.attempts
        assert outcome.fallback == (outcome.attempts > outcome.budget)

    def test_same_seed_same_pair(self):
        assert sample_disjoint_pair(*SEVEN, epsilon=0.05, seed=8) == sample_disjoint_pair(*SEVEN, epsilon=0.05, seed=8)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32))
    def test_output_is_disjoint_realization(self, seed):
        left, right = sample_disjoint_pair(*SEVEN, epsilon=0.1, seed=seed)
        assert left.degrees() == list(SEVEN[0].degrees)
        assert right.degrees() == list(SEVEN[1].degrees)
        assert not left.edges & right.edges

    def test_close_to_uniform_on_paths(self):
        support = list(enumerate_disjoint_pairs(*PATHS))
        assert len(support) == 2
        rng = np.random.default_rng(12)
        samples = [sample_disjoint_pair(*PATHS, epsilon=0.01, seed=rng) for _ in range(10_000)]
        uniform = [1 / len(support)] * len(support)
        assert tv_distance(empirical_distribution(samples, support), uniform) <= 0.05

    @pytest.mark.slow
    def test_close_to_uniform_on_seven_vertices(self):
        support = list(enumerate_disjoint_pairs(*SEVEN))
        rng = np.random.default_rng(13)
        samples = [sample_disjoint_pair(*SEVEN, epsilon=0.05, seed=rng) for _ in range(10000)]
        uniform = [1 / len(support)] * len(support)
        assert tv_distance(empirical_distribution(samples, support), uniform) <= 0.05


class TestDistributions:
    def test_tv_examples(self):
        assert tv_distance([0.5, 0.5], [0.5, 0.5]) == 0
        assert tv_distance([1, 0], [0, 1]) == 1
        assert tv_distance([0.75, 0.25], [0.5, 0.5]) == pytest.approx(0.25)

    @pytest.mark.parametrize(
        "p, q",
        [
            ([0.5, 0.6], [0.5, 0.5]),
            ([1.0], [0.5, 0.5]),
            ([1.5, -0.5], [0.5, 0.5]),
            ([float("nan"), 1.0], [0.5, 0.5]),
            ([0.5, 0.5], [float("inf"), 0.0]),
        ],
    )
    def test_tv_rejects_bad_input(self, p, q):
        with pytest.raises(DomainError):
            tv_distance(p, q)

    def test_empirical_distribution(self):
        assert empirical_distribution(["a", "b", "a", "a"], ["a", "b", "c"]) == [0.75, 0.25, 0.0]
        with pytest.raises(DomainError):
            empirical_distribution(["z"], ["a"])
        with pytest.raises(DomainError):
            empirical_distribution([], ["a"])
