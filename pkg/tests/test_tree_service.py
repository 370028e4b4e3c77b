"""Tests for Prüfer coding, tree counting, enumeration and uniform generation."""
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from app.services.degseq_service import DegreeSequence, tree_sequences
from app.services.errors import DomainError, ResourceGuardError, StructureError
from app.services.tree_service import (
    LabeledTree,
    PruferCode,
    count_trees,
    count_trees_with_edge,
    edge_index,
    edge_mask,
    edge_probability,
    enumerate_caterpillars,
    enumerate_trees,
    is_caterpillar,
    list_trees,
    prufer_decode,
    prufer_encode,
    random_tree,
    random_tree_by_leaf_attachment,
)

SPIDER = DegreeSequence.of([5, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1])


def seq(*values):
    return DegreeSequence.of(values)


def tree(n, *edges):
    return LabeledTree.from_edges(n, edges)


@st.composite
def tree_degree_sequences(draw, min_n=2, max_n=9):
    """Tree sequences built by handing the n - 2 surplus degrees to random vertices."""
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    extra = draw(st.lists(st.integers(min_value=0, max_value=n - 1), min_size=n - 2, max_size=n - 2))
    counts = Counter(extra)
    return DegreeSequence(tuple(1 + counts[v] for v in range(n)))


class TestPrufer:
    def test_decode(self):
        assert prufer_decode(PruferCode(4, (1, 2))).edges == {(1, 3), (1, 2), (2, 4)}
        assert prufer_decode(PruferCode(2, ())).edges == {(1, 2)}
        assert prufer_decode(PruferCode(4, (1, 1))).edges == {(1, 2), (1, 3), (1, 4)}

    def test_encode(self):
        assert prufer_encode(tree(4, (3, 1), (1, 2), (2, 4))).code == (1, 2)
        assert prufer_encode(tree(2, (1, 2))).code == ()
        assert prufer_encode(tree(4, (1, 2), (1, 3), (1, 4))).code == (1, 1)

    @pytest.mark.parametrize("n, code", [(4, (1,)), (4, (1, 5)), (1, ())])
    def test_invalid_codes(self, n, code):
        with pytest.raises(DomainError):
            PruferCode(n, code)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=2, max_value=12).flatmap(
        lambda n: st.tuples(st.just(n), st.lists(st.integers(1, n), min_size=n - 2, max_size=n - 2))
    ))
    def test_decoded_tree_encodes_back(self, case):
        n, code = case
        decoded = prufer_decode(PruferCode(n, tuple(code)))
        assert prufer_encode(decoded).code == tuple(code)
        assert decoded.degrees() == [1 + code.count(v) for v in range(1, n + 1)]


class TestLabeledTree:
    def test_text_form(self):
        path = tree(4, (3, 1), (1, 2), (2, 4))
        assert path.to_text() == "n=4\n1 2\n1 3\n2 4"
        assert LabeledTree.parse(path.to_text()) == path

    def test_rejects_wrong_edge_count(self):
        with pytest.raises(StructureError):
            LabeledTree(4, frozenset({(1, 2), (2, 3)}))

    def test_rejects_cycle(self):
        with pytest.raises(StructureError):
            tree(4, (1, 2), (2, 3), (1, 3))

    def test_direct_construction_checks_connectivity(self):
        with pytest.raises(StructureError):
            LabeledTree(4, frozenset({(1, 2), (2, 3), (1, 3)}))

    def test_rejects_bad_text(self):
        with pytest.raises(StructureError):
            LabeledTree.parse("1 2\n2 3")

    def test_degree_sequence(self):
        assert tree(4, (1, 2), (1, 3), (1, 4)).degree_sequence() == seq(3, 1, 1, 1)


class TestCounting:
    @pytest.mark.parametrize(
        "degrees, expected",
        [((2, 2, 1, 1), 2), ((3, 1, 1, 1), 1), ((2, 2, 2, 1, 1), 6), ((1, 1), 1)],
    )
    def test_count_trees(self, degrees, expected):
        assert count_trees(seq(*degrees)) == expected

    def test_count_spider(self):
        assert count_trees(SPIDER) == 15120

    def test_count_rejects_non_tree(self):
        with pytest.raises(DomainError):
            count_trees(seq(2, 2, 2))

    @pytest.mark.parametrize(
        "degrees, i, j, expected",
        [
            ((2, 2, 1, 1), 1, 2, Fraction(1)),
            ((2, 2, 2, 1, 1), 4, 5, Fraction(0)),
            ((2, 2, 2, 1, 1), 1, 2, Fraction(2, 3)),
        ],
    )
    def test_edge_probability(self, degrees, i, j, expected):
        assert edge_probability(seq(*degrees), i, j) == expected

    def test_edge_probability_preconditions(self):
        with pytest.raises(DomainError):
            edge_probability(seq(2, 2, 1, 1), 1, 1)
        with pytest.raises(DomainError):
            edge_probability(seq(2, 2, 1, 1), 1, 5)
        with pytest.raises(DomainError):
            count_trees_with_edge(seq(1, 1), 1, 2)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_counts_match_enumeration(self, n):
        for sequence in tree_sequences(n):
            trees = list(enumerate_trees(sequence))
            assert len(trees) == count_trees(sequence)
            assert len(set(trees)) == len(trees)
            assert all(t.degrees() == list(sequence.degrees) for t in trees)

    @pytest.mark.parametrize("n", range(3, 7))
    def test_edge_probability_matches_enumeration(self, n):
        for sequence in tree_sequences(n):
            trees = list(enumerate_trees(sequence))
            frequency = Counter(edge for t in trees for edge in t.edges)
            total = Fraction(0)
            for i, j in edge_index(n):
                p = edge_probability(sequence, i, j)
                assert p == Fraction(frequency[(i, j)], len(trees))
                total += p
            assert total == n - 1

    @pytest.mark.slow
    @pytest.mark.parametrize("n", [7, 8])
    def test_counts_and_edge_frequencies_large(self, n):
        for sequence in tree_sequences(n):
            trees = list(enumerate_trees(sequence))
            assert len(trees) == count_trees(sequence)
            frequency = Counter(edge for t in trees for edge in t.edges)
            for i, j in edge_index(n):
                assert edge_probability(sequence, i, j) == Fraction(frequency[(i, j)], len(trees))


class TestEnumeration:
    def test_four_vertex_paths(self):
        trees = list(enumerate_trees(seq(2, 2, 1, 1)))
        assert [t.edges for t in trees] == [{(1, 3), (1, 2), (2, 4)}, {(1, 4), (1, 2), (2, 3)}]

    def test_star_is_unique(self):
        assert [t.edges for t in enumerate_trees(seq(3, 1, 1, 1))] == [{(1, 2), (1, 3), (1, 4)}]

    def test_list_trees_guard(self):
        star = DegreeSequence.of([8] + [1] * 8)
        with pytest.raises(ResourceGuardError):
            list_trees(star)
        assert len(list_trees(star, guard_n=9)) == 1


class TestRandomTrees:
    @settings(max_examples=60, deadline=None)
    @given(tree_degree_sequences(), st.integers(min_value=0, max_value=2 ** 32))
    def test_prufer_shuffle_realizes_sequence(self, sequence, seed):
        assert random_tree(sequence, seed).degrees() == list(sequence.degrees)

    @settings(max_examples=60, deadline=None)
    @given(tree_degree_sequences(), st.integers(min_value=0, max_value=2 ** 32))
    def test_leaf_attachment_realizes_sequence(self, sequence, seed):
        assert random_tree_by_leaf_attachment(sequence, seed).degrees() == list(sequence.degrees)

    def test_same_seed_same_tree(self):
        assert random_tree(SPIDER, 42) == random_tree(SPIDER, 42)

    def test_star_has_one_realization(self):
        assert random_tree(seq(3, 1, 1, 1), 5).edges == {(1, 2), (1, 3), (1, 4)}

    def test_two_paths_equally_likely(self):
        rng = np.random.default_rng(2024)
        draws = Counter(random_tree(seq(2, 2, 1, 1), rng) for _ in range(20000))
        assert len(draws) == 2
        for count in draws.values():
            assert abs(count / 20000 - 0.5) <= 0.02

    @pytest.mark.parametrize("generator", [random_tree, random_tree_by_leaf_attachment])
    def test_uniform_over_realizations(self, generator):
        sequence = seq(3, 2, 2, 1, 1, 1)
        support = list(enumerate_trees(sequence))
        rng = np.random.default_rng(7)
        draws = Counter(generator(sequence, rng) for _ in range(len(support) * 400))
        assert set(draws) == set(support)
        _, p_value = chisquare([draws[t] for t in support])
        assert p_value > 1e-4

    @pytest.mark.slow
    @pytest.mark.parametrize("generator", [random_tree, random_tree_by_leaf_attachment])
    @pytest.mark.parametrize("degrees", [(2, 2, 1, 1), (2, 2, 2, 1, 1)])
    def test_uniform_with_many_draws(self, generator, degrees):
        sequence = seq(*degrees)
        support = list(enumerate_trees(sequence))
        rng = np.random.default_rng(2)
        draws = Counter(generator(sequence, rng) for _ in range(100_000))
        assert set(draws) == set(support)
        _, p_value = chisquare([draws[t] for t in support])
        assert p_value > 0.01


class TestCaterpillars:
    def test_examples(self):
        assert is_caterpillar(tree(4, (1, 2), (2, 3), (3, 4)))
        assert is_caterpillar(tree(4, (1, 2), (1, 3), (1, 4)))
        assert not is_caterpillar(tree(7, (1, 2), (1, 3), (1, 4), (2, 5), (3, 6), (4, 7)))

    @pytest.mark.parametrize("n", range(2, 8))
    def test_enumeration_matches_filter(self, n):
        for sequence in tree_sequences(n):
            caterpillars = list(enumerate_caterpillars(sequence))
            assert len(set(caterpillars)) == len(caterpillars)
            assert set(caterpillars) == {t for t in enumerate_trees(sequence) if is_caterpillar(t)}

    def test_spider_caterpillar_count(self):
        assert sum(1 for _ in enumerate_caterpillars(SPIDER)) == 5400


def test_edge_mask_sets_one_bit_per_edge():
    path = tree(5, (1, 2), (2, 3), (3, 4), (4, 5))
    index = edge_index(5)
    assert len(index) == 10
    assert bin(edge_mask(path, index)).count("1") == 4
    assert edge_mask(path) == edge_mask(path, index)
