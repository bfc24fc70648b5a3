"""Tests for spanning trees and convex decompositions."""

from __future__ import annotations

import random
from fractions import Fraction

import networkx as nx
import pytest

from stpath.corpus.builtin import hb_instance, hb_jb, hb_solution, unit_path
from stpath.lp import InstanceTooLargeError
from stpath.numgraph import EdgeVector, Instance, NotConnectedError, metric_completion
from stpath.trees import (
    ConvexDecomposition,
    DecompositionError,
    OutsidePolytopeError,
    SpanningTree,
    TooManyTreesError,
    decompose,
    distribution_query,
    enumerate_spanning_trees,
    expectation,
    expected_indicator,
    is_in_some_decomposition,
    matrix_tree_count,
    sample_tree,
    tree_path,
)

K4_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

# Spanning tree inside the H_b support that misses the tight set {1,2}
HB_LOOSE_TREE = ((0, 1), (0, 3), (2, 4), (3, 4), (4, 5), (5, 6), (6, 7))


class TestSpanningTree:
    """Tests for the spanning tree value type."""

    def test_rejects_cycle(self) -> None:
        """Test that a cycle plus an isolated vertex is not a tree."""
        with pytest.raises(DecompositionError):
            SpanningTree(((0, 1), (1, 2), (0, 2)), 4)

    def test_rejects_wrong_size(self) -> None:
        """Test that n-1 edges are required."""
        with pytest.raises(DecompositionError):
            SpanningTree(((0, 1),), 3)

    def test_edges_normalised(self) -> None:
        """Test that edges are sorted and normalised."""
        tree = SpanningTree(((2, 1), (1, 0)), 3)
        assert tree.edges == ((0, 1), (1, 2))
        assert str(tree) == "0-1 1-2"

    def test_jb_paths(self) -> None:
        """Test paths, degrees and crossings of J_b."""
        tree = hb_jb()
        assert tree.path(0, 7) == [0, 3, 6, 7]
        assert tree_path(tree, 0, 7) == ((0, 3), (3, 6), (6, 7))
        assert tree.degree(3) == 3
        assert tree.crossing([0]) == 1
        assert tree.cost(hb_instance()) == 10


class TestEnumeration:
    """Tests for matrix-tree counting and enumeration."""

    def test_cayley(self) -> None:
        """Test that K4 has 4^2 spanning trees."""
        assert matrix_tree_count(4, K4_EDGES) == 16
        trees = enumerate_spanning_trees(4, K4_EDGES)
        assert len(trees) == 16
        assert len(set(trees)) == 16

    def test_limit(self) -> None:
        """Test that the count is checked against the limit."""
        with pytest.raises(TooManyTreesError):
            enumerate_spanning_trees(4, K4_EDGES, limit=10)

    def test_disconnected(self) -> None:
        """Test that the edges must span V."""
        with pytest.raises(NotConnectedError):
            enumerate_spanning_trees(4, [(0, 1), (2, 3)])


class TestConvexDecomposition:
    """Tests for decomposition validation and construction."""

    def test_weights_must_sum_to_one(self) -> None:
        """Test the coefficient sum."""
        tree = SpanningTree(((0, 1), (1, 2)), 3)
        with pytest.raises(DecompositionError):
            ConvexDecomposition(((Fraction(1, 2), tree),))

    def test_repeated_trees_merge(self) -> None:
        """Test that a tree listed twice is merged."""
        tree = SpanningTree(((0, 1), (1, 2)), 3)
        dec = ConvexDecomposition(((Fraction(1, 2), tree), (Fraction(1, 2), tree)))
        assert len(dec) == 1
        assert dec.terms[0][0] == 1

    @pytest.mark.parametrize("method", ["lp", "peel", "auto"])
    def test_hb_resums(self, method: str) -> None:
        """Test that every route re-sums to x^{H_b}."""
        dec = decompose(hb_instance(), hb_solution(), method)  # type: ignore[arg-type]
        assert dec.resum() == hb_solution()
        assert sum((weight for weight, _ in dec), Fraction(0)) == 1
        for _, tree in dec:
            assert is_in_some_decomposition(hb_instance(), hb_solution(), tree).passed

    def test_integral_tree(self) -> None:
        """Test that a tree decomposes into itself."""
        inst = metric_completion(unit_path(3))
        x = EdgeVector.indicator(unit_path(3).edges)
        dec = decompose(inst, x)
        assert len(dec) == 1
        assert dec.trees[0].edges == ((0, 1), (1, 2), (2, 3))

    def test_outside_polytope(self) -> None:
        """Test that x(E) != n-1 is rejected."""
        inst = metric_completion(unit_path(2))
        x = EdgeVector({(0, 1): 1, (1, 2): 1, (0, 2): 1})
        with pytest.raises(OutsidePolytopeError):
            decompose(inst, x)

    def test_verify_detects_mismatch(self) -> None:
        """Test that verify compares against x."""
        tree = SpanningTree(((0, 1), (1, 2)), 3)
        dec = ConvexDecomposition(((Fraction(1), tree),))
        with pytest.raises(DecompositionError):
            dec.verify(EdgeVector({(0, 1): 1, (0, 2): 1}))


class TestTightness:
    """Tests for membership in some decomposition."""

    def test_jb_is_tight(self) -> None:
        """Test that J_b can appear in a decomposition of x^{H_b}."""
        assert is_in_some_decomposition(hb_instance(), hb_solution(), hb_jb()).passed

    def test_edge_outside_support(self) -> None:
        """Test that a tree using an edge with x_e = 0 is rejected."""
        edges = ((0, 1), (0, 3), (1, 2), (3, 4), (4, 5), (5, 6), (0, 7))
        result = is_in_some_decomposition(hb_instance(), hb_solution(), SpanningTree(edges, 8))
        assert not result.passed
        assert result.witness == "0-7"

    def test_loose_tree(self) -> None:
        """Test that a tree missing the tight set {1,2} is rejected."""
        result = is_in_some_decomposition(hb_instance(), hb_solution(), SpanningTree(HB_LOOSE_TREE, 8))
        assert not result.passed

    def test_enumeration_limit(self) -> None:
        """Test that vertex sets beyond the subset limit are refused."""
        path = unit_path(23)
        tree = SpanningTree.of(path.edges, path.n)
        with pytest.raises(InstanceTooLargeError):
            is_in_some_decomposition(path, EdgeVector.indicator(path.edges), tree)


class TestQueries:
    """Tests for exact queries over a decomposition."""

    def test_expectations(self) -> None:
        """Test total probability, E c(J) and the expected indicator."""
        inst = hb_instance()
        dec = decompose(inst, hb_solution())
        assert distribution_query(dec, lambda tree: True) == 1
        assert expectation(dec, lambda tree: tree.cost(inst)) == Fraction(29, 3)
        assert expected_indicator(dec) == hb_solution()

    def test_single_crossing_probability(self) -> None:
        """Test that every tree crosses {0} once, since x(delta({0})) = 1."""
        dec = decompose(hb_instance(), hb_solution())
        assert distribution_query(dec, lambda tree: tree.crossing([0]) == 1) == 1

    def test_sample_is_deterministic(self) -> None:
        """Test that the same seed draws the same tree."""
        dec = decompose(hb_instance(), hb_solution())
        first = sample_tree(dec, 11)
        assert sample_tree(dec, 11) == first
        assert first in dec.trees

    @pytest.mark.slow
    def test_sample_frequencies(self) -> None:
        """Test that a two-tree decomposition with weights 1/2 draws each tree half the time."""
        first = SpanningTree.of([(0, 1), (1, 2)], 3)
        second = SpanningTree.of([(0, 1), (0, 2)], 3)
        dec = ConvexDecomposition(((Fraction(1, 2), first), (Fraction(1, 2), second)))
        draws = 10**5
        hits = sum(1 for seed in range(draws) if sample_tree(dec, seed) == first)
        assert abs(hits / draws - 0.5) < 0.02


def complete_unit_instance(n: int) -> Instance:
    """K_n with unit costs, s = 0 and t = n - 1."""
    costs = {(u, v): Fraction(1) for u in range(n) for v in range(u + 1, n)}
    return Instance(n=n, s=0, t=n - 1, costs=costs, is_complete_metric=True)


class TestRandomPolytopePoints:
    """Tests for decomposing random points of the spanning tree polytope."""

    @pytest.mark.slow
    def test_decompose_accepts_every_point(self) -> None:
        """Test that every random convex combination of trees on K_n, n <= 7, decomposes."""
        rng = random.Random(5)
        for n in range(3, 8):
            inst = complete_unit_instance(n)
            for _ in range(12):
                terms = []
                for _ in range(rng.randint(1, 4)):
                    sequence = [rng.randrange(n) for _ in range(n - 2)]
                    tree = nx.from_prufer_sequence(sequence)
                    terms.append((rng.randint(1, 5), SpanningTree.of(tree.edges(), n)))
                total = sum(weight for weight, _ in terms)
                x = EdgeVector((e, Fraction(weight, total)) for weight, tree in terms for e in tree.edges)

                dec = decompose(inst, x)

                assert dec.resum() == x
                assert all(weight > 0 for weight, _ in dec)
