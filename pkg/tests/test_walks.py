"""Tests for walk projections, closed-walk counts and unbalanced loops."""

from math import comb

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from src.bundle import build_bundle, identity_connection, is_balanced, product
from src.config import Config
from src.constructions import make_dvb2_torus, make_eg2
from src.errors import HypothesisError, InvalidPathError, ResourceLimitError
from src.graph import Graph, complete_graph, cycle_graph
from src.permutation import Permutation
from src.walks import (
    closed_walk_count,
    closed_walk_counts,
    count_walks_with_projections,
    enumerate_closed_walks,
    minimal_unbalanced_loop,
    project_bundle,
    project_product,
    projection_census,
    shortest_unbalanced_loop,
    theorem2_separation,
    verify_lemmas,
    walk_profile,
)

# (0,1) lifted once around the base, then one fiber step back to (0,1)
EG2_CLOSED_WALK = [1, 5, 8, 11, 14, 2, 1]


class TestClosedWalkCounts:
    def test_cycle_counts(self):
        assert closed_walk_count(cycle_graph(5), 0, 5) == 2
        assert closed_walk_count(cycle_graph(5), 0, 2) == 2
        assert closed_walk_count(cycle_graph(5), 0, 3) == 0

    def test_length_zero_is_one(self):
        assert closed_walk_count(cycle_graph(7), 3, 0) == 1
        assert closed_walk_counts(complete_graph(4), 0) == [1, 1, 1, 1]

    def test_negative_length_rejected(self):
        with pytest.raises(InvalidPathError):
            closed_walk_count(cycle_graph(5), 0, -1)
        with pytest.raises(InvalidPathError):
            closed_walk_counts(cycle_graph(5), -1)

    def test_counts_are_exact_beyond_int64(self):
        # K_5 has 4^L + 4(-1)^L closed walks of length L in total over its 5 vertices
        count = closed_walk_count(complete_graph(5), 0, 40)
        assert count * 5 == 4**40 + 4
        assert count > 2**63

    @settings(max_examples=20)
    @given(st.integers(min_value=0, max_value=7), st.integers(min_value=0, max_value=9))
    def test_matrix_count_matches_enumeration(self, length, vertex):
        petersen = Graph.from_networkx(nx.petersen_graph())
        enumerated = sum(1 for _ in enumerate_closed_walks(petersen, vertex, length))
        assert closed_walk_count(petersen, vertex, length) == enumerated
        assert closed_walk_counts(petersen, length)[vertex] == enumerated

    def test_walk_profile(self):
        assert walk_profile(cycle_graph(5), 0, [3, 4, 5]) == (0, 6, 2)


class TestProjections:
    def test_product_projection(self):
        pair = project_product(cycle_graph(5), complete_graph(3), [0, 1, 4, 3, 0])
        assert pair.to_dict() == {"base": [0, 1, 0], "fiber": [0, 1, 0]}

    def test_product_rejects_diagonal_step(self):
        with pytest.raises(InvalidPathError):
            project_product(cycle_graph(5), complete_graph(3), [0, 4])

    def test_bundle_projection_pulls_fiber_back(self, eg2_5_3):
        pair = project_bundle(eg2_5_3, EG2_CLOSED_WALK)
        assert list(pair.base_part.vertices) == [0, 1, 2, 3, 4, 0]
        assert list(pair.fiber_part.vertices) == [1, 2]
        assert pair.base_part.length + pair.fiber_part.length == len(EG2_CLOSED_WALK) - 1

    def test_bundle_projection_rejects_non_walk(self, eg2_5_3):
        with pytest.raises(InvalidPathError):
            project_bundle(eg2_5_3, [1, 4])


class TestProjectionCounts:
    def test_interleavings_match_binomial(self, eg2_5_3):
        count = count_walks_with_projections(eg2_5_3, 1, [0, 1, 2, 3, 4, 0], [1, 2])
        assert count == comb(6, 1)

    def test_product_interleavings(self, product_5_3):
        count = count_walks_with_projections(product_5_3, 0, [0, 1, 0], [0, 1, 2, 0])
        assert count == comb(5, 2)

    def test_open_base_walk_rejected(self, eg2_5_3):
        with pytest.raises(HypothesisError) as info:
            count_walks_with_projections(eg2_5_3, 1, [0, 1, 2], [1, 2])
        assert info.value.hypothesis == "base loop"

    def test_wrong_fiber_endpoint_rejected(self, eg2_5_3):
        with pytest.raises(HypothesisError) as info:
            count_walks_with_projections(eg2_5_3, 1, [0, 1, 2, 3, 4, 0], [1, 0])
        assert info.value.hypothesis == "fiber endpoints"

    def test_census_contains_the_twisted_walk(self, eg2_5_3):
        census = projection_census(eg2_5_3, 1, 6)
        assert census[((0, 1, 2, 3, 4, 0), (1, 2))] == 6
        assert sum(census.values()) == closed_walk_count(eg2_5_3.total, 1, 6)

    def test_lemma_sweep_on_eg2(self, eg2_5_3):
        report = verify_lemmas(eg2_5_3, 1, 6)
        assert report.ok
        assert report.pairs_checked > 0
        assert report.walks_checked == sum(closed_walk_count(eg2_5_3.total, 1, L) for L in range(7))


class TestUnbalancedLoops:
    def test_eg2_on_five_cycle(self):
        loop = shortest_unbalanced_loop(make_eg2(5, 3), 0)
        assert loop.length == 5
        assert loop.witness.start == loop.witness.end == 0
        assert not loop.holonomy.is_identity()

    def test_eg2_on_four_cycle(self):
        loop = shortest_unbalanced_loop(make_eg2(4, 3), 2)
        assert loop.length == 4

    def test_trivial_connection_has_none(self, product_5_3):
        assert shortest_unbalanced_loop(product_5_3.connection, 0) is None
        assert minimal_unbalanced_loop(product_5_3.connection) is None

    def test_minimal_loop_prefers_lowest_vertex(self):
        loop = minimal_unbalanced_loop(make_eg2(5, 3))
        assert loop.start == 0
        assert loop.to_dict()["length"] == 5

    def test_state_cap(self):
        with pytest.raises(ResourceLimitError) as info:
            shortest_unbalanced_loop(make_eg2(5, 3), 0, Config(bfs_state_cap=2))
        assert info.value.cap_name == "bfs_state_cap"

    def test_dvb2_torus_has_a_triangle_witness(self):
        c = make_dvb2_torus(4)
        loop = shortest_unbalanced_loop(c, 0)
        assert loop.length == 3
        a, b, d, back = loop.witness.vertices
        assert a == back == 0
        assert len({a, b, d}) == 3
        assert all(c.base.has_edge(u, v) for u, v in loop.witness.steps())
        assert not is_balanced(c, loop.witness)
        assert loop.holonomy == Permutation.from_cycles(2, [(0, 1)])
        assert minimal_unbalanced_loop(c).length == 3


class TestSeparation:
    def test_eg2_counts(self, eg2_5_3):
        report = theorem2_separation(eg2_5_3)
        assert report.m == 5
        assert (report.x0, report.v0) == (0, 1)
        assert report.bundle_count == 50
        assert report.product_count == 52
        assert report.null_element == 0
        assert report.null_count == 52
        assert report.not_isomorphic_to_product
        assert report.not_vertex_transitive

    def test_dvb1_counts(self, dvb1_5):
        report = theorem2_separation(dvb1_5)
        assert (report.bundle_count, report.product_count) == (0, 2)
        assert report.null_count is None
        assert report.not_vertex_transitive is None

    def test_trivial_connection_rejected(self):
        with pytest.raises(HypothesisError) as info:
            theorem2_separation(product(cycle_graph(5), complete_graph(3)))
        assert info.value.hypothesis == "non-trivial connection"

    def test_bundle_and_product_differ_on_five_cycle_only(self):
        b = build_bundle(make_eg2(5, 3))
        prod = product(cycle_graph(5), complete_graph(3))
        for length in range(5):
            assert closed_walk_counts(b.total, length) == closed_walk_counts(prod.total, length)


def walks_from(g, start, max_length):
    """Every walk of length 1..max_length starting at start."""
    frontier = [(start,)]
    for _ in range(max_length):
        frontier = [walk + (w,) for walk in frontier for w in g.adjacency[walk[-1]]]
        yield from frontier


class TestProjectionInvariants:
    def test_identity_connection_projects_like_the_product(self):
        base, fiber = cycle_graph(4), complete_graph(3)
        b = build_bundle(identity_connection(base, fiber))
        checked = 0
        for walk in walks_from(b.total, 0, 6):
            assert project_bundle(b, walk) == project_product(base, fiber, walk)
            checked += 1
        assert checked == sum(4 ** length for length in range(1, 7))

    @pytest.mark.parametrize("name", ["eg2_5_3", "dvb1_5", "product_5_3"])
    def test_projection_lengths_add_up(self, name, request):
        b = request.getfixturevalue(name)
        for start in (0, 1):
            for walk in walks_from(b.total, start, 6):
                pair = project_bundle(b, walk)
                assert pair.base_part.length + pair.fiber_part.length == len(walk) - 1

    @pytest.mark.parametrize("length", range(1, 7))
    def test_fiber_part_closes_exactly_when_base_part_is_balanced(self, eg2_5_3, length):
        moved = eg2_5_3.flat(0, 1)
        for walk in enumerate_closed_walks(eg2_5_3.total, moved, length):
            pair = project_bundle(eg2_5_3, walk)
            assert pair.fiber_part.is_closed == is_balanced(eg2_5_3.connection, pair.base_part)

    def test_fiber_part_always_closes_at_a_null_vertex(self, eg2_5_3):
        null = eg2_5_3.flat(0, 0)
        for length in range(1, 7):
            for walk in enumerate_closed_walks(eg2_5_3.total, null, length):
                assert project_bundle(eg2_5_3, walk).fiber_part.is_closed
