"""Tests for automorphism groups, canonical forms and geodesic-like loops."""

from math import factorial

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st
from networkx.algorithms.isomorphism import GraphMatcher

from src.bundle import build_bundle, product
from src.config import Config
from src.constructions import make_dvb2_torus, make_eg2, make_eg3
from src.errors import InvalidLoopError, InvalidParameterError, ResourceLimitError
from src.graph import Graph, complete_graph, cycle_graph
from src.permutation import Permutation
from src.symmetry import (
    OrbitPartition,
    UnionFind,
    are_isomorphic,
    automorphism_elements,
    automorphism_group,
    canonical_form,
    geodesic_like_loops,
    is_geodesic_like,
    is_vertex_transitive,
    orbit_certificate,
    refine,
    rho_automorphism,
    rho_orbits,
    seed_colors,
)
from src.walks import closed_walk_counts

PETERSEN = Graph.from_networkx(nx.petersen_graph())


def networkx_automorphisms(g: Graph):
    nx_graph = g.to_networkx()
    return list(GraphMatcher(nx_graph, nx_graph).isomorphisms_iter())


class TestUnionFind:
    def test_orbits_of_generators(self):
        gen = Permutation.from_cycles(6, [(0, 1), (2, 3, 4)])
        partition = OrbitPartition.from_generators(6, [gen])
        assert partition.orbits() == [[0, 1], [2, 3, 4], [5]]
        assert partition.sizes() == [2, 3, 1]
        assert partition.count == 3

    def test_union_find_merges(self):
        uf = UnionFind(4)
        uf.union(0, 3)
        uf.union(3, 2)
        assert uf.find(2) == uf.find(0)
        assert uf.find(1) != uf.find(0)


class TestRefinement:
    def test_seed_colors_separate_triangle_vertices(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 0), (2, 3)])
        colors = seed_colors(g)
        assert colors[0] == colors[1]
        assert colors[2] != colors[3]

    def test_refine_is_stable_on_regular_graphs(self):
        colors, _ = refine(cycle_graph(6), [0] * 6)
        assert len(set(colors)) == 1


class TestAutomorphismGroup:
    @pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 9])
    def test_cycle_group_is_dihedral(self, n):
        group = automorphism_group(cycle_graph(n))
        assert group.order == 2 * n
        assert group.orbits.count == 1

    def test_complete_graph_group_is_symmetric(self):
        assert automorphism_group(complete_graph(5)).order == factorial(5)

    def test_petersen(self):
        group = automorphism_group(PETERSEN)
        assert group.order == 120
        assert group.orbits.count == 1
        assert all(gen.is_automorphism_of(PETERSEN) for gen in group.generators)

    def test_path_graph_has_reflection_only(self):
        path = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
        group = automorphism_group(path)
        assert group.order == 2
        assert group.orbits.orbits() == [[0, 4], [1, 3], [2]]
        assert not is_vertex_transitive(path)

    def test_vertex_cap(self):
        with pytest.raises(ResourceLimitError) as info:
            automorphism_group(cycle_graph(5), Config(aut_vertex_cap=4))
        assert info.value.cap_name == "aut_vertex_cap"

    def test_element_enumeration(self):
        elements = automorphism_elements(complete_graph(4))
        assert len(elements) == 24
        assert elements[0].is_identity()
        with pytest.raises(ResourceLimitError):
            automorphism_elements(complete_graph(4), Config(aut_order_cap=10))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=1, max_value=7), st.floats(min_value=0.2, max_value=0.8), st.integers(0, 10_000))
    def test_matches_networkx_on_random_graphs(self, n, p, seed):
        """Group order and orbits agree with an exhaustive matcher."""
        g = Graph.from_networkx(nx.gnp_random_graph(n, p, seed=seed))
        group = automorphism_group(g)
        automorphisms = networkx_automorphisms(g)
        assert group.order == len(automorphisms)
        expected = {frozenset(m[v] for m in automorphisms) for v in range(n)}
        assert {frozenset(o) for o in group.orbits.orbits()} == expected


class TestCanonicalForm:
    def test_isomorphism_witness_maps_edges(self):
        relabeled = PETERSEN.relabel(Permutation((3, 7, 1, 0, 9, 2, 8, 6, 4, 5)))
        result = are_isomorphic(PETERSEN, relabeled)
        assert result.isomorphic
        for u, v in PETERSEN.edges():
            assert relabeled.has_edge(result.mapping(u), result.mapping(v))

    def test_hexagon_is_not_two_triangles(self):
        triangles = Graph.from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
        assert not are_isomorphic(cycle_graph(6), triangles).isomorphic

    def test_eg3_with_two_cycles_is_eg2_with_three_fiber_vertices(self):
        eg3 = build_bundle(make_eg3(5, 2)).total
        eg2 = build_bundle(make_eg2(5, 3)).total
        assert canonical_form(eg3).certificate == canonical_form(eg2).certificate


class TestRho:
    def test_rho_is_an_automorphism(self, eg2_5_3):
        rho = rho_automorphism(eg2_5_3)
        assert rho.is_automorphism_of(eg2_5_3.total)
        assert rho(eg2_5_3.flat(0, 1)) == eg2_5_3.flat(1, 2)

    @pytest.mark.parametrize("i, sizes", [(2, [5, 10]), (3, [5, 10, 15])])
    def test_eg3_rho_orbit_sizes(self, i, sizes):
        b = build_bundle(make_eg3(5, i))
        assert sorted(rho_orbits(b).sizes()) == sizes

    def test_rho_needs_cycle_base(self):
        with pytest.raises(InvalidParameterError):
            rho_automorphism(build_bundle(make_dvb2_torus(4)))


class TestGeodesicLikeLoops:
    def test_five_cycle_has_two_directions(self):
        loops = geodesic_like_loops(cycle_graph(5), 0, 5)
        assert sorted(loop.vertices for loop in loops) == [(0, 1, 2, 3, 4, 0), (0, 4, 3, 2, 1, 0)]

    def test_four_cycle_has_none(self):
        assert geodesic_like_loops(cycle_graph(4), 0, 8) == []
        assert not is_geodesic_like(cycle_graph(4), [0, 1, 2, 3, 0])

    def test_backtrack_is_not_geodesic_like(self):
        assert not is_geodesic_like(cycle_graph(5), [0, 1, 0])

    def test_open_walk_rejected(self):
        with pytest.raises(InvalidLoopError):
            is_geodesic_like(cycle_graph(5), [0, 1, 2])

    def test_eg3_loops_trace_rho_orbits(self):
        b = build_bundle(make_eg3(5, 3))
        orbit_size = {len(orbit): orbit for orbit in rho_orbits(b).orbits()}
        for size, orbit in orbit_size.items():
            start = orbit[0]
            loops = geodesic_like_loops(b.total, start, 15)
            assert min(loop.length for loop in loops) == size
            shortest = [loop for loop in loops if loop.length == size]
            assert set(shortest[0].vertices) == set(orbit)


class TestOrbitCertificate:
    def test_eg2_orbits_are_separated_by_walk_counts(self, eg2_5_3):
        cert = orbit_certificate(eg2_5_3.total)
        assert cert.group.orbits.count == 2
        assert cert.profiles_constant
        assert cert.separated
        assert cert.to_dict()["orbit_count"] == 2


RELABEL_GRAPHS = {
    "petersen": PETERSEN,
    "c7": cycle_graph(7),
    "eg2_5_3": build_bundle(make_eg2(5, 3)).total,
    "eg3_5_3": build_bundle(make_eg3(5, 3)).total,
}
PRODUCT = product(cycle_graph(5), complete_graph(3)).total
PRODUCT_AUTOMORPHISMS = automorphism_elements(PRODUCT)


class TestRelabelingInvariance:
    @pytest.mark.parametrize("name", sorted(RELABEL_GRAPHS))
    @settings(max_examples=100, deadline=None)
    @given(data=st.data())
    def test_canonical_form_survives_relabeling(self, name, data):
        g = RELABEL_GRAPHS[name]
        image = data.draw(st.permutations(list(range(g.n))))
        relabeled = g.relabel(Permutation(tuple(image)))
        assert canonical_form(relabeled).digest == canonical_form(g).digest
        assert are_isomorphic(g, relabeled).isomorphic


class TestWalkCountsUnderAutomorphisms:
    @pytest.mark.parametrize("name", ["eg2_5_3", "dvb1_5"])
    def test_counts_are_constant_along_generators(self, name, request):
        g = request.getfixturevalue(name).total
        generators = automorphism_group(g).generators
        for length in range(3, 9):
            counts = closed_walk_counts(g, length)
            for sigma in generators:
                assert all(counts[sigma(u)] == counts[u] for u in range(g.n))

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from(PRODUCT_AUTOMORPHISMS), st.integers(min_value=1, max_value=10))
    def test_counts_are_invariant_under_any_automorphism(self, sigma, length):
        counts = closed_walk_counts(PRODUCT, length)
        assert [counts[sigma(u)] for u in range(PRODUCT.n)] == counts
