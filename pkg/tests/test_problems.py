import itertools
import math

import numpy as np
import pytest

from pqcbench.problems import (
    Graph,
    builtin6_graph,
    complete_graph,
    decode_tsp,
    encode_tsp,
    load_graph,
    mvc_cost,
    save_graph,
    spanning_tree,
    tour_length,
    tsp_cost,
)

# K4 instance used throughout: tour 1-2-3-4-1 has length 1+2+5+3 = 11
K4_WEIGHTS = {(1, 2): 1.0, (1, 3): 4.0, (1, 4): 3.0, (2, 3): 2.0, (2, 4): 6.0, (3, 4): 5.0}


def k4():
    return Graph(4, tuple((u, v, w) for (u, v), w in K4_WEIGHTS.items()))


class TestGraph:
    def test_canonical_storage(self):
        g = Graph(3, ((3, 1, 2.0), (1, 2, 1.0)))
        assert g.edges == ((1, 2, 1.0), (1, 3, 2.0))

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Graph(2, ((1, 1, 1.0),))

    def test_rejects_duplicate(self):
        with pytest.raises(ValueError):
            Graph(2, ((1, 2, 1.0), (2, 1, 3.0)))

    def test_rejects_bad_weight(self):
        with pytest.raises(ValueError):
            Graph(2, ((1, 2, -1.0),))
        with pytest.raises(ValueError):
            Graph(2, ((1, 2, math.inf),))

    def test_rejects_out_of_range_vertex(self):
        with pytest.raises(ValueError):
            Graph(2, ((1, 3, 1.0),))

    def test_neighbors_sorted(self):
        g = builtin6_graph()
        assert g.neighbors()[4] == [1, 3, 5]

    def test_weight_lookup(self):
        g = k4()
        assert g.weight(3, 1) == 4.0
        assert g.weight(2, 4) == 6.0
        assert Graph(3, ((1, 2, 1.0),)).weight(1, 3) is None


class TestSpanningTree:
    def test_path_graph_is_its_own_tree(self):
        g = Graph(3, ((1, 2, 1.0), (2, 3, 1.0)))
        assert spanning_tree(g).parent_edges == ((1, 2), (2, 3))

    def test_complete_graph_gives_star(self):
        tree = spanning_tree(complete_graph(4, weights=[1] * 6))
        assert tree.root == 1
        assert tree.parent_edges == ((1, 2), (1, 3), (1, 4))

    def test_cycle_with_chord(self):
        g = Graph(4, ((1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (1, 4, 1.0), (1, 3, 1.0)))
        tree = spanning_tree(g)
        assert len(tree.parent_edges) == 3
        assert tree.parent_edges == ((1, 2), (1, 3), (1, 4))

    def test_builtin6_bfs_tree(self):
        tree = spanning_tree(builtin6_graph())
        assert tree.parent_edges == ((1, 2), (1, 4), (2, 3), (4, 5), (5, 6))

    def test_disconnected_raises(self):
        with pytest.raises(ValueError):
            spanning_tree(Graph(4, ((1, 2, 1.0), (3, 4, 1.0))))


class TestTspCost:
    def test_known_tour_length(self):
        cost = tsp_cost(k4())
        z = encode_tsp((1, 2, 3, 4))
        assert abs(cost.evaluate(z) - 11.0) < 1e-12
        assert cost.feasible(z)

    def test_all_zeros_penalty(self):
        cost = tsp_cost(k4())
        assert abs(cost.evaluate(0) - 2 * 4 * cost.penalty_weight) < 1e-12

    def test_permutation_matrices_have_zero_penalty(self):
        g = k4()
        cost = tsp_cost(g)
        for perm in itertools.permutations((1, 2, 3, 4)):
            z = encode_tsp(perm)
            assert abs(cost.evaluate(z) - tour_length(g, perm)) < 1e-12

    def test_table_matches_scalar_evaluate(self):
        cost = tsp_cost(complete_graph(3, seed=5))
        table = cost.table
        rng = np.random.default_rng(0)
        for z in rng.integers(0, 512, size=60):
            assert abs(table[z] - cost.evaluate(int(z))) < 1e-9

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_penalty_dominance_exhaustive(self, n):
        cost = tsp_cost(complete_graph(n, seed=n))
        table = cost.table
        feasible = np.array([cost.feasible(z) for z in range(1 << cost.n_bits)])
        assert table[~feasible].min() > table[feasible].max()

    def test_penalty_must_exceed_total_weight(self):
        g = k4()
        with pytest.raises(ValueError):
            tsp_cost(g, penalty=10.0)

    def test_missing_edges_priced_at_penalty(self):
        g = Graph(3, ((1, 2, 1.0), (2, 3, 1.0)))  # no 1-3 edge
        cost = tsp_cost(g)
        z = encode_tsp((1, 2, 3))
        # tour 1-2-3-1 uses the absent 1-3 edge once in each direction sum
        assert abs(cost.evaluate(z) - (2.0 + cost.penalty_weight)) < 1e-12

    def test_rejects_single_vertex(self):
        with pytest.raises(ValueError):
            tsp_cost(Graph(1, ()))


class TestDecodeEncode:
    def test_identity_matrix(self):
        n = 4
        z = encode_tsp(tuple(range(1, n + 1)))
        assert decode_tsp(z, n) == (1, 2, 3, 4)

    def test_two_ones_in_a_row_is_infeasible(self):
        z = encode_tsp((1, 2, 3))
        z |= 1 << 7  # second 1 in the first row
        assert decode_tsp(z, 3) is None

    def test_duplicate_vertex_is_infeasible(self):
        # rows one-hot but both point at vertex 1
        z = 0
        z |= 1 << (4 - 1 - 0)
        z |= 1 << (4 - 1 - 2)
        assert decode_tsp(z, 2) is None

    def test_specific_permutation(self):
        assert decode_tsp(encode_tsp((2, 3, 1)), 3) == (2, 3, 1)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_round_trip_all_permutations(self, n):
        for perm in itertools.permutations(range(1, n + 1)):
            assert decode_tsp(encode_tsp(perm), n) == perm

    def test_encode_rejects_non_permutation(self):
        with pytest.raises(ValueError):
            encode_tsp((1, 1, 3))


class TestTourLength:
    def test_k4_value(self):
        assert tour_length(k4(), (1, 2, 3, 4)) == 11.0
        assert tour_length(k4(), (1, 3, 2, 4)) == 4 + 2 + 6 + 3

    def test_rotations_and_reflections_agree(self):
        g = complete_graph(5, seed=3)
        base = tour_length(g, (1, 2, 3, 4, 5))
        assert abs(tour_length(g, (2, 3, 4, 5, 1)) - base) < 1e-12
        assert abs(tour_length(g, (5, 4, 3, 2, 1)) - base) < 1e-12

    def test_missing_edge_raises(self):
        g = Graph(3, ((1, 2, 1.0), (2, 3, 1.0)))
        with pytest.raises(ValueError):
            tour_length(g, (1, 2, 3))

    def test_agreement_with_cost_encoding(self):
        for n in (3, 4, 5):
            g = complete_graph(n, seed=n + 10)
            cost = tsp_cost(g)
            for perm in itertools.permutations(range(1, n + 1)):
                assert abs(cost.evaluate(encode_tsp(perm)) - tour_length(g, perm)) < 1e-9


class TestMvcCost:
    def test_all_ones_is_feasible_with_cost_n(self):
        g = builtin6_graph()
        cost = mvc_cost(g)
        z = (1 << 6) - 1
        assert cost.feasible(z)
        assert cost.evaluate(z) == 6.0
        assert cost.decode(z) == (1, 2, 3, 4, 5, 6)

    def test_triangle_all_zeros(self):
        g = Graph(3, ((1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)))
        assert mvc_cost(g, penalty=2.0).evaluate(0) == 6.0

    def test_path_middle_vertex(self):
        g = Graph(3, ((1, 2, 1.0), (2, 3, 1.0)))
        cost = mvc_cost(g)
        assert cost.evaluate(0b010) == 1.0
        assert cost.feasible(0b010)
        assert cost.decode(0b010) == (2,)

    def test_cover_agreement(self):
        g = builtin6_graph()
        cost = mvc_cost(g, penalty=2.5)
        masks = [(u, v) for u, v, _ in g.edges]
        for z in range(64):
            uncovered = sum(
                1
                for u, v in masks
                if not (z & (1 << (6 - u))) and not (z & (1 << (6 - v)))
            )
            expected = bin(z).count("1") + 2.5 * uncovered
            assert abs(cost.evaluate(z) - expected) < 1e-12

    def test_global_minima_are_feasible_up_to_n12(self):
        rng = np.random.default_rng(17)
        for n in (4, 8, 12):
            # random connected graph: a path plus extra random edges
            edges = {(v, v + 1) for v in range(1, n)}
            for _ in range(n):
                u, v = sorted(rng.choice(np.arange(1, n + 1), 2, replace=False))
                edges.add((int(u), int(v)))
            g = Graph(n, tuple((u, v, 1.0) for u, v in edges))
            cost = mvc_cost(g)
            table = cost.table
            feasible = np.array([cost.feasible(z) for z in range(1 << n)])
            # every argmin is a cover, and infeasible strings stay strictly above
            assert table[~feasible].min() > table[feasible].min()
            assert all(feasible[z] for z in np.flatnonzero(table <= table.min() + 1e-9))

    def test_table_matches_scalar(self):
        cost = mvc_cost(builtin6_graph())
        assert np.allclose(cost.table, [cost.evaluate(z) for z in range(64)])

    def test_penalty_validation(self):
        with pytest.raises(ValueError):
            mvc_cost(builtin6_graph(), penalty=1.0)


class TestCompleteGraph:
    def test_explicit_weights(self):
        g = complete_graph(4, weights=[1, 4, 3, 2, 6, 5])
        assert len(g.edges) == 6
        assert g.weight(1, 3) == 4.0

    def test_seeded_weights_deterministic(self):
        a = complete_graph(5, seed=42)
        b = complete_graph(5, seed=42)
        assert a == b
        assert all(1.0 <= w < 10.0 for _, _, w in a.edges)

    def test_three_vertices(self):
        assert len(complete_graph(3, seed=0).edges) == 3

    def test_wrong_weight_count(self):
        with pytest.raises(ValueError):
            complete_graph(4, weights=[1, 2, 3])

    def test_exactly_one_source(self):
        with pytest.raises(ValueError):
            complete_graph(3)
        with pytest.raises(ValueError):
            complete_graph(3, weights=[1, 2, 3], seed=1)


class TestGraphFiles:
    def test_round_trip(self, tmp_path):
        g = complete_graph(5, seed=9)
        path = tmp_path / "g.txt"
        save_graph(g, path)
        assert load_graph(path) == g

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text(
            "# a triangle\nvertices 3\n\n1 2 1.5  # first edge\n1 3 2.0\n2 3 2.5\n"
        )
        g = load_graph(path)
        assert g.n_vertices == 3
        assert g.weight(1, 2) == 1.5

    def test_missing_header(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("1 2 1.0\n")
        with pytest.raises(ValueError):
            load_graph(path)

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("vertices 2\n1 2\n")
        with pytest.raises(ValueError):
            load_graph(path)


class TestTableCeiling:
    def test_rejects_oversized_table(self):
        cost = tsp_cost(complete_graph(5, seed=1))  # 25 bits
        with pytest.raises(ValueError):
            cost.table
