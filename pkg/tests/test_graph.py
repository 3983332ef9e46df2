import heapq
import random
from fractions import Fraction

import pytest

from steinerforest.graph import (
    DisjointSets,
    Graph,
    connected_components,
    contract_edge,
    contract_edges,
    is_acyclic,
    is_feasible,
    shortest_path_forest,
    shortest_path_forest_truncated,
)
from steinerforest.instances import generate_grid_instance


def triangle():
    return Graph.from_edges([(1, "a", "b", 1), (2, "b", "c", 1), (3, "a", "c", 1)])


def test_contract_triangle():
    g2, rec = contract_edge(triangle(), 1)
    w = rec.order[0]
    assert g2.n_vertices == 2
    assert sorted(g2.edge_ids()) == [2, 3]  # both now join w and c
    assert all(set(g2.endpoints(e)) == {w, "c"} for e in (2, 3))
    assert rec.s_set(w) == frozenset({"a", "b"})


def test_contract_path():
    g = Graph.from_edges([(1, "a", "b", 1), (2, "b", "c", 1)])
    g2, rec = contract_edge(g, 1)
    assert g2.n_vertices == 2 and g2.n_edges == 1


def test_contract_parallel_makes_loop_discarded():
    g = Graph.from_edges([(1, "a", "b", 2), (2, "a", "b", 3)])
    g2, _ = contract_edge(g, 1)
    assert g2.n_edges == 0 and g2.n_vertices == 1


def test_contract_unknown_edge_rejected():
    with pytest.raises(KeyError):
        contract_edge(triangle(), 99)


def test_self_loops_dropped_on_creation():
    g = Graph.from_edges([(1, "a", "a", 5), (2, "a", "b", 1)])
    assert sorted(g.edge_ids()) == [2]


def test_lengths_validated():
    with pytest.raises(ValueError):
        Graph.from_edges([(1, "a", "b", -1)])


def test_spf_star():
    g = Graph.from_edges([(1, "r", "x", 1), (2, "r", "y", 1), (3, "r", "z", 1)])
    spf = shortest_path_forest(g, {"r"})
    assert spf.edges == {1, 2, 3}
    assert all(spf.dist[v] == 1 for v in "xyz")


def test_spf_tie_broken_by_edge_id():
    # forest edges are parent edges of non-root vertices (one per vertex,
    # matching the 4-cycle example); the tie at b goes to the smaller id
    g = Graph.from_edges([(1, "a", "b", 1), (2, "b", "c", 1)])
    spf = shortest_path_forest(g, {"a", "c"})
    assert spf.dist["b"] == 1
    assert spf.parent_edge["b"] == 1
    assert spf.edges == {1}


def test_spf_four_cycle_excludes_larger_id_at_antipode():
    g = Graph.from_edges([(1, 0, 1, 1), (2, 1, 2, 1), (3, 2, 3, 1), (4, 3, 0, 1)])
    spf = shortest_path_forest(g, {0})
    # vertex 2 is at distance 2 both ways; edge 2 beats edge 3
    assert spf.parent_edge[2] == 2
    assert spf.edges == {1, 2, 4}


def test_spf_empty_roots():
    spf = shortest_path_forest(triangle(), set())
    assert spf.edges == frozenset()


def test_truncated_path():
    g = Graph.from_edges([(1, "r", "a", 1), (2, "a", "b", 1)])
    assert shortest_path_forest_truncated(g, {"r"}, 1).edges == {1}
    assert shortest_path_forest_truncated(g, {"r"}, 2).edges == {1, 2}
    assert shortest_path_forest_truncated(g, {"r"}, -1).edges == frozenset()


def test_truncated_star_mixed_lengths():
    g = Graph.from_edges([(1, "r", "a", 1), (2, "r", "b", 2), (3, "r", "c", 3)])
    assert shortest_path_forest_truncated(g, {"r"}, 2).edges == {1, 2}


def test_components():
    g = Graph.from_edges([(1, "a", "b", 1), (2, "b", "c", 1), (3, "c", "d", 1)])
    comps = connected_components(g, [1, 2])
    assert comps == [frozenset({"a", "b", "c"})]
    assert connected_components(g, []) == []
    comps = connected_components(g, [1, 3])
    assert sorted(map(sorted, comps)) == [["a", "b"], ["c", "d"]]


def test_feasibility():
    g = Graph.from_edges([(1, "a", "b", 1), (2, "b", "c", 1)])
    assert is_feasible(g, {1, 2}, [("a", "c")])
    assert not is_feasible(g, {1}, [("a", "c")])
    assert is_feasible(g, set(), [])


def test_contraction_preserves_connectivity_fuzz():
    rng = random.Random(3)
    for trial in range(25):
        g, _ = generate_grid_instance(rng.randint(2, 4), rng.randint(2, 4), 0, seed=trial)
        orig = g
        rec = None
        for _ in range(rng.randint(1, g.n_edges - 1)):
            eids = sorted(g.edge_ids())
            if not eids:
                break
            e = rng.choice(eids)
            g, rec = contract_edge(g, e, rec)
        parent = rec.parent_map()

        def img(x):
            while x in parent:
                x = parent[x]
            return x

        comp_after = DisjointSets(g.vertices())
        for e in g.edge_ids():
            a, b = g.endpoints(e)
            comp_after.union(a, b)
        comp_before = DisjointSets(orig.vertices())
        for e in orig.edge_ids():
            a, b = orig.endpoints(e)
            comp_before.union(a, b)
        for x in orig.vertices():
            for y in orig.vertices():
                assert comp_before.same(x, y) == comp_after.same(img(x), img(y))


def reference_dijkstra(g, roots):
    dist = {r: Fraction(0) for r in roots}
    heap = [(Fraction(0), repr(r), r) for r in roots]
    heapq.heapify(heap)
    done = set()
    while heap:
        d, _, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for e in g.incident(x):
            y = g.other_endpoint(e, x)
            nd = d + g.length(e)
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, repr(y), y))
    return dist


def test_spf_distances_match_reference_dijkstra():
    rng = random.Random(11)
    for trial in range(20):
        g, _ = generate_grid_instance(rng.randint(2, 5), rng.randint(2, 5), 0,
                                      max_length=6, seed=trial)
        roots = set(rng.sample(sorted(g.vertices()), rng.randint(1, 3)))
        spf = shortest_path_forest(g, roots)
        ref = reference_dijkstra(g, roots)
        assert spf.dist == ref


def test_truncation_decomposition_identity():
    # truncated(k1+k2) edges = truncated(k1) + truncated-of-contracted(k2)
    rng = random.Random(5)
    for trial in range(15):
        g, _ = generate_grid_instance(3, rng.randint(3, 5), 0, max_length=1, seed=trial)
        roots = set(rng.sample(sorted(g.vertices()), 2))
        k1, k2 = Fraction(rng.randint(1, 3)), Fraction(rng.randint(1, 3))  # unit lengths
        whole = shortest_path_forest_truncated(g, roots, k1 + k2).edges
        first = shortest_path_forest_truncated(g, roots, k1).edges
        g2, rec = contract_edges(g, first)
        parent = rec.parent_map()

        def img(x):
            while x in parent:
                x = parent[x]
            return x

        second = shortest_path_forest_truncated(g2, {img(r) for r in roots}, k2).edges
        assert first | second == whole
        assert not (first & second)


def test_bulk_contract_matches_sequential():
    g, _ = generate_grid_instance(3, 3, 0, max_length=2, seed=9)
    subset = sorted(g.edge_ids())[::2]
    bulk_g, bulk_rec = contract_edges(g, subset)
    seq_g, seq_rec = g, None
    for e in sorted(subset):
        if seq_g.has_edge(e):
            seq_g, seq_rec = contract_edge(seq_g, e, seq_rec)
    assert sorted(bulk_g.edge_ids()) == sorted(seq_g.edge_ids())
    assert bulk_rec.children == seq_rec.children
    assert set(bulk_g.vertices()) == set(seq_g.vertices())


def test_acyclicity_helper():
    g = triangle()
    assert is_acyclic(g, {1, 2})
    assert not is_acyclic(g, {1, 2, 3})
