import random
from fractions import Fraction

import pytest

from steinerforest.graph import Graph
from steinerforest.instances import generate_grid_instance
from steinerforest.priority import (
    CategoryState,
    EmptyBicategoryError,
    NaiveCategoryState,
    OrientationOverflowError,
)

AB = ("active", "inactive")


def single_edge_state(cost=5):
    g = Graph.from_edges([(1, "u", "v", cost)])
    return CategoryState(g, {"u": "active", "v": "active"}, categories=AB)


def test_decrease_then_find_min():
    cs = single_edge_state(5)
    cs.decrease_cost(("active", "active"), 2)
    assert cs.find_min(("active", "active")) == (1, 3)


def test_zero_delta_no_change():
    cs = single_edge_state(5)
    cs.decrease_cost(("active", "active"), 0)
    assert cs.find_min(("active", "active")) == (1, 5)


def test_negative_delta_rejected():
    cs = single_edge_state()
    with pytest.raises(ValueError):
        cs.decrease_cost(("active", "active"), -1)


def test_two_decreases_equal_one():
    a = single_edge_state(9)
    b = single_edge_state(9)
    a.decrease_cost(("active", "active"), 1)
    a.decrease_cost(("active", "active"), 1)
    b.decrease_cost(("active", "active"), 2)
    assert a.find_min(("active", "active")) == b.find_min(("active", "active"))


def test_find_min_picks_cheapest_then_zero():
    g = Graph.from_edges([(1, "a", "b", 3), (2, "a", "c", 5)])
    cs = CategoryState(g, {v: "active" for v in "abc"}, categories=AB)
    assert cs.find_min(("active", "active")) == (1, 3)
    cs.decrease_cost(("active", "active"), 3)
    assert cs.find_min(("active", "active")) == (1, 0)


def test_empty_bicategory_signaled():
    cs = single_edge_state()
    with pytest.raises(EmptyBicategoryError):
        cs.find_min(("inactive", "inactive"))
    assert cs.try_find_min(("inactive", "inactive")) is None


def test_change_category_isolated_vertex():
    g = Graph(["x", "y"], [])
    cs = CategoryState(g, {"x": "active", "y": "active"}, categories=AB)
    cs.change_category("x", "inactive")
    assert cs.category("x") == "inactive"


def test_change_category_preserves_costs():
    cs = single_edge_state(7)
    cs.change_category("u", "inactive")
    assert cs.find_min(("active", "inactive")) == (1, 7)
    cs.check_label_invariant()


def test_contract_path_preserves_costs():
    g = Graph.from_edges([(1, "u", "v", 4), (2, "v", "w", 6)])
    cs = CategoryState(g, {v: "active" for v in "uvw"}, categories=AB)
    nv = cs.contract_edge(1, "active")
    assert cs.find_min(("active", "active")) == (2, 6)
    assert set(cs.endpoints(2)) == {nv, "w"}
    cs.check_label_invariant()


def test_contract_triangle_keeps_parallel_costs():
    g = Graph.from_edges([(1, "a", "b", 2), (2, "b", "c", 5), (3, "a", "c", 9)])
    cs = CategoryState(g, {v: "active" for v in "abc"}, categories=AB)
    cs.contract_edge(1, "active")
    assert cs.find_min(("active", "active")) == (2, 5)
    assert cs.cost(3) == 9
    cs.check_label_invariant()


def test_contract_self_loop_rejected():
    g = Graph.from_edges([(1, "a", "b", 2), (2, "a", "b", 3)])
    cs = CategoryState(g, {"a": "active", "b": "active"}, categories=AB)
    cs.contract_edge(1, "active")
    with pytest.raises(KeyError):
        cs.contract_edge(2, "active")  # became a loop and was removed


def test_reorient_star_within_bound():
    edges = [(i, "c", "l%d" % i, 1) for i in range(1, 5)]
    g = Graph.from_edges(edges)
    cs = CategoryState(g, {v: "active" for v in g.vertices()}, categories=AB,
                       max_outdegree=3)
    # force the bad orientation: everything out of the center
    for rec in list(cs._edges.values()):
        if cs.resolve(rec.tail) != "c":
            cs._flip(rec)
    assert cs.outdegree("c") == 4
    flips = cs.reorient_for_insertion("c")
    assert flips
    assert cs.outdegree("c") <= 3
    cs.check_label_invariant()


def test_reorient_already_within_bound():
    cs = single_edge_state()
    assert cs.reorient_for_insertion("u") == []


def test_orientation_bound_after_random_contractions():
    rng = random.Random(4)
    for trial in range(10):
        g, _ = generate_grid_instance(rng.randint(2, 6), rng.randint(2, 6), 0,
                                      max_length=4, seed=trial)
        cs = CategoryState(g, {v: "active" for v in g.vertices()}, categories=AB)
        edges = sorted(g.edge_ids())
        rng.shuffle(edges)
        for e in edges[: g.n_edges // 2]:
            u, v = cs.endpoints(e)
            if u == v or e not in cs.live_edges():
                continue
            cs.contract_edge(e, rng.choice(AB))
            assert cs.check_outdegree_bound()
            cs.check_label_invariant()


def test_master_equivalence_trace():
    rng = random.Random(99)
    g, _ = generate_grid_instance(4, 5, 0, max_length=6, seed=2)
    assign = {v: rng.choice(AB) for v in g.vertices()}
    fast = CategoryState(g, assign, categories=AB)
    naive = NaiveCategoryState(g, assign, categories=AB)
    live = set(g.vertices())
    for step in range(600):
        r = rng.random()
        pair = (rng.choice(AB), rng.choice(AB))
        if r < 0.4:
            d = Fraction(rng.randint(0, 3), rng.randint(1, 2))
            fast.decrease_cost(pair, d)
            naive.decrease_cost(pair, d)
        elif r < 0.7:
            assert fast.try_find_min(pair) == naive.try_find_min(pair)
        elif r < 0.85:
            v = rng.choice(sorted(live, key=repr))
            c = rng.choice(AB)
            fast.change_category(v, c)
            naive.change_category(v, c)
        else:
            alive = sorted(naive.live_edges())
            if not alive:
                continue
            e = rng.choice(alive)
            u, v = fast.endpoints(e)
            if u == v:
                continue
            c = rng.choice(AB)
            assert fast.contract_edge(e, c) == naive.contract_edge(e, c)
            live -= {u, v}
            live.add(fast.resolve(u))
        costs = fast.check_label_invariant()
        assert costs == {e: naive.cost(e) for e in naive.live_edges()}
