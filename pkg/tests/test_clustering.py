import itertools
import random
from fractions import Fraction

import pytest

from steinerforest.clustering import (
    InfeasibleDemandError,
    build_isolated_forest,
    decompose_instance,
    depth_bound,
    gw_steiner_forest,
    phase1,
    phase2,
    run_pc_clustering,
    validate_decomposition,
    validate_pc_output,
)
from steinerforest.graph import Graph, is_feasible
from steinerforest.instances import generate_grid_instance
from steinerforest.oracle import brute_force_opt


def p1_equal(a, b):
    return (
        a.f1 == b.f1
        and a.save == b.save
        and a.dead_time == b.dead_time
        and a.phi0 == b.phi0
        and a.t_final == b.t_final
        and a.record.children == b.record.children
    )


def test_phase1_single_edge_hand_simulation():
    g = Graph.from_edges([(1, "u", "v", 2)])
    res = phase1(g, {"u": 5, "v": 5}, Fraction(1, 2))
    assert res.f1 == (1,)
    w = res.record.order[0]
    assert res.phi0[w] == 8  # merged budget after both grew for time 1
    assert res.t_final == 9
    assert res.dead_time[w] == 9


def test_phase1_no_energy_never_runs():
    g = Graph.from_edges([(1, "u", "v", 2)])
    res = phase1(g, {"u": 0, "v": 0}, Fraction(1, 2))
    assert res.f1 == ()
    assert res.t_final == 0
    assert res.dead_time == {"u": 0, "v": 0}


def test_phase1_lone_growth_dies_short():
    g = Graph.from_edges([(1, "u", "v", 10)])
    res = phase1(g, {"u": 1, "v": 0}, Fraction(1))
    assert res.f1 == ()
    assert res.dead_time["u"] == 1
    assert res.t_final == 1


def test_phase1_engines_bit_identical():
    rng = random.Random(7)
    for trial in range(40):
        rows, cols = rng.randint(1, 5), rng.randint(2, 5)
        g, _ = generate_grid_instance(rows, cols, 0, max_length=4, seed=trial)
        phi = {v: Fraction(rng.randint(0, 6), rng.randint(1, 3)) for v in g.vertices()}
        a = phase1(g, phi, Fraction(1, 3), engine="fast")
        b = phase1(g, phi, Fraction(1, 3), engine="naive")
        assert p1_equal(a, b), trial


def test_phase2_prunes_dead_leaf():
    # center lives long, one leaf dies early and dangles
    g = Graph.from_edges([(1, "c", "x", 1), (2, "c", "y", 6)])
    res = phase1(g, {"c": 20, "x": Fraction(1, 4), "y": 20}, Fraction(1, 100))
    assert 1 in res.f1
    f2 = phase2(res)
    assert 1 not in f2  # x died at 1/4, contraction at ~0.75 >> (1+delta)/4


def test_phase2_save_protects_recent_death():
    g = Graph.from_edges([(1, "c", "x", 1), (2, "c", "y", 6)])
    res = phase1(g, {"c": 20, "x": Fraction(1, 4), "y": 20}, Fraction(4))
    # delta=4: contraction time 0.75 < (1+4)*0.25, so the edge is protected
    assert 1 in res.save
    f2 = phase2(res)
    assert 1 in f2


def test_phase2_length_bound_random():
    rng = random.Random(1)
    for trial in range(30):
        g, _ = generate_grid_instance(rng.randint(2, 4), rng.randint(2, 4), 0,
                                      max_length=4, seed=trial)
        phi = {v: Fraction(rng.randint(0, 5)) for v in g.vertices()}
        delta = Fraction(rng.randint(1, 4), 4)
        res = phase1(g, phi, delta)
        f2 = phase2(res)
        total = sum(phi.values(), Fraction(0))
        assert g.total_length(f2) <= 2 * (1 + delta) * total


def test_isolated_forest_empty_graph_cases():
    g = Graph(["a"], [])
    out = run_pc_clustering(g, {"a": 0}, Fraction(1, 2))
    assert out.iso_nodes == ("a",)
    assert out.depth == 0
    assert out.t_sets["a"] == frozenset({"a"})


def test_isolated_forest_single_dead_root_spans():
    g = Graph.from_edges([(1, "u", "v", 2)])
    out = run_pc_clustering(g, {"u": 5, "v": 5}, Fraction(1, 2))
    root = out.iso_nodes[-1] if out.iso_parent else out.iso_nodes[0]
    roots = [v for v in out.iso_nodes if v not in out.iso_parent]
    assert len(roots) == 1
    assert out.s_sets[roots[0]] == frozenset({"u", "v"})


def test_lemma4_identity_random():
    rng = random.Random(13)
    for trial in range(25):
        g, _ = generate_grid_instance(rng.randint(2, 4), rng.randint(2, 5), 0,
                                      max_length=3, seed=trial)
        phi = {v: Fraction(rng.randint(0, 4)) for v in g.vertices()}
        out = run_pc_clustering(g, phi, Fraction(1, 4))  # validators assert Lemma 4
        validate_pc_output(out)


def test_depth_bound_holds():
    rng = random.Random(21)
    for trial in range(25):
        g, _ = generate_grid_instance(2, rng.randint(2, 6), 0, max_length=3, seed=trial)
        phi = {v: Fraction(rng.randint(0, 6)) for v in g.vertices()}
        delta = Fraction(rng.randint(1, 3), 2)
        out = run_pc_clustering(g, phi, delta)
        assert out.depth <= depth_bound({v: phi.get(v, 0) for v in g.vertices()}, delta) + 1e-9


def test_gw_single_edge():
    g = Graph.from_edges([(1, "s", "t", 4)])
    f = gw_steiner_forest(g, [("s", "t")])
    assert f == {1}


def test_gw_two_demands_share_path():
    g = Graph.from_edges(
        [(1, "a", "b", 1), (2, "b", "c", 1), (3, "c", "d", 1)]
    )
    f = gw_steiner_forest(g, [("a", "c"), ("b", "d")])
    assert is_feasible(g, f, [("a", "c"), ("b", "d")])
    opt = brute_force_opt(g, [("a", "c"), ("b", "d")]).opt
    assert g.total_length(f) <= 2 * opt


def test_gw_infeasible_demand_signaled():
    g = Graph.from_edges([(1, "a", "b", 1), (2, "c", "d", 1)])
    with pytest.raises(InfeasibleDemandError):
        gw_steiner_forest(g, [("a", "c")])


def test_gw_ratio_at_most_two_on_grids():
    viol = 0
    for seed in range(25):
        g, dem = generate_grid_instance(4, 4, 1 + seed % 4, max_length=3, seed=seed)
        f = gw_steiner_forest(g, dem)
        assert is_feasible(g, f, dem)
        opt = brute_force_opt(g, dem).opt
        if g.total_length(f) > 2 * opt:
            viol += 1
    assert viol == 0


def test_decompose_no_demands():
    g, _ = generate_grid_instance(3, 3, 0, seed=0)
    dec = decompose_instance(g, [], Fraction(1, 2), Fraction(1, 4))
    assert dec.subinstances == []


def test_decompose_star_single_subinstance():
    g = Graph.from_edges(
        [(1, "c", "s", 1), (2, "c", "t", 1), (3, "c", "z", 5)]
    )
    dec = decompose_instance(g, [("s", "t")], Fraction(1, 2), Fraction(1, 4))
    hit = [sub for sub in dec.subinstances if sub.demands]
    assert len(hit) == 1
    assert hit[0].demands == [("s", "t")]
    assert is_feasible(hit[0].graph, hit[0].tree_edges, hit[0].demands)


def test_decompose_quality_small():
    for seed in range(8):
        g, dem = generate_grid_instance(5, 5, 3, max_length=3, seed=seed)
        dec = decompose_instance(g, dem, Fraction(1, 2), Fraction(1, 4))
        opt = brute_force_opt(g, dem).opt
        parts = sum(
            (brute_force_opt(s.graph, s.demands).opt for s in dec.subinstances if s.demands),
            Fraction(0),
        )
        assert parts <= (1 + Fraction(1, 2)) * opt


def test_decompose_coverage_and_overlap():
    for seed in range(6):
        g, dem = generate_grid_instance(4, 5, 3, max_length=2, seed=seed)
        dec = decompose_instance(g, dem, Fraction(1, 2), Fraction(1, 4))
        validate_decomposition(dec)
        covered = [d for s in dec.subinstances for d in s.demands]
        assert sorted(covered) == sorted(dem)
