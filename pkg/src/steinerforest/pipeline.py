"""End-to-end drivers: spanner hook, thinning, DP solve, lifting, and modes.

The solve pipeline contracts a cheap edge class (thinning), decomposes and
balances, rounds to unit lengths, runs the configuration DP with the
region-simple tables, and lifts the answer back, re-adding contracted edges
as needed.  The decomposition wrapper splits instances first and merges the
per-piece solutions.  A pluggable spanner hook defaults to the identity.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import branchdecomp
from .branchdecomp import balance, boundaries, heuristic_decompose, validate, width
from .clustering import (
    InfeasibleDemandError,
    decompose_instance,
    gw_steiner_forest,
)
from .configs import active_sets, simple_subpartitions
from .dpsolver import DPInfeasibleError, dp_solve, reconstruct
from .graph import (
    ContractionRecord,
    DisjointSets,
    Graph,
    contract_edges,
    is_feasible,
    normalize_demands,
    shortest_path_forest,
)
from .instances import ResultRecord
from .layers import build_regions, contract_alpha, validate_layers, validate_regions
from .oracle import brute_force_opt
from .reduction import adapt_decomposition, unit_length_reduce


MODES = ("exact", "gw", "pc-cluster", "ptas", "dp-only")


@dataclass
class PipelineConfig:
    epsilon: Fraction = Fraction(1, 2)
    delta: Fraction = Fraction(1, 4)
    mode: str = "ptas"
    seed: int = 0
    c: Fraction = Fraction(1)  # spanner length constant (identity default)
    p: int = None  # thinning classes; ceil(c/epsilon) when unset
    spanner: object = None  # callable (graph, demands, eps) -> subgraph
    decomposition: object = None  # BranchDecomposition override
    validate_bounds: bool = True

    def __post_init__(self):
        self.epsilon = Fraction(self.epsilon)
        self.delta = Fraction(self.delta)
        self.c = Fraction(self.c)
        if not (0 < self.epsilon <= 1):
            raise ValueError("epsilon must lie in (0, 1]")
        if self.mode not in MODES:
            raise ValueError("unknown mode %r" % (self.mode,))
        if self.p is None:
            self.p = max(1, math.ceil(self.c / self.epsilon))


def spanner_stage(g, demands, eps, spanner=None):
    """Identity by default; a plug-in may return any demand-preserving subgraph."""
    if spanner is None:
        return g
    return spanner(g, demands, eps)


def thinning_stage(g, p, root=None):
    """Split edges into p breadth-first level classes and contract the lightest.

    Returns (contracted graph, contracted edge set S, contraction record).
    len(S) <= len(g)/p by pigeonhole.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if root is None:
        root = min(g.vertices(), key=repr)
    level = {}
    spf = shortest_path_forest(g, {root})
    for v in g.vertices():
        if v in spf.dist:
            level[v] = int(spf.dist[v])
    classes = {}
    for e in g.edge_ids():
        u, v = g.endpoints(e)
        lu = level.get(u)
        lv = level.get(v)
        cls = min(x for x in (lu, lv) if x is not None) % p if (lu is not None or lv is not None) else 0
        classes.setdefault(cls, []).append(e)
    best_cls = min(
        range(p),
        key=lambda c: (g.total_length(classes.get(c, [])), c),
    )
    s_edges = frozenset(classes.get(best_cls, []))
    g2, record = contract_edges(g, s_edges)
    return g2, s_edges, record


def lift_stage(g, solution, s_edges, record, demands):
    """Uncontract the thinning class: re-add contracted edges inside blobs so
    the solution and demands reconnect; extra length is at most len(S)."""
    if not s_edges:
        return frozenset(solution)
    ds = DisjointSets(g.vertices())
    for e in s_edges:
        u, v = g.endpoints(e)
        ds.union(u, v)
    portals = {}

    def add_portal(v):
        r = ds.find(v)
        portals.setdefault(r, set()).add(v)

    for e in solution:
        for v in g.endpoints(e):
            add_portal(v)
    for s, t in demands:
        add_portal(s)
        add_portal(t)
    blob_edges = {}
    for e in s_edges:
        u, _ = g.endpoints(e)
        blob_edges.setdefault(ds.find(u), []).append(e)
    out = set(solution)
    for r, ports in portals.items():
        pool = blob_edges.get(r)
        if not pool or len(ports) < 2:
            continue
        out |= _portal_subtree(g, pool, sorted(ports, key=repr))
    return frozenset(out)


def _portal_subtree(g, pool, ports):
    adj = {}
    for e in pool:
        u, v = g.endpoints(e)
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    root = ports[0]
    parent = {root: None}
    stack = [root]
    while stack:
        x = stack.pop()
        for y, e in sorted(adj.get(x, ()), key=lambda t: t[1]):
            if y not in parent:
                parent[y] = (x, e)
                stack.append(y)
    keep = set()
    for pt in ports[1:]:
        cur = pt
        while parent.get(cur) is not None:
            x, e = parent[cur]
            if e in keep:
                break
            keep.add(e)
            cur = x
    return keep


@dataclass
class DPRun:
    """Everything the down-stack DP produced, for inspection and reports."""

    reduction: object
    bd_width: int
    balanced_width: int
    alpha: Fraction
    beta: Fraction
    gamma: float
    cost: Fraction
    unit_edges: frozenset
    solution: frozenset


def solve_dp_only(g, demands, config):
    """Theorem-4 path: decomposition, balance, reduction, regions, simple DP."""
    demands = normalize_demands(demands)
    if not demands:
        return DPRun(None, 0, 0, Fraction(0), Fraction(0), 0.0, Fraction(0), frozenset(), frozenset())
    eps = config.epsilon
    red = unit_length_reduce(g, demands, eps, config.c)
    unit = red.unit_graph
    if unit.n_edges == 0 or not red.demands:
        solution = red.uncontract_solution(frozenset())
        return DPRun(red, 0, 0, Fraction(0), Fraction(0), 0.0,
                     g.total_length(solution), frozenset(), solution)
    if config.decomposition is not None:
        bd0 = config.decomposition
        problem = validate(g, bd0)
        if problem is not None:
            raise ValueError("supplied decomposition invalid: %s" % problem)
    else:
        bd0 = heuristic_decompose(g)
    bd_unit = adapt_decomposition(bd0, red)
    w = max(width(unit, bd_unit), 1)
    bal = balance(bd_unit)
    assert validate(unit, bal) is None
    bounds = boundaries(unit, bal)
    m = unit.n_edges
    gamma = 3 * math.log2(m) + 1 if m > 1 else 1.0
    beta = eps / (8 * (2 * w - 1))
    alpha = 2 * config.c * (2 * w - 1) / eps
    layers = contract_alpha(unit, bal, bounds, alpha)
    if config.validate_bounds:
        validate_layers(unit, bal, bounds, layers, alpha)
    acts, _ = active_sets(unit, bal, bounds, red.demands)
    covers = {}
    families = {}
    for node in bal.nodes():
        cov = build_regions(unit, node, bounds, layers[node], beta, acts[node])
        covers[node] = cov
        if config.validate_bounds:
            validate_regions(unit, node, bounds, layers[node], cov, alpha, beta)
        families[node] = simple_subpartitions(acts[node], bounds[node], cov, gamma)

    from .partitions import join_on

    allowed_memo = {}

    def allowed_fn(node, pi_in, pi_out):
        # admissible overall partitions depend on (in, out) only through
        # their join, which collapses most table cells onto one memo entry
        base = pi_in.join(pi_out)
        key = (id(node), base)
        got = allowed_memo.get(key)
        if got is None:
            act = acts[node]
            bound = pi_in.ground
            got = set()
            for parts in families[node]:
                pa = join_on(act, base, parts)
                if pa.restrict(bound) == base:
                    got.add(pa)
            allowed_memo[key] = got
        return got

    table = dp_solve(unit, bal, red.demands, allowed_fn=allowed_fn)
    unit_sol = reconstruct(table)
    solution = red.uncontract_solution(unit_sol)
    assert is_feasible(g, solution, demands), "lifted DP solution infeasible"
    return DPRun(
        reduction=red,
        bd_width=w,
        balanced_width=width(unit, bal),
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        cost=table.cost,
        unit_edges=unit_sol,
        solution=solution,
    )


def _solve_one_instance(g, demands, config):
    """spanner -> thinning -> DP -> lift, on one (sub)instance."""
    demands = normalize_demands(demands)
    if not demands:
        return frozenset()
    g1 = spanner_stage(g, demands, config.epsilon, config.spanner)
    g2, s_edges, record = thinning_stage(g1, config.p)
    parent = record.parent_map()

    def image(v):
        while v in parent:
            v = parent[v]
        return v

    mapped = []
    satisfied_free = []
    for s, t in demands:
        a, b = image(s), image(t)
        if a == b:
            satisfied_free.append((s, t))
        else:
            mapped.append((a, b))
    sub_config = PipelineConfig(
        epsilon=config.epsilon,
        delta=config.delta,
        mode="dp-only",
        seed=config.seed,
        c=config.c,
        p=config.p,
        validate_bounds=config.validate_bounds,
    )
    if mapped:
        run = solve_dp_only(g2, mapped, sub_config)
        sol2 = run.solution
    else:
        sol2 = frozenset()
    lifted = lift_stage(g1, sol2, s_edges, record, demands)
    assert is_feasible(g1, lifted, demands), "lifted solution infeasible"
    return lifted


def merge_solutions(g, solutions):
    """Union the edge sets, then drop the longest edge of every cycle."""
    edges = sorted(
        {e for sol in solutions for e in sol},
        key=lambda e: (g.length(e), e),
    )
    ds = DisjointSets(g.vertices())
    keep = set()
    for e in edges:
        u, v = g.endpoints(e)
        if ds.same(u, v):
            continue  # dropping it removes the max-length edge of a cycle
        ds.union(u, v)
        keep.add(e)
    return frozenset(keep)


def run_ptas(g, demands, config=None, oracle=False, instance_name=""):
    """Full pipeline dispatch per config.mode; returns a ResultRecord."""
    if config is None:
        config = PipelineConfig()
    demands = normalize_demands(demands)
    started = time.perf_counter()
    params = {
        "epsilon": config.epsilon,
        "delta": config.delta,
        "c": config.c,
        "p": config.p,
        "seed": config.seed,
        "mode": config.mode,
    }
    if config.mode == "exact":
        res = brute_force_opt(g, demands)
        solution = res.edges
    elif config.mode == "gw":
        solution = gw_steiner_forest(g, demands)
    elif config.mode == "pc-cluster":
        solution = _run_decomposed(g, demands, config, use_dp=False)
    elif config.mode == "ptas":
        solution = _run_decomposed(g, demands, config, use_dp=True)
    elif config.mode == "dp-only":
        run = solve_dp_only(g, demands, config)
        solution = run.solution
        params["alpha"] = run.alpha
        params["beta"] = run.beta
        params["gamma"] = run.gamma
        params["width"] = run.bd_width
    else:
        raise ValueError("unknown mode %r" % (config.mode,))
    elapsed = time.perf_counter() - started
    feasible = is_feasible(g, solution, demands)
    record = ResultRecord(
        algorithm=config.mode,
        edges=sorted(solution),
        total_length=g.total_length(solution),
        feasible=feasible,
        parameters=params,
        wall_time_s=elapsed,
        instance=instance_name,
    )
    if oracle:
        res = brute_force_opt(g, demands)
        record.opt = res.opt
        if res.opt > 0:
            record.ratio = float(Fraction(record.total_length) / res.opt)
        else:
            record.ratio = 1.0
    record.check(g)
    return record


def _run_decomposed(g, demands, config, use_dp):
    if not demands:
        return frozenset()
    dec = decompose_instance(
        g, demands, config.epsilon, config.delta, validate=config.validate_bounds
    )
    parts = []
    for sub in dec.subinstances:
        if not sub.demands:
            continue
        if use_dp:
            parts.append(_solve_one_instance(sub.graph, sub.demands, config))
        else:
            parts.append(gw_steiner_forest(sub.graph, sub.demands))
    merged = merge_solutions(g, parts)
    assert is_feasible(g, merged, demands), "merged decomposition solution infeasible"
    return merged
