"""Primal-dual clustering: energy-driven moat growing with zombie protection.

Phase 1 grows budgets against edge lengths in simulated time, contracting
edges as they fill; Phase 2 prunes forest edges dangling at dead vertices
unless a recent death protected them.  The isolated-dead-vertex forest built
from the contraction history indexes the output subinstances.  The same
event loop, run with active/inactive categories keyed to demand
satisfaction, yields the classical 2-approximation used to seed the
decomposition wrapper.

Two engines produce bit-identical output: a literal per-tick reference and a
fast version on the mergeable-heap structure.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .graph import (
    ContractionRecord,
    DisjointSets,
    Graph,
    connected_components,
    contract_edges,
    is_acyclic,
    is_feasible,
    normalize_demands,
)
from .priority import CategoryState


class InfeasibleDemandError(ValueError):
    """A demand's endpoints lie in different connected components."""


LIVING = "living"
DEAD = "dead"


@dataclass
class Phase1Result:
    graph: Graph  # the phase input graph
    f1: tuple  # contracted edge ids in contraction order
    save: frozenset
    record: ContractionRecord
    dead_time: dict  # vertex -> death time, for every vertex that died
    phi0: dict  # vertex -> first-assigned energy (originals and created)
    delta: Fraction
    t_final: Fraction


def _prepare_phase1(graph, phi_in, delta):
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    phi = {v: Fraction(phi_in.get(v, 0)) for v in graph.vertices()}
    if any(p < 0 for p in phi.values()):
        raise ValueError("energies must be nonnegative")
    return delta, phi


def _phase1_fast(graph, phi_in, delta):
    """Event-driven simulation on the mergeable-heap structure."""
    delta, phi_now = _prepare_phase1(graph, phi_in, delta)
    phi0 = dict(phi_now)
    record = ContractionRecord.for_graph(graph)
    dead_time = {v: Fraction(0) for v in graph.vertices() if phi_now[v] == 0}
    t = Fraction(0)
    save = set()
    f1 = []

    cats = {v: (LIVING if phi_now[v] > 0 else DEAD) for v in graph.vertices()}
    cs = CategoryState(graph, cats, categories=(LIVING, DEAD))
    death_when = {}
    heap = []
    for v, p in phi_now.items():
        if p > 0:
            death_when[v] = p
            heapq.heappush(heap, (p, _sort_key(v), v))

    def phi_at(v):
        if v not in death_when:
            return Fraction(0)
        rem = death_when[v] - t
        return rem if rem > 0 else Fraction(0)

    def d_of(v):
        # scheduled vertices (including one dying right now) have lifetime t
        return t if v in death_when else dead_time[v]

    while death_when:
        while heap and (heap[0][2] not in death_when or death_when[heap[0][2]] != heap[0][0]):
            heapq.heappop(heap)
        assert heap, "living vertex without scheduled death"
        delta1 = heap[0][0] - t
        delta2 = None
        m_ll = cs.try_find_min((LIVING, LIVING))
        if m_ll is not None:
            delta2 = m_ll[1] / 2
        m_ld = cs.try_find_min((LIVING, DEAD))
        if m_ld is not None and (delta2 is None or m_ld[1] < delta2):
            delta2 = m_ld[1]
        step = delta1 if delta2 is None else min(delta1, delta2)
        t += step
        if step > 0:
            cs.decrease_cost((LIVING, LIVING), 2 * step)
            cs.decrease_cost((LIVING, DEAD), step)
        # deaths at this instant come first: only edges with a living
        # endpoint are contraction events
        while heap:
            when, _, v = heap[0]
            if v not in death_when or death_when[v] != when:
                heapq.heappop(heap)
                continue
            if when > t:
                break
            heapq.heappop(heap)
            del death_when[v]
            dead_time[v] = t
            cs.change_category(v, DEAD)
        while True:
            zero = None
            for bicat in ((LIVING, LIVING), (LIVING, DEAD)):
                got = cs.try_find_min(bicat)
                if got is not None and got[1] == 0 and (zero is None or got[0] < zero):
                    zero = got[0]
            if zero is None:
                break
            eid = zero
            u, v = cs.endpoints(eid)
            # zombie rule: a dead endpoint recently deceased, joined to a
            # vertex that is still living at this instant
            for x, y in ((u, v), (v, u)):
                if phi_at(x) == 0 and phi_at(y) > 0 and t < (1 + delta) * d_of(x):
                    save.add(eid)
                    break
            new_phi = phi_at(u) + phi_at(v)
            du, dv = d_of(u), d_of(v)
            death_when.pop(u, None)
            death_when.pop(v, None)
            w = cs.contract_edge(eid, LIVING if new_phi > 0 else DEAD)
            record.record(w, u, v, eid)
            phi0[w] = new_phi
            f1.append(eid)
            if new_phi > 0:
                death_when[w] = t + new_phi
                heapq.heappush(heap, (t + new_phi, _sort_key(w), w))
            else:
                dead_time[w] = max(du, dv)
    return Phase1Result(
        graph=graph,
        f1=tuple(f1),
        save=frozenset(save),
        record=record,
        dead_time=dead_time,
        phi0=phi0,
        delta=delta,
        t_final=t,
    )


def _sort_key(v):
    return v if isinstance(v, int) else hash(v)


def phase1(graph, phi, delta, engine="fast"):
    """Run the growth phase; returns contracted edges, SAVE set, and provenance."""
    if engine == "fast":
        return _phase1_fast(graph, phi, delta)
    if engine == "naive":
        return _phase1_naive(graph, phi, delta)
    raise ValueError("engine must be 'fast' or 'naive'")


def _phase1_naive(graph, phi_in, delta):
    """Literal tick loop rescanning every vertex and edge per event."""
    delta, phi = _prepare_phase1(graph, phi_in, delta)
    phi0 = dict(phi)
    record = ContractionRecord.for_graph(graph)
    length = {e: graph.length(e) for e in graph.edge_ids()}
    ends = {e: graph.endpoints(e) for e in graph.edge_ids()}
    d = {v: Fraction(0) for v in graph.vertices()}
    dead_time = {v: Fraction(0) for v in graph.vertices() if phi[v] == 0}
    t = Fraction(0)
    save = set()
    f1 = []

    while True:
        living = {v for v, p in phi.items() if p > 0}
        if not living:
            break
        d1 = min(phi[v] for v in living)
        d2 = None
        for e, ln in length.items():
            u, v = ends[e]
            hot = (u in living) + (v in living)
            if hot == 0:
                continue
            cand = ln / 2 if hot == 2 else ln
            if d2 is None or cand < d2:
                d2 = cand
        step = d1 if d2 is None else min(d1, d2)
        t += step
        for v in living:
            d[v] += step
            phi[v] -= step
            if phi[v] == 0:
                dead_time[v] = t
        for e in length:
            u, v = ends[e]
            hot = (u in living) + (v in living)
            if hot:
                length[e] -= step * hot
        while True:
            zeros = [
                e
                for e, ln in length.items()
                if ln == 0 and (phi[ends[e][0]] > 0 or phi[ends[e][1]] > 0)
            ]
            if not zeros:
                break
            e = min(zeros)
            u, v = ends[e]
            for x, y in ((u, v), (v, u)):
                if phi[x] == 0 and phi[y] > 0 and t < (1 + delta) * d[x]:
                    save.add(e)
                    break
            w = record.fresh_id()
            record.record(w, u, v, e)
            phi[w] = phi[u] + phi[v]
            phi0[w] = phi[w]
            d[w] = max(d[u], d[v])
            if phi[w] == 0:
                dead_time[w] = d[w]
            del phi[u], phi[v], d[u], d[v]
            f1.append(e)
            for e2 in list(length):
                a, b = ends[e2]
                na = w if a in (u, v) else a
                nb = w if b in (u, v) else b
                if na == nb:
                    del length[e2], ends[e2]
                else:
                    ends[e2] = (na, nb)
    return Phase1Result(
        graph=graph,
        f1=tuple(f1),
        save=frozenset(save),
        record=record,
        dead_time=dead_time,
        phi0=phi0,
        delta=delta,
        t_final=t,
    )


def _cross_counts(record, leaves_touch, both_indicator):
    """Crossing-edge count and XOR of crossing edge ids per forest vertex.

    An edge crosses S_v when exactly one endpoint lies inside, so counts
    follow TouchSum(v) - 2*Both(v) and XORs cancel internal edges; both
    aggregate bottom-up over the contraction forest in one pass.
    """
    cnt = {}
    xor = {}
    both = {}
    for x, (t_cnt, t_xor) in leaves_touch.items():
        cnt[x] = t_cnt
        xor[x] = t_xor
        both[x] = 0
    for w in record.order:
        a, b = record.children[w]
        both[w] = both[a] + both[b] + both_indicator(w)
        cnt[w] = cnt[a] + cnt[b] - 2 * both_indicator(w)
        xor[w] = xor[a] ^ xor[b]
    return cnt, xor


def _edge_chains(e, ends, parent, stop):
    """Forest vertices the edge crosses: each endpoint's ancestors below the
    merge vertex (inclusive of the endpoints)."""
    out = []
    for x in ends:
        cur = x
        while cur != stop:
            out.append(cur)
            cur = parent.get(cur)
            if cur is None:
                break
    return out


def phase2(p1):
    """Prune forest edges dangling at dead vertices; SAVE (zombie) edges survive.

    Runs in rounds: every dead vertex whose single crossing edge is
    unprotected fires at once.  A vertex with exactly one crossing edge keeps
    its witness no matter what else is deleted, so batching matches the
    one-at-a-time fixpoint.
    """
    g = p1.graph
    record = p1.record
    dead = p1.dead_time
    alive = set(p1.f1)
    while True:
        touch = {}
        for e in alive:
            for x in g.endpoints(e):
                t = touch.get(x)
                if t is None:
                    touch[x] = [1, e]
                else:
                    t[0] += 1
                    t[1] ^= e
        leaves_touch = {v: (0, 0) for v in g.vertices()}
        for x, t in touch.items():
            leaves_touch[x] = (t[0], t[1])
        cnt, xor = _cross_counts(
            record, leaves_touch, lambda w: 1 if record.via_edge[w] in alive else 0
        )
        doomed = set()
        for v in dead:
            if cnt.get(v) == 1:
                e = xor[v]
                if e not in p1.save:
                    doomed.add(e)
        if not doomed:
            return frozenset(alive)
        alive -= doomed


@dataclass
class PCOutput:
    """Phases 1-2 output plus the isolated-dead-vertex forest."""

    graph: Graph
    phase1: Phase1Result
    f2: frozenset
    iso_nodes: tuple
    iso_parent: dict  # node -> parent node in the isolated forest
    s_sets: dict  # node -> frozenset of phase-graph vertices
    t_sets: dict  # node -> frozenset: vertex set of the component T_v (may be empty)
    t_edges: dict  # node -> frozenset of F2 edge ids
    depth: int  # max edges on a root-to-leaf path of the forest

    def g_v(self, v):
        return self.graph.induced_subgraph(self.s_sets[v])

    def children(self, v):
        return [u for u, p in self.iso_parent.items() if p == v]


def build_isolated_forest(p1, f2):
    """Isolated dead vertices, their nesting forest, and the components T_v."""
    g = p1.graph
    record = p1.record
    parent = record.parent_map()
    dead = p1.dead_time
    touch = {}
    for e in f2:
        for x in g.endpoints(e):
            t = touch.get(x)
            if t is None:
                touch[x] = [1, e]
            else:
                t[0] += 1
                t[1] ^= e
    leaves_touch = {v: (0, 0) for v in g.vertices()}
    for x, t in touch.items():
        leaves_touch[x] = (t[0], t[1])
    cnt, _ = _cross_counts(
        record, leaves_touch, lambda w: 1 if record.via_edge[w] in f2 else 0
    )
    iso = [v for v in dead if cnt.get(v, 0) == 0]
    iso_set = set(iso)
    memo = {}  # vertex -> nearest isolated dead ancestor-or-self

    def anc_or_self(x):
        chain = []
        while x is not None and x not in memo:
            if x in iso_set:
                memo[x] = x
                break
            chain.append(x)
            x = parent.get(x)
        val = memo.get(x) if x is not None else None
        for c in chain:
            memo[c] = val
        return val

    iso_parent = {}
    for v in iso:
        p = anc_or_self(parent.get(v))
        if p is not None:
            iso_parent[v] = p
    # depth in edges
    depth_of = {}

    def depth(v):
        if v in depth_of:
            return depth_of[v]
        p = iso_parent.get(v)
        d = 0 if p is None else depth(p) + 1
        depth_of[v] = d
        return d

    max_depth = 0
    for v in iso:
        max_depth = max(max_depth, depth(v))

    s_sets = {v: p1.record.s_set(v) for v in iso}
    kids = {}
    for u, p in iso_parent.items():
        kids.setdefault(p, []).append(u)
    t_sets = {}
    for v in iso:
        tv = set(s_sets[v])
        for u in kids.get(v, ()):
            tv -= s_sets[u]
        t_sets[v] = frozenset(tv)
    home = {}
    for v in iso:
        for x in t_sets[v]:
            home[x] = v
    t_edges = {v: set() for v in iso}
    for e in f2:
        x, y = g.endpoints(e)
        hx = home.get(x)
        if hx is not None and hx == home.get(y):
            t_edges[hx].add(e)
    t_edges = {v: frozenset(es) for v, es in t_edges.items()}
    iso.sort(key=_sort_key)
    return PCOutput(
        graph=g,
        phase1=p1,
        f2=f2,
        iso_nodes=tuple(iso),
        iso_parent=iso_parent,
        s_sets=s_sets,
        t_sets=t_sets,
        t_edges=t_edges,
        depth=max_depth,
    )


def run_pc_clustering(graph, phi, delta, engine="fast", validate=True):
    p1 = phase1(graph, phi, delta, engine=engine)
    f2 = phase2(p1)
    out = build_isolated_forest(p1, f2)
    if validate:
        validate_pc_output(out)
    return out


def depth_bound(phi0_originals, delta):
    """Lemma bound on the isolated-forest depth, in edges (1 + log_{1+d} sum/min)."""
    positives = [p for p in phi0_originals.values() if p > 0]
    if not positives:
        return 1
    total = sum(positives, Fraction(0))
    ratio = total / min(positives)
    return 1 + math.log(float(ratio)) / math.log(1 + float(delta))


def validate_pc_output(out):
    """Assert the proved per-run bounds and structural identities."""
    p1 = out.phase1
    g = out.graph
    phi0_orig = {v: p1.phi0[v] for v in g.vertices()}
    # length bound: len(F2) <= 2(1+delta) * sum phi0
    total_phi = sum(phi0_orig.values(), Fraction(0))
    f2_len = g.total_length(out.f2)
    assert f2_len <= 2 * (1 + p1.delta) * total_phi, "phase-2 length bound violated"
    # depth bound
    assert out.depth <= depth_bound(phi0_orig, p1.delta) + 1e-9, "depth bound violated"
    # F2 stays a forest
    assert is_acyclic(g, out.f2), "pruned output contains a cycle"
    # component identity: each nonempty T_v set is exactly one F2 component
    comp_of = {}
    ds = DisjointSets(g.vertices())
    for e in out.f2:
        u, v = g.endpoints(e)
        ds.union(u, v)
    for v in g.vertices():
        comp_of.setdefault(ds.find(v), set()).add(v)
    for v in out.iso_nodes:
        tv = out.t_sets[v]
        if not tv:
            continue
        root = ds.find(next(iter(tv)))
        assert comp_of[root] == set(tv), "T_v is not a full component of F2"
    # T-sets partition the phase-graph vertices
    union = set()
    for v in out.iso_nodes:
        assert not (union & out.t_sets[v]), "T_v sets overlap"
        union |= out.t_sets[v]
    assert union == set(g.vertices()), "T_v sets do not cover the graph"
    # each edge appears in at most depth+1 of the subgraphs
    count = {}  # each contained edge is seen once per endpoint, so twice per node
    for w in out.iso_nodes:
        sw = out.s_sets[w]
        for x in sw:
            for e in g.incident(x):
                if g.other_endpoint(e, x) in sw:
                    count[e] = count.get(e, 0) + 1
    for e, cnt in count.items():
        assert cnt <= 2 * (out.depth + 1), "edge appears in too many subgraphs"
    return True


# -- Goemans-Williamson 2-approximation ------------------------------------

ACTIVE = "active"
INACTIVE = "inactive"


def gw_steiner_forest(graph, demands, return_order=False):
    """Primal-dual 2-approximate Steiner forest via the categorized structure.

    Components grow while they separate some demand; tight edges merge
    components; the grown forest is pruned back to the union of demand paths.
    """
    demands = normalize_demands(demands)
    for s, t in demands:
        if not (graph.has_vertex(s) and graph.has_vertex(t)):
            raise InfeasibleDemandError("demand endpoint missing from graph")
    if not demands:
        return (frozenset(), ()) if return_order else frozenset()
    ds = DisjointSets(graph.vertices())
    for e in graph.edge_ids():
        u, v = graph.endpoints(e)
        ds.union(u, v)
    for s, t in demands:
        if not ds.same(s, t):
            raise InfeasibleDemandError("demand (%r, %r) is disconnected" % (s, t))

    counts = {}  # component -> {demand index -> endpoints inside}
    for i, (s, t) in enumerate(demands):
        counts.setdefault(s, {})[i] = counts.get(s, {}).get(i, 0) + 1
        counts.setdefault(t, {})[i] = counts.get(t, {}).get(i, 0) + 1

    def is_active(cnt):
        return any(c == 1 for c in cnt.values())

    cats = {}
    for v in graph.vertices():
        cnt = counts.get(v)
        cats[v] = ACTIVE if cnt and is_active(cnt) else INACTIVE
    cs = CategoryState(graph, cats, categories=(ACTIVE, INACTIVE))
    n_active = sum(1 for c in cats.values() if c == ACTIVE)
    grown = []
    while n_active > 0:
        step = None
        got = cs.try_find_min((ACTIVE, ACTIVE))
        if got is not None:
            step = got[1] / 2
        got = cs.try_find_min((ACTIVE, INACTIVE))
        if got is not None and (step is None or got[1] < step):
            step = got[1]
        assert step is not None, "active component with no usable edge"
        if step > 0:
            cs.decrease_cost((ACTIVE, ACTIVE), 2 * step)
            cs.decrease_cost((ACTIVE, INACTIVE), step)
        while True:
            zero = None
            for bicat in ((ACTIVE, ACTIVE), (ACTIVE, INACTIVE)):
                got = cs.try_find_min(bicat)
                if got is not None and got[1] == 0 and (zero is None or got[0] < zero):
                    zero = got[0]
            if zero is None:
                break
            u, v = cs.endpoints(zero)
            cu = counts.pop(u, {})
            cv = counts.pop(v, {})
            if len(cu) < len(cv):
                cu, cv = cv, cu
            for i, c in cv.items():
                cu[i] = cu.get(i, 0) + c
            merged = {i: c for i, c in cu.items() if c == 1}
            was_active_u = cs.category(u) == ACTIVE
            was_active_v = cs.category(v) == ACTIVE
            now_active = bool(merged)
            w = cs.contract_edge(zero, ACTIVE if now_active else INACTIVE)
            counts[w] = cu
            grown.append(zero)
            n_active -= int(was_active_u) + int(was_active_v) - int(now_active)
    pruned = _prune_to_demand_paths(graph, grown, demands)
    if return_order:
        return pruned, tuple(grown)
    return pruned


def _prune_to_demand_paths(graph, forest_edges, demands):
    """Keep exactly the forest edges lying on some demand's tree path."""
    adj = {}
    for e in forest_edges:
        u, v = graph.endpoints(e)
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    parent = {}
    depth = {}
    for root in sorted(adj, key=_sort_key):
        if root in depth:
            continue
        depth[root] = 0
        stack = [root]
        while stack:
            x = stack.pop()
            for y, e in adj[x]:
                if y not in depth:
                    depth[y] = depth[x] + 1
                    parent[y] = (x, e)
                    stack.append(y)
    keep = set()
    for s, t in demands:
        a, b = s, t
        while a != b:
            if depth.get(a, -1) < depth.get(b, -1):
                a, b = b, a
            x, e = parent[a]
            keep.add(e)
            a = x
    return frozenset(keep)


# -- instance decomposition wrapper -----------------------------------------


@dataclass
class Subinstance:
    node: object  # isolated-forest node this came from
    graph: Graph  # induced subgraph of the input graph
    tree_edges: frozenset  # connecting tree inside the subgraph
    demands: list

    def tree_length(self):
        return self.graph.total_length(self.tree_edges)


@dataclass
class DecomposedInstance:
    graph: Graph
    demands: list
    eps: Fraction
    delta: Fraction
    f_star: frozenset
    pc: PCOutput
    subinstances: list = field(default_factory=list)
    blob_of_vertex: dict = field(default_factory=dict)  # input vertex -> blob or itself


def decompose_instance(graph, demands, eps, delta, engine="fast", validate=True):
    """Split one Steiner-forest instance into overlap-light subinstances.

    Seeds with the 2-approximation, contracts its trees, assigns energy
    proportional to tree length (short trees get none), runs the clustering
    phases, and uncontracts to produce per-node subgraphs, trees, and demand
    groups.
    """
    eps = Fraction(eps)
    delta = Fraction(delta)
    if not (0 < eps <= 1):
        raise ValueError("eps must lie in (0, 1]")
    demands = normalize_demands(demands)
    base = DecomposedInstance(
        graph=graph, demands=demands, eps=eps, delta=delta,
        f_star=frozenset(), pc=None,
    )
    if not demands:
        return base
    f_star = gw_steiner_forest(graph, demands)
    base = DecomposedInstance(
        graph=graph, demands=demands, eps=eps, delta=delta, f_star=f_star, pc=None,
    )
    comps = connected_components(graph, f_star)
    k = len(comps)
    comp_edges = []
    for comp in comps:
        comp_edges.append(frozenset(e for e in f_star if graph.endpoints(e)[0] in comp))
    g2, record = contract_edges(graph, f_star)
    parent = record.parent_map()

    def blob_of(x):
        while x in parent:
            x = parent[x]
        return x

    len_fstar = graph.total_length(f_star)
    threshold = eps / (2 * k) * len_fstar
    phi = {v: Fraction(0) for v in g2.vertices()}
    blob_vertex_sets = {}
    for comp, edges_k in zip(comps, comp_edges):
        u_k = blob_of(next(iter(comp)))
        blob_vertex_sets[u_k] = (comp, edges_k)
        len_k = graph.total_length(edges_k)
        if len_k >= threshold:
            phi[u_k] = 2 / eps * len_k
    pc = run_pc_clustering(g2, phi, delta, engine=engine, validate=validate)
    base.pc = pc
    for x in graph.vertices():
        base.blob_of_vertex[x] = blob_of(x)

    def expand(vs):
        out = set()
        for x in vs:
            hit = blob_vertex_sets.get(x)
            if hit is None:
                out.add(x)
            else:
                out |= hit[0]
        return out

    for node in pc.iso_nodes:
        x_v = expand(pc.s_sets[node])
        tv = pc.t_sets[node]
        tree = set(pc.t_edges[node])
        tree_verts = set()
        for x in tv:
            hit = blob_vertex_sets.get(x)
            if hit is None:
                tree_verts.add(x)
            else:
                tree_verts |= hit[0]
                tree |= hit[1]
        dv = [(s, t) for (s, t) in demands if s in tree_verts and t in tree_verts]
        base.subinstances.append(
            Subinstance(
                node=node,
                graph=graph.induced_subgraph(x_v),
                tree_edges=frozenset(tree),
                demands=dv,
            )
        )
    if validate:
        validate_decomposition(base)
    return base


def validate_decomposition(dec):
    if not dec.demands:
        return True
    g = dec.graph
    seen = set()
    for sub in dec.subinstances:
        for d in sub.demands:
            assert d not in seen, "demand assigned to two subinstances"
            seen.add(d)
        if sub.tree_edges:
            assert is_acyclic(sub.graph, sub.tree_edges), "connecting tree has a cycle"
        assert is_feasible(sub.graph, sub.tree_edges, sub.demands), (
            "tree does not connect its demand group"
        )
    assert seen == set(dec.demands), "demands not covered by the decomposition"
    # overlap bound at the input-graph level
    depth = dec.pc.depth
    membership = {}
    for sub in dec.subinstances:
        for e in sub.graph.edge_ids():
            membership[e] = membership.get(e, 0) + 1
    for e, cnt in membership.items():
        assert cnt <= depth + 1, "edge appears in too many subgraphs"
    return True
