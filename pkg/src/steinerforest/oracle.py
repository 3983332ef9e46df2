"""Ground truth at desk scale: exact optima and the augmentation checker.

Two independent exact methods: edge-subset enumeration with a length cutoff,
and a partition method that groups demand-closed terminal blocks and solves
an exact Steiner tree per block.  The augmentation procedure extends any
feasible forest so that every cluster's canonical configuration becomes
region-simple, within a proved length increase; running it against oracle
optima is what makes the structural bound testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .configs import canonical_configuration, connectivity_on
from .graph import DisjointSets, is_feasible, normalize_demands, shortest_path_forest
from .layers import contracted_view
from .partitions import Partition, join_on, set_partitions


class OracleLimitError(ValueError):
    """Instance exceeds the declared exact-solve limits."""


MAX_SUBSET_EDGES = 18
MAX_TERMINALS = 10


@dataclass
class OracleResult:
    opt: Fraction
    edges: frozenset
    method: str
    fingerprint: str = ""


def brute_force_opt(g, demands, method=None):
    """Exact Steiner forest optimum within desk-scale limits.

    method: 'subset', 'partition', or None for automatic selection.  Limits
    are enforced, never silently approximated.
    """
    demands = normalize_demands(demands)
    if not demands:
        return OracleResult(Fraction(0), frozenset(), "trivial")
    terminals = sorted({v for d in demands for v in d}, key=repr)
    if method is None:
        if g.n_edges <= MAX_SUBSET_EDGES:
            method = "subset"
        elif len(terminals) <= MAX_TERMINALS:
            method = "partition"
        else:
            raise OracleLimitError(
                "instance too large: %d edges, %d terminals" % (g.n_edges, len(terminals))
            )
    if method == "subset":
        if g.n_edges > MAX_SUBSET_EDGES:
            raise OracleLimitError("subset method limited to %d edges" % MAX_SUBSET_EDGES)
        return _opt_by_subsets(g, demands)
    if method == "partition":
        if len(terminals) > MAX_TERMINALS:
            raise OracleLimitError("partition method limited to %d terminals" % MAX_TERMINALS)
        return _opt_by_partition(g, demands, terminals)
    raise ValueError("unknown method %r" % (method,))


def _opt_by_subsets(g, demands):
    eids = sorted(g.edge_ids())
    best = None
    best_edges = None
    lengths = [g.length(e) for e in eids]
    m = len(eids)
    for mask in range(1 << m):
        total = Fraction(0)
        chosen = []
        ok = True
        for i in range(m):
            if mask >> i & 1:
                total += lengths[i]
                if best is not None and total > best:
                    ok = False
                    break
                chosen.append(eids[i])
        if not ok:
            continue
        if best is not None and total >= best:
            continue
        if is_feasible(g, chosen, demands):
            best = total
            best_edges = frozenset(chosen)
    if best is None:
        raise OracleLimitError("no feasible subset (disconnected demand)")
    return OracleResult(best, best_edges, "subset")


def _steiner_tree_exact(g, terminals):
    """Dreyfus-Wagner over terminal subsets; returns (length, edge set).

    After the merge stage for each subset, one metric-closure sweep finishes
    the relaxation (chains collapse by the triangle inequality).
    """
    terminals = sorted(set(terminals), key=repr)
    if len(terminals) <= 1:
        return Fraction(0), frozenset()
    verts = sorted(g.vertices(), key=repr)
    dist = {}
    via = {}
    for v in verts:
        spf = shortest_path_forest(g, {v})
        dist[v] = spf.dist
        via[v] = spf.parent_edge

    def path_edges(a, b):
        out = set()
        cur = b
        while cur != a:
            e = via[a][cur]
            out.add(e)
            cur = g.other_endpoint(e, cur)
        return out

    t0 = terminals[0]
    rest = terminals[1:]
    k = len(rest)
    full = (1 << k) - 1
    dp = {}
    choice = {}
    for i, t in enumerate(rest):
        for v, d in dist[t].items():
            dp[(1 << i, v)] = d
            choice[(1 << i, v)] = ("path", t, v)
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            pass  # singleton masks already initialized
        else:
            for v in verts:
                best = None
                sub = (mask - 1) & mask
                while sub:
                    other = mask ^ sub
                    if other < sub:  # each split once
                        a = dp.get((sub, v))
                        b = dp.get((other, v))
                        if a is not None and b is not None:
                            cand = a + b
                            if best is None or cand < best[0]:
                                best = (cand, ("merge", sub, other, v))
                    sub = (sub - 1) & mask
                if best is not None:
                    cur = dp.get((mask, v))
                    if cur is None or best[0] < cur:
                        dp[(mask, v)] = best[0]
                        choice[(mask, v)] = best[1]
        # one metric-closure sweep from the merge-stage values
        stage = {v: dp.get((mask, v)) for v in verts}
        for v in verts:
            best = stage[v]
            pick = None
            dv = dist[v]
            for u, base in stage.items():
                if base is None or u == v or u not in dv:
                    continue
                cand = base + dv[u]
                if best is None or cand < best:
                    best = cand
                    pick = u
            if pick is not None:
                dp[(mask, v)] = best
                choice[(mask, v)] = ("grow", pick, v, stage[pick])
    if (full, t0) not in dp:
        raise OracleLimitError("terminals disconnected")

    edges = set()

    def unwind(mask, v):
        how = choice[(mask, v)]
        if how[0] == "path":
            _, t, vv = how
            edges.update(path_edges(t, vv))
        elif how[0] == "merge":
            _, a, b, vv = how
            unwind(a, vv)
            unwind(b, vv)
        else:
            _, u, vv, _base = how
            edges.update(path_edges(u, vv))
            unwind(mask, u)

    unwind(full, t0)
    length = g.total_length(edges)
    return length, frozenset(edges)


def _opt_by_partition(g, demands, terminals):
    """Group demand-closed terminal blocks, exact Steiner tree per block."""
    ds = DisjointSets(terminals)
    for s, t in demands:
        ds.union(s, t)
    groups = [tuple(sorted(grp, key=repr)) for grp in ds.groups()]
    groups.sort()
    best = None
    best_edges = None
    tree_cache = {}

    def tree_for(block):
        got = tree_cache.get(block)
        if got is None:
            got = _steiner_tree_exact(g, block)
            tree_cache[block] = got
        return got

    for part in set_partitions(range(len(groups))):
        total = Fraction(0)
        edges = set()
        ok = True
        for blk in part.blocks:
            termset = tuple(sorted({v for i in blk for v in groups[i]}, key=repr))
            try:
                ln, es = tree_for(termset)
            except OracleLimitError:
                ok = False
                break
            total += ln
            edges |= es
            if best is not None and total >= best:
                ok = False
                break
        if not ok:
            continue
        total = g.total_length(edges)  # shared edges counted once
        if best is None or total < best:
            if is_feasible(g, edges, demands):
                best = total
                best_edges = frozenset(edges)
    if best is None:
        raise OracleLimitError("terminals disconnected")
    return OracleResult(best, best_edges, "partition")


# -- the structural augmentation ----------------------------------------------


@dataclass
class AugmentReport:
    f_in: frozenset
    f_out: frozenset
    added_first: frozenset
    added_second: frozenset
    per_cluster_index: dict  # node -> list of (scale, regions, part) describing P


def theorem9_augment(g, bd, bounds, acts, layers, covers, gamma, forest):
    """Extend a feasible forest so every cluster's canonical config is simple.

    First step: per cluster, in top-down order, active vertices assigned to a
    tree's region part get connected to that tree in the contracted margin.
    Second step: boundary vertices connected in the contracted margin get
    connected for real with few extra edges.
    """
    nodes_top_down = list(reversed(bd.nodes()))
    f1 = set(forest)
    index = {}
    added_first = set()
    for node in nodes_top_down:
        parts = _priority_parts(g, bd, node, bounds, acts, covers, gamma, forest)
        index[node] = parts
        layer = layers[node]
        view = covers[node].view
        for p_j, tree_verts, _meta in parts:
            target = {view.image[x] for x in tree_verts if x in view.image}
            while True:
                comp = _view_components(g, node, view, f1)
                tgt_roots = {comp.find(x) for x in target}
                missing = [
                    u
                    for u in sorted(p_j, key=repr)
                    if view.image[u] in comp.parent and comp.find(view.image[u]) not in tgt_roots
                ]
                if not missing:
                    break
                u = missing[0]
                path = _view_path(view, view.image[u], target)
                if path is None:
                    break  # margin cannot reach; nothing to add
                f1 |= path
                added_first |= path
    f_prime = set(f1)
    added_second = set()
    for node in nodes_top_down:
        layer = layers[node]
        rho = layer.rho
        if rho == 0:
            continue
        bound = sorted(bounds[node], key=repr)
        view_a = contracted_view(g, node.edges, layer.a_edges)
        changed = True
        while changed:
            changed = False
            comp = DisjointSets(view_a.graph.vertices())
            for e in f_prime & node.edges:
                if e in layer.a_edges:
                    continue
                u, v = g.endpoints(e)
                comp.union(view_a.image[u], view_a.image[v])
            for x, y in combinations(bound, 2):
                ix, iy = view_a.image[x], view_a.image[y]
                if comp.same(ix, iy):
                    continue
                path = _cheap_connect(view_a, f_prime, ix, iy, 2 * rho)
                if path is not None:
                    f_prime |= path
                    added_second |= path
                    changed = True
    return AugmentReport(
        f_in=frozenset(forest),
        f_out=frozenset(f_prime),
        added_first=frozenset(added_first),
        added_second=frozenset(added_second),
        per_cluster_index=index,
    )


def _priority_parts(g, bd, node, bounds, acts, covers, gamma, forest):
    """The region-based subpartition P(i_1.., Q_1..) built from a forest."""
    cover = covers[node]
    act = acts[node]
    bound = bounds[node]
    if not act or cover.mu == 0:
        return []
    comp = DisjointSets()
    touched = set()
    for e in forest:
        if e not in node.edges:
            continue
        u, v = g.endpoints(e)
        comp.add(u)
        comp.add(v)
        comp.union(u, v)
        touched.add(u)
        touched.add(v)
    trees = {}
    for x in touched:
        trees.setdefault(comp.find(x), set()).add(x)
    outgoing = []
    for root, vs in trees.items():
        if vs & bound:
            edges_t = frozenset(
                e for e in forest if e in node.edges and g.endpoints(e)[0] in vs
            )
            outgoing.append((vs, edges_t))
    # order: smaller minimal enclosing cluster first; ties by smallest edge id
    def min_cluster_depth(edge_set):
        depth = 0
        cur = bd.root
        d = 0
        while True:
            nxt = None
            for ch in cur.children:
                if edge_set <= ch.edges:
                    nxt = ch
                    break
            if nxt is None:
                return d
            cur = nxt
            d += 1

    outgoing.sort(key=lambda te: (-min_cluster_depth(te[1]), min(te[1])))
    used = set()
    parts = []
    ceil_log_gamma = math.ceil(math.log2(float(gamma))) if gamma > 1 else 0
    for vs, edges_t in outgoing:
        act_in_tree = [u for u in vs & act if u in cover.view.image]
        dists = [
            cover.dist[cover.view.image[u]]
            for u in act_in_tree
            if cover.view.image[u] in cover.dist
        ]
        if not dists:
            continue
        dmax = max(dists)
        i_prime = 1 if dmax <= 1 else math.ceil(math.log2(dmax))
        i_j = max(i_prime, cover.mu - ceil_log_gamma - 1, 1)
        i_j = min(i_j, cover.mu)
        regions = cover.regions.get(i_j, ())
        tree_views = {cover.view.image[u] for u in vs if u in cover.view.image}
        chosen = []
        covered = set()
        need = {
            cover.view.image[u]
            for u in act_in_tree
            if cover.view.image[u] in cover.dist and cover.dist[cover.view.image[u]] <= (1 << i_j)
        }
        for reg in regions:
            if reg.vertices & need - covered and reg.vertices & tree_views:
                chosen.append(reg)
                covered |= reg.vertices
            if need <= covered:
                break
        part = frozenset(
            u for reg in chosen for u in cover.uncontract(reg.vertices) & act
        ) - used
        if part:
            used |= part
            parts.append((part, vs, (i_j, tuple(chosen))))
    return parts


def _view_components(g, node, view, forest):
    comp = DisjointSets(view.graph.vertices())
    for e in forest:
        if e in node.edges and view.graph.has_edge(e):
            u, v = view.graph.endpoints(e)
            comp.union(u, v)
    return comp


def _view_path(view, start, targets):
    """Shortest path (edge set) in the contracted cluster toward any target."""
    from collections import deque

    if start in targets:
        return frozenset()
    prev = {start: None}
    q = deque((start,))
    while q:
        x = q.popleft()
        for e in sorted(view.graph.incident(x)):
            y = view.graph.other_endpoint(e, x)
            if y in prev:
                continue
            prev[y] = (x, e)
            if y in targets:
                out = set()
                cur = y
                while prev[cur] is not None:
                    px, pe = prev[cur]
                    out.add(pe)
                    cur = px
                return frozenset(out)
            q.append(y)
    return None


def _cheap_connect(view, forest, ix, iy, budget):
    """0/1 shortest path: connect two margin components adding <= budget edges."""
    import heapq

    dist = {ix: 0}
    prev = {ix: None}
    heap = [(0, repr(ix), ix)]
    while heap:
        d, _, x = heapq.heappop(heap)
        if d != dist.get(x):
            continue
        if x == iy:
            break
        for e in sorted(view.graph.incident(x)):
            y = view.graph.other_endpoint(e, x)
            nd = d + (0 if e in forest else 1)
            old = dist.get(y)
            if old is None or nd < old:
                dist[y] = nd
                prev[y] = (x, e)
                heapq.heappush(heap, (nd, repr(y), y))
    if iy not in dist or dist[iy] > budget:
        return None
    out = set()
    cur = iy
    while prev[cur] is not None:
        px, pe = prev[cur]
        if pe not in forest:
            out.add(pe)
        cur = px
    return frozenset(out)


def check_augmentation(g, bd, bounds, acts, layers, covers, gamma, report, simple_families):
    """Assert the augmented forest's canonical configurations are all simple,
    plus the two structural margin properties."""
    f_prime = report.f_out
    assert report.f_in <= f_prime, "augmentation removed edges"
    for node in bd.nodes():
        bound = bounds[node]
        act = acts[node]
        cfg = canonical_configuration(g, f_prime, node, bound, act)
        base = cfg.pi_in.join(cfg.pi_out)
        family = simple_families[node]
        hit = False
        for parts in family:
            if join_on(act, base, parts) == cfg.pi_all:
                hit = True
                break
        assert hit, "canonical configuration not simple at a cluster"
        # margin property: boundary pairs connected in C/B are connected in C
        view = covers[node].view
        comp_view = _view_components(g, node, view, f_prime)
        comp_real = DisjointSets(set(g.vertices()))
        for e in f_prime & node.edges:
            u, v = g.endpoints(e)
            comp_real.union(u, v)
        for x, y in combinations(sorted(bound, key=repr), 2):
            if comp_view.same(view.image[x], view.image[y]):
                assert comp_real.same(x, y), "margin connectivity not realized"
    return True


def length_bound_theorem9(len_f, len_g, w, m, alpha, beta, gamma):
    """Allowed length of the augmented forest."""
    lf = float(len_f)
    return (
        lf
        + 4 * float(beta) * (2 * w - 1) * (1 + (3 * math.log2(m) + 1) / float(gamma)) * lf
        + 2 * (2 * w - 1) * float(len_g) / float(alpha)
    )


# -- comparison harness --------------------------------------------------------


def report_rows(instance_name, g, demands, results, oracle=None):
    """Rows for the mode-comparison table: one per algorithm result."""
    rows = []
    for rec in results:
        ratio = None
        if oracle is not None and oracle.opt > 0:
            ratio = float(Fraction(rec.total_length) / oracle.opt)
        elif oracle is not None and Fraction(rec.total_length) == 0:
            ratio = 1.0
        rows.append(
            {
                "instance": instance_name,
                "n": g.n_vertices,
                "m": g.n_edges,
                "demands": len(demands),
                "algorithm": rec.algorithm,
                "length": str(Fraction(rec.total_length)),
                "opt": str(oracle.opt) if oracle is not None else "",
                "ratio": "" if ratio is None else "%.6f" % ratio,
                "feasible": rec.feasible,
                "wall_time_s": "%.4f" % rec.wall_time_s,
            }
        )
    return rows
