"""Unit-length reduction: round lengths to a grain and subdivide into edgelets.

Every edge is replaced by floor(len/eta) unit pieces; zero-piece edges are
contracted.  The grain eta = eps*len(G)/(c*m) keeps the total piece count
near c*m/eps while the rounding error stays below eta*m.  Solutions on the
unit graph map back to original edges plus whatever contracted cheap edges
are needed to restore connectivity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .graph import DisjointSets, Graph, normalize_demands
from .branchdecomp import BDNode, BranchDecomposition


@dataclass
class UnitReduction:
    original: Graph
    unit_graph: Graph  # every length is 1
    eta: Fraction
    edgelet_origin: dict  # unit edge id -> original edge id
    edgelets_of: dict  # original edge id -> tuple of unit edge ids
    zero_edges: frozenset  # original edges contracted away
    vertex_image: dict  # original vertex -> unit vertex
    demands: list  # surviving demands on the unit graph
    dropped_demands: list  # demands whose endpoints merged during contraction
    demand_origin: dict = field(default_factory=dict)  # unit demand -> original demand

    def uncontract_solution(self, unit_edges):
        """Map a unit-graph edge set back to a feasible original edge set.

        Dead-end pieces are stripped, surviving pieces are grouped into whole
        original edges, and contracted zero edges are re-added where needed
        to reconnect demand endpoints inside contraction blobs.
        """
        unit_edges = set(unit_edges)
        terminals = set()
        for s, t in self.demands:
            terminals.add(s)
            terminals.add(t)
        # strip dangling pieces so partial edgelet paths disappear
        degree = {}
        for e in unit_edges:
            for v in self.unit_graph.endpoints(e):
                degree[v] = degree.get(v, 0) + 1
        frontier = [v for v, d in degree.items() if d == 1 and v not in terminals]
        inc = {}
        for e in unit_edges:
            for v in self.unit_graph.endpoints(e):
                inc.setdefault(v, set()).add(e)
        while frontier:
            v = frontier.pop()
            if degree.get(v, 0) != 1 or v in terminals:
                continue
            (e,) = [x for x in inc[v] if x in unit_edges]
            unit_edges.discard(e)
            for u in self.unit_graph.endpoints(e):
                degree[u] -= 1
                if degree[u] == 1 and u not in terminals:
                    frontier.append(u)
        orig = {self.edgelet_origin[e] for e in unit_edges}
        for oe in orig:
            missing = [x for x in self.edgelets_of[oe] if x not in unit_edges]
            assert not missing, "partial edgelet path survived pruning"
        # reconnect within zero-edge blobs
        ds = DisjointSets(self.original.vertices())
        for e in self.zero_edges:
            u, v = self.original.endpoints(e)
            ds.union(u, v)
        rep = {}
        for e in self.zero_edges:
            u, _ = self.original.endpoints(e)
            rep.setdefault(ds.find(u), []).append(e)
        portals = {}

        def add_portal(v):
            r = ds.find(v)
            if r in rep:
                portals.setdefault(r, set()).add(v)

        for e in orig:
            for v in self.original.endpoints(e):
                add_portal(v)
        for dem in list(self.dropped_demands) + list(self.demand_origin.values()):
            add_portal(dem[0])
            add_portal(dem[1])
        extra = set()
        for r, ports in portals.items():
            if len(ports) < 2:
                continue
            extra |= _tree_connect(self.original, rep[r], ports)
        return frozenset(orig | extra)


def _tree_connect(g, edge_pool, portals):
    """Edges of a spanning tree of the pool restricted to portal-to-portal paths."""
    adj = {}
    for e in edge_pool:
        u, v = g.endpoints(e)
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    portals = [p for p in portals if p in adj] or list(portals)
    root = portals[0]
    parent = {root: None}
    order = [root]
    stack = [root]
    while stack:
        x = stack.pop()
        for y, e in sorted(adj.get(x, ()), key=lambda t: t[1]):
            if y not in parent:
                parent[y] = (x, e)
                order.append(y)
                stack.append(y)
    keep = set()
    for p in portals[1:]:
        cur = p
        while cur != root and parent.get(cur) is not None:
            x, e = parent[cur]
            if e in keep:
                break
            keep.add(e)
            cur = x
    return keep


def unit_length_reduce(g, demands, eps, c=1):
    """Build the unit-length instance; see module docstring for the grain rule."""
    eps = Fraction(eps)
    c = Fraction(c)
    if eps <= 0 or c <= 0:
        raise ValueError("eps and c must be positive")
    demands = normalize_demands(demands)
    m = g.n_edges
    total = g.total_length()
    if m == 0 or total == 0:
        eta = Fraction(1)
    else:
        eta = eps * total / (c * m)
    pieces = {e: int(g.length(e) / eta) for e in g.edge_ids()}
    zero = frozenset(e for e, k in pieces.items() if k == 0)
    ds = DisjointSets(g.vertices())
    for e in zero:
        u, v = g.endpoints(e)
        ds.union(u, v)
    vertex_image = {v: ds.find(v) for v in g.vertices()}
    next_vertex = max((v for v in g.vertices() if isinstance(v, int)), default=0) + 1
    unit_edges = []
    edgelet_origin = {}
    edgelets_of = {}
    next_edge = 1
    for e in sorted(g.edge_ids()):
        k = pieces[e]
        if k == 0:
            edgelets_of[e] = ()
            continue
        u, v = g.endpoints(e)
        a, b = vertex_image[u], vertex_image[v]
        if a == b:
            edgelets_of[e] = ()  # merged endpoints; edge is redundant after rounding
            continue
        chain = [a]
        for _ in range(k - 1):
            chain.append(next_vertex)
            next_vertex += 1
        chain.append(b)
        ids = []
        for i in range(k):
            eid = next_edge
            next_edge += 1
            unit_edges.append((eid, chain[i], chain[i + 1], Fraction(1)))
            edgelet_origin[eid] = e
            ids.append(eid)
        edgelets_of[e] = tuple(ids)
    vertices = set(vertex_image.values())
    for _, u, v, _ in unit_edges:
        vertices.add(u)
        vertices.add(v)
    unit_graph = Graph(vertices, unit_edges)
    out_demands = []
    dropped = []
    demand_origin = {}
    for s, t in demands:
        a, b = vertex_image[s], vertex_image[t]
        if a == b:
            dropped.append((s, t))
        else:
            out_demands.append((a, b))
            demand_origin[(a, b)] = (s, t)
    return UnitReduction(
        original=g,
        unit_graph=unit_graph,
        eta=eta,
        edgelet_origin=edgelet_origin,
        edgelets_of=edgelets_of,
        zero_edges=zero,
        vertex_image=vertex_image,
        demands=out_demands,
        dropped_demands=dropped,
        demand_origin=demand_origin,
    )


def adapt_decomposition(bd, reduction):
    """Rewrite a decomposition over original edges onto the unit graph.

    Zero-piece leaves vanish; surviving leaves become balanced subtrees over
    their edgelet paths, so widths grow by at most the subdivision constant
    and per-edge cluster counts stay logarithmic.
    """

    def chain_tree(ids):
        if len(ids) == 1:
            return BDNode((ids[0],))
        half = len(ids) // 2
        a = chain_tree(ids[:half])
        b = chain_tree(ids[half:])
        return BDNode(a.edges | b.edges, (a, b))

    def rebuild(node):
        if node.is_leaf():
            (e,) = node.edges
            ids = reduction.edgelets_of.get(e, ())
            if not ids:
                return None
            return chain_tree(list(ids))
        a, b = (rebuild(ch) for ch in node.children)
        if a is None:
            return b
        if b is None:
            return a
        return BDNode(a.edges | b.edges, (a, b))

    root = rebuild(bd.root)
    if root is None:
        raise ValueError("reduction left no edges to decompose")
    return BranchDecomposition(root)
