"""Boundary contraction and region covers over a balanced decomposition.

For each cluster, edges packed densely near the boundary are contracted:
the radius grows while the shortest-path forest inside it carries at least
alpha times the radius in length.  The leftover margin then has linear
growth, so short Euler-tour subpaths near the boundary cover it with a
bounded number of regions per scale.  The dynamic program reads terminal
positions through these regions instead of exact vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .graph import DisjointSets, Graph, shortest_path_forest


@dataclass
class ContractedView:
    """Cluster subgraph with a contracted edge set glued together."""

    graph: Graph  # view graph: vertices are class representatives
    image: dict  # cluster vertex -> view vertex
    members: dict  # view vertex -> frozenset of cluster vertices


def contracted_view(g, cluster_edges, contracted):
    verts = set()
    for e in cluster_edges:
        u, v = g.endpoints(e)
        verts.add(u)
        verts.add(v)
    ds = DisjointSets(verts)
    for e in contracted:
        u, v = g.endpoints(e)
        ds.union(u, v)
    image = {v: ds.find(v) for v in verts}
    members = {}
    for v, r in image.items():
        members.setdefault(r, set()).add(v)
    edges = []
    for e in cluster_edges:
        if e in contracted:
            continue
        u, v = g.endpoints(e)
        a, b = image[u], image[v]
        if a != b:
            edges.append((e, a, b, Fraction(1)))
    view = Graph(set(members), edges)
    return ContractedView(view, image, {k: frozenset(s) for k, s in members.items()})


@dataclass
class LayerData:
    rho: int
    a_edges: frozenset  # union of the children's contracted sets
    b_edges: frozenset  # contracted set for this cluster


def cluster_radius(g, cluster_edges, bound, contracted, alpha):
    """Radius and margin edges for one cluster given its contracted core.

    rho is the largest radius whose shortest-path forest inside it carries at
    least alpha*rho length; the saturated prefix extends the candidate range
    past the deepest level.
    """
    alpha = Fraction(alpha)
    view = contracted_view(g, cluster_edges, contracted)
    roots = {view.image[v] for v in bound if v in view.image}
    spf = shortest_path_forest(view.graph, roots)
    level_len = {}
    for child in spf.parent_edge:
        d = int(spf.dist[child])
        level_len[d] = level_len.get(d, 0) + 1
    rho = 0
    prefix = 0
    top = max(level_len, default=0)
    for i in range(1, top + 1):
        prefix += level_len.get(i, 0)
        if prefix >= alpha * i:
            rho = i
    rho = max(rho, int(Fraction(prefix) / alpha))
    margin = frozenset(
        e for child, e in spf.parent_edge.items() if spf.dist[child] <= rho
    )
    return rho, margin


def contract_alpha(g, bd, bounds, alpha):
    """Bottom-up contraction radii; ``bounds`` maps node -> boundary set."""
    alpha = Fraction(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    layers = {}
    for node in bd.nodes():
        if node.is_leaf():
            a = frozenset()
        else:
            a = frozenset().union(*(layers[ch].b_edges for ch in node.children))
        rho, margin = cluster_radius(g, node.edges, bounds[node], a, alpha)
        layers[node] = LayerData(rho=rho, a_edges=a, b_edges=a | margin)
    return layers


def margin_lengths(g, node, bounds, layer, radii):
    """len(SP(C/B, boundary, r)) for each r, for the growth-bound checks."""
    view = contracted_view(g, node.edges, layer.b_edges)
    roots = {view.image[v] for v in bounds[node] if v in view.image}
    spf = shortest_path_forest(view.graph, roots)
    out = {}
    for r in radii:
        out[r] = sum(1 for child in spf.parent_edge if spf.dist[child] <= r)
    return out


def validate_layers(g, bd, bounds, layers, alpha):
    """Assert the growth bound and the total-radius bound."""
    alpha = Fraction(alpha)
    total_rho = sum(layer.rho for layer in layers.values())
    assert total_rho <= g.total_length() / alpha, "total contraction radius too large"
    for node in bd.nodes():
        layer = layers[node]
        view = contracted_view(g, node.edges, layer.b_edges)
        roots = {view.image[v] for v in bounds[node] if v in view.image}
        spf = shortest_path_forest(view.graph, roots)
        by_depth = {}
        for child in spf.parent_edge:
            d = int(spf.dist[child])
            by_depth[d] = by_depth.get(d, 0) + 1
        run = 0
        for r in range(1, max(by_depth, default=0) + 1):
            run += by_depth.get(r, 0)
            assert run <= alpha * r, "margin growth exceeds alpha*r at r=%d" % r
    return True


@dataclass(frozen=True)
class Region:
    scale: int
    tree_root: object
    lo: int  # first tour position
    hi: int  # last tour position
    vertices: frozenset  # view vertices covered


@dataclass
class RegionCover:
    mu: int
    max_dist: int
    dist: dict  # view vertex -> distance from the boundary (reachable only)
    regions: dict  # scale -> list of Region
    view: ContractedView
    roots: frozenset

    def scales(self):
        return sorted(self.regions)

    def uncontract(self, view_vertices):
        out = set()
        for x in view_vertices:
            out |= self.view.members[x]
        return frozenset(out)


def build_regions(g, node, bounds, layer, beta, act):
    """Region cover of the contracted margin at every power-of-two scale."""
    beta = Fraction(beta)
    if beta <= 0:
        raise ValueError("beta must be positive")
    view = contracted_view(g, node.edges, layer.b_edges)
    roots = frozenset(view.image[v] for v in bounds[node] if v in view.image)
    spf = shortest_path_forest(view.graph, roots)
    dist = {x: int(d) for x, d in spf.dist.items()}
    act_dists = [dist[view.image[u]] for u in act if u in view.image and view.image[u] in dist]
    if not act_dists:
        return RegionCover(mu=0, max_dist=0, dist=dist, regions={}, view=view, roots=roots)
    max_dist = max(act_dists)
    mu = 0
    while (1 << mu) <= max_dist:
        mu += 1
    mu = max(mu, 1)  # distance-zero active vertices still need scale-1 regions
    # forest trees truncated at 2^mu, one per boundary root
    children = {}
    for child, e in spf.parent_edge.items():
        if spf.dist[child] <= (1 << mu):
            parent = view.graph.other_endpoint(e, child)
            children.setdefault(parent, []).append((e, child))
    tours = {}
    for r in sorted(roots, key=repr):
        tour = [r]
        stack = [(r, iter(sorted(children.get(r, ()))))]
        while stack:
            x, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                if stack:
                    tour.append(stack[-1][0])
                continue
            _, y = nxt
            tour.append(y)
            stack.append((y, iter(sorted(children.get(y, ())))))
        tours[r] = tour
    regions = {}
    for i in range(1, mu + 1):
        step = beta * (1 << i)
        limit = (1 + beta) * (1 << i)
        out = []
        seen = set()
        for r, tour in tours.items():
            top = len(tour) - 1  # tour length in steps
            j = 0
            while True:
                x = j * step
                if x > top or (top > 0 and x == top):
                    break
                lo = math.ceil(x)
                hi = min(top, math.floor(x + step))
                j += 1
                if lo > hi:
                    continue
                if dist[tour[lo]] > limit:
                    continue
                key = (r, lo, hi)
                if key in seen:
                    continue
                seen.add(key)
                out.append(
                    Region(
                        scale=i,
                        tree_root=r,
                        lo=lo,
                        hi=hi,
                        vertices=frozenset(tour[lo : hi + 1]),
                    )
                )
                if top == 0:
                    break
        regions[i] = out
    return RegionCover(
        mu=mu, max_dist=max_dist, dist=dist, regions=regions, view=view, roots=roots
    )


def validate_regions(g, node, bounds, layer, cover, alpha, beta):
    """Assert per-scale covering and the cardinality bound."""
    if not cover.regions:
        return True
    alpha = Fraction(alpha)
    beta = Fraction(beta)
    bound = 2 * alpha * (1 + 2 * beta) / beta + len(bounds[node])
    for i, regs in cover.regions.items():
        radius = 1 << i
        covered = set()
        for reg in regs:
            covered |= reg.vertices
        for x, d in cover.dist.items():
            if d <= radius:
                assert x in covered, "vertex at distance %d uncovered at scale %d" % (d, i)
        assert len(regs) <= bound, "too many regions at scale %d: %d > %s" % (
            i,
            len(regs),
            bound,
        )
    return True
