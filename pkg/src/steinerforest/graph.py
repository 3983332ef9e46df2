"""Multigraph with stable edge ids, rational lengths, and contraction provenance.

Edges are the ground set of every structure downstream (branch decompositions
carve edge sets, the primal-dual phase contracts edges), so edge ids are
stable across contractions: an edge keeps its id when its endpoints coalesce.
Lengths are exact rationals so that simulated-time event order in the
primal-dual phase is exact.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction


def as_length(x):
    """Coerce to a nonnegative finite Fraction."""
    ln = Fraction(x)
    if ln < 0:
        raise ValueError("edge length must be nonnegative, got %s" % x)
    return ln


class DisjointSets:
    """Union-find with path compression, over arbitrary hashable items."""

    __slots__ = ("parent", "rank")

    def __init__(self, items=()):
        self.parent = {x: x for x in items}
        self.rank = {x: 0 for x in self.parent}

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x
            self.rank[x] = 0

    def find(self, x):
        parent = self.parent
        r = x
        while parent[r] != r:
            r = parent[r]
        while parent[x] != r:
            parent[x], x = r, parent[x]
        return r

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return ra

    def same(self, a, b):
        return self.find(a) == self.find(b)

    def groups(self):
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())


class Graph:
    """Undirected multigraph.  Parallel edges allowed, self-loops dropped on creation."""

    __slots__ = ("_edges", "_adj")

    def __init__(self, vertices=(), edges=()):
        self._adj = {v: set() for v in vertices}
        self._edges = {}
        for eid, u, v, ln in edges:
            self.__add_edge(eid, u, v, ln)

    def __add_edge(self, eid, u, v, ln):
        if eid in self._edges:
            raise ValueError("duplicate edge id %r" % (eid,))
        if u not in self._adj or v not in self._adj:
            raise ValueError("edge %r endpoint not in vertex set" % (eid,))
        if u == v:
            return  # self-loops are silently dropped
        ln = as_length(ln)
        self._edges[eid] = (u, v, ln)
        self._adj[u].add(eid)
        self._adj[v].add(eid)

    @classmethod
    def from_edges(cls, edges, extra_vertices=()):
        """Build from (eid, u, v, length) tuples; vertex set inferred."""
        verts = set(extra_vertices)
        for _, u, v, _ in edges:
            verts.add(u)
            verts.add(v)
        return cls(verts, edges)

    # -- basic accessors -------------------------------------------------

    @property
    def n_vertices(self):
        return len(self._adj)

    @property
    def n_edges(self):
        return len(self._edges)

    def vertices(self):
        return self._adj.keys()

    def edge_ids(self):
        return self._edges.keys()

    def edges(self):
        """Iterate (eid, u, v, length)."""
        for eid, (u, v, ln) in self._edges.items():
            yield eid, u, v, ln

    def has_vertex(self, v):
        return v in self._adj

    def has_edge(self, eid):
        return eid in self._edges

    def endpoints(self, eid):
        u, v, _ = self._edges[eid]
        return u, v

    def length(self, eid):
        return self._edges[eid][2]

    def incident(self, v):
        return self._adj[v]

    def degree(self, v):
        return len(self._adj[v])

    def total_length(self, eids=None):
        if eids is None:
            return sum((ln for _, _, ln in self._edges.values()), Fraction(0))
        return sum((self._edges[e][2] for e in eids), Fraction(0))

    def other_endpoint(self, eid, v):
        u, w, _ = self._edges[eid]
        return w if v == u else u

    # -- derived graphs --------------------------------------------------

    def induced_subgraph(self, vertex_set):
        vs = frozenset(vertex_set)
        edges = []
        seen = set()
        for v in vs:
            for eid in self._adj.get(v, ()):
                if eid in seen:
                    continue
                u, w, ln = self._edges[eid]
                if u in vs and w in vs:
                    seen.add(eid)
                    edges.append((eid, u, w, ln))
        return Graph(vs, edges)

    def edge_subgraph(self, eids, extra_vertices=()):
        verts = set(extra_vertices)
        edges = []
        for e in eids:
            u, v, ln = self._edges[e]
            verts.add(u)
            verts.add(v)
            edges.append((e, u, v, ln))
        return Graph(verts, edges)

    def __repr__(self):
        return "Graph(n=%d, m=%d)" % (self.n_vertices, self.n_edges)


class ContractionRecord:
    """Binary contraction forest: which vertex pair each coalesced vertex replaced.

    ``s_set(v)`` is the set of original vertices coalesced to form ``v``; for
    an original vertex that is ``{v}`` and for a contraction result it is the
    disjoint union of its two children's sets.
    """

    def __init__(self, first_fresh_id=0):
        self.children = {}  # new vertex -> (u, v)
        self.via_edge = {}  # new vertex -> contracted edge id
        self.order = []  # creation order of new vertices
        self._next = first_fresh_id

    @classmethod
    def for_graph(cls, g):
        top = max((v for v in g.vertices() if isinstance(v, int)), default=0)
        return cls(first_fresh_id=top + 1)

    def fresh_id(self):
        v = self._next
        self._next += 1
        return v

    def record(self, new_vertex, u, v, eid):
        if repr(v) < repr(u):
            u, v = v, u  # child order carries no meaning; keep it canonical
        self.children[new_vertex] = (u, v)
        self.via_edge[new_vertex] = eid
        self.order.append(new_vertex)
        if isinstance(new_vertex, int) and new_vertex >= self._next:
            self._next = new_vertex + 1

    def is_created(self, v):
        return v in self.children

    def s_set(self, v):
        """Original vertices under ``v`` in the contraction forest."""
        out = []
        stack = [v]
        while stack:
            x = stack.pop()
            kids = self.children.get(x)
            if kids is None:
                out.append(x)
            else:
                stack.extend(kids)
        return frozenset(out)

    def proper_ancestors(self, v, alive_parent):
        """Walk v's ancestors given child->parent map ``alive_parent``."""
        out = []
        x = alive_parent.get(v)
        while x is not None:
            out.append(x)
            x = alive_parent.get(x)
        return out

    def parent_map(self):
        pm = {}
        for w, (a, b) in self.children.items():
            pm[a] = w
            pm[b] = w
        return pm


def contract_edge(g, eid, record=None):
    """Coalesce the endpoints of ``eid`` into a fresh vertex.

    Self-loops arising from the contraction (parallel copies of the
    contracted edge) are removed; other parallel edges are kept.  Returns the
    new graph and the updated provenance record.
    """
    if not g.has_edge(eid):
        raise KeyError("unknown edge id %r" % (eid,))
    if record is None:
        record = ContractionRecord.for_graph(g)
    u, v = g.endpoints(eid)
    w = record.fresh_id()
    record.record(w, u, v, eid)

    edges = []
    for e, a, b, ln in g.edges():
        na = w if a in (u, v) else a
        nb = w if b in (u, v) else b
        if na == nb:
            continue  # contracted edge and any parallel copies disappear
        edges.append((e, na, nb, ln))
    verts = set(g.vertices())
    verts.discard(u)
    verts.discard(v)
    verts.add(w)
    return Graph(verts, edges), record


def contract_edges(g, eids, record=None):
    """Contract a set of edges in one pass (ascending edge-id merge order).

    Produces the same quotient graph and provenance record as repeated
    single-edge contraction, in O((n+m) alpha) instead of O(m) per edge.
    """
    if record is None:
        record = ContractionRecord.for_graph(g)
    ds = DisjointSets(g.vertices())
    current = {v: v for v in g.vertices()}  # class root -> current blob name
    for e in sorted(eids):
        if not g.has_edge(e):
            continue
        u, v = g.endpoints(e)
        ru, rv = ds.find(u), ds.find(v)
        if ru == rv:
            continue  # parallel copy became a self-loop; dropped
        a, b = current[ru], current[rv]
        w = record.fresh_id()
        record.record(w, a, b, e)
        r = ds.union(ru, rv)
        current[r] = w
    verts = {current[ds.find(v)] for v in g.vertices()}
    edges = []
    for e, u, v, ln in g.edges():
        a = current[ds.find(u)]
        b = current[ds.find(v)]
        if a != b:
            edges.append((e, a, b, ln))
    return Graph(verts, edges), record


@dataclass(frozen=True)
class ShortestPathForest:
    """Forest of shortest paths from a root set, ties broken by edge id."""

    edges: frozenset
    dist: dict
    parent_edge: dict  # vertex -> edge id toward the root (absent for roots)
    roots: frozenset

    def depth_of_edge(self, g):
        """Map edge id -> distance of its deeper endpoint from the roots."""
        return {e: self.dist[child] for child, e in self.parent_edge.items()}


def shortest_path_forest(g, roots):
    """Shortest-path forest rooted at ``roots``; parent ties broken by smallest edge id.

    Unreachable vertices are excluded.  An empty root set yields an empty
    forest.
    """
    roots = frozenset(r for r in roots if g.has_vertex(r))
    dist = {r: Fraction(0) for r in roots}
    parent = {}
    heap = [(Fraction(0), repr(r), r) for r in sorted(roots, key=repr)]
    heapq.heapify(heap)
    done = set()
    while heap:
        d, _, x = heapq.heappop(heap)
        if x in done:
            continue
        if d != dist[x]:
            continue
        done.add(x)
        for e in sorted(g.incident(x)):
            y = g.other_endpoint(e, x)
            nd = d + g.length(e)
            dy = dist.get(y)
            if dy is None or nd < dy:
                dist[y] = nd
                parent[y] = e
                heapq.heappush(heap, (nd, repr(y), y))
            elif nd == dy and y not in roots and e < parent.get(y, e + 1):
                parent[y] = e
    return ShortestPathForest(
        edges=frozenset(parent.values()),
        dist=dist,
        parent_edge=parent,
        roots=roots,
    )


def shortest_path_forest_truncated(g, roots, k):
    """Edges of the shortest-path forest on root-paths of length at most ``k``."""
    spf = shortest_path_forest(g, roots)
    if k < 0:
        return ShortestPathForest(frozenset(), {}, {}, spf.roots)
    keep = {}
    dist = {r: Fraction(0) for r in spf.roots}
    for child, e in spf.parent_edge.items():
        if spf.dist[child] <= k:
            keep[child] = e
            dist[child] = spf.dist[child]
    return ShortestPathForest(frozenset(keep.values()), dist, keep, spf.roots)


def connected_components(g, eids=None):
    """Partition of the vertices touched by the edge subset (all edges if None)."""
    if eids is None:
        eids = list(g.edge_ids())
    ds = DisjointSets()
    for e in eids:
        u, v = g.endpoints(e)
        ds.add(u)
        ds.add(v)
        ds.union(u, v)
    return [frozenset(grp) for grp in ds.groups()]


def components_with_isolated(g, eids):
    """Components of the edge subset, plus singleton components for untouched vertices."""
    comps = connected_components(g, eids)
    touched = set()
    for c in comps:
        touched |= c
    for v in g.vertices():
        if v not in touched:
            comps.append(frozenset((v,)))
    return comps


def is_feasible(g, forest_eids, demands):
    """True iff every demand pair is connected by the edge set."""
    ds = DisjointSets(g.vertices())
    for e in forest_eids:
        u, v = g.endpoints(e)
        ds.union(u, v)
    return all(ds.same(s, t) for s, t in demands)


def is_acyclic(g, eids):
    ds = DisjointSets(g.vertices())
    for e in eids:
        u, v = g.endpoints(e)
        if ds.same(u, v):
            return False
        ds.union(u, v)
    return True


@dataclass(frozen=True)
class Demand:
    """A required vertex pair; endpoints must be distinct original vertices."""

    s: object
    t: object

    def __post_init__(self):
        if self.s == self.t:
            raise ValueError("demand endpoints must differ")

    def as_pair(self):
        return (self.s, self.t)


def normalize_demands(demands):
    """Accept (s, t) pairs or Demand objects; return list of (s, t) tuples."""
    out = []
    for d in demands:
        if isinstance(d, Demand):
            out.append(d.as_pair())
        else:
            s, t = d
            if s == t:
                raise ValueError("demand endpoints must differ")
            out.append((s, t))
    return out
