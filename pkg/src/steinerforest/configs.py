"""Cluster configurations: boundary/active partitions and their consistency.

A configuration records, for one cluster, the connectivity of its boundary
inside the cluster, outside it, and of its active vertices overall.  Triples
at a parent and its two children must satisfy three join/restriction
equations; demand consistency additionally relates every demand that stops
being active at the parent.  Simple configurations restrict the overall
partition to ones generated by the boundary partitions plus a priority-
ordered pick of region covers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graph import DisjointSets
from .partitions import Partition, join_on, set_partitions


@dataclass(frozen=True)
class Configuration:
    pi_in: Partition  # boundary connectivity inside the cluster
    pi_out: Partition  # boundary connectivity outside the cluster
    pi_all: Partition  # active-vertex connectivity overall

    def __post_init__(self):
        want = self.pi_in.join(self.pi_out)
        got = self.pi_all.restrict(self.pi_in.ground)
        if got != want:
            raise ValueError("pi_all restricted to the boundary must equal pi_in v pi_out")

    def is_outgoing(self):
        bd = self.pi_in.ground
        return all(b & bd for b in self.pi_all.blocks)


def cluster_vertices(g, node):
    verts = set()
    for e in node.edges:
        u, v = g.endpoints(e)
        verts.add(u)
        verts.add(v)
    return frozenset(verts)


def active_sets(g, bd, bounds, demands):
    """act(C) per node: boundary plus endpoints whose partner leaves the interior."""
    acts = {}
    verts = {}
    for node in bd.nodes():
        if node.is_leaf():
            vs = cluster_vertices(g, node)
        else:
            a, b = node.children
            vs = verts[a] | verts[b]
        verts[node] = vs
        interior = vs - bounds[node]
        act = set(bounds[node])
        for s, t in demands:
            if s in vs and t not in interior:
                act.add(s)
            if t in vs and s not in interior:
                act.add(t)
        acts[node] = frozenset(act)
    return acts, verts


def demand_active_for(node_act, demand):
    s, t = demand
    return s in node_act or t in node_act


def connectivity_on(g, edges, ground, extra_relations=()):
    """Partition of ``ground`` by connectivity through the edge set (+relations)."""
    ds = DisjointSets(ground)
    for e in edges:
        u, v = g.endpoints(e)
        ds.add(u)
        ds.add(v)
        ds.union(u, v)
    for block in extra_relations:
        it = iter(block)
        try:
            first = next(it)
        except StopIteration:
            continue
        ds.add(first)
        for x in it:
            ds.add(x)
            ds.union(first, x)
    groups = {}
    for x in ground:
        groups.setdefault(ds.find(x), []).append(x)
    return Partition(groups.values(), ground)


def canonical_configuration(g, forest_edges, node, bound, act):
    """The configuration a subgraph induces at one cluster."""
    forest_edges = frozenset(forest_edges)
    inside = forest_edges & node.edges
    outside = forest_edges - node.edges
    pi_in = connectivity_on(g, inside, bound)
    pi_out = connectivity_on(g, outside, bound)
    pi_all = connectivity_on(g, forest_edges, act)
    return Configuration(pi_in, pi_out, pi_all)


def is_compatible_with(g, forest_edges, node, bound, act, config):
    """Single-cluster compatibility: inside connectivity matches and the overall
    partition equals inside connectivity glued with the claimed outside."""
    forest_edges = frozenset(forest_edges)
    inside = forest_edges & node.edges
    if connectivity_on(g, inside, bound) != config.pi_in:
        return False
    want = connectivity_on(g, inside, act, extra_relations=config.pi_out.blocks)
    return want == config.pi_all


def compatible_triple(c0, c1, c2):
    """The three join/restriction equations between a parent and its children."""
    bd0 = c0.pi_in.ground
    bd1 = c1.pi_in.ground
    bd2 = c2.pi_in.ground
    b_all = bd0 | bd1 | bd2
    if join_on(b_all, c1.pi_in, c2.pi_in).restrict(bd0) != _embed(c0.pi_in, bd0):
        return False
    if join_on(b_all, c0.pi_out, c2.pi_in).restrict(bd1) != _embed(c1.pi_out, bd1):
        return False
    if join_on(b_all, c0.pi_out, c1.pi_in).restrict(bd2) != _embed(c2.pi_out, bd2):
        return False
    a0 = c0.pi_all.ground
    a1 = c1.pi_all.ground
    a2 = c2.pi_all.ground
    u = a0 | a1 | a2
    x = join_on(u, c0.pi_all, c1.pi_all, c2.pi_all)
    return (
        x.restrict(a0) == c0.pi_all
        and x.restrict(a1) == c1.pi_all
        and x.restrict(a2) == c2.pi_all
    )


def _embed(p, ground):
    return join_on(ground, p)


def demand_consistent(c0, c1, c2, acts_triple, demands):
    """Compatibility + outgoing + relatedness of demands deactivating at the parent."""
    if not compatible_triple(c0, c1, c2):
        return False
    if not (c0.is_outgoing() and c1.is_outgoing() and c2.is_outgoing()):
        return False
    act0, act1, act2 = acts_triple
    u = c0.pi_all.ground | c1.pi_all.ground | c2.pi_all.ground
    x = None
    for s, t in demands:
        checked = (
            demand_active_for(act1, (s, t))
            and demand_active_for(act2, (s, t))
            and not demand_active_for(act0, (s, t))
        )
        if not checked:
            continue
        if x is None:
            x = join_on(u, c0.pi_all, c1.pi_all, c2.pi_all)
        if s not in u or t not in u or not x.relates(s, t):
            return False
    return True


# -- simple configurations ---------------------------------------------------


def scale_window(mu, gamma):
    """Scales whose radii fall in [2^mu / (2*gamma), 2^mu]."""
    gamma = Fraction(gamma)
    return [i for i in range(1, mu + 1) if Fraction(2 ** (i + 1)) * gamma >= Fraction(2**mu)]


def region_traces(cover, act, scales=None):
    """Per scale, the distinct nonempty intersections act & Uncontract(region)."""
    out = {}
    for i in scales if scales is not None else cover.scales():
        traces = set()
        for reg in cover.regions.get(i, ()):
            tr = cover.uncontract(reg.vertices) & act
            if tr:
                traces.add(tr)
        out[i] = sorted(traces, key=lambda s: sorted(map(repr, s)))
    return out


def union_closure(traces, cap=4096):
    """All unions of a family of sets (the reachable region-set traces)."""
    closed = set(traces)
    frontier = list(traces)
    while frontier:
        base = frontier.pop()
        for t in list(closed):
            u = base | t
            if u not in closed:
                if len(closed) >= cap:
                    raise RuntimeError("region trace closure too large; shrink the instance")
                closed.add(u)
                frontier.append(u)
    return sorted(closed, key=lambda s: (len(s), sorted(map(repr, s))))


def simple_subpartitions(act, bound, cover, gamma):
    """Every subpartition P(i_1..i_d, Q_1..Q_d) of the active set, deduplicated.

    Parts are taken greedily: the j-th part is the chosen union of region
    traces minus all earlier parts; at most |boundary| parts.
    """
    act = frozenset(act)
    if not act or cover.mu == 0:
        return [()]
    scales = scale_window(cover.mu, gamma)
    traces = region_traces(cover, act, scales)
    choices = []
    for i in scales:
        if traces.get(i):
            choices.extend(union_closure(traces[i]))
    choices = sorted(set(choices), key=lambda s: (len(s), sorted(map(repr, s))))
    max_parts = len(bound)
    results = set()
    seen_states = set()

    def rec(remaining, parts):
        key = frozenset(parts)
        if key in seen_states:
            return
        seen_states.add(key)
        results.add(key)
        if len(parts) >= max_parts:
            return
        for u in choices:
            part = u & remaining
            if part:
                rec(remaining - part, parts + (part,))

    rec(act, ())
    return sorted(
        (tuple(sorted(p, key=lambda s: sorted(map(repr, s)))) for p in results),
        key=lambda ps: (len(ps), [sorted(map(repr, b)) for b in ps]),
    )


def enumerate_simple_configs(g, node, bound, act, cover, gamma):
    """All simple configurations of a cluster (deduplicated triples)."""
    bound = frozenset(bound)
    act = frozenset(act)
    family = simple_subpartitions(act, bound, cover, gamma)
    seen = set()
    out = []
    for pi_in in set_partitions(sorted(bound, key=repr)):
        for pi_out in set_partitions(sorted(bound, key=repr)):
            base = pi_in.join(pi_out)
            for parts in family:
                pi_all = join_on(act, base, parts)
                if pi_all.restrict(bound) != base:
                    continue  # region glue must not exceed the boundary joins
                key = (pi_in, pi_out, pi_all)
                if key in seen:
                    continue
                seen.add(key)
                out.append(Configuration(pi_in, pi_out, pi_all))
    return out
