"""Bottom-up configuration dynamic program over a balanced decomposition.

Tables are keyed by (inside, outside, overall) partition triples per
cluster.  The combine derives the parent's inside partition and overall
partition from the children plus an outside guess, checks the projection
equations and the demand-relatedness condition, and keeps minimum costs with
backpointers.  Outside guesses range over all partitions of the parent
boundary; the root's empty boundary pins them down, which is what makes the
guessed external connectivity honest at reconstruction time.

Boundary-only triples with no demand checks combine through a vectorized
min-plus kernel; clusters carrying active terminals take the general path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .branchdecomp import boundaries
from .configs import active_sets, connectivity_on
from .graph import DisjointSets, is_feasible
from .partitions import Partition, join_on, set_partitions


class DPWidthError(ValueError):
    """Boundary too large for configuration enumeration at desk scale."""


class DPInfeasibleError(ValueError):
    """No demand-consistent assignment exists (disconnected demand)."""


MAX_BOUNDARY = 9

_SPACES = {}


def partition_space(ground):
    """Interned list of all partitions of a sorted vertex tuple, plus index."""
    key = tuple(ground)
    got = _SPACES.get(key)
    if got is None:
        if len(key) > MAX_BOUNDARY:
            raise DPWidthError(
                "boundary of size %d exceeds the supported limit %d"
                % (len(key), MAX_BOUNDARY)
            )
        parts = list(set_partitions(key))
        got = (parts, {p: i for i, p in enumerate(parts)})
        _SPACES[key] = got
    return got


_JOIN2 = {}


def _join2(a, b):
    """Memoized join of two partitions onto the union of their grounds."""
    key = (a, b)
    got = _JOIN2.get(key)
    if got is None:
        got = join_on(a.ground | b.ground, a, b)
        _JOIN2[key] = got
        _JOIN2[(b, a)] = got
    return got


_RESTRICT = {}


def _restrict(p, ground):
    key = (p, ground)
    got = _RESTRICT.get(key)
    if got is None:
        got = p.restrict(ground & p.ground) if not (ground <= p.ground) else p.restrict(ground)
        _RESTRICT[key] = got
    return got


@dataclass
class DPTable:
    """Per-cluster config tables with backpointers, plus solve metadata."""

    graph: object
    bd: object
    demands: list
    rows: dict  # node -> {(pi_in, pi_out): {pi_all: (cost, bp)}}
    bounds: dict
    acts: dict
    cost: Fraction = None
    root_key: tuple = None

    def cluster_summary(self):
        out = []
        for i, node in enumerate(self.bd.nodes()):
            table = self.rows.get(node, {})
            n_rows = sum(len(v) for v in table.values())
            best = min(
                (c for v in table.values() for c, _ in v.values()), default=None
            )
            out.append((i, len(node.edges), len(self.bounds[node]), n_rows, best))
        return out

    def dump(self):
        lines = ["cluster\tedges\tboundary\tconfigs\tbest_cost"]
        for i, ne, nb, nr, best in self.cluster_summary():
            lines.append("%d\t%d\t%d\t%d\t%s" % (i, ne, nb, nr, best))
        return "\n".join(lines) + "\n"


def dp_solve(g, bd, demands, allowed_fn=None):
    """Minimum-length forest whose per-cluster configurations are admissible.

    ``allowed_fn(node, pi_in, pi_out)`` returns the set of admissible overall
    partitions for clusters with active vertices beyond the boundary, or None
    to admit everything (the unrestricted configuration set).
    """
    solver = _Solver(g, bd, demands, allowed_fn)
    return solver.solve()


def reconstruct(table):
    """Edge set realizing the table's optimum; feasibility is asserted."""
    if table.root_key is None:
        raise DPInfeasibleError("no feasible assignment recorded")
    root = table.bd.root
    edges = set()
    stack = [(root, table.root_key)]
    while stack:
        node, key = stack.pop()
        io, al = key
        cost, bp = table.rows[node][io][al]
        if bp[0] == "leaf":
            edges |= bp[1]
        else:
            _, k1, k2 = bp
            a, b = node.children
            stack.append((a, k1))
            stack.append((b, k2))
    assert is_feasible(table.graph, edges, table.demands), "reconstructed forest infeasible"
    got = table.graph.total_length(edges)
    assert got == table.cost, "reconstructed length %s != table cost %s" % (got, table.cost)
    return frozenset(edges)


class _Solver:
    def __init__(self, g, bd, demands, allowed_fn):
        self.g = g
        self.bd = bd
        self.demands = list(demands)
        self.allowed_fn = allowed_fn
        self.bounds = boundaries(g, bd)
        self.acts, self.verts = active_sets(g, bd, self.bounds, self.demands)
        self._check_components()
        self.forced = self._forced_edges()
        self.rows = {}
        self._vector_ok = all(
            g.length(e).denominator == 1 for e in g.edge_ids()
        )

    # -- preparation -----------------------------------------------------

    def _check_components(self):
        ds = DisjointSets(self.g.vertices())
        for e in self.g.edge_ids():
            u, v = self.g.endpoints(e)
            ds.union(u, v)
        for s, t in self.demands:
            if not ds.same(s, t):
                raise DPInfeasibleError("demand (%r, %r) spans components" % (s, t))

    def _forced_edges(self):
        """Isolated single-edge components with an internal demand never
        become active anywhere, so their edge is forced directly."""
        forced = set()
        for s, t in self.demands:
            if self.g.degree(s) == 1 and self.g.degree(t) == 1:
                for e in self.g.incident(s):
                    if self.g.other_endpoint(e, s) == t:
                        forced.add(e)
        return forced

    def _demand_active(self, node, demand):
        s, t = demand
        act = self.acts[node]
        return s in act or t in act

    def _checked_demands(self, node):
        a, b = node.children
        out = []
        for d in self.demands:
            if (
                self._demand_active(a, d)
                and self._demand_active(b, d)
                and not self._demand_active(node, d)
            ):
                out.append(d)
        return out

    # -- solve -----------------------------------------------------------

    def solve(self):
        order = self.bd.nodes()
        for node in order:
            if node.is_leaf():
                self.rows[node] = self._leaf_table(node)
            else:
                self.rows[node] = self._combine(node)
        root = self.bd.root
        table = DPTable(
            graph=self.g,
            bd=self.bd,
            demands=self.demands,
            rows=self.rows,
            bounds=self.bounds,
            acts=self.acts,
        )
        empty = Partition((), ())
        root_rows = self.rows[root].get((empty, empty), {})
        if not root_rows:
            raise DPInfeasibleError("empty root table")
        # act at the root is empty, so there is a single overall key
        (all0,) = list(root_rows)
        cost, _ = root_rows[all0]
        table.cost = cost
        table.root_key = ((empty, empty), all0)
        return table

    def _allowed(self, node, pi_in, pi_out, act):
        if self.allowed_fn is None or act == pi_in.ground:
            return None  # everything admissible (or determined anyway)
        return self.allowed_fn(node, pi_in, pi_out)

    def _leaf_table(self, node):
        (eid,) = node.edges
        bound = self.bounds[node]
        act = self.acts[node]
        parts, _ = partition_space(tuple(sorted(bound, key=repr)))
        cost_edge = self.g.length(eid)
        table = {}
        options = [(frozenset(), Fraction(0)), (frozenset((eid,)), cost_edge)]
        if eid in self.forced:
            options = options[1:]
        for f_set, cost in options:
            pi_in = connectivity_on(self.g, f_set, bound)
            for pi_out in parts:
                pi_all = connectivity_on(self.g, f_set, act, extra_relations=pi_out.blocks)
                if not all(b & bound for b in pi_all.blocks):
                    continue  # not outgoing; can never combine
                allowed = self._allowed(node, pi_in, pi_out, act)
                if allowed is not None and pi_all not in allowed:
                    continue
                cell = table.setdefault((pi_in, pi_out), {})
                old = cell.get(pi_all)
                if old is None or cost < old[0]:
                    cell[pi_all] = (cost, ("leaf", f_set))
        return table

    def _combine(self, node):
        c1, c2 = node.children
        bound0 = self.bounds[node]
        act0 = self.acts[node]
        checked = self._checked_demands(node)
        pure = (
            act0 == bound0
            and self.acts[c1] == self.bounds[c1]
            and self.acts[c2] == self.bounds[c2]
            and not checked
            and self._vector_ok
        )
        if pure:
            return self._combine_pure(node, c1, c2)
        return self._combine_general(node, c1, c2, checked)

    # -- vectorized boundary-only combine ---------------------------------

    def _combine_pure(self, node, c1, c2):
        bound0 = self.bounds[node]
        b0 = tuple(sorted(bound0, key=repr))
        b1 = tuple(sorted(self.bounds[c1], key=repr))
        b2 = tuple(sorted(self.bounds[c2], key=repr))
        p0, ix0 = partition_space(b0)
        p1, ix1 = partition_space(b1)
        p2, ix2 = partition_space(b2)
        jin, g1m, g2m = _pure_matrices(b0, b1, b2)
        inf = float("inf")
        c1cost = np.full((len(p1), len(p1)), inf)
        c2cost = np.full((len(p2), len(p2)), inf)
        t1 = self.rows[c1]
        t2 = self.rows[c2]
        for (pi_in, pi_out), cell in t1.items():
            cost = min(c for c, _ in cell.values())
            c1cost[ix1[pi_in], ix1[pi_out]] = float(cost)
        for (pi_in, pi_out), cell in t2.items():
            cost = min(c for c, _ in cell.values())
            c2cost[ix2[pi_in], ix2[pi_out]] = float(cost)
        n0, n1, n2 = len(p0), len(p1), len(p2)
        out_cost = np.full((n0, n0), inf)
        out_arg = np.full((n0, n0, 2), -1, dtype=np.int32)
        jin_flat = jin.reshape(-1)
        group_idx = [np.nonzero(jin_flat == i0)[0] for i0 in range(n0)]
        for o0 in range(n0):
            sel1 = c1cost[:, g1m[o0]]  # [i1, i2]
            sel2 = c2cost[:, g2m[o0]].T  # [i1, i2]
            s = (sel1 + sel2).reshape(-1)
            for i0 in range(n0):
                idx = group_idx[i0]
                if idx.size == 0:
                    continue
                sub = s[idx]
                k = int(np.argmin(sub))
                if sub[k] < out_cost[i0, o0]:
                    out_cost[i0, o0] = sub[k]
                    flat = int(idx[k])
                    out_arg[i0, o0] = (flat // n2, flat % n2)
        table = {}
        for i0 in range(n0):
            for o0 in range(n0):
                cost = out_cost[i0, o0]
                if cost == inf:
                    continue
                i1, i2 = (int(x) for x in out_arg[i0, o0])
                pi_in1, pi_in2 = p1[i1], p2[i2]
                pi_out1 = p1[g1m[o0][i2]]
                pi_out2 = p2[g2m[o0][i1]]
                all1 = _join2(pi_in1, pi_out1)
                all2 = _join2(pi_in2, pi_out2)
                key1 = self._pick_key(c1, pi_in1, pi_out1)
                key2 = self._pick_key(c2, pi_in2, pi_out2)
                exact = self.rows[c1][(pi_in1, pi_out1)][key1[1]][0] + self.rows[c2][
                    (pi_in2, pi_out2)
                ][key2[1]][0]
                pi_in0, pi_out0 = p0[i0], p0[o0]
                pi_all0 = _join2(pi_in0, pi_out0)
                table.setdefault((pi_in0, pi_out0), {})[pi_all0] = (
                    exact,
                    ("combine", key1, key2),
                )
        return table

    def _pick_key(self, child, pi_in, pi_out):
        cell = self.rows[child][(pi_in, pi_out)]
        pi_all, _ = min(cell.items(), key=lambda kv: kv[1][0])
        return ((pi_in, pi_out), pi_all)

    # -- general combine ---------------------------------------------------

    def _combine_general(self, node, c1, c2, checked):
        bound0 = self.bounds[node]
        act0 = self.acts[node]
        act1, act2 = self.acts[c1], self.acts[c2]
        ground_u = act1 | act2
        for s, t in checked:
            assert s in ground_u and t in ground_u, "checked demand outside ground"
        p0, _ = partition_space(tuple(sorted(bound0, key=repr)))
        t1, t2 = self.rows[c1], self.rows[c2]
        by_in1 = {}
        for (pi_in, pi_out), cell in t1.items():
            by_in1.setdefault(pi_in, {})[pi_out] = cell
        by_in2 = {}
        for (pi_in, pi_out), cell in t2.items():
            by_in2.setdefault(pi_in, {})[pi_out] = cell
        table = {}
        memo_in0 = {}
        memo_out = {}
        allowed_memo = {}
        for in1, outs1 in by_in1.items():
            for in2, outs2 in by_in2.items():
                key = (in1, in2)
                in0 = memo_in0.get(key)
                if in0 is None:
                    in0 = _restrict(_join2(in1, in2), bound0)
                    memo_in0[key] = in0
                for out0 in p0:
                    k1 = (out0, in2, 1)
                    out1 = memo_out.get(k1)
                    if out1 is None:
                        out1 = _restrict(_join2(out0, in2), self.bounds[c1])
                        memo_out[k1] = out1
                    cell1 = outs1.get(out1)
                    if cell1 is None:
                        continue
                    k2 = (out0, in1, 2)
                    out2 = memo_out.get(k2)
                    if out2 is None:
                        out2 = _restrict(_join2(out0, in1), self.bounds[c2])
                        memo_out[k2] = out2
                    cell2 = outs2.get(out2)
                    if cell2 is None:
                        continue
                    base0 = _join2(in0, out0)
                    for all1, (cost1, _bp1) in cell1.items():
                        for all2, (cost2, _bp2) in cell2.items():
                            z = _join2(_join2(all1, all2), out0)
                            # children must already account for cross glue
                            if _restrict(z, act1) != all1 or _restrict(z, act2) != all2:
                                continue
                            all0 = _restrict(z, act0)
                            if _restrict(all0, bound0) != base0:
                                continue
                            if not all(b & bound0 for b in all0.blocks):
                                continue
                            if checked and not all(
                                z.relates(s, t) for s, t in checked
                            ):
                                continue
                            allowed = None
                            if self.allowed_fn is not None and act0 != bound0:
                                akey = (in0, out0)
                                allowed = allowed_memo.get(akey)
                                if allowed is None:
                                    allowed = self.allowed_fn(node, in0, out0)
                                    allowed_memo[akey] = allowed
                            if allowed is not None and all0 not in allowed:
                                continue
                            cost = cost1 + cost2
                            cell0 = table.setdefault((in0, out0), {})
                            old = cell0.get(all0)
                            if old is None or cost < old[0]:
                                cell0[all0] = (
                                    cost,
                                    (
                                        "combine",
                                        ((in1, out1), all1),
                                        ((in2, out2), all2),
                                    ),
                                )
        return table


_PURE_MATRICES = {}


def _pure_matrices(b0, b1, b2):
    """Index matrices: join of child ins restricted to the parent boundary,
    and child outs derived from the parent out plus the sibling in."""
    key = (b0, b1, b2)
    got = _PURE_MATRICES.get(key)
    if got is not None:
        return got
    p0, ix0 = partition_space(b0)
    p1, ix1 = partition_space(b1)
    p2, ix2 = partition_space(b2)
    s0, s1, s2 = frozenset(b0), frozenset(b1), frozenset(b2)
    jin = np.zeros((len(p1), len(p2)), dtype=np.int32)
    for i1, q1 in enumerate(p1):
        for i2, q2 in enumerate(p2):
            jin[i1, i2] = ix0[_restrict(_join2(q1, q2), s0)]
    g1m = np.zeros((len(p0), len(p2)), dtype=np.int32)
    for o0, q0 in enumerate(p0):
        for i2, q2 in enumerate(p2):
            g1m[o0, i2] = ix1[_restrict(_join2(q0, q2), s1)]
    g2m = np.zeros((len(p0), len(p1)), dtype=np.int32)
    for o0, q0 in enumerate(p0):
        for i1, q1 in enumerate(p1):
            g2m[o0, i1] = ix2[_restrict(_join2(q0, q1), s2)]
    got = (jin, g1m, g2m)
    _PURE_MATRICES[key] = got
    return got
