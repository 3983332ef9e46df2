"""Mergeable-heap structure driving primal-dual moat growing.

Supports four operations on a vertex-categorized multigraph: bulk cost
decrease over a bicategory, find-min over a bicategory, vertex recategorize,
and edge contraction.  Costs obey the label invariant

    cost(e) = label(e) + label(IN[v, c]) + label(B[(C[v], c)])

where ``IN[v, c]`` is the heap of incoming edges of ``v`` with tail category
``c`` and ``B`` keys those heaps per bicategory.  Bulk decreases touch only
the B label.  A bounded-outdegree orientation keeps recategorization cheap;
the orientation is heuristic and never affects observable results.

Bicategory arguments to the public operations are unordered pairs of
categories; internally heaps are keyed by ordered (head category, tail
category) pairs following the orientation.
"""

from __future__ import annotations

from collections import deque


class EmptyBicategoryError(KeyError):
    """find_min on a bicategory that currently has no edges."""


class OrientationOverflowError(RuntimeError):
    """No orientation within the outdegree bound exists for the current graph."""


class _Node:
    """Pairing-heap node; key is the edge/heap label, tie breaks by edge id."""

    __slots__ = ("key", "tie", "item", "child", "sib", "prev")

    def __init__(self, key, tie, item):
        self.key = key
        self.tie = tie
        self.item = item
        self.child = None
        self.sib = None
        self.prev = None


def _link(a, b):
    """Meld two roots; smaller (key, tie) wins, loser becomes first child."""
    if (b.key, b.tie) < (a.key, a.tie):
        a, b = b, a
    b.prev = a
    b.sib = a.child
    if a.child is not None:
        a.child.prev = b
    a.child = b
    return a


def _merge_pairs(first):
    """Two-pass pairing of a sibling list whose head is ``first``."""
    if first is None:
        return None
    pairs = []
    cur = first
    while cur is not None:
        a = cur
        b = cur.sib
        nxt = b.sib if b is not None else None
        a.prev = a.sib = None
        if b is not None:
            b.prev = b.sib = None
            a = _link(a, b)
        pairs.append(a)
        cur = nxt
    root = pairs.pop()
    while pairs:
        root = _link(pairs.pop(), root)
    return root


class PairingHeap:
    """Min pairing heap with arbitrary delete and whole-heap key offset."""

    __slots__ = ("root", "size")

    def __init__(self):
        self.root = None
        self.size = 0

    def push(self, node):
        node.child = node.sib = node.prev = None
        self.root = node if self.root is None else _link(self.root, node)
        self.size += 1

    def peek(self):
        return self.root

    def _cut(self, node):
        prev = node.prev
        if prev.child is node:
            prev.child = node.sib
        else:
            prev.sib = node.sib
        if node.sib is not None:
            node.sib.prev = prev
        node.sib = node.prev = None

    def remove(self, node):
        self.size -= 1
        if node is self.root:
            self.root = _merge_pairs(node.child)
            node.child = None
            return
        self._cut(node)
        sub = _merge_pairs(node.child)
        node.child = None
        if sub is not None:
            self.root = _link(self.root, sub)

    def meld(self, other):
        """Destructive meld; sizes add, other becomes empty."""
        if other.root is not None:
            self.root = other.root if self.root is None else _link(self.root, other.root)
            self.size += other.size
        other.root = None
        other.size = 0

    def offset(self, delta):
        """Add delta to every key (order preserved)."""
        if delta == 0 or self.root is None:
            return
        stack = [self.root]
        while stack:
            n = stack.pop()
            n.key += delta
            if n.sib is not None:
                stack.append(n.sib)
            if n.child is not None:
                stack.append(n.child)
        # root has no siblings, so the walk above stays inside this heap

    def __iter__(self):
        if self.root is None:
            return
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            if n.sib is not None and n is not self.root:
                stack.append(n.sib)
            if n.child is not None:
                stack.append(n.child)

    def __len__(self):
        return self.size


class _EdgeRec:
    __slots__ = ("eid", "tail", "head", "node", "heap", "alive")

    def __init__(self, eid, tail, head):
        self.eid = eid
        self.tail = tail  # canonical at last write; resolve() before use
        self.head = head
        self.node = None
        self.heap = None
        self.alive = True


class _InHeap:
    """IN[v, c]: labeled heap of incoming edges of v with tail category c."""

    __slots__ = ("owner", "tail_cat", "label", "ph", "b_node")

    def __init__(self, owner, tail_cat):
        self.owner = owner
        self.tail_cat = tail_cat
        self.label = 0
        self.ph = PairingHeap()
        self.b_node = None


class CategoryState:
    """The contractible categorized-edge structure (see module docstring).

    ``categories`` is fixed at construction.  ``max_outdegree`` bounds the
    maintained orientation; for simple planar inputs the default suffices at
    rest, and inputs outside the declared family degrade performance only.
    """

    def __init__(self, graph, category_of, categories=("living", "dead"), max_outdegree=9):
        self.categories = tuple(categories)
        self.max_outdegree = max_outdegree
        self._alias = {}
        self._cat = {}
        self._in = {}  # (vertex, tail_cat) -> _InHeap
        self._out = {}  # vertex -> list[_EdgeRec]
        self._outdeg = {}
        self._b = {}  # ordered bicategory -> PairingHeap of in-heap nodes
        self._b_label = {}
        self._edges = {}
        self._next_vertex = 0
        self.flips = 0
        self.orientation_overflows = 0
        for c1 in self.categories:
            for c2 in self.categories:
                self._b[(c1, c2)] = PairingHeap()
                self._b_label[(c1, c2)] = 0

        for v in graph.vertices():
            c = category_of[v]
            if c not in self.categories:
                raise ValueError("unknown category %r" % (c,))
            self._cat[v] = c
            self._out[v] = []
            self._outdeg[v] = 0
        # fresh ids mirror ContractionRecord.for_graph so engines stay aligned
        self._next_vertex = (
            max((v for v in graph.vertices() if isinstance(v, int)), default=0) + 1
        )
        self._orient_and_load(graph)

    # -- construction helpers ---------------------------------------------

    def _orient_and_load(self, graph):
        """Initial orientation by degeneracy peeling, then heap loading."""
        remaining = {v: set(graph.incident(v)) for v in graph.vertices()}
        bucket = {}
        for v, inc in remaining.items():
            bucket.setdefault(len(inc), set()).add(v)
        removed = set()
        tail_of = {}
        d = 0
        for _ in range(len(remaining)):
            while not bucket.get(d):
                d += 1
            v = min(bucket[d], key=repr)
            bucket[d].discard(v)
            removed.add(v)
            for e in sorted(remaining[v]):
                u = graph.other_endpoint(e, v)
                if u in removed:
                    continue
                tail_of[e] = v
                deg = len(remaining[u])
                bucket[deg].discard(u)
                remaining[u].discard(e)
                bucket.setdefault(deg - 1, set()).add(u)
                if deg - 1 < d:
                    d = deg - 1
            remaining[v] = set()
        for eid, u, v, ln in sorted(graph.edges()):
            t = tail_of.get(eid, u)
            h = v if t == u else u
            rec = _EdgeRec(eid, t, h)
            self._edges[eid] = rec
            self._out[t].append(rec)
            self._outdeg[t] += 1
            heap = self._get_in(h, self._cat[t])
            rec.heap = heap
            rec.node = _Node(ln - heap.label - self._b_label[self._bicat_of(heap)], eid, rec)
            heap.ph.push(rec.node)
        for heap in list(self._in.values()):
            self._refresh_b(heap)

    # -- small internals ---------------------------------------------------

    def resolve(self, v):
        alias = self._alias
        r = v
        while r in alias:
            r = alias[r]
        while v in alias and alias[v] != r:
            alias[v], v = r, alias[v]
        return r

    def _bicat_of(self, heap):
        return (self._cat[heap.owner], heap.tail_cat)

    def _get_in(self, v, c):
        key = (v, c)
        h = self._in.get(key)
        if h is None:
            h = _InHeap(v, c)
            self._in[key] = h
        return h

    def _refresh_b(self, heap):
        """Reposition IN[v,c] inside its bicategory heap after a min change."""
        if heap.b_node is not None:
            b = self._b[heap.b_node.item[1]]
            b.remove(heap.b_node)
            heap.b_node = None
        top = heap.ph.peek()
        if top is None:
            self._in.pop((heap.owner, heap.tail_cat), None)
            return
        bicat = self._bicat_of(heap)
        node = _Node(heap.label + top.key, top.tie, (heap, bicat))
        heap.b_node = node
        self._b[bicat].push(node)

    def _true_cost(self, rec):
        heap = rec.heap
        return rec.node.key + heap.label + self._b_label[self._bicat_of(heap)]

    def _detach_edge_node(self, rec):
        heap = rec.heap
        was_top = heap.ph.peek() is rec.node
        heap.ph.remove(rec.node)
        if was_top:
            self._refresh_b(heap)
        rec.heap = None

    def _file_edge(self, rec, cost):
        """Insert rec into IN[head, C[tail]] so its true cost equals ``cost``."""
        h = self.resolve(rec.head)
        t = self.resolve(rec.tail)
        heap = self._get_in(h, self._cat[t])
        rec.heap = heap
        rec.node.key = cost - heap.label - self._b_label[self._bicat_of(heap)]
        rec.node.child = rec.node.sib = rec.node.prev = None
        was_top = heap.ph.peek()
        heap.ph.push(rec.node)
        if was_top is None or heap.ph.peek() is rec.node:
            self._refresh_b(heap)

    def _expand_bicat(self, bicat):
        c1, c2 = bicat
        if c1 not in self.categories or c2 not in self.categories:
            raise KeyError("unknown bicategory %r" % (bicat,))
        if c1 == c2:
            return ((c1, c2),)
        return ((c1, c2), (c2, c1))

    # -- the four public operations ----------------------------------------

    def decrease_cost(self, bicat, delta):
        """Subtract delta from every edge whose endpoint categories match ``bicat``."""
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        for bc in self._expand_bicat(bicat):
            self._b_label[bc] -= delta

    def try_find_min(self, bicat):
        """(edge id, cost) of the cheapest matching edge, or None if empty."""
        best = None
        for bc in self._expand_bicat(bicat):
            b = self._b[bc]
            while True:
                top = b.peek()
                if top is None:
                    break
                heap = top.item[0]
                if heap.ph.peek() is None or heap.b_node is not top:
                    b.remove(top)
                    if heap.b_node is top:
                        heap.b_node = None
                    continue
                break
            if top is None:
                continue
            heap = top.item[0]
            edge_node = heap.ph.peek()
            cost = edge_node.key + heap.label + self._b_label[bc]
            cand = (cost, edge_node.tie)
            if best is None or cand < best[:2]:
                best = (cost, edge_node.tie, edge_node.item)
        if best is None:
            return None
        return best[1], best[0]

    def find_min(self, bicat):
        got = self.try_find_min(bicat)
        if got is None:
            raise EmptyBicategoryError("bicategory %r is empty" % (bicat,))
        return got

    def change_category(self, v, c):
        v = self.resolve(v)
        if v not in self._cat:
            raise KeyError("unknown vertex %r" % (v,))
        if c not in self.categories:
            raise ValueError("unknown category %r" % (c,))
        c0 = self._cat[v]
        if c0 == c:
            return
        # incoming heaps move between B buckets with a label correction
        for c2 in self.categories:
            heap = self._in.get((v, c2))
            if heap is None:
                continue
            if heap.b_node is not None:
                self._b[(c0, c2)].remove(heap.b_node)
                heap.b_node = None
            heap.label += self._b_label[(c0, c2)] - self._b_label[(c, c2)]
        self._cat[v] = c
        for c2 in self.categories:
            heap = self._in.get((v, c2))
            if heap is not None:
                self._refresh_b(heap)
        # outgoing edges refile under the new tail category
        out = self._out[v]
        keep = []
        for rec in out:
            if not rec.alive or self.resolve(rec.tail) != v:
                continue
            keep.append(rec)
            cost = self._true_cost(rec)
            self._detach_edge_node(rec)
            self._file_edge(rec, cost)
        self._out[v] = keep

    def contract_edge(self, eid, c):
        rec = self._edges.get(eid)
        if rec is None or not rec.alive:
            raise KeyError("unknown or dead edge %r" % (eid,))
        u = self.resolve(rec.tail)
        v = self.resolve(rec.head)
        if u == v:
            raise ValueError("cannot contract a self-loop")
        self._delete_edge(rec)
        self.change_category(u, c)
        self.change_category(v, c)
        w = self._next_vertex
        self._next_vertex += 1
        self._alias[u] = w
        self._alias[v] = w
        self._cat[w] = c
        del self._cat[u]
        del self._cat[v]
        # merge IN heaps per tail category (small-to-large label alignment)
        for c2 in self.categories:
            hu = self._in.pop((u, c2), None)
            hv = self._in.pop((v, c2), None)
            for h in (hu, hv):
                if h is not None and h.b_node is not None:
                    self._b[(c, c2)].remove(h.b_node)
                    h.b_node = None
            merged = self._meld_in(hu, hv, w)
            if merged is not None:
                self._in[(w, c2)] = merged
                self._refresh_b(merged)
        self._out[w] = self._out.pop(u, []) + self._out.pop(v, [])
        self._outdeg[w] = 0
        self._outdeg.pop(u, None)
        self._outdeg.pop(v, None)
        fresh = []
        for r2 in self._out[w]:
            if not r2.alive or self.resolve(r2.tail) != w:
                continue
            if self.resolve(r2.head) == w:
                self._delete_edge(r2)  # self-loop created by the merge
                continue
            fresh.append(r2)
        self._out[w] = fresh
        self._outdeg[w] = len(fresh)
        if self._outdeg[w] > self.max_outdegree:
            try:
                self.reorient_for_insertion(w)
            except OrientationOverflowError:
                self.orientation_overflows += 1
        return w

    def reorient_for_insertion(self, v):
        """Flip edges along out-paths until v is within the outdegree bound.

        Raises OrientationOverflowError when every vertex reachable along
        out-edges is saturated (graph outside the declared family).
        """
        v = self.resolve(v)
        flips = []
        while self._outdeg[v] > self.max_outdegree:
            path = self._find_slack_path(v)
            if path is None:
                raise OrientationOverflowError(
                    "cannot restore outdegree bound %d at %r" % (self.max_outdegree, v)
                )
            for rec in path:
                self._flip(rec)
                flips.append(rec.eid)
        return flips

    # -- contraction/orientation internals ----------------------------------

    def _meld_in(self, hu, hv, w):
        if hu is None and hv is None:
            return None
        if hu is None or len(hu.ph) == 0:
            keep, other = hv, hu
        elif hv is None or len(hv.ph) == 0:
            keep, other = hu, hv
        elif len(hu.ph) >= len(hv.ph):
            keep, other = hu, hv
        else:
            keep, other = hv, hu
        if other is not None and len(other.ph) > 0:
            diff = other.label - keep.label
            other.ph.offset(diff)
            for n in list(other.ph):
                n.item.heap = keep
            keep.ph.meld(other.ph)
        keep.owner = w
        return keep

    def _delete_edge(self, rec):
        self._detach_edge_node(rec)
        rec.alive = False
        t = self.resolve(rec.tail)
        if t in self._outdeg:
            self._outdeg[t] -= 1

    def _find_slack_path(self, start):
        """BFS along out-edges to a vertex with outdegree slack; edge path back."""
        seen = {start}
        parent = {}
        q = deque((start,))
        while q:
            x = q.popleft()
            for rec in self._out.get(x, ()):
                if not rec.alive or self.resolve(rec.tail) != x:
                    continue
                y = self.resolve(rec.head)
                if y in seen:
                    continue
                seen.add(y)
                parent[y] = (x, rec)
                if self._outdeg[y] < self.max_outdegree:
                    path = []
                    cur = y
                    while cur != start:
                        px, pe = parent[cur]
                        path.append(pe)
                        cur = px
                    path.reverse()
                    return path
                q.append(y)
        return None

    def _flip(self, rec):
        a = self.resolve(rec.tail)
        b = self.resolve(rec.head)
        cost = self._true_cost(rec)
        self._detach_edge_node(rec)
        rec.tail, rec.head = b, a
        self._outdeg[a] -= 1
        self._outdeg[b] += 1
        self._out[b].append(rec)
        self._file_edge(rec, cost)
        self.flips += 1
        # stale entry in OUT[a] is purged lazily on the next pass

    # -- inspection ----------------------------------------------------------

    def category(self, v):
        return self._cat[self.resolve(v)]

    def live_vertices(self):
        return list(self._cat)

    def live_edges(self):
        return [e for e, r in self._edges.items() if r.alive]

    def cost(self, eid):
        rec = self._edges[eid]
        if not rec.alive:
            raise KeyError("edge %r is gone" % (eid,))
        return self._true_cost(rec)

    def endpoints(self, eid):
        rec = self._edges[eid]
        return self.resolve(rec.tail), self.resolve(rec.head)

    def outdegree(self, v):
        return self._outdeg[self.resolve(v)]

    def check_label_invariant(self, reference=None):
        """Recompute every live cost through the label chain; verify filing.

        Returns {eid: cost}.  With ``reference`` given, also asserts equality.
        """
        seen = {}
        for (v, c2), heap in self._in.items():
            assert heap.owner == v and heap.tail_cat == c2
            b_lab = self._b_label[(self._cat[v], c2)]
            for node in heap.ph:
                rec = node.item
                assert rec.alive
                assert self.resolve(rec.head) == v, "edge filed under wrong head"
                assert self._cat[self.resolve(rec.tail)] == c2, "wrong tail category"
                assert rec.eid not in seen, "edge in two heaps"
                seen[rec.eid] = node.key + heap.label + b_lab
        alive = {e for e, r in self._edges.items() if r.alive}
        assert set(seen) == alive, "IN heaps do not cover the live edges"
        if reference is not None:
            for e, cost in seen.items():
                assert cost == reference[e], "cost drift on edge %r" % (e,)
        return seen

    def check_outdegree_bound(self):
        return all(d <= self.max_outdegree for d in self._outdeg.values())


class NaiveCategoryState:
    """Array-backed reference with identical observable behavior (O(m) per op)."""

    def __init__(self, graph, category_of, categories=("living", "dead"), max_outdegree=None):
        self.categories = tuple(categories)
        self._cat = {v: category_of[v] for v in graph.vertices()}
        self._cost = {}
        self._ends = {}
        self._alias = {}
        self._next_vertex = 0
        for v in graph.vertices():
            if isinstance(v, int) and v >= self._next_vertex:
                self._next_vertex = v + 1
        for eid, u, v, ln in graph.edges():
            self._cost[eid] = ln
            self._ends[eid] = (u, v)

    def resolve(self, v):
        while v in self._alias:
            v = self._alias[v]
        return v

    def _pair(self, eid):
        u, v = self._ends[eid]
        a = self._cat[self.resolve(u)]
        b = self._cat[self.resolve(v)]
        return frozenset((a, b))

    def decrease_cost(self, bicat, delta):
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        want = frozenset(bicat)
        for eid in self._cost:
            if self._pair(eid) == want:
                self._cost[eid] -= delta

    def try_find_min(self, bicat):
        want = frozenset(bicat)
        best = None
        for eid, cost in self._cost.items():
            if self._pair(eid) == want and (best is None or (cost, eid) < best):
                best = (cost, eid)
        if best is None:
            return None
        return best[1], best[0]

    def find_min(self, bicat):
        got = self.try_find_min(bicat)
        if got is None:
            raise EmptyBicategoryError("bicategory %r is empty" % (bicat,))
        return got

    def change_category(self, v, c):
        v = self.resolve(v)
        if v not in self._cat:
            raise KeyError("unknown vertex %r" % (v,))
        self._cat[v] = c

    def contract_edge(self, eid, c):
        if eid not in self._cost:
            raise KeyError("unknown or dead edge %r" % (eid,))
        u, v = self._ends[eid]
        u, v = self.resolve(u), self.resolve(v)
        if u == v:
            raise ValueError("cannot contract a self-loop")
        w = self._next_vertex
        self._next_vertex += 1
        self._alias[u] = w
        self._alias[v] = w
        self._cat[w] = c
        del self._cat[u]
        del self._cat[v]
        dead = [e for e in self._cost if self.resolve(self._ends[e][0]) == self.resolve(self._ends[e][1])]
        for e in dead:
            del self._cost[e]
        return w

    def category(self, v):
        return self._cat[self.resolve(v)]

    def cost(self, eid):
        return self._cost[eid]

    def live_edges(self):
        return list(self._cost)
