"""Set partitions of small finite ground sets.

Partitions are the currency of the configuration dynamic program: cluster
boundaries and active-vertex sets are partitioned by connectivity, tables
are keyed by canonical partition values, and the combine step repeatedly
joins and restricts them.
"""

from __future__ import annotations


class Partition:
    """Immutable set partition with canonically ordered blocks.

    Elements of ``ground`` not mentioned in ``blocks`` become singletons.
    """

    __slots__ = ("ground", "blocks", "_where", "_hash")

    def __init__(self, blocks=(), ground=None):
        cleaned = []
        seen = set()
        for b in blocks:
            fb = frozenset(b)
            if not fb:
                continue
            if seen & fb:
                raise ValueError("partition blocks overlap: %r" % (sorted(seen & fb),))
            seen |= fb
            cleaned.append(fb)
        if ground is None:
            gset = frozenset(seen)
        else:
            gset = frozenset(ground)
            extra = seen - gset
            if extra:
                raise ValueError("block elements outside ground: %r" % (sorted(extra),))
            for x in gset - seen:
                cleaned.append(frozenset((x,)))
        cleaned.sort(key=lambda b: min(map(repr, b)))
        object.__setattr__(self, "ground", gset)
        object.__setattr__(self, "blocks", tuple(cleaned))
        where = {}
        for i, b in enumerate(cleaned):
            for x in b:
                where[x] = i
        object.__setattr__(self, "_where", where)
        object.__setattr__(self, "_hash", hash((gset, self.blocks)))

    def __setattr__(self, name, value):
        raise AttributeError("Partition is immutable")

    @classmethod
    def discrete(cls, ground):
        return cls((), ground)

    @classmethod
    def trivial(cls, ground):
        """Single block covering the whole ground (empty ground gives no blocks)."""
        g = frozenset(ground)
        return cls((g,) if g else (), g)

    def relates(self, a, b):
        return self._where[a] == self._where[b]

    def block_of(self, x):
        return self.blocks[self._where[x]]

    def join(self, other):
        """Finest partition coarser than both (same ground)."""
        if self.ground != other.ground:
            raise ValueError("join requires identical grounds")
        return join_on(self.ground, self, other)

    def restrict(self, subset):
        """Restriction to a subset of the ground: intersect blocks, drop empties."""
        sub = frozenset(subset)
        if not sub <= self.ground:
            raise ValueError("restriction set not within ground")
        return Partition((b & sub for b in self.blocks), sub)

    @property
    def n_blocks(self):
        return len(self.blocks)

    def is_discrete(self):
        return all(len(b) == 1 for b in self.blocks)

    def is_trivial(self):
        return len(self.blocks) <= 1

    def __eq__(self, other):
        return (
            isinstance(other, Partition)
            and self.ground == other.ground
            and self.blocks == other.blocks
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = "|".join("{" + ",".join(map(str, sorted(b))) + "}" for b in self.blocks)
        return "Partition(%s)" % body


def join_on(ground, *sources):
    """Join relations from several partitions/block-iterables onto one ground.

    Every source's elements must lie inside ``ground``; elements untouched by
    any source come out as singletons.  This is the workhorse for joining
    partitions that live on different (sub)grounds.
    """
    gset = frozenset(ground)
    parent = {x: x for x in gset}

    def find(x):
        r = x
        while parent[r] != r:
            r = parent[r]
        while parent[x] != r:
            parent[x], x = r, parent[x]
        return r

    for src in sources:
        blocks = src.blocks if isinstance(src, Partition) else src
        for b in blocks:
            it = iter(b)
            try:
                first = find(next(it))
            except StopIteration:
                continue
            for x in it:
                parent[find(x)] = first
    groups = {}
    for x in gset:
        groups.setdefault(find(x), []).append(x)
    return Partition(groups.values(), gset)


def set_partitions(items):
    """All set partitions of ``items`` via restricted growth strings.

    Yields every partition exactly once, in RGS order.  ``Bell(len(items))``
    results, so callers keep the ground small.
    """
    items = list(items)
    n = len(items)
    if n == 0:
        yield Partition((), ())
        return
    a = [0] * n

    def emit():
        blocks = {}
        for x, label in zip(items, a):
            blocks.setdefault(label, []).append(x)
        return Partition(blocks.values(), items)

    while True:
        yield emit()
        # next RGS: rightmost position that can be incremented
        j = n - 1
        while j > 0:
            if a[j] <= max(a[:j]):
                break
            j -= 1
        if j == 0:
            return
        a[j] += 1
        for k in range(j + 1, n):
            a[k] = 0


def bell_number(n):
    """Number of set partitions of an n-set (table sizing / test bounds)."""
    if n == 0:
        return 1
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[-1]
