"""(2, l)-sparsity for multigraphs with loops.

Tightness is decided with the (k, l) pebble game.  Queries about every
vertex subset (tight subgraphs, critical sets, gain conditions) enumerate
induced subgraphs and are capped by a vertex bound, 14 unless the
``PRK_BRUTE_FORCE_BOUND`` environment variable says otherwise.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .core import OrbitGraph

K = 2
DEFAULT_BOUND = 14


class BoundExceeded(ValueError):
    """Subset enumeration requested above the brute-force vertex bound."""


def brute_force_bound() -> int:
    raw = os.environ.get("PRK_BRUTE_FORCE_BOUND")
    if raw is None or raw.strip() == "":
        return DEFAULT_BOUND
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"PRK_BRUTE_FORCE_BOUND must be an integer, got {raw!r}") from None


def check_bound(g: OrbitGraph, bound: int | None = None) -> None:
    b = brute_force_bound() if bound is None else bound
    if g.n > b:
        raise BoundExceeded(f"{g.n} vertices exceeds the brute-force bound {b}")


@dataclass(frozen=True)
class SparsityParams:
    k: int = K
    ell: int = 1

    def __post_init__(self):
        if self.k != K:
            raise ValueError("only k = 2 is supported")
        if not (0 <= self.ell < 2 * self.k):
            raise ValueError(f"ell must lie in [0, {2 * self.k})")


# ---------------------------------------------------------------------------
# pebble game

def pebble_game(g: OrbitGraph, ell: int, edge_ids=None) -> tuple[list[int], list[int]]:
    """Run the (2, ell) pebble game; return ``(accepted, rejected)`` edge ids.

    Accepted edges form a maximal (2, ell)-sparse subgraph.  A loop needs
    ell + 1 pebbles on a single vertex, so loops only survive for ell <= 1.
    """
    SparsityParams(K, ell)
    pebbles = [K] * g.n
    out = [[] for _ in range(g.n)]  # out[v]: list of [edge_id, head]
    order = range(g.n_edges) if edge_ids is None else edge_ids
    accepted, rejected = [], []

    def fetch(root, blocked):
        # DFS along oriented edges for a free pebble away from the blocked set
        parent = {root: None}
        stack = [root]
        while stack:
            u = stack.pop()
            for idx, (k, w) in enumerate(out[u]):
                if w in parent or w in blocked:
                    continue
                parent[w] = (u, idx)
                if pebbles[w] > 0:
                    _reverse_path(out, parent, w)
                    pebbles[w] -= 1
                    pebbles[root] += 1
                    return True
                stack.append(w)
        return False

    for k in order:
        e = g.edges[k]
        u, v = e.tail, e.head
        ends = (u,) if u == v else (u, v)
        ok = True
        while sum(pebbles[x] for x in ends) < ell + 1:
            if u == v:
                if pebbles[u] >= K or not fetch(u, {u}):
                    ok = False
                    break
            elif not (fetch(u, {u, v}) or fetch(v, {u, v})):
                ok = False
                break
        if not ok:
            rejected.append(k)
            continue
        src = u if pebbles[u] > 0 else v
        pebbles[src] -= 1
        out[src].append([k, v if src == u else u])
        accepted.append(k)
    return accepted, rejected


def _reverse_path(out, parent, w):
    # parent[x] = (predecessor, index of the edge x in out[predecessor])
    hops = []
    x = w
    while parent[x] is not None:
        u, idx = parent[x]
        hops.append((u, idx, x))
        x = u
    # resolve list entries before mutating any adjacency list
    moved = [(u, out[u][idx], x) for u, idx, x in hops]
    for u, item, x in moved:
        out[u].remove(item)
        out[x].append([item[0], u])


def is_sparse(g: OrbitGraph, params: SparsityParams | int = 1) -> bool:
    ell = params if isinstance(params, int) else params.ell
    return not pebble_game(g, ell)[1]


def is_tight(g: OrbitGraph, params: SparsityParams | int = 1) -> bool:
    ell = params if isinstance(params, int) else params.ell
    if g.n_edges != K * g.n - ell:
        return False
    return is_sparse(g, ell)


def sparse_rank(g: OrbitGraph, ell: int, edge_ids=None) -> int:
    return len(pebble_game(g, ell, edge_ids)[0])


# ---------------------------------------------------------------------------
# subset tables

@lru_cache(maxsize=512)
def subset_table(g: OrbitGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(masks, sizes, induced_counts)`` for every nonempty vertex subset."""
    masks = np.arange(1, 1 << g.n, dtype=np.int64)
    sizes = np.bitwise_count(masks).astype(np.int64)
    counts = np.zeros_like(masks)
    for e in g.edges:
        em = (1 << e.tail) | (1 << e.head)
        counts += (masks & em) == em
    return masks, sizes, counts


def mask_to_set(mask: int) -> frozenset:
    out, v = [], 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return frozenset(out)


def induced_count(g: OrbitGraph, subset) -> int:
    s = set(subset)
    return sum(1 for e in g.edges if e.tail in s and e.head in s)


def tight_subgraphs(g: OrbitGraph, ell: int, bound: int | None = None) -> list[frozenset]:
    """Vertex sets S with i(S) = 2|S| - ell, largest first.

    Edgeless singletons are skipped: they meet the count for ell = 2 but
    carry no edges.
    """
    check_bound(g, bound)
    if g.n == 0:
        return []
    masks, sizes, counts = subset_table(g)
    hit = (counts == K * sizes - ell) & (counts > 0)
    sel = masks[hit]
    sel_sizes = sizes[hit]
    order = np.lexsort((sel, -sel_sizes))
    return [mask_to_set(int(m)) for m in sel[order]]


def brute_is_sparse(g: OrbitGraph, ell: int) -> bool:
    """Exhaustive subset count: every edge-spanning subgraph has <= 2|V'| - ell edges."""
    if g.n == 0:
        return True
    masks, sizes, counts = subset_table(g)
    bad = (counts > 0) & (counts > K * sizes - ell)
    return not bool(bad.any())


def brute_is_tight(g: OrbitGraph, ell: int) -> bool:
    return g.n_edges == K * g.n - ell and brute_is_sparse(g, ell)


# ---------------------------------------------------------------------------
# critical sets

class SubsetKind(str, Enum):
    OVERBRACED = "overbraced"
    OVER_CRITICAL = "over-critical"
    CRITICAL = "critical"
    SEMI_CRITICAL = "semi-critical"
    SLACK = "slack"


@dataclass(frozen=True)
class SubsetClass:
    subset: frozenset
    i_count: int
    kind: SubsetKind


def classify_subset(g: OrbitGraph, subset) -> SubsetClass:
    s = frozenset(subset)
    if not s:
        raise ValueError("subset must be nonempty")
    i = induced_count(g, s)
    slack = 2 * len(s) - i
    if slack < 1:
        kind = SubsetKind.OVERBRACED
    else:
        kind = {
            1: SubsetKind.OVER_CRITICAL,
            2: SubsetKind.CRITICAL,
            3: SubsetKind.SEMI_CRITICAL,
        }.get(slack, SubsetKind.SLACK)
    return SubsetClass(s, i, kind)


def is_p21(g: OrbitGraph) -> bool:
    """(2,1)-tight with an edge whose deletion leaves a (2,2)-tight graph.

    The (2,2) pebble game on a (2,1)-tight graph rejects exactly one edge
    precisely when such an edge exists.  Disconnected graphs are rejected.
    """
    if g.n == 0 or not g.is_connected():
        return False
    if not is_tight(g, 1):
        return False
    return sparse_rank(g, 2) == 2 * g.n - 2


def is_p21_by_definition(g: OrbitGraph) -> bool:
    """Literal check over every edge deletion; slower reference for tests."""
    if g.n == 0 or not g.is_connected() or not is_tight(g, 1):
        return False
    for k in range(g.n_edges):
        rest = [j for j in range(g.n_edges) if j != k]
        if sparse_rank(g, 2, rest) == 2 * g.n - 2:
            return True
    return False


def circuit_edges(g: OrbitGraph) -> list[int]:
    """Edges whose deletion leaves a (2,2)-tight graph (the unique (2,2)-circuit)."""
    out = []
    for k in range(g.n_edges):
        rest = [j for j in range(g.n_edges) if j != k]
        if sparse_rank(g, 2, rest) == 2 * g.n - 2:
            out.append(k)
    return out


def find_circuit(g: OrbitGraph) -> frozenset:
    """Unique minimal over-critical vertex set of a P(2,1)-graph."""
    if not is_p21(g):
        raise ValueError("graph is not a P(2,1)-graph")
    ids = circuit_edges(g)
    verts = set()
    for k in ids:
        verts.update((g.edges[k].tail, g.edges[k].head))
    return frozenset(verts)


def minimal_over_critical_sets(g: OrbitGraph, bound: int | None = None) -> list[frozenset]:
    """Inclusion-minimal vertex sets with i(X) = 2|X| - 1, by enumeration."""
    over = tight_subgraphs(g, 1, bound)
    return [x for x in over if not any(y < x for y in over)]


def bridges(g: OrbitGraph) -> list[int]:
    """Edge ids whose removal disconnects their component."""
    base = len(g.components())
    out = []
    for k, e in enumerate(g.edges):
        if e.is_loop:
            continue
        rest = [j for j in range(g.n_edges) if j != k]
        if len(g.components(edge_ids=rest)) > base:
            out.append(k)
    return out


# ---------------------------------------------------------------------------
# tree + connected map-graph

@dataclass(frozen=True)
class TreeMapDecomposition:
    tree_edges: frozenset
    map_edges: frozenset


def check_decomposition(g: OrbitGraph, dec: TreeMapDecomposition) -> bool:
    t, m = set(dec.tree_edges), set(dec.map_edges)
    if t & m or (t | m) != set(range(g.n_edges)):
        return False
    if len(t) != g.n - 1 or any(g.edges[k].is_loop for k in t):
        return False
    if len(g.components(edge_ids=t)) != 1:
        return False
    return len(m) == g.n and len(g.components(edge_ids=m)) == 1


def tree_map_decompose(g: OrbitGraph, certificate=None) -> TreeMapDecomposition:
    """Split the edges of a P(2,1)-graph into a spanning tree and a connected
    spanning map-graph.

    With a construction certificate the split is carried along the moves;
    otherwise G - e (e the edge outside a (2,2)-basis) is partitioned into
    two spanning trees and e joins the second one.
    """
    if not is_p21(g):
        raise ValueError("graph is not a P(2,1)-graph")
    if certificate is not None:
        from .henneberg import decomposition_from_certificate

        dec = decomposition_from_certificate(g, certificate)
        if dec is not None:
            return dec
    accepted, rejected = pebble_game(g, 2)
    (extra,) = rejected
    forests = partition_two_forests(g, accepted)
    if forests is None or any(len(f) != g.n - 1 for f in forests):
        raise RuntimeError("forest partition failed on a (2,2)-tight graph")
    dec = TreeMapDecomposition(frozenset(forests[0]), frozenset(forests[1] | {extra}))
    assert check_decomposition(g, dec)
    return dec


def partition_two_forests(g: OrbitGraph, edge_ids) -> list[set] | None:
    """Partition edges into two forests by matroid-partition augmenting paths.

    Returns ``None`` if the edges are not coverable by two forests.
    """
    forests: list[set] = [set(), set()]
    for x in edge_ids:
        if not _augment(g, forests, x):
            return None
    return forests


def _forest_path(g, forest, u, v):
    """Edge ids on the forest path from u to v, or None if disconnected."""
    if u == v:
        return []
    adj = {}
    for k in forest:
        e = g.edges[k]
        adj.setdefault(e.tail, []).append((e.head, k))
        adj.setdefault(e.head, []).append((e.tail, k))
    prev = {u: None}
    queue = deque([u])
    while queue:
        a = queue.popleft()
        if a == v:
            break
        for b, k in adj.get(a, ()):
            if b not in prev:
                prev[b] = (a, k)
                queue.append(b)
    if v not in prev:
        return None
    path = []
    x = v
    while prev[x] is not None:
        a, k = prev[x]
        path.append(k)
        x = a
    return path


def _augment(g, forests, x):
    # label[y] = (z, i): y sits on the cycle z closes in forest i
    label = {x: None}
    queue = deque([x])
    while queue:
        y = queue.popleft()
        e = g.edges[y]
        for i in (0, 1):
            if y in forests[i]:
                continue
            cyc = _forest_path(g, forests[i], e.tail, e.head)
            if cyc is None:
                _apply_swaps(forests, label, y, i)
                return True
            for z in cyc:
                if z not in label:
                    label[z] = (y, i)
                    queue.append(z)
    return False


def _apply_swaps(forests, label, y, i):
    while True:
        forests[i].add(y)
        lab = label[y]
        if lab is None:
            return
        z, j = lab
        # y leaves forest j and z takes its place
        forests[j].discard(y)
        y, i = z, j
