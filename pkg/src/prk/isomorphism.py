"""Gain-graph isomorphism up to relabeling, reorientation and switching.

Two gain graphs are equivalent when a vertex bijection ``pi`` and integer
potentials ``a`` exist such that the edge {u, v; m} of the first graph
matches an edge {pi(u), pi(v); a_u + m - a_v} of the second, as multisets.
Switching preserves every cycle gain, which is why certificates are
compared this way.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import permutations, product

from .core import OrbitGraph, gain_add, gain_neg, gain_sub, zero_gain


@dataclass(frozen=True)
class Isomorphism:
    vertex_map: tuple  # source vertex -> target vertex
    potentials: tuple  # per source vertex
    edge_map: tuple  # source edge id -> target edge id


def _loop_key(m):
    return max(m, gain_neg(m))


def edge_key(u: int, v: int, m) -> tuple:
    """Orientation-free key of an edge."""
    if u == v:
        return (u, u, _loop_key(m))
    if u < v:
        return (u, v, tuple(m))
    return (v, u, gain_neg(m))


def _switched(g: OrbitGraph, pi, pot):
    """Edge keys of g after relabeling by pi and switching by pot."""
    keys = []
    for e in g.edges:
        m = gain_sub(gain_add(pot[e.tail], e.gain), pot[e.head])
        keys.append(edge_key(pi[e.tail], pi[e.head], m))
    return keys


def _edge_map(g, h, pi, pot):
    pool = defaultdict(list)
    for k, e in enumerate(h.edges):
        pool[edge_key(e.tail, e.head, e.gain)].append(k)
    for ids in pool.values():
        ids.reverse()
    out = []
    for key in _switched(g, pi, pot):
        if not pool.get(key):
            return None
        out.append(pool[key].pop())
    return tuple(out)


def _gains_between(g: OrbitGraph):
    """(u, v) -> list of gains oriented u -> v, both orientations stored."""
    table = defaultdict(list)
    for e in g.edges:
        if e.is_loop:
            table[(e.tail, e.tail)].append(_loop_key(e.gain))
        else:
            table[(e.tail, e.head)].append(e.gain)
            table[(e.head, e.tail)].append(gain_neg(e.gain))
    return table


def _bfs_order(g: OrbitGraph):
    """Vertices in BFS order; each paired with an already-placed neighbour or None."""
    adj = defaultdict(set)
    for e in g.edges:
        if not e.is_loop:
            adj[e.tail].add(e.head)
            adj[e.head].add(e.tail)
    seen, order = set(), []
    for s in range(g.n):
        if s in seen:
            continue
        seen.add(s)
        order.append((s, None))
        queue = [s]
        while queue:
            u = queue.pop(0)
            for w in sorted(adj[u]):
                if w not in seen:
                    seen.add(w)
                    order.append((w, u))
                    queue.append(w)
    return order


def _signature(g: OrbitGraph, v: int):
    loops = sorted(_loop_key(e.gain) for e in g.edges if e.is_loop and e.tail == v)
    return (g.degree(v), tuple(loops))


def find_isomorphism(g: OrbitGraph, h: OrbitGraph) -> Isomorphism | None:
    """Backtracking search for a switching isomorphism from g onto h."""
    if g.n != h.n or g.n_edges != h.n_edges or g.arity != h.arity:
        return None
    if sorted(_signature(g, v) for v in range(g.n)) != sorted(_signature(h, v) for v in range(h.n)):
        return None
    gt, ht = _gains_between(g), _gains_between(h)
    sig_h = [_signature(h, v) for v in range(h.n)]
    order = _bfs_order(g)
    zero = zero_gain(g.arity)
    pi, inv, pot = {}, {}, {}
    g_nbrs = defaultdict(set)
    for (u, v) in gt:
        if u != v:
            g_nbrs[u].add(v)

    def fits(v, x, a):
        # every edge from v to a placed vertex must land on the right multiset
        for w in g_nbrs[v]:
            if w not in pi:
                continue
            have = Counter(gain_sub(gain_add(pot[w], m), a) for m in gt[(w, v)])
            if have != Counter(ht.get((pi[w], x), [])):
                return False
        placed_h = sum(len(ht.get((pi[w], x), [])) for w in pi)
        placed_g = sum(len(gt[(w, v)]) for w in g_nbrs[v] if w in pi)
        return placed_h == placed_g

    def candidates(v, parent, x):
        if parent is None:
            return [zero]
        u = pi[parent]
        m = gt[(parent, v)][0]
        opts = {gain_sub(gain_add(pot[parent], m), hm) for hm in ht.get((u, x), [])}
        return sorted(opts)

    def search(i):
        if i == len(order):
            return True
        v, parent = order[i]
        for x in range(h.n):
            if x in inv or sig_h[x] != _signature(g, v):
                continue
            for a in candidates(v, parent, x):
                if not fits(v, x, a):
                    continue
                pi[v], inv[x], pot[v] = x, v, a
                if search(i + 1):
                    return True
                del pi[v], inv[x], pot[v]
        return False

    if not search(0):
        return None
    vm = tuple(pi[v] for v in range(g.n))
    pt = tuple(pot[v] for v in range(g.n))
    em = _edge_map(g, h, vm, pt)
    if em is None:  # pragma: no cover - search guarantees a match
        return None
    return Isomorphism(vm, pt, em)


def is_isomorphic(g: OrbitGraph, h: OrbitGraph) -> bool:
    return find_isomorphism(g, h) is not None


def brute_force_isomorphic(g: OrbitGraph, h: OrbitGraph) -> bool:
    """Exhaustive oracle for small graphs.

    Tries every vertex permutation; for each, every way of sending the edges
    of a spanning forest of g onto parallel edges of h, which pins the
    potentials.  Then compares edge multisets.
    """
    if g.n != h.n or g.n_edges != h.n_edges or g.arity != h.arity:
        return False
    target = Counter(edge_key(e.tail, e.head, e.gain) for e in h.edges)
    ht = _gains_between(h)
    order = _bfs_order(g)
    forest = []
    for v, parent in order:
        if parent is not None:
            e = next(e for e in g.edges if {e.tail, e.head} == {v, parent} and not e.is_loop)
            m = e.gain if e.tail == parent else gain_neg(e.gain)
            forest.append((parent, v, m))
    zero = zero_gain(g.arity)
    for perm in permutations(range(h.n)):
        choices = [ht.get((perm[u], perm[v]), []) for u, v, _ in forest]
        if any(not c for c in choices):
            continue
        for pick in product(*choices):
            pot = [None] * g.n
            for v, parent in order:
                if parent is None:
                    pot[v] = zero
            for (u, v, m), hm in zip(forest, pick):
                pot[v] = gain_sub(gain_add(pot[u], m), hm)
            if Counter(_switched(g, perm, pot)) == target:
                return True
    return False
