"""Gain graphs on the torus: data model, JSON documents, cycle gains, T-gains.

An orbit graph is a directed multigraph whose edges carry integer gains
(pairs for torus models, single integers for cylinder and circle models).
Edges are identified by their position in ``OrbitGraph.edges``; parallel
edges and loops are ordinary edges.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

Gain = tuple  # tuple[int, ...] of length 1 or 2


class GraphError(ValueError):
    """Malformed orbit-graph input."""


class TorusModel(str, Enum):
    """Ambient space for an orbit framework.

    The value is the name used in orbit-graph documents.
    """

    FIXED = "fixed"
    X_VARIABLE = "x-variable"
    Y_VARIABLE = "y-variable"
    ANGLE = "angle"
    CYLINDER = "cylinder"
    CIRCLE_FIXED = "circle-fixed"
    CIRCLE_FLEXIBLE = "circle-flexible"

    @classmethod
    def parse(cls, name: str | TorusModel) -> TorusModel:
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for m in cls:
            if m.value == key:
                return m
        raise GraphError(f"unknown model {name!r}")

    @property
    def gain_arity(self) -> int:
        return 1 if self in _ONE_DIM_GAINS else 2

    @property
    def dim(self) -> int:
        """Dimension of vertex positions."""
        return 1 if self in (TorusModel.CIRCLE_FIXED, TorusModel.CIRCLE_FLEXIBLE) else 2

    @property
    def variable(self) -> bool:
        """True when the lattice carries one free parameter."""
        return self not in (TorusModel.FIXED, TorusModel.CIRCLE_FIXED)

    def rank_threshold(self, n_vertices: int) -> int:
        """Rank of the rigidity matrix of an infinitesimally rigid framework."""
        trivial = self.dim
        return self.dim * n_vertices + int(self.variable) - trivial


_ONE_DIM_GAINS = frozenset(
    {TorusModel.CYLINDER, TorusModel.CIRCLE_FIXED, TorusModel.CIRCLE_FLEXIBLE}
)


def zero_gain(arity: int) -> Gain:
    return (0,) * arity


def gain_add(a: Gain, b: Gain) -> Gain:
    return tuple(x + y for x, y in zip(a, b))


def gain_sub(a: Gain, b: Gain) -> Gain:
    return tuple(x - y for x, y in zip(a, b))


def gain_neg(a: Gain) -> Gain:
    return tuple(-x for x in a)


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    gain: Gain

    @property
    def is_loop(self) -> bool:
        return self.tail == self.head

    def reversed(self) -> Edge:
        return Edge(self.head, self.tail, gain_neg(self.gain))

    def other(self, v: int) -> int:
        return self.head if v == self.tail else self.tail


@dataclass(frozen=True)
class OrbitGraph:
    n: int
    edges: tuple[Edge, ...] = ()
    model: TorusModel = TorusModel.X_VARIABLE

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "model", TorusModel.parse(self.model))
        if self.n < 0:
            raise GraphError("vertex count must be non-negative")
        arity = self.model.gain_arity
        for k, e in enumerate(self.edges):
            for v in (e.tail, e.head):
                if not (0 <= v < self.n):
                    raise GraphError(f"edge {k}: vertex {v} out of range [0, {self.n})")
            if len(e.gain) != arity:
                raise GraphError(
                    f"edge {k}: gain {list(e.gain)} has arity {len(e.gain)}, "
                    f"model {self.model.value} needs {arity}"
                )

    @classmethod
    def from_edges(cls, n: int, edges: Iterable, model=TorusModel.X_VARIABLE) -> OrbitGraph:
        """Build from ``(tail, head, gain)`` triples; a scalar gain becomes a 1-tuple."""
        out = []
        for t, h, m in edges:
            m = (m,) if isinstance(m, int) else tuple(m)
            out.append(Edge(int(t), int(h), tuple(int(x) for x in m)))
        return cls(n, tuple(out), TorusModel.parse(model))

    @property
    def arity(self) -> int:
        return self.model.gain_arity

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def with_gains(self, gains: Sequence[Gain], model=None) -> OrbitGraph:
        model = self.model if model is None else TorusModel.parse(model)
        edges = tuple(Edge(e.tail, e.head, tuple(m)) for e, m in zip(self.edges, gains))
        return OrbitGraph(self.n, edges, model)

    def with_model(self, model) -> OrbitGraph:
        return OrbitGraph(self.n, self.edges, TorusModel.parse(model))

    def degree(self, v: int) -> int:
        return sum((e.tail == v) + (e.head == v) for e in self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for e in self.edges:
            deg[e.tail] += 1
            deg[e.head] += 1
        return deg

    def incident(self, v: int) -> list[int]:
        return [k for k, e in enumerate(self.edges) if e.tail == v or e.head == v]

    def induced_edges(self, vertices: Iterable[int]) -> list[int]:
        vs = set(vertices)
        return [k for k, e in enumerate(self.edges) if e.tail in vs and e.head in vs]

    def components(self, vertices=None, edge_ids=None) -> list[list[int]]:
        """Connected components (sorted vertex lists) of a vertex/edge restriction."""
        vs = sorted(range(self.n) if vertices is None else set(vertices))
        eids = self.induced_edges(vs) if edge_ids is None else list(edge_ids)
        adj = {v: [] for v in vs}
        for k in eids:
            e = self.edges[k]
            adj[e.tail].append(e.head)
            adj[e.head].append(e.tail)
        seen, comps = set(), []
        for s in vs:
            if s in seen:
                continue
            comp, stack = [], [s]
            seen.add(s)
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n > 0 and len(self.components()) == 1

    def remove_vertex(self, v: int) -> OrbitGraph:
        """Delete ``v`` and its edges; vertices above ``v`` shift down by one."""
        def rl(u):
            return u - 1 if u > v else u
        edges = tuple(
            Edge(rl(e.tail), rl(e.head), e.gain)
            for e in self.edges if v not in (e.tail, e.head)
        )
        return OrbitGraph(self.n - 1, edges, self.model)


# ---------------------------------------------------------------------------
# documents

def parse(text: str) -> OrbitGraph:
    """Parse an orbit-graph JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid JSON: {exc}") from None
    return from_document(doc)


def from_document(doc) -> OrbitGraph:
    if not isinstance(doc, dict):
        raise GraphError("document must be a JSON object")
    model = TorusModel.parse(doc.get("model", TorusModel.X_VARIABLE.value))
    n = doc.get("n")
    if not _is_int(n) or n < 0:
        raise GraphError("'n' must be a non-negative integer")
    raw = doc.get("edges", [])
    if not isinstance(raw, list):
        raise GraphError("'edges' must be a list")
    edges = []
    for k, item in enumerate(raw):
        if not isinstance(item, dict):
            raise GraphError(f"edge {k}: expected an object")
        u, v, gain = item.get("u"), item.get("v"), item.get("gain")
        if not (_is_int(u) and _is_int(v)):
            raise GraphError(f"edge {k}: endpoints must be integers")
        if not isinstance(gain, list) or not all(_is_int(x) for x in gain):
            raise GraphError(f"edge {k}: gain must be a list of integers")
        edges.append(Edge(u, v, tuple(gain)))
    return OrbitGraph(n, tuple(edges), model)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def to_document(g: OrbitGraph) -> dict:
    return {
        "model": g.model.value,
        "n": g.n,
        "edges": [{"u": e.tail, "v": e.head, "gain": list(e.gain)} for e in g.edges],
    }


def serialize(g: OrbitGraph) -> str:
    """Canonical JSON: keys in schema order, edges in id order."""
    return json.dumps(to_document(g))


# ---------------------------------------------------------------------------
# cycle gains

def net_gain(g: OrbitGraph, walk: Sequence[tuple[int, int]]) -> Gain:
    """Signed gain sum along a walk of ``(edge_id, direction)`` steps.

    ``direction`` is +1 to traverse tail to head, -1 for head to tail.
    Consecutive steps must share a vertex.
    """
    total = zero_gain(g.arity)
    at = None
    for step, (k, d) in enumerate(walk):
        e = g.edges[k]
        if d not in (1, -1):
            raise ValueError(f"step {step}: direction must be +1 or -1")
        start, end = (e.tail, e.head) if d == 1 else (e.head, e.tail)
        if at is not None and start != at:
            raise ValueError(f"walk is disconnected at step {step}")
        total = gain_add(total, e.gain if d == 1 else gain_neg(e.gain))
        at = end
    return total


@dataclass(frozen=True)
class TGainTable:
    tree_edges: frozenset
    roots: tuple
    potentials: tuple
    t_gains: tuple

    @property
    def root(self) -> int:
        return self.roots[0]


def bfs_forest(g: OrbitGraph, vertices=None, edge_ids=None) -> tuple[list[int], list[int]]:
    """Spanning forest by BFS from the smallest vertex of each component.

    Returns ``(tree_edge_ids, roots)``; ties are broken by edge id.
    """
    vs = sorted(range(g.n) if vertices is None else set(vertices))
    eids = g.induced_edges(vs) if edge_ids is None else sorted(edge_ids)
    adj = {v: [] for v in vs}
    for k in eids:
        e = g.edges[k]
        if e.is_loop:
            continue
        adj[e.tail].append(k)
        adj[e.head].append(k)
    seen, tree, roots = set(), [], []
    for r in vs:
        if r in seen:
            continue
        roots.append(r)
        seen.add(r)
        queue = deque([r])
        while queue:
            u = queue.popleft()
            for k in adj[u]:
                w = g.edges[k].other(u)
                if w not in seen:
                    seen.add(w)
                    tree.append(k)
                    queue.append(w)
    return tree, roots


def t_gain_procedure(g: OrbitGraph, tree=None, root: int | None = None) -> TGainTable:
    """Re-gauge gains along a spanning tree so every tree edge has zero gain.

    With ``tree=None`` a BFS forest is used (one root per component, the
    smallest vertex id).  An explicit ``tree`` must span all of ``g``.
    """
    if tree is None:
        tree_ids, roots = bfs_forest(g)
        if root is not None:
            if len(roots) != 1:
                raise ValueError("an explicit root needs a connected graph")
            tree_ids, roots = _rooted_bfs(g, root)
    else:
        tree_ids = sorted(set(tree))
        if root is None:
            root = 0
        if not (0 <= root < g.n):
            raise ValueError(f"root {root} out of range")
        for k in tree_ids:
            if not (0 <= k < g.n_edges):
                raise ValueError(f"tree edge {k} out of range")
        if len(tree_ids) != g.n - 1 or any(g.edges[k].is_loop for k in tree_ids):
            raise ValueError("tree is not a spanning tree")
        if len(g.components(edge_ids=tree_ids)) != 1:
            raise ValueError("tree is not a spanning tree")
        roots = [root]
    potentials = _potentials(g, tree_ids, roots)
    t_gains = tuple(
        gain_sub(gain_add(potentials[e.tail], e.gain), potentials[e.head]) for e in g.edges
    )
    return TGainTable(frozenset(tree_ids), tuple(roots), tuple(potentials), t_gains)


def _rooted_bfs(g, root):
    adj = [[] for _ in range(g.n)]
    for k, e in enumerate(g.edges):
        if not e.is_loop:
            adj[e.tail].append(k)
            adj[e.head].append(k)
    seen, tree, queue = {root}, [], deque([root])
    while queue:
        u = queue.popleft()
        for k in adj[u]:
            w = g.edges[k].other(u)
            if w not in seen:
                seen.add(w)
                tree.append(k)
                queue.append(w)
    return tree, [root]


def _potentials(g, tree_ids, roots):
    zero = zero_gain(g.arity)
    adj = {}
    for k in tree_ids:
        e = g.edges[k]
        adj.setdefault(e.tail, []).append((e.head, e.gain))
        adj.setdefault(e.head, []).append((e.tail, gain_neg(e.gain)))
    pot = [None] * g.n
    for r in roots:
        pot[r] = zero
        stack = [r]
        while stack:
            u = stack.pop()
            for w, m in adj.get(u, ()):
                if pot[w] is None:
                    pot[w] = gain_add(pot[u], m)
                    stack.append(w)
    return [zero if p is None else p for p in pot]


@dataclass(frozen=True)
class GainGroup:
    """Subgroup of the gain group generated by the cycle gains of a subgraph."""

    generators: tuple = field(default_factory=tuple)

    @property
    def nontrivial(self) -> bool:
        return any(any(x != 0 for x in m) for m in self.generators)

    def nontrivial_in(self, axis: int) -> bool:
        return any(m[axis] != 0 for m in self.generators)

    @property
    def x_nontrivial(self) -> bool:
        return self.nontrivial_in(0)

    @property
    def off_axis(self) -> bool:
        """True when some element has both coordinates nonzero."""
        return self.nontrivial_in(0) and self.nontrivial_in(1)

    def basis(self) -> tuple:
        """Row-style Hermite normal form of the generated subgroup."""
        rows = [list(m) for m in self.generators if any(m)]
        if not rows:
            return ()
        arity = len(rows[0])
        out = []
        for col in range(arity):
            pivot_rows = [r for r in rows if r[col] != 0]
            rest = [r for r in rows if r[col] == 0]
            while len(pivot_rows) > 1:
                pivot_rows.sort(key=lambda r: abs(r[col]))
                p = pivot_rows[0]
                nxt = [p]
                for r in pivot_rows[1:]:
                    q = r[col] // p[col]
                    r = [a - q * b for a, b in zip(r, p)]
                    (nxt if r[col] != 0 else rest).append(r)
                pivot_rows = nxt
            if pivot_rows:
                p = pivot_rows[0]
                if p[col] < 0:
                    p = [-a for a in p]
                out.append(p)
            rows = [r for r in rest if any(r)]
        # reduce entries above later pivots
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                col = next(c for c, a in enumerate(out[j]) if a != 0)
                q = out[i][col] // out[j][col]
                out[i] = [a - q * b for a, b in zip(out[i], out[j])]
        return tuple(tuple(r) for r in out)

    def same_group(self, other: GainGroup) -> bool:
        return self.basis() == other.basis()


def cycle_generators(g: OrbitGraph, vertices, edge_ids=None) -> tuple:
    """T-gains of the non-tree edges of a (possibly disconnected) subgraph."""
    vs = sorted(set(vertices))
    eids = g.induced_edges(vs) if edge_ids is None else sorted(edge_ids)
    tree_ids, roots = bfs_forest(g, vs, eids)
    sub_pot = _potentials(g, tree_ids, roots)
    in_tree = set(tree_ids)
    gens = []
    for k in eids:
        if k in in_tree:
            continue
        e = g.edges[k]
        gens.append(gain_sub(gain_add(sub_pot[e.tail], e.gain), sub_pot[e.head]))
    return tuple(gens)


def gain_group(g: OrbitGraph, vertex_subset, edge_ids=None) -> GainGroup:
    """Cycle gain group of the subgraph induced by ``vertex_subset``.

    ``edge_ids`` restricts to a spanning subgraph of that vertex set instead
    of the induced one.  The subgraph must be connected.
    """
    vs = sorted(set(vertex_subset))
    if not vs:
        raise ValueError("empty vertex subset")
    eids = g.induced_edges(vs) if edge_ids is None else sorted(edge_ids)
    if len(g.components(vs, eids)) != 1:
        raise ValueError("subgraph is disconnected; split it into components first")
    return GainGroup(cycle_generators(g, vs, eids))


# ---------------------------------------------------------------------------
# derived graph

@dataclass(frozen=True)
class DerivedFragment:
    window: frozenset
    vertices: tuple  # (orbit vertex, z)
    edges: tuple  # (edge id, z, (tail, z), (head, z + m))


def derive(g: OrbitGraph, window) -> DerivedFragment:
    """Finite piece of the derived periodic graph over a window of translates."""
    win = frozenset(tuple(z) if not isinstance(z, int) else (z,) for z in window)
    if not win:
        raise ValueError("window must be nonempty")
    for z in win:
        if len(z) != g.arity:
            raise ValueError(f"window element {z} does not match gain arity {g.arity}")
    zs = sorted(win)
    vertices = tuple((v, z) for v in range(g.n) for z in zs)
    edges = []
    for k, e in enumerate(g.edges):
        for z in zs:
            z2 = gain_add(z, e.gain)
            if z2 in win:
                edges.append((k, z, (e.tail, z), (e.head, z2)))
    return DerivedFragment(win, vertices, tuple(edges))
