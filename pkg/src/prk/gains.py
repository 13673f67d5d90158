"""Gain conditions that pick out the rigid frameworks for each torus model.

Every check here walks the relevant tight subgraphs by enumeration, so
graphs above the brute-force vertex bound raise ``BoundExceeded``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    Edge,
    GainGroup,
    OrbitGraph,
    TorusModel,
    cycle_generators,
)
from .sparsity import (
    check_bound,
    circuit_edges,
    is_p21,
    is_sparse,
    tight_subgraphs,
)


@dataclass(frozen=True)
class GainVerdict:
    satisfied: bool
    witness: frozenset | None = None
    generators: tuple = ()
    dropped_edge: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.satisfied

    def to_json(self) -> dict:
        out = {"satisfied": self.satisfied}
        if not self.satisfied:
            out["witness"] = sorted(self.witness) if self.witness is not None else None
            out["generators"] = [list(m) for m in self.generators]
            if self.dropped_edge is not None:
                out["dropped_edge"] = self.dropped_edge
            out["reason"] = self.reason
        return out


OK = GainVerdict(True)


def _group(g, vertices, edge_ids=None) -> GainGroup:
    return GainGroup(cycle_generators(g, vertices, edge_ids))


def _require_arity(g: OrbitGraph, arity: int):
    if g.arity != arity:
        raise ValueError(f"expected {arity}-component gains, got {g.arity}")


def is_constructive(g: OrbitGraph, bound: int | None = None) -> GainVerdict:
    """Every (2,2)-tight subgraph of a (2,2)-sparse graph has a cycle of nonzero gain."""
    if not is_sparse(g, 2):
        raise ValueError("is_constructive needs a (2,2)-sparse graph")
    check_bound(g, bound)
    for s in tight_subgraphs(g, 2, bound):
        grp = _group(g, s)
        if not grp.nontrivial:
            return GainVerdict(False, s, grp.generators, reason="balanced (2,2)-tight subgraph")
    return OK


def is_x_constructive(g: OrbitGraph, subset, axis: int = 0) -> bool:
    """The induced subgraph on ``subset`` has a cycle with nonzero x-gain."""
    vs = sorted(set(subset))
    if len(g.components(vs)) != 1:
        raise ValueError("induced subgraph is disconnected")
    return _group(g, vs).nontrivial_in(axis)


def _p21_condition(g: OrbitGraph, over_ok, bound, label) -> GainVerdict:
    """Shared scan for the variable-lattice models.

    (2,1)-tight subgraphs are the over-critical induced subgraphs; they must
    pass ``over_ok``.  (2,2)-tight subgraphs are the critical induced
    subgraphs plus every over-critical induced subgraph minus one circuit
    edge; each must carry a nonzero cycle gain.
    """
    if not is_p21(g):
        raise ValueError("graph is not a P(2,1)-graph")
    check_bound(g, bound)
    over = tight_subgraphs(g, 1, bound)
    for s in over:
        grp = _group(g, s)
        if not over_ok(grp):
            return GainVerdict(False, s, grp.generators, reason=f"(2,1)-tight subgraph not {label}")
    for s in tight_subgraphs(g, 2, bound):
        grp = _group(g, s)
        if not grp.nontrivial:
            return GainVerdict(False, s, grp.generators, reason="balanced (2,2)-tight subgraph")
    circ = circuit_edges(g)
    for s in over:
        induced = g.induced_edges(s)
        for f in circ:
            if f not in induced:
                continue
            rest = [k for k in induced if k != f]
            if not rest:
                continue  # a bare vertex carries no constraint
            grp = _group(g, s, rest)
            if not grp.nontrivial:
                return GainVerdict(
                    False, s, grp.generators, dropped_edge=f,
                    reason="balanced (2,2)-tight subgraph",
                )
    return OK


def is_Tx_constructive(g: OrbitGraph, axis: int = 0, bound: int | None = None) -> GainVerdict:
    """Gain condition for the x-variable torus (``axis=1`` for y-variable)."""
    _require_arity(g, 2)
    name = "xy"[axis] + "-constructive"
    return _p21_condition(g, lambda grp: grp.nontrivial_in(axis), bound, name)


def is_angle_constructive(g: OrbitGraph, bound: int | None = None) -> GainVerdict:
    """Flexible-angle condition: every (2,1)-tight subgraph has a cycle gain
    with both coordinates nonzero, every (2,2)-tight subgraph a nonzero one."""
    _require_arity(g, 2)
    return _p21_condition(g, lambda grp: grp.off_axis, bound, "angle-constructive")


def swap_coordinates(g: OrbitGraph, model=None) -> OrbitGraph:
    _require_arity(g, 2)
    edges = tuple(Edge(e.tail, e.head, (e.gain[1], e.gain[0])) for e in g.edges)
    return OrbitGraph(g.n, edges, g.model if model is None else model)


def lift_cylinder(g: OrbitGraph) -> OrbitGraph:
    """Cylinder gain m becomes torus gain (m, 0) on the x-variable torus."""
    _require_arity(g, 1)
    edges = tuple(Edge(e.tail, e.head, (e.gain[0], 0)) for e in g.edges)
    return OrbitGraph(g.n, edges, TorusModel.X_VARIABLE)


def project_cylinder(g: OrbitGraph) -> OrbitGraph:
    """Inverse of ``lift_cylinder`` for graphs whose gains have zero y-part."""
    _require_arity(g, 2)
    if any(e.gain[1] != 0 for e in g.edges):
        raise ValueError("gains have a nonzero second coordinate")
    edges = tuple(Edge(e.tail, e.head, (e.gain[0],)) for e in g.edges)
    return OrbitGraph(g.n, edges, TorusModel.CYLINDER)


def model_condition(g: OrbitGraph, model=None, bound: int | None = None) -> GainVerdict:
    """Gain condition of ``model`` (defaults to the graph's own model)."""
    model = g.model if model is None else TorusModel.parse(model)
    _require_arity(g, model.gain_arity)
    if model is TorusModel.FIXED:
        return is_constructive(g, bound)
    if model is TorusModel.X_VARIABLE:
        return is_Tx_constructive(g, 0, bound)
    if model is TorusModel.Y_VARIABLE:
        return is_Tx_constructive(g, 1, bound)
    if model is TorusModel.ANGLE:
        return is_angle_constructive(g, bound)
    if model is TorusModel.CYLINDER:
        return is_Tx_constructive(lift_cylinder(g), 0, bound)
    if not g.is_connected():
        comps = g.components()
        return GainVerdict(False, frozenset(comps[0]), reason="disconnected")
    if model is TorusModel.CIRCLE_FIXED:
        return OK
    # flexible circle
    grp = _group(g, range(g.n))
    if not grp.nontrivial:
        return GainVerdict(False, frozenset(range(g.n)), grp.generators, reason="no constructive cycle")
    return OK
