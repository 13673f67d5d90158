"""Gain-preserving Henneberg moves, random construction, inverse reduction
to a single loop, construction certificates and the rigidity decision.

Forward moves always give the new vertex the id ``n`` and append their new
edges in order; an edge split deletes the split edge from the list.
Anchors name vertex and edge ids of the pre-move graph.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field

from .core import (
    Edge,
    GraphError,
    OrbitGraph,
    TorusModel,
    gain_neg,
    gain_sub,
    serialize,
    zero_gain,
)
from .gains import GainVerdict, model_condition
from .isomorphism import _edge_map, edge_key, find_isomorphism
from .sparsity import (
    TreeMapDecomposition,
    brute_force_bound,
    check_decomposition,
    induced_count,
    is_p21,
    is_sparse,
    is_tight,
    minimal_over_critical_sets,
)

MOVE_KINDS = ("H1a", "H1b", "H2a", "H2b", "H2c")
HENNEBERG_MODELS = (
    TorusModel.X_VARIABLE,
    TorusModel.Y_VARIABLE,
    TorusModel.ANGLE,
    TorusModel.CYLINDER,
)


class MoveError(GraphError):
    """Invalid anchors or violated gain constraint."""


class LoopedBunnyEars(UserWarning):
    """An inverse loop split was needed although the graph already had a loop."""


class NotReducible(Exception):
    def __init__(self, message: str, verdict: GainVerdict | None = None, witness=None):
        super().__init__(message)
        self.verdict = verdict
        self.witness = witness if witness is not None or verdict is None else verdict.witness


@dataclass(frozen=True)
class Move:
    kind: str
    anchors: dict
    gains: tuple

    def __post_init__(self):
        if self.kind not in MOVE_KINDS:
            raise MoveError(f"unknown move kind {self.kind!r}")
        object.__setattr__(self, "gains", tuple(tuple(int(x) for x in m) for m in self.gains))
        object.__setattr__(self, "anchors", {k: int(v) for k, v in self.anchors.items()})

    def to_json(self) -> dict:
        return {"kind": self.kind, "anchors": dict(self.anchors), "gains": [list(m) for m in self.gains]}

    @classmethod
    def from_json(cls, doc) -> Move:
        return cls(doc["kind"], dict(doc["anchors"]), tuple(tuple(m) for m in doc["gains"]))


@dataclass(frozen=True)
class ConstructionCertificate:
    base_gain: tuple
    moves: tuple = ()

    def to_json(self) -> dict:
        return {
            "base": {"vertex": 0, "gain": list(self.base_gain)},
            "moves": [m.to_json() for m in self.moves],
        }

    @classmethod
    def from_json(cls, doc) -> ConstructionCertificate:
        try:
            base = doc["base"]
            if base.get("vertex", 0) != 0:
                raise ValueError("base vertex must be 0")
            return cls(tuple(int(x) for x in base["gain"]), tuple(Move.from_json(m) for m in doc["moves"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed certificate: {exc}") from exc

    def kinds(self) -> list[str]:
        return [m.kind for m in self.moves]


def base_graph(gain, model=TorusModel.X_VARIABLE) -> OrbitGraph:
    return OrbitGraph(1, (Edge(0, 0, tuple(gain)),), model)


# ---------------------------------------------------------------------------
# forward moves

def _vertex(g, anchors, name):
    if name not in anchors:
        raise MoveError(f"missing anchor {name!r}")
    v = anchors[name]
    if not 0 <= v < g.n:
        raise MoveError(f"anchor {name}={v} is not a vertex")
    return v


def _edge(g, anchors, name):
    if name not in anchors:
        raise MoveError(f"missing anchor {name!r}")
    k = anchors[name]
    if not 0 <= k < g.n_edges:
        raise MoveError(f"anchor {name}={k} is not an edge")
    return k


def _oriented_gain(e: Edge, v1: int, v2: int):
    if (e.tail, e.head) == (v1, v2):
        return e.gain
    if (e.head, e.tail) == (v1, v2):
        return gain_neg(e.gain)
    raise MoveError(f"edge does not join {v1} and {v2}")


def _check_gains(g, move, count):
    if len(move.gains) != count:
        raise MoveError(f"{move.kind} needs {count} gains, got {len(move.gains)}")
    for m in move.gains:
        if len(m) != g.arity:
            raise MoveError(f"gain {list(m)} has the wrong arity")


def apply_move(g: OrbitGraph, move: Move) -> OrbitGraph:
    """Apply a forward move; the new vertex is ``g.n``."""
    a, gains = move.anchors, move.gains
    v0 = g.n
    zero = zero_gain(g.arity)
    keep = list(g.edges)
    if move.kind in ("H1a", "H1b"):
        _check_gains(g, move, 2)
        v1 = _vertex(g, a, "v1")
        if move.kind == "H1a":
            v2 = _vertex(g, a, "v2")
            if v1 == v2:
                raise MoveError("H1a needs two distinct neighbours")
        else:
            v2 = v1
            if gains[0] == gains[1]:
                raise MoveError("H1b needs distinct gains on the parallel edges")
        new = [Edge(v0, v1, gains[0]), Edge(v0, v2, gains[1])]
    elif move.kind in ("H2a", "H2b"):
        _check_gains(g, move, 3)
        k = _edge(g, a, "edge")
        e = g.edges[k]
        if e.is_loop:
            raise MoveError(f"{move.kind} cannot split a loop")
        v1, v2 = _vertex(g, a, "v1"), _vertex(g, a, "v2")
        m_e = _oriented_gain(e, v1, v2)
        if gains[0] != zero:
            raise MoveError(f"{move.kind}: the edge to v1 must carry the zero gain")
        if gains[1] != m_e:
            raise MoveError(f"{move.kind}: the edge to v2 must carry the split edge's gain")
        if move.kind == "H2a":
            v3 = _vertex(g, a, "v3")
            if v3 in (v1, v2):
                raise MoveError("H2a needs a third vertex off the split edge")
        else:
            if "v3" in a and a["v3"] != v2:
                raise MoveError("H2b doubles the edge at v2")
            v3 = v2
            if gains[2] == m_e:
                raise MoveError("H2b needs a gain different from the split edge's")
        del keep[k]
        new = [Edge(v0, v1, gains[0]), Edge(v0, v2, gains[1]), Edge(v0, v3, gains[2])]
    else:  # H2c
        _check_gains(g, move, 3)
        k = _edge(g, a, "loop")
        loop = g.edges[k]
        if not loop.is_loop:
            raise MoveError("H2c splits a loop")
        v1, v2 = _vertex(g, a, "v1"), loop.tail
        diff = gain_sub(gains[1], gains[2])
        if diff not in (loop.gain, gain_neg(loop.gain)):
            raise MoveError("H2c: the two parallel gains must differ by the loop gain")
        del keep[k]
        new = [Edge(v0, v1, gains[0]), Edge(v0, v2, gains[1]), Edge(v0, v2, gains[2])]
    return OrbitGraph(g.n + 1, tuple(keep) + tuple(new), g.model)


def replay(cert: ConstructionCertificate, model=TorusModel.X_VARIABLE) -> list[OrbitGraph]:
    """All graphs along the certificate, starting with the base loop."""
    out = [base_graph(cert.base_gain, model)]
    for mv in cert.moves:
        out.append(apply_move(out[-1], mv))
    return out


# ---------------------------------------------------------------------------
# invariant checks

def _fits_model(g: OrbitGraph, model) -> GainVerdict:
    """P(2,1) plus the model's gain condition."""
    if not is_p21(g):
        return GainVerdict(False, None, reason="not a P(2,1)-graph")
    return model_condition(g, model)


def _check_model(model) -> TorusModel:
    model = TorusModel.parse(model)
    if model not in HENNEBERG_MODELS:
        raise ValueError(f"Henneberg constructions do not apply to the {model.value} model")
    return model


# ---------------------------------------------------------------------------
# random generation

def _random_gain(rng, arity, spread=2):
    return tuple(rng.randint(-spread, spread) for _ in range(arity))


def _random_move(g: OrbitGraph, rng: random.Random) -> Move | None:
    ar = g.arity
    loops = [k for k, e in enumerate(g.edges) if e.is_loop]
    links = [k for k, e in enumerate(g.edges) if not e.is_loop]
    kinds = ["H1a", "H1b", "H2a", "H2b", "H2c"]
    weights = [3, 2, 4, 3, 1 if loops else 0]
    if g.n < 2:
        weights[0] = 0
    if not links:
        weights[2] = weights[3] = 0
    if g.n < 3:
        weights[2] = 0
    kind = rng.choices(kinds, weights)[0]
    zero = zero_gain(ar)
    if kind == "H1a":
        v1, v2 = rng.sample(range(g.n), 2)
        return Move(kind, {"v1": v1, "v2": v2}, (_random_gain(rng, ar), _random_gain(rng, ar)))
    if kind == "H1b":
        m1, m2 = _random_gain(rng, ar), _random_gain(rng, ar)
        if m1 == m2:
            return None
        return Move(kind, {"v1": rng.randrange(g.n)}, (m1, m2))
    if kind in ("H2a", "H2b"):
        k = rng.choice(links)
        e = g.edges[k]
        v1, v2 = (e.tail, e.head) if rng.random() < 0.5 else (e.head, e.tail)
        m_e = _oriented_gain(e, v1, v2)
        m3 = _random_gain(rng, ar)
        if kind == "H2a":
            v3 = rng.choice([v for v in range(g.n) if v not in (v1, v2)])
            return Move(kind, {"edge": k, "v1": v1, "v2": v2, "v3": v3}, (zero, m_e, m3))
        if m3 == m_e:
            return None
        return Move(kind, {"edge": k, "v1": v1, "v2": v2}, (zero, m_e, m3))
    k = rng.choice(loops)
    m1 = _random_gain(rng, ar)
    m2 = gain_sub(m1, g.edges[k].gain)
    return Move(kind, {"loop": k, "v1": rng.randrange(g.n)}, (_random_gain(rng, ar), m1, m2))


def _base_gain(rng, model):
    while True:
        m = _random_gain(rng, model.gain_arity)
        if model_condition(base_graph(m, model), model):
            return m


def generate(n: int, seed: int = 0, model=TorusModel.X_VARIABLE):
    """Random minimally rigid gain graph on ``n`` vertices with its certificate."""
    if n < 1:
        raise ValueError("n must be >= 1")
    model = _check_model(model)
    rng = random.Random(seed)
    base = _base_gain(rng, model)
    g = base_graph(base, model)
    moves = []
    while g.n < n:
        mv = _random_move(g, rng)
        if mv is None:
            continue
        h = apply_move(g, mv)
        if _fits_model(h, model):
            g = h
            moves.append(mv)
    return g, ConstructionCertificate(base, tuple(moves))


# ---------------------------------------------------------------------------
# reduction

@dataclass(frozen=True)
class _Step:
    """One inverse move, recorded in the coordinates of the reduced graph."""

    removed: int  # vertex of the larger graph that disappears
    move: Move  # forward move on the reduced graph
    shift: tuple  # gains of the forward move = original gains at v minus shift
    reduced: OrbitGraph = field(repr=False)


def _spokes(g: OrbitGraph, v: int):
    """(neighbour, gain oriented away from v) for each edge at v, by edge id."""
    out = []
    for e in g.edges:
        if e.is_loop:
            continue
        if e.tail == v:
            out.append((e.head, e.gain))
        elif e.head == v:
            out.append((e.tail, gain_neg(e.gain)))
    return out


def _has_loop(g, v):
    return any(e.is_loop and e.tail == v for e in g.edges)


def _relabel(v, removed):
    return v - 1 if v > removed else v


def _inverse_h1(g, v):
    (n1, m1), (n2, m2) = _spokes(g, v)
    h = g.remove_vertex(v)
    r1, r2 = _relabel(n1, v), _relabel(n2, v)
    if n1 != n2:
        mv = Move("H1a", {"v1": r1, "v2": r2}, (m1, m2))
    elif m1 != m2:
        mv = Move("H1b", {"v1": r1}, (m1, m2))
    else:
        return []
    return [_Step(v, mv, zero_gain(g.arity), h)]


def _inverse_h2(g, v):
    spokes = _spokes(g, v)
    seen, steps = set(), []
    cands = []
    for i in range(3):
        for j in range(3):
            if i == j or spokes[i][0] == spokes[j][0]:
                continue
            (ni, mi), (nj, mj) = spokes[i], spokes[j]
            key = edge_key(ni, nj, gain_sub(mj, mi))
            (k,) = [x for x in range(3) if x not in (i, j)]
            if spokes[k][0] == ni:
                continue  # orient so that any doubled neighbour is v2
            cands.append((key, i, j, k))
    cands.sort()
    base = g.remove_vertex(v)
    for key, i, j, k in cands:
        if key in seen:
            continue
        seen.add(key)
        (ni, mi), (nj, mj), (nk, mk) = spokes[i], spokes[j], spokes[k]
        r1, r2, r3 = (_relabel(x, v) for x in (ni, nj, nk))
        m_e = gain_sub(mj, mi)
        h = OrbitGraph(base.n, base.edges + (Edge(r1, r2, m_e),), g.model)
        gains = (zero_gain(g.arity), m_e, gain_sub(mk, mi))
        if nk == nj:
            if gains[2] == m_e:
                continue
            mv = Move("H2b", {"edge": h.n_edges - 1, "v1": r1, "v2": r2}, gains)
        else:
            mv = Move("H2a", {"edge": h.n_edges - 1, "v1": r1, "v2": r2, "v3": r3}, gains)
        steps.append(_Step(v, mv, mi, h))
    return steps


def _inverse_h2c(g, v):
    spokes = _spokes(g, v)
    base = g.remove_vertex(v)
    steps = []
    for a in range(3):
        rest = [x for x in range(3) if x != a]
        (nb1, mb1), (nb2, mb2) = spokes[rest[0]], spokes[rest[1]]
        if nb1 != nb2:
            continue
        na, ma = spokes[a]
        if na != nb1 and any(spokes[x][0] == na for x in rest):
            continue
        rb = _relabel(nb1, v)
        loop_gain = gain_sub(mb1, mb2)
        if loop_gain == zero_gain(g.arity):
            continue
        h = OrbitGraph(base.n, base.edges + (Edge(rb, rb, loop_gain),), g.model)
        mv = Move("H2c", {"loop": h.n_edges - 1, "v1": _relabel(na, v)}, (ma, mb1, mb2))
        steps.append(_Step(v, mv, zero_gain(g.arity), h))
        if na != nb1:
            break  # the other choices of a repeat the same split
    return steps


def inverse_moves(g: OrbitGraph, include_h2c: bool = True):
    """Candidate inverse moves in the deterministic reduction order."""
    degs = g.degrees()
    plain = [v for v in range(g.n) if not _has_loop(g, v)]
    for v in plain:
        if degs[v] == 2:
            yield from _inverse_h1(g, v)
    for v in plain:
        if degs[v] == 3:
            yield from _inverse_h2(g, v)
    if include_h2c:
        for v in plain:
            if degs[v] == 3:
                yield from _inverse_h2c(g, v)


def _assemble(target: OrbitGraph, chain: list[_Step], base_gain) -> ConstructionCertificate:
    """Turn reduction steps into forward moves on the replayed graphs.

    Tracks a vertex map and switching potentials from each graph of the
    reduction into the corresponding replayed graph.
    """
    zero = zero_gain(target.arity)
    graphs = [s.reduced for s in reversed(chain)] + [target]
    cur = base_graph(base_gain, target.model)
    vmap, pot = [0], [zero]
    moves = []
    for step, big in zip(reversed(chain), graphs[1:]):
        small = step.reduced
        emap = _edge_map(small, cur, vmap, pot)
        a = step.move.anchors
        anchors = {}
        for name, x in a.items():
            anchors[name] = emap[x] if name in ("edge", "loop") else vmap[x]
        mv = step.move
        if mv.kind in ("H2a", "H2b"):
            a0 = pot[a["v1"]]
        else:
            a0 = zero
        ends = _targets(small, mv)
        gains = tuple(
            gain_sub(tuple(p + q for p, q in zip(a0, m)), pot[x]) for m, x in zip(mv.gains, ends)
        )
        fwd = Move(mv.kind, anchors, gains)
        cur = apply_move(cur, fwd)
        moves.append(fwd)
        v = step.removed
        new_vmap, new_pot = [], []
        for u in range(big.n):
            if u == v:
                new_vmap.append(cur.n - 1)
                new_pot.append(gain_sub(a0, step.shift))
            else:
                new_vmap.append(vmap[_relabel(u, v)])
                new_pot.append(pot[_relabel(u, v)])
        vmap, pot = new_vmap, new_pot
    return ConstructionCertificate(tuple(base_gain), tuple(moves))


def _targets(small: OrbitGraph, mv: Move):
    """Endpoints of the new edges, in gain order."""
    a = mv.anchors
    if mv.kind == "H1a":
        return (a["v1"], a["v2"])
    if mv.kind == "H1b":
        return (a["v1"], a["v1"])
    if mv.kind == "H2a":
        return (a["v1"], a["v2"], a["v3"])
    if mv.kind == "H2b":
        return (a["v1"], a["v2"], a["v2"])
    w = small.edges[a["loop"]].tail
    return (a["v1"], w, w)


def reduce(g: OrbitGraph, model=None) -> ConstructionCertificate:
    """Reduce to a single loop by admissible inverse moves.

    Raises ``NotReducible`` carrying the failed check's witness.
    """
    model = _check_model(g.model if model is None else model)
    verdict = _fits_model(g, model)
    if not verdict:
        raise NotReducible(verdict.reason, verdict)
    chain = []
    cur = g
    while cur.n > 1:
        for step in inverse_moves(cur):
            if _fits_model(step.reduced, model):
                if step.move.kind == "H2c" and any(e.is_loop for e in cur.edges):
                    warnings.warn(
                        f"loop split undone on a graph that already has a loop ({serialize(cur)})",
                        LoopedBunnyEars,
                    )
                chain.append(step)
                cur = step.reduced
                break
        else:
            raise NotReducible(f"no admissible inverse move on {cur.n} vertices", witness=frozenset(range(cur.n)))
    (loop,) = cur.edges
    return _assemble(g, chain, loop.gain)




# ---------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class CertificateCheck:
    ok: bool
    step: int | None = None  # index of the first failing move, -1 for the base
    reason: str = ""
    notices: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def verify_certificate(target: OrbitGraph, cert: ConstructionCertificate, model=None) -> CertificateCheck:
    """Replay ``cert`` checking every step, then compare with ``target``."""
    try:
        model = _check_model(target.model if model is None else model)
    except ValueError as exc:
        return CertificateCheck(False, None, str(exc))
    notices = []
    if len(cert.base_gain) != model.gain_arity:
        return CertificateCheck(False, -1, "base gain has the wrong arity")
    cur = base_graph(cert.base_gain, model)
    if not model_condition(cur, model):
        return CertificateCheck(False, -1, "base loop fails the gain condition")
    limit = brute_force_bound()
    for i, mv in enumerate(cert.moves):
        try:
            cur = apply_move(cur, mv)
        except MoveError as exc:
            return CertificateCheck(False, i, str(exc), tuple(notices))
        if cur.n > limit:
            notices.append(f"step {i}: invariant check skipped above {limit} vertices")
            continue
        v = _fits_model(cur, model)
        if not v:
            return CertificateCheck(False, i, v.reason, tuple(notices))
    if find_isomorphism(cur, target.with_model(model)) is None:
        return CertificateCheck(False, len(cert.moves), "replay is not isomorphic to the target", tuple(notices))
    return CertificateCheck(True, None, "", tuple(notices))


def decomposition_from_certificate(g: OrbitGraph, cert: ConstructionCertificate) -> TreeMapDecomposition | None:
    """Tree + connected map-graph split carried along the construction.

    The base loop starts the map-graph.  A vertex addition sends one new edge
    to each side; an edge split gives two new edges the label of the split
    edge and the third the other label; a loop split puts the single edge in
    the tree and the parallel pair in the map-graph.
    """
    cur = base_graph(cert.base_gain, g.model)
    labels = ["M"]
    for mv in cert.moves:
        nxt = apply_move(cur, mv)
        if mv.kind in ("H1a", "H1b"):
            labels = labels + ["T", "M"]
        elif mv.kind in ("H2a", "H2b"):
            k = mv.anchors["edge"]
            lab = labels[k]
            other = "M" if lab == "T" else "T"
            labels = labels[:k] + labels[k + 1:] + [lab, lab, other]
        else:
            k = mv.anchors["loop"]
            labels = labels[:k] + labels[k + 1:] + ["T", "M", "M"]
        cur = nxt
    iso = find_isomorphism(cur, g)
    if iso is None:
        return None
    tree = frozenset(iso.edge_map[k] for k, lab in enumerate(labels) if lab == "T")
    maps = frozenset(iso.edge_map[k] for k, lab in enumerate(labels) if lab == "M")
    dec = TreeMapDecomposition(tree, maps)
    return dec if check_decomposition(g, dec) else None


# ---------------------------------------------------------------------------
# decision

@dataclass(frozen=True)
class Verdict:
    rigid: bool
    reason: str
    certificate: ConstructionCertificate | None = None
    witness: frozenset | None = None
    gain_verdict: GainVerdict | None = None

    def __bool__(self) -> bool:
        return self.rigid

    def to_json(self) -> dict:
        out = {"rigid": self.rigid, "reason": self.reason}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        if self.witness is not None:
            out["witness"] = sorted(self.witness)
        if self.gain_verdict is not None and not self.gain_verdict:
            out["gain_check"] = self.gain_verdict.to_json()
        return out


def _expected_edges(g, model):
    return model.rank_threshold(g.n)


def _sparsity_witness(g: OrbitGraph, ell: int):
    """Smallest vertex set spanning more than 2|X| - ell edges, by enumeration."""
    try:
        limit = brute_force_bound()
        if g.n > limit:
            return None
    except ValueError:
        return None
    best = None
    for mask in range(1, 1 << g.n):
        s = frozenset(v for v in range(g.n) if mask >> v & 1)
        if induced_count(g, s) > 2 * len(s) - ell and (best is None or len(s) < len(best)):
            best = s
    return best


def _decide_combinatorial(g: OrbitGraph, model) -> Verdict:
    if model is TorusModel.FIXED:
        if not is_tight(g, 2):
            return Verdict(False, "not (2,2)-tight", witness=_sparsity_witness(g, 2))
        gv = model_condition(g, model)
        if not gv:
            return Verdict(False, gv.reason, witness=gv.witness, gain_verdict=gv)
        return Verdict(True, "(2,2)-tight with constructive gains")
    gv = model_condition(g, model)
    if not gv:
        return Verdict(False, gv.reason, witness=gv.witness, gain_verdict=gv)
    if model is TorusModel.CIRCLE_FIXED:
        return Verdict(True, "connected tree")
    return Verdict(True, "connected with a constructive cycle")


def decide(g: OrbitGraph, model=None) -> Verdict:
    """Generic minimal rigidity of the gain graph on ``model``."""
    model = TorusModel.parse(g.model if model is None else model)
    if g.arity != model.gain_arity:
        raise ValueError(f"gain arity {g.arity} does not fit model {model.value}")
    g = g.with_model(model)
    want = _expected_edges(g, model)
    if g.n_edges != want:
        side = "underbraced" if g.n_edges < want else "overbraced"
        return Verdict(False, f"count mismatch: {g.n_edges} edges, minimal rigidity needs {want} ({side})")
    if g.n == 0:
        return Verdict(True, "empty graph")
    if model not in HENNEBERG_MODELS:
        return _decide_combinatorial(g, model)
    if not g.is_connected():
        return Verdict(False, "disconnected", witness=frozenset(g.components()[0]))
    if not is_sparse(g, 1):
        return Verdict(False, "not (2,1)-sparse", witness=_sparsity_witness(g, 1))
    if not is_p21(g):
        mins = minimal_over_critical_sets(g)
        wit = mins[-1] if mins else None
        return Verdict(False, "no edge leaves a (2,2)-tight graph", witness=wit)
    try:
        cert = reduce(g, model)
    except NotReducible as exc:
        return Verdict(False, str(exc), witness=exc.witness, gain_verdict=exc.verdict)
    return Verdict(True, "reduced to a single loop", certificate=cert)
