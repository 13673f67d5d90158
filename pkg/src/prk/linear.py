"""Rigidity matrices over the rationals and exact rank oracles.

Row for an edge {v_i, v_j; m} with edge vector d = p_i - p_j - m L:
``d`` under v_i, ``-d`` under v_j (summed, so loops cancel), and when the
lattice varies, ``(m Ldot) . d`` in the lattice column, where ``Ldot`` is
the derivative of the lattice matrix in its free parameter.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .core import OrbitGraph, TGainTable, TorusModel

SAMPLE_MAX = 10**6


class ZeroLengthEdge(ValueError):
    """An edge whose endpoints coincide in the cover (d = 0)."""


@dataclass(frozen=True)
class Placement:
    """Vertex positions and lattice, all exact rationals.

    ``lattice`` rows are the lattice generators: 2x2 for torus models,
    a single row ``(x, 0)`` for the cylinder and ``(x,)`` for circles.
    ``lattice_velocity`` has the same shape, or is ``None`` for fixed models.
    """

    positions: tuple
    lattice: tuple
    lattice_velocity: tuple | None = None

    def translate(self, z) -> tuple:
        """Lattice vector z L."""
        dim = len(self.lattice[0])
        return tuple(
            sum((Fraction(z[r]) * self.lattice[r][c] for r in range(len(z))), Fraction(0))
            for c in range(dim)
        )


@dataclass(frozen=True)
class RigidityMatrix:
    rows: tuple
    n_vertices: int
    dim: int
    model: TorusModel

    @property
    def n_cols(self) -> int:
        return self.dim * self.n_vertices + int(self.model.variable)

    def vertex_block(self, r: int) -> tuple:
        return self.rows[r][: self.dim * self.n_vertices]

    def lattice_column(self) -> tuple:
        if not self.model.variable:
            return ()
        return tuple(row[-1] for row in self.rows)

    def rank(self) -> int:
        return rank(self.rows, self.n_cols)


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _rand_q(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(1, SAMPLE_MAX), rng.randint(1, SAMPLE_MAX))


def _angle_lattice(rng):
    # rational point on the unit circle; a, b scale the two generators
    t = _rand_q(rng)
    c = (1 - t * t) / (1 + t * t)
    s = 2 * t / (1 + t * t)
    a, b = _rand_q(rng), _rand_q(rng)
    lat = ((a, Fraction(0)), (b * c, b * s))
    vel = ((Fraction(0), Fraction(0)), (-b * s, b * c))
    return lat, vel


def random_placement(n: int, model, rng: random.Random) -> Placement:
    model = TorusModel.parse(model)
    zero, one = Fraction(0), Fraction(1)
    pos = tuple(tuple(_rand_q(rng) for _ in range(model.dim)) for _ in range(n))
    if model is TorusModel.ANGLE:
        lat, vel = _angle_lattice(rng)
        return Placement(pos, lat, vel)
    if model is TorusModel.CYLINDER:
        return Placement(pos, ((_rand_q(rng), zero),), ((one, zero),))
    if model in (TorusModel.CIRCLE_FIXED, TorusModel.CIRCLE_FLEXIBLE):
        vel = ((one,),) if model is TorusModel.CIRCLE_FLEXIBLE else None
        return Placement(pos, ((_rand_q(rng),),), vel)
    lat = ((_rand_q(rng), zero), (_rand_q(rng), _rand_q(rng)))
    if model is TorusModel.X_VARIABLE:
        return Placement(pos, lat, ((one, zero), (zero, zero)))
    if model is TorusModel.Y_VARIABLE:
        # the vertical component of the second generator moves
        return Placement(pos, lat, ((zero, zero), (zero, one)))
    return Placement(pos, lat, None)


def edge_vector(placement: Placement, e) -> tuple:
    shift = placement.translate(e.gain)
    pi, pj = placement.positions[e.tail], placement.positions[e.head]
    return tuple(_frac(a) - _frac(b) - s for a, b, s in zip(pi, pj, shift))


def build_matrix(g: OrbitGraph, placement: Placement, model=None, zero_loops: bool = False) -> RigidityMatrix:
    """Rigidity matrix at ``placement``.

    A loop with zero gain has an identically zero edge vector; it raises
    ``ZeroLengthEdge`` like any other collision unless ``zero_loops`` is set,
    in which case its row is zero.
    """
    model = g.model if model is None else TorusModel.parse(model)
    if g.arity != model.gain_arity:
        raise ValueError(f"gain arity {g.arity} does not fit model {model.value}")
    dim = model.dim
    if len(placement.positions) != g.n or any(len(p) != dim for p in placement.positions):
        raise ValueError("placement does not match the graph and model")
    if model.variable and placement.lattice_velocity is None:
        raise ValueError(f"model {model.value} needs a lattice velocity")
    width = dim * g.n + int(model.variable)
    rows = []
    for k, e in enumerate(g.edges):
        d = edge_vector(placement, e)
        if all(x == 0 for x in d) and not (zero_loops and e.is_loop):
            raise ZeroLengthEdge(f"edge {k} has zero length")
        row = [Fraction(0)] * width
        for c in range(dim):
            row[dim * e.tail + c] += d[c]
            row[dim * e.head + c] -= d[c]
        if model.variable:
            vel = placement.lattice_velocity
            row[-1] = sum(
                (e.gain[r] * vel[r][c] * d[c] for r in range(len(e.gain)) for c in range(dim)),
                Fraction(0),
            )
        rows.append(tuple(row))
    return RigidityMatrix(tuple(rows), g.n, dim, model)


# ---------------------------------------------------------------------------
# exact elimination

def _integer_rows(rows):
    out = []
    for row in rows:
        den = lcm(*(Fraction(x).denominator for x in row)) if row else 1
        out.append([int(Fraction(x) * den) for x in row])
    return out


def rank(rows, n_cols: int | None = None) -> int:
    """Exact rank by fraction-free (Bareiss) elimination."""
    m = _integer_rows(rows)
    if not m:
        return 0
    n_cols = len(m[0]) if n_cols is None else n_cols
    n_rows = len(m)
    r, prev = 0, 1
    for c in range(n_cols):
        if r == n_rows:
            break
        piv = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        for i in range(r + 1, n_rows):
            a = m[i][c]
            row_i, row_r = m[i], m[r]
            for j in range(c + 1, n_cols):
                row_i[j] = (p * row_i[j] - a * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        r += 1
    return r


def rref(rows, n_cols: int):
    """Reduced row echelon form over Fractions; returns (rows, pivot columns)."""
    m = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows, n_cols: int) -> list[tuple]:
    red, pivots = rref(rows, n_cols)
    free = [c for c in range(n_cols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * n_cols
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[f]
        basis.append(tuple(v))
    return basis


# ---------------------------------------------------------------------------
# oracles

def _sample(g, model, rng, attempts=100):
    # zero-gain loops are degenerate at every placement, not by coincidence
    for _ in range(attempts):
        pl = random_placement(g.n, model, rng)
        try:
            return build_matrix(g, pl, model, zero_loops=True)
        except ZeroLengthEdge:
            continue
    raise RuntimeError("could not sample a placement without zero-length edges")


def generic_rank(g: OrbitGraph, model=None, trials: int = 3, seed: int = 0) -> int:
    """Max exact rank over ``trials`` random rational placements."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    model = g.model if model is None else TorusModel.parse(model)
    rng = random.Random(seed)
    best = 0
    for _ in range(trials):
        best = max(best, _sample(g, model, rng).rank())
    return best


def is_inf_rigid(g: OrbitGraph, model=None, trials: int = 3, seed: int = 0) -> bool:
    model = g.model if model is None else TorusModel.parse(model)
    return generic_rank(g, model, trials, seed) == model.rank_threshold(g.n)


@dataclass(frozen=True)
class MotionSpace:
    dimension: int
    basis: tuple


def motion_space(g: OrbitGraph, placement: Placement, model=None) -> MotionSpace:
    mat = build_matrix(g, placement, model)
    basis = nullspace(mat.rows, mat.n_cols)
    return MotionSpace(len(basis), tuple(basis))


def t_gain_shifted_placement(g: OrbitGraph, table: TGainTable, placement: Placement) -> Placement:
    """Move each vertex by its T-potential in lattice coordinates."""
    if len(table.potentials) != g.n or len(table.t_gains) != g.n_edges:
        raise ValueError("T-gain table does not match the graph")
    for e, m in zip(g.edges, table.t_gains):
        expect = tuple(
            a + b - c for a, b, c in zip(table.potentials[e.tail], e.gain, table.potentials[e.head])
        )
        if tuple(m) != expect:
            raise ValueError("T-gain table is inconsistent with the graph")
    pos = tuple(
        tuple(_frac(a) + s for a, s in zip(p, placement.translate(table.potentials[v])))
        for v, p in enumerate(placement.positions)
    )
    return Placement(pos, placement.lattice, placement.lattice_velocity)
