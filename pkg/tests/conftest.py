import random

import pytest
from hypothesis import settings

from prk.core import OrbitGraph

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def fig2() -> OrbitGraph:
    """The four-edge example used for the T-gain table; e3 directed 0 -> 2."""
    return OrbitGraph.from_edges(
        3, [(0, 1, (1, 2)), (1, 2, (0, 1)), (0, 2, (3, 1)), (2, 0, (1, -1))], model="fixed"
    )


def loop(gain, model="x-variable") -> OrbitGraph:
    return OrbitGraph.from_edges(1, [(0, 0, gain)], model)


def k23(gains, model="x-variable") -> OrbitGraph:
    return OrbitGraph.from_edges(2, [(0, 1, m) for m in gains], model)


# bunny ears with the gains given in the build contract; not actually blocked
BUNNY = [(0, 1, (0, 0)), (0, 2, (0, 0)), (0, 2, (1, 0)), (1, 2, (0, 0)), (1, 2, (0, 1))]
# same shape with both ears x-parallel: every inverse edge split is blocked
BUNNY_BLOCKED = [(0, 1, (0, 0)), (0, 2, (0, 0)), (0, 2, (1, 0)), (1, 2, (0, 0)), (1, 2, (1, 0))]


def bunny(edges=BUNNY) -> OrbitGraph:
    return OrbitGraph.from_edges(3, edges)


def fig8_cylinder() -> OrbitGraph:
    zero = [(0, 1), (1, 2), (2, 0), (1, 4), (4, 3), (3, 2)]
    one = [(1, 4), (3, 1), (3, 0)]
    return OrbitGraph.from_edges(5, [(u, v, 0) for u, v in zero] + [(u, v, 1) for u, v in one], "cylinder")


def random_multigraph(rng: random.Random, n: int, m: int, arity: int = 2, loops=True,
                      gains=(-1, 0, 0, 1, 2), model=None) -> OrbitGraph:
    model = model or ("cylinder" if arity == 1 else "x-variable")
    edges = []
    for _ in range(m):
        u = rng.randrange(n)
        v = u if loops and rng.random() < 0.12 else rng.randrange(n)
        edges.append((u, v, tuple(rng.choice(gains) for _ in range(arity))))
    return OrbitGraph.from_edges(n, edges, model)


def perturb(g: OrbitGraph, rng: random.Random) -> OrbitGraph:
    """Mutate one to three edges: new gain, zeroed gain or x-part, or a moved endpoint."""
    from prk.core import Edge

    edges = list(g.edges)
    for _ in range(rng.randint(1, 3)):
        k = rng.randrange(len(edges))
        e = edges[k]
        r = rng.random()
        if r < 0.3:
            edges[k] = Edge(e.tail, e.head, tuple(rng.randint(-2, 2) for _ in e.gain))
        elif r < 0.55:
            edges[k] = Edge(e.tail, e.head, tuple(0 for _ in e.gain))
        elif r < 0.75:
            edges[k] = Edge(e.tail, e.head, (0,) + tuple(e.gain[1:]))
        else:
            edges[k] = Edge(rng.randrange(g.n), e.head, e.gain)
    return OrbitGraph(g.n, tuple(edges), g.model)


@pytest.fixture
def rng():
    return random.Random(12345)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("ab")), k)):
        terminalreporter.write_line(ACCEPTANCE[key])
