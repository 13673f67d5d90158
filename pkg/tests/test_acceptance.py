"""Acceptance gate: nine exact criteria, each recorded as one PASS/FAIL line."""

import random
import sys
import time

import pytest

from prk.core import OrbitGraph, t_gain_procedure
from prk.gains import is_constructive, is_Tx_constructive, lift_cylinder, model_condition
from prk.henneberg import decide, generate, reduce, replay, verify_certificate
from prk.linear import (
    ZeroLengthEdge,
    build_matrix,
    generic_rank,
    is_inf_rigid,
    random_placement,
    t_gain_shifted_placement,
)
from prk.sparsity import (
    bridges,
    brute_is_sparse,
    brute_is_tight,
    check_decomposition,
    is_p21,
    is_sparse,
    is_tight,
    minimal_over_critical_sets,
    tree_map_decompose,
)
from conftest import ACCEPTANCE, BUNNY, BUNNY_BLOCKED, fig2, perturb, random_multigraph


def record(key, ok, detail):
    line = f"criterion {key}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE[key] = line
    print(line)
    return ok


def test_criterion_1_fig2_table():
    g = fig2()
    best = float("inf")
    for _ in range(20):
        t = time.perf_counter()
        table = t_gain_procedure(g, tree={0, 3}, root=2)
        best = min(best, time.perf_counter() - t)
    ok = (
        table.potentials[0] == (1, -1)
        and table.potentials[1] == (2, 1)
        and table.potentials[2] == (0, 0)
        and table.t_gains == ((0, 0), (2, 2), (4, 0), (0, 0))
        and best < 1e-3
    )
    assert record("1", ok, f"potentials {table.potentials}, T-gains {table.t_gains}, {best * 1e6:.0f} us")


def test_criterion_2_decide_matches_rank():
    t = time.perf_counter()
    total = rigid = 0
    bad = []
    for seed in range(600):
        rng = random.Random(seed)
        n = rng.randint(1, 8)
        g, _ = generate(n, seed)
        if seed % 4 == 1:
            g = perturb(g, rng)
        elif seed % 4 == 3:
            # redraw every gain from a small, mostly zero set
            g = g.with_gains([tuple(rng.choice((0, 0, 1, -1)) for _ in e.gain) for e in g.edges])
        assert g.n_edges == 2 * g.n - 1
        d = decide(g, "x-variable").rigid
        r = is_inf_rigid(g, "x-variable", trials=3)
        total += 1
        rigid += r
        if d != r:
            bad.append(seed)
    elapsed = time.perf_counter() - t
    ok = total >= 500 and not bad and elapsed < 120 and 0 < rigid < total
    assert record("2", ok, f"{total} graphs ({rigid} rigid, {total - rigid} flexible), "
                           f"{len(bad)} disagreements, {elapsed:.1f} s")


def test_criterion_3_fixed_torus():
    count = bad = positive = 0
    seed = 0
    while count < 250:
        seed += 1
        rng = random.Random(seed)
        n = rng.randint(1, 7)
        g = random_multigraph(rng, n, 2 * n - 2, gains=(0, 0, 0, 0, 1, -1), model="fixed")
        if not is_tight(g, 2):
            continue
        count += 1
        c = bool(is_constructive(g))
        positive += c
        bad += is_inf_rigid(g) != c
    ok = bad == 0 and 0 < positive < count
    assert record("3", ok, f"{count} (2,2)-tight graphs ({positive} constructive), {bad} disagreements")


def test_criterion_4_t_gain_rank_preservation():
    done = bad = 0
    seed = 0
    while done < 150:
        seed += 1
        rng = random.Random(seed)
        n = rng.randint(1, 7)
        model = rng.choice(["x-variable", "fixed", "y-variable", "angle"])
        g = random_multigraph(rng, n, rng.randint(n, 3 * n), gains=(-3, -1, 0, 1, 2, 4), model=model)
        table = t_gain_procedure(g)
        pl = random_placement(n, model, rng)
        try:
            before = build_matrix(g, pl, zero_loops=True).rank()
            after = build_matrix(
                g.with_gains(table.t_gains), t_gain_shifted_placement(g, table, pl), zero_loops=True
            ).rank()
        except ZeroLengthEdge:
            continue
        done += 1
        bad += before != after
    assert record("4", bad == 0, f"{done} graph/placement pairs, {bad} rank changes")


def test_criterion_5_round_trip():
    t = time.perf_counter()
    count = failures = rank_steps = bad_steps = 0
    for n in range(1, 9):
        for seed in range(500):
            g, _ = generate(n, seed)
            cert = reduce(g)
            count += 1
            if not verify_certificate(g, cert):
                failures += 1
            ranks = [generic_rank(h) for h in replay(cert)]
            rank_steps += len(ranks) - 1
            bad_steps += sum(b - a != 2 for a, b in zip(ranks, ranks[1:]))
            bad_steps += ranks[0] != 1
    ok = failures == 0 and bad_steps == 0
    assert record("5", ok, f"{count} graphs (n = 1..8 x 500 seeds), {failures} failed certificates, "
                           f"{bad_steps}/{rank_steps} steps without +2 rank, "
                           f"{time.perf_counter() - t:.1f} s")


def _edge_split_reductions(g):
    """Exhaustive first-step inverse H1 and H2a/H2b moves that keep the
    graph P(2,1) and x-constructive, enumerated independently of reduce()."""
    found = []
    for v in range(g.n):
        if any(e.is_loop and e.tail == v for e in g.edges):
            continue
        spokes = []
        for e in g.edges:
            if e.tail == v:
                spokes.append((e.head, e.gain))
            elif e.head == v:
                spokes.append((e.tail, tuple(-x for x in e.gain)))
        rest = g.remove_vertex(v)
        relabel = lambda u: u - (u > v)  # noqa: E731
        if len(spokes) == 2:
            cands = [rest]
        elif len(spokes) == 3:
            cands = []
            for i in range(3):
                for j in range(i + 1, 3):
                    (ni, mi), (nj, mj) = spokes[i], spokes[j]
                    if ni != nj:
                        gain = tuple(b - a for a, b in zip(mi, mj))
                        edges = [(e.tail, e.head, e.gain) for e in rest.edges]
                        edges.append((relabel(ni), relabel(nj), gain))
                        cands.append(OrbitGraph.from_edges(rest.n, edges))
        else:
            continue
        for h in cands:
            if is_p21(h) and is_Tx_constructive(h):
                found.append((v, h))
    return found


def _bunny_checks(edges):
    t = time.perf_counter()
    g = OrbitGraph.from_edges(3, edges)
    verdict = decide(g, "x-variable")
    has_h2c = verdict.rigid and "H2c" in verdict.certificate.kinds()
    splits = _edge_split_reductions(g)
    elapsed = time.perf_counter() - t
    ok = verdict.rigid and has_h2c and not splits and elapsed < 1
    detail = (f"rigid={verdict.rigid}, H2c in reduction={has_h2c}, "
              f"admissible first-step edge splits={len(splits)}, {elapsed * 1e3:.0f} ms")
    return ok, detail, splits


@pytest.mark.xfail(strict=True, reason=(
    "with the listed gains an inverse H2b at vertex 0 yields K2^3 with gains "
    "(0,0),(0,1),(1,0), which is P(2,1) and x-constructive; see 6b"
))
def test_criterion_6_bunny_ears_listed_gains():
    ok, detail, splits = _bunny_checks(BUNNY)
    if splits:
        v, h = splits[0]
        detail += f"; e.g. delete vertex {v} -> {[(e.tail, e.head, e.gain) for e in h.edges]}"
    assert record("6", ok, "listed instance: " + detail)


def test_criterion_6b_bunny_ears_blocked_gains():
    ok, detail, _ = _bunny_checks(BUNNY_BLOCKED)
    assert record("6b", ok, "ears with x-parallel gains: " + detail)


def test_criterion_7_pebble_game():
    rng = random.Random(7)
    bad = 0
    for _ in range(1200):
        n = rng.randint(1, 6)
        g = random_multigraph(rng, n, rng.randint(0, 11))
        for ell in (1, 2, 3):
            bad += is_sparse(g, ell) != brute_is_sparse(g, ell)
            bad += is_tight(g, ell) != brute_is_tight(g, ell)
    assert record("7", bad == 0, f"1200 multigraphs x 3 values of l, {bad} disagreements")


def test_criterion_8_cylinder_lift():
    bad = rigid = 0
    total = 200
    for seed in range(total):
        rng = random.Random(seed)
        n = rng.randint(1, 7)
        g = random_multigraph(rng, n, 2 * n - 1, arity=1, gains=(-1, 0, 0, 1, 2))
        lifted = lift_cylinder(g)
        if is_p21(g):
            bad += bool(model_condition(g)) != bool(model_condition(lifted))
        d_cyl, d_lift = decide(g).rigid, decide(lifted).rigid
        r_cyl, r_lift = generic_rank(g), generic_rank(lifted)
        bad += (d_cyl != d_lift) + (r_cyl != r_lift) + (d_cyl != (r_cyl == 2 * n - 1))
        rigid += d_cyl
    ok = bad == 0 and 0 < rigid < total
    assert record("8", ok, f"{total} Z-gain graphs ({rigid} rigid), {bad} mismatches "
                           "(gain condition, decision, rank)")


def test_criterion_9_structural_lemmas():
    count = bad = 0
    for seed in range(400):
        n = 1 + seed % 10
        g, cert = generate(n, seed)
        count += 1
        unique = len(minimal_over_critical_sets(g)) == 1
        bridgeless = bridges(g) == []
        dec_ok = check_decomposition(g, tree_map_decompose(g)) and check_decomposition(
            g, tree_map_decompose(g, cert)
        )
        bad += not (is_p21(g) and unique and bridgeless and dec_ok)
    assert record("9", bad == 0, f"{count} generated P(2,1) graphs, {bad} violating a structural lemma")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
