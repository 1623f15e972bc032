"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary, or directly when this file is run as a script.
"""

from __future__ import annotations

import io
import itertools
import json
import math
import time

import numpy as np
import pytest

from sid import counterexamples as cx
from sid.cli import main as cli_main
from sid.cli import sem_seeds
from sid.estimand import Prob, Product, SumOver, evaluate_table, structurally_equal_mod_conditioning
from sid.graph import (
    AugmentedDag,
    Dag,
    GraphError,
    ancestors,
    d_separated,
    d_separated_bruteforce,
    random_augmented_dag,
)
from sid.identify import Query, identify, is_s_id, s_id
from sid.semlab import (
    ground_truth_effect,
    interventional_distribution,
    joint_distribution,
    random_sem,
    selection_conditional,
)

from conftest import FIXTURES, fixture_graph
from oracles import kernel_marginal_quadrature

RESULTS: dict[int, str] = {}

# fixed seed for the naive-estimator demonstration on the fig3b fixture
NAIVE_SEED = 0


def record(n: int, name: str, ok: bool, detail: str) -> None:
    RESULTS[n] = f"ACCEPTANCE {n} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(RESULTS[n])
    assert ok, RESULTS[n]


def test_01_fixture_verdicts():
    expected = {
        ("fig1-left", "X"): True,
        ("fig1-right", "X"): False,
        ("fig3a-1", "X"): True,
        ("fig3a-2", "X"): True,
        ("fig3b", "X"): True,
        ("fig4-left", "X"): False,
        ("fig4-right", "X"): False,
        ("fig5-left", ("X1", "X2")): False,
        ("fig5-right", ("X1", "X2")): True,
    }
    bad, slowest = [], 0.0
    for (name, x), want in expected.items():
        g = fixture_graph(name)
        t0 = time.perf_counter()
        got = is_s_id(g, Query(x, "Y"))
        res = identify(g, Query(x, "Y"))
        slowest = max(slowest, time.perf_counter() - t0)
        if got != want or res.identifiable != want:
            bad.append(name)
    ok = not bad and slowest < 0.05
    record(1, "fixture verdicts", ok, f"{len(expected) - len(bad)}/{len(expected)} match, slowest {slowest * 1e3:.2f} ms")


def test_02_fixture_estimands():
    p = Prob
    cases = {
        ("fig3a-1", "X", "Y"): p(("Y",), ("X",)),
        ("fig3a-2", "X", "Y"): p(("Y",), ("X",)),
        ("fig3b", "X", "Y"): SumOver(("Z",), Product((p(("Y",), ("X", "Z")), p(("Z",))))),
        ("fig5-right", ("X1", "X2"), "Y"): SumOver(
            ("Z", "W"), Product((p(("Z", "W"), ("X1",)), p(("Y",), ("X2", "Z", "W"))))
        ),
        ("appendixA-finance", "IR", "R"): SumOver(("GP",), Product((p(("R",), ("IR", "GP")), p(("GP",))))),
    }
    bad = []
    for (name, x, y), want in cases.items():
        res = identify(fixture_graph(name), Query(x, y))
        if not res.identifiable or not structurally_equal_mod_conditioning(res.estimand, want):
            bad.append(name)
    record(2, "fixture estimands", not bad, f"{len(cases) - len(bad)}/{len(cases)} structurally equal" + (f"; bad {bad}" if bad else ""))


def _random_query(rng, g):
    obs = list(g.observed)
    rng.shuffle(obs)
    nx = int(rng.integers(1, len(obs)))
    ny = int(rng.integers(1, len(obs) - nx + 1))
    return Query(obs[:nx], obs[nx : nx + ny])


def test_03_soundness_suite():
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    n_id = n_ratio = 0
    worst = 0.0
    for _ in range(500):
        n_obs = int(rng.integers(2, 7))  # at most 7 nodes with S
        g = random_augmented_dag(rng, n_obs, edge_prob=float(rng.uniform(0.2, 0.6)))
        q = _random_query(rng, g)
        sem = random_sem(g, rng, int(rng.integers(2, 4)), 1.0)
        res = s_id(g, q)
        if not res.identifiable:
            continue
        n_id += 1
        n_ratio += bool(res.decomposition.x1)
        t = selection_conditional(sem)
        xs, ys = g.sort_nodes(q.treatment), g.sort_nodes(q.outcome)
        got = evaluate_table(res.estimand, t, xs, ys, sem.cards)
        worst = max(worst, float(np.abs(got - ground_truth_effect(sem, q)).max()))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 120 and n_id > 0
    record(
        3,
        "oracle soundness",
        ok,
        f"500 triples, {n_id} identifiable ({n_ratio} with X1 non-empty), max err {worst:.2e}, {elapsed:.1f} s",
    )


def test_04_dsep_equivalence():
    rng = np.random.default_rng(777)
    agree = 0
    worst_ratio = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 11))
        names = [f"N{i}" for i in range(n)]
        order = rng.permutation(n)
        edges = [(names[order[a]], names[order[b]]) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.3]
        g = Dag(names, edges)
        perm = [names[i] for i in rng.permutation(n)]
        nx = int(rng.integers(1, n))
        ny = int(rng.integers(1, n - nx + 1))
        nz = int(rng.integers(0, n - nx - ny + 1))
        x, y, z = perm[:nx], perm[nx : nx + ny], perm[nx + ny : nx + ny + nz]
        stats = {}
        fast = d_separated(g, x, y, z, stats=stats)
        agree += fast == d_separated_bruteforce(g, x, y, z)
        worst_ratio = max(worst_ratio, stats["visits"] / (n + len(edges)))
    ok = agree == 500 and worst_ratio <= 6
    record(4, "d-separation oracle", ok, f"{agree}/500 agree, max visits/(n+m) = {worst_ratio:.2f}")


def test_05_counterexample_certification():
    worst_disc, min_gap, all_cert, bound_holds = 0.0, math.inf, True, True
    for family in cx.FAMILIES:
        for k, m in itertools.product(range(1, 6), repeat=2):
            rep = cx.falsification_report(k, m, family)
            worst_disc = max(worst_disc, rep.max_observational_discrepancy)
            min_gap = min(min_gap, rep.gap)
            all_cert &= rep.certified and not rep.graph_s_id
            bound_holds &= cx.ratio_gap_certificate(m)[0] > math.exp(-1)
    r1 = cx.falsification_report(2, 1).ratio_y0
    closed = (1 + math.exp(-1.5)) / (1 + math.exp(0.5))
    ok = all_cert and bound_holds and worst_disc < 1e-12 and min_gap > 1e-6 and abs(r1 - closed) < 1e-9
    record(
        5,
        "counterexample certification",
        ok,
        f"75 pairs over 3 families, max disc {worst_disc:.1e}, min gap {min_gap:.4f}, |r(m=1) - closed| {abs(r1 - closed):.1e}",
    )


def test_06_kernel_marginal_vs_quadrature():
    worst = 0.0
    for mu in range(-3, 4):
        for s2 in range(6):
            for b in (-1, 1):
                worst = max(worst, abs(cx.gaussian_bernoulli_marginal(mu, s2, b) - kernel_marginal_quadrature(mu, s2, b)))
    record(6, "closed form vs quadrature", worst < 1e-6, f"84 grid points, max abs err {worst:.1e}")


def _all_dags(n):
    names = [f"V{i}" for i in range(n)]
    pairs = [(a, b) for a in names for b in names if a != b]
    for mask in range(1 << len(pairs)):
        edges = [p for i, p in enumerate(pairs) if mask >> i & 1]
        # skip both orientations of the same pair
        if any((b, a) in edges for a, b in edges):
            continue
        try:
            yield names, Dag(names, edges)
        except GraphError:  # cyclic
            continue


def _queries(names):
    for assign in itertools.product(range(3), repeat=len(names)):
        x = [v for v, a in zip(names, assign) if a == 1]
        y = [v for v, a in zip(names, assign) if a == 2]
        if x and y:
            yield Query(x, y)


def test_07_property_suites():
    rng = np.random.default_rng(99)
    anc_err = 0.0
    for i in range(200):
        g = random_augmented_dag(rng, int(rng.integers(2, 7)), float(rng.uniform(0.2, 0.6)))
        sem = random_sem(g, rng, int(rng.integers(2, 4)))
        seed = rng.choice(list(g.nodes), size=int(rng.integers(1, 3)), replace=False)
        anc = ancestors(g, [str(v) for v in seed])
        order = g.sort_nodes(anc)
        prod = np.ones([1] * len(g))
        for v in order:
            prod = prod * sem.factor(v)
        prod = prod.reshape([sem.cards[v] for v in order])
        anc_err = max(anc_err, float(np.abs(joint_distribution(sem).marginal(order) - prod).max()))

    rule3, n_rule3 = 0.0, 0
    for i in range(200):
        g = random_augmented_dag(rng, int(rng.integers(2, 7)), float(rng.uniform(0.2, 0.6)))
        sem = random_sem(g, rng, int(rng.integers(2, 4)))
        outside = [v for v in g.observed if v not in ancestors(g, [g.selection])]
        if not outside:
            continue
        x2 = [v for v in outside if rng.random() < 0.7] or outside[:1]
        ps = joint_distribution(sem).marginal([g.selection])[1]
        for xval in itertools.product(*(range(sem.cards[v]) for v in x2)):
            post = interventional_distribution(sem, dict(zip(x2, xval)))
            rule3 = max(rule3, abs(post.marginal([g.selection])[1] - ps))
        n_rule3 += 1

    t0 = time.perf_counter()
    n_graphs = n_checks = violations = 0
    for n_obs in range(1, 5):  # at most 5 nodes with S
        verdict = {}
        graphs = []
        for names, dag in _all_dags(n_obs):
            qs = list(_queries(names))
            for spa in itertools.chain.from_iterable(itertools.combinations(names, r) for r in range(n_obs + 1)):
                edges = frozenset(dag.edges | {(p, "S") for p in spa})
                g = AugmentedDag(names + ["S"], edges)
                verdict[edges] = {q: is_s_id(g, q) for q in qs}
                graphs.append((edges, qs))
        for edges, qs in graphs:
            n_graphs += 1
            for e in edges:
                smaller = verdict[edges - {e}]
                for q in qs:
                    if verdict[edges][q]:
                        n_checks += 1
                        violations += not smaller[q]
    mono_s = time.perf_counter() - t0
    ok = anc_err < 1e-12 and rule3 < 1e-12 and n_rule3 > 0 and violations == 0
    record(
        7,
        "property suites",
        ok,
        f"ancestral factorization max err {anc_err:.1e} on 200 pairs; "
        f"selection invariance max err {rule3:.1e} on {n_rule3} SEMs; "
        f"monotonicity {n_checks} edge deletions over {n_graphs} graphs, {violations} violations ({mono_s:.1f} s)",
    )


def test_08_erroneous_inference():
    g = fixture_graph("fig3b")
    sem = random_sem(g, NAIVE_SEED, 2, 1.0)
    t = selection_conditional(sem)
    m = t.marginal(["X", "Y"])
    naive = m / m.sum(axis=1, keepdims=True)
    truth = ground_truth_effect(sem, Query("X", "Y"))
    est = evaluate_table(identify(g, Query("X", "Y")).estimand, t, ["X"], ["Y"])
    gap = float(np.abs(naive - truth).min())
    err = float(np.abs(est - truth).max())
    record(8, "erroneous-inference demo", gap > 0.01 and err < 1e-9, f"seed {NAIVE_SEED}, min naive gap {gap:.4f}, estimand err {err:.1e}")


def test_09_end_to_end(tmp_path):
    graph = FIXTURES / "fig3b.graph"
    data = tmp_path / "sub.csv"
    seed = 2024
    assert cli_main(["simulate", str(graph), "--seed", str(seed), "--rows", "1000000", "--out", str(data)], out=io.StringIO()) == 0
    out = io.StringIO()
    assert cli_main(["estimate", str(graph), "-x", "X", "-y", "Y", "--data", str(data), "--format", "json"], out=out) == 0
    est = np.zeros((2, 2))
    for c in json.loads(out.getvalue())["cells"]:
        est[c["x"]["X"], c["y"]["Y"]] = c["value"]
    g = fixture_graph("fig3b")
    truth = ground_truth_effect(random_sem(g, sem_seeds(seed)[0], 2, 1.0), Query("X", "Y"))
    err = float(np.abs(est - truth).max())
    record(9, "end-to-end pipeline", err < 0.01, f"10^6 rows, max cell error {err:.4f}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
