"""
From data to an effect estimate
===============================

Sample rows from a selected sub-population, then estimate the causal
effect by plugging empirical frequencies into the estimand. This is what
``sid simulate`` followed by ``sid estimate`` does.
"""

from pathlib import Path

import numpy as np

from sid import Query, evaluate_table, identify, load_graph
from sid.cli import sem_seeds
from sid.semlab import empirical_table, ground_truth_effect, random_sem, sample_subpopulation

g = load_graph(Path(__file__).resolve().parent.parent / "fixtures" / "fig3b.graph")
sem_seed, sample_seed = sem_seeds(2024)
sem = random_sem(g, sem_seed, 2, 1.0)

q = Query("X", "Y")
res = identify(g, q)
truth = ground_truth_effect(sem, q)

for n in (10**3, 10**4, 10**5, 10**6):
    data = sample_subpopulation(sem, n, sample_seed)
    table = empirical_table(data, g.observed, sem.cards)
    est = evaluate_table(res.estimand, table, ["X"], ["Y"])
    print(f"n={n:>8d}  max error {np.abs(est - truth).max():.4f}")
