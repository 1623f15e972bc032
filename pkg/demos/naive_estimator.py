"""
Conditioning is not adjusting
=============================

On the ``fig3b`` graph the treatment is not an ancestor of the selection
node, yet ``P(Y | X, S=1)`` is a biased answer: ``Z`` confounds X and the
selection mechanism. The adjustment estimand returned by ``identify`` is
exact. We use a random discrete SEM with a fixed seed.
"""

from pathlib import Path

import numpy as np

from sid import Query, evaluate_table, identify, load_graph, render
from sid.semlab import ground_truth_effect, random_sem, selection_conditional

g = load_graph(Path(__file__).resolve().parent.parent / "fixtures" / "fig3b.graph")
sem = random_sem(g, 0, 2, 1.0)

# the only thing an analyst sees: the sub-population distribution
sub = selection_conditional(sem)

m = sub.marginal(["X", "Y"])
naive = m / m.sum(axis=1, keepdims=True)

res = identify(g, Query("X", "Y"))
print("estimand:", render(res.estimand))
adjusted = evaluate_table(res.estimand, sub, ["X"], ["Y"])

truth = ground_truth_effect(sem, Query("X", "Y"))

np.set_printoptions(precision=4, suppress=True)
print("ground truth P_x(y | S=1)\n", truth)
print("naive P(y | x, S=1)\n", naive)
print("adjusted estimand\n", adjusted)
print("naive error per cell\n", np.abs(naive - truth))
print("estimand max error:", np.abs(adjusted - truth).max())
