"""
Identifiability of the bundled fixture graphs
=============================================

Each fixture is an augmented DAG with a selection node ``S``. We ask
whether ``P_X(Y | S=1)`` can be computed from ``P(V | S=1)`` and print
either the estimand or an active path that blocks identification.
"""

from pathlib import Path

from sid import Query, identify, load_graph, render
from sid.graph import render_path

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

queries = {
    "fig1-left": ("X", "Y"),
    "fig1-right": ("X", "Y"),
    "fig3a-1": ("X", "Y"),
    "fig3a-2": ("X", "Y"),
    "fig3b": ("X", "Y"),
    "fig4-left": ("X", "Y"),
    "fig4-right": ("X", "Y"),
    "fig5-left": (["X1", "X2"], "Y"),
    "fig5-right": (["X1", "X2"], "Y"),
    "appendixA-finance": ("IR", "R"),
}

for name, (x, y) in queries.items():
    g = load_graph(FIXTURES / f"{name}.graph")
    res = identify(g, Query(x, y))
    if res.identifiable:
        print(f"{name:18s} {render(res.estimand)}")
    else:
        print(f"{name:18s} not identifiable, witness {render_path(g, res.witness)}")

# The LaTeX form of one estimand, ready to paste into a document
g = load_graph(FIXTURES / "fig5-right.graph")
print(render(identify(g, Query(["X1", "X2"], "Y")).estimand, "latex"))
