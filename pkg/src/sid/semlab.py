"""Exact discrete structural equation models.

This module is the ground-truth side of every soundness check: joints are
enumerated densely, interventions use truncated factorization, and the
sub-population is obtained by conditioning on ``S=1``.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .estimand import EstimandError, JointTable
from .graph import AugmentedDag
from .identify import Query, QueryError


class DegenerateSelectionError(ArithmeticError):
    """The selection event has zero (or negligible) probability."""


class SemError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DiscreteSem:
    """Discrete SEM given by one conditional probability table per node.

    ``cpts[v]`` has shape ``(card(p1), ..., card(pk), card(v))`` with the
    parents in ``graph.parents(v)`` order. The selection node is binary and
    value 1 means selected.
    """

    graph: AugmentedDag
    cards: Mapping[str, int]
    cpts: Mapping[str, np.ndarray]

    def __post_init__(self):
        g = self.graph
        cards = dict(self.cards)
        if cards.get(g.selection, 2) != 2:
            raise SemError("selection node must be binary")
        cards[g.selection] = 2
        cpts = {}
        for v in g.nodes:
            if v not in cards or cards[v] < 1:
                raise SemError(f"missing or invalid cardinality for {v}")
            if v not in self.cpts:
                raise SemError(f"missing CPT for {v}")
            t = np.asarray(self.cpts[v], dtype=float)
            shape = tuple(cards[p] for p in g.parents(v)) + (cards[v],)
            if t.shape != shape:
                raise SemError(f"CPT of {v} has shape {t.shape}, expected {shape}")
            if (t < 0).any() or np.abs(t.sum(axis=-1) - 1).max() > 1e-12:
                raise SemError(f"CPT rows of {v} must be distributions")
            t.setflags(write=False)
            cpts[v] = t
        object.__setattr__(self, "cards", cards)
        object.__setattr__(self, "cpts", cpts)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.cards[v] for v in self.graph.nodes)

    def factor(self, v: str) -> np.ndarray:
        """CPT of `v` broadcast to the full node axis layout."""
        g = self.graph
        fam = list(g.parents(v)) + [v]
        axes = [g.index(u) for u in fam]
        order = np.argsort(axes)
        t = np.transpose(self.cpts[v], order)
        shape = [1] * len(g)
        for i in sorted(axes):
            shape[i] = self.cards[g.nodes[i]]
        return t.reshape(shape)


def _product(sem: DiscreteSem, nodes: Iterable[str]) -> np.ndarray:
    out = np.ones(sem.shape)
    for v in nodes:
        out = out * sem.factor(v)
    return out


def joint_distribution(sem: DiscreteSem) -> JointTable:
    """Markov factorization over all nodes, selection node included."""
    return JointTable(sem.graph.nodes, _product(sem, sem.graph.nodes))


def selection_conditional(sem: DiscreteSem) -> JointTable:
    """``P(V | S=1)`` over the observed nodes."""
    joint = joint_distribution(sem)
    mass = joint.marginal([sem.graph.selection])[1]
    if mass <= 0:
        raise DegenerateSelectionError("P(S=1) = 0")
    return joint.condition(sem.graph.selection, 1)


def interventional_distribution(sem: DiscreteSem, x_assignment: Mapping[str, int]) -> JointTable:
    """Truncated factorization for the hard intervention `x_assignment`.

    Returns the distribution over all non-intervened nodes, selection node
    included.
    """
    g = sem.graph
    for v, val in x_assignment.items():
        if v == g.selection:
            raise QueryError("cannot intervene on the selection node")
        if v not in g:
            raise QueryError(f"unknown node {v!r}")
        if not 0 <= val < sem.cards[v]:
            raise QueryError(f"value {val} out of range for {v}")
    full = _product(sem, [v for v in g.nodes if v not in x_assignment])
    index = tuple(x_assignment.get(v, slice(None)) for v in g.nodes)
    rest = tuple(v for v in g.nodes if v not in x_assignment)
    return JointTable(rest, full[index])


def ground_truth_effect(sem: DiscreteSem, q: Query) -> np.ndarray:
    """``P_x(y | S=1)`` for every (x, y), axes ordered as sorted X then sorted Y."""
    g = sem.graph
    q.validate(g)
    xs = g.sort_nodes(q.treatment)
    ys = g.sort_nodes(q.outcome)
    shape = tuple(sem.cards[v] for v in xs + ys)
    out = np.empty(shape)
    for xval in itertools.product(*(range(sem.cards[v]) for v in xs)):
        post = interventional_distribution(sem, dict(zip(xs, xval)))
        ys_s = post.marginal(ys + (g.selection,))
        sel = ys_s[..., 1]
        mass = sel.sum()
        if mass <= 0:
            assign = ", ".join(f"{v}={a}" for v, a in zip(xs, xval))
            raise DegenerateSelectionError(f"P_{{{assign}}}(S=1) = 0")
        out[xval] = sel / mass
    return out


def random_sem(
    g: AugmentedDag,
    seed: int | np.random.Generator | None = None,
    cardinalities: int | Mapping[str, int] = 2,
    concentration: float = 1.0,
) -> DiscreteSem:
    """CPT rows drawn from a symmetric Dirichlet with the given concentration."""
    if concentration <= 0:
        raise SemError("concentration must be positive")
    rng = np.random.default_rng(seed)
    if isinstance(cardinalities, int):
        cards = {v: cardinalities for v in g.nodes}
    else:
        cards = dict(cardinalities)
    cards[g.selection] = 2
    cpts = {}
    for v in g.topological_order():
        pshape = tuple(cards[p] for p in g.parents(v))
        rows = rng.dirichlet(np.full(cards[v], concentration), size=pshape or None)
        # Dirichlet draws can underflow to exact zeros for tiny concentrations
        rows = np.maximum(rows, np.finfo(float).tiny)
        cpts[v] = rows / rows.sum(axis=-1, keepdims=True)
    return DiscreteSem(g, cards, cpts)


def sample_subpopulation(
    sem: DiscreteSem,
    n: int,
    seed: int | np.random.Generator | None = None,
    batch: int = 200_000,
) -> np.ndarray:
    """Rejection-sample `n` rows from the sub-population.

    Rows are drawn ancestrally from the full model and kept when ``S=1``.
    Columns follow ``sem.graph.observed``.
    """
    g = sem.graph
    accept = float(joint_distribution(sem).marginal([g.selection])[1])
    if accept < 1e-6:
        raise DegenerateSelectionError(f"selection probability {accept:.3g} is below 1e-6")
    rng = np.random.default_rng(seed)
    cols = [g.index(v) for v in g.observed]
    s_col = g.index(g.selection)
    kept: list[np.ndarray] = []
    have = 0
    while have < n:
        draws = np.empty((batch, len(g)), dtype=np.int64)
        for v in g.topological_order():
            i = g.index(v)
            pa = [g.index(p) for p in g.parents(v)]
            rows = sem.cpts[v][tuple(draws[:, j] for j in pa)] if pa else np.broadcast_to(
                sem.cpts[v], (batch, sem.cards[v])
            )
            u = rng.random(batch)[:, None]
            draws[:, i] = (u > np.cumsum(rows, axis=1)[:, :-1]).sum(axis=1)
        sel = draws[draws[:, s_col] == 1][:, cols]
        kept.append(sel)
        have += len(sel)
    data = np.concatenate(kept)[:n] if kept else np.empty((0, len(cols)), dtype=np.int64)
    return data


def empirical_table(data: np.ndarray, variables: Sequence[str], cards: Mapping[str, int] | None = None) -> JointTable:
    """Plug-in joint frequencies. No smoothing."""
    data = np.asarray(data, dtype=np.int64)
    if data.ndim != 2 or data.shape[1] != len(variables):
        raise SemError(f"data must have {len(variables)} columns")
    if len(data) == 0:
        raise SemError("no rows")
    if (data < 0).any():
        raise SemError("category codes must be non-negative")
    shape = tuple(
        (cards or {}).get(v, int(data[:, j].max()) + 1) for j, v in enumerate(variables)
    )
    flat = np.ravel_multi_index(tuple(data.T), shape)
    counts = np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)
    return JointTable(tuple(variables), counts / counts.sum())


def write_csv(path: str | Path | None, data: np.ndarray, header: Sequence[str], stream=None) -> None:
    """Header row of names, then one integer row per sample."""
    out = stream if path is None else open(path, "w", newline="")
    try:
        out.write(",".join(header) + "\n")
        if len(data):
            np.savetxt(out, np.asarray(data), fmt="%d", delimiter=",")
    finally:
        if path is not None:
            out.close()


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise SemError(f"{path}: empty file")
        header = [h.strip() for h in header]
        rows = []
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != len(header):
                raise SemError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                rows.append([int(c) for c in row])
            except ValueError:
                raise SemError(f"{path}:{lineno}: non-integer category code") from None
    data = np.array(rows, dtype=np.int64).reshape(len(rows), len(header))
    return header, data


__all__ = [
    "DegenerateSelectionError",
    "DiscreteSem",
    "EstimandError",
    "SemError",
    "empirical_table",
    "ground_truth_effect",
    "interventional_distribution",
    "joint_distribution",
    "random_sem",
    "read_csv",
    "sample_subpopulation",
    "selection_conditional",
    "write_csv",
]
