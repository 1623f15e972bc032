"""Identification of conditional causal effects from sub-population data.

Given an augmented DAG and a query ``P_X(Y | S=1)``, decide whether the
effect is computable from ``P(V | S=1)`` alone and, if so, build the
estimand.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .estimand import Estimand, Prob, Product, Ratio, SumOver
from .graph import AugmentedDag, GraphError, ancestors, d_separated, edge_surgery, find_active_path


class QueryError(ValueError):
    """Query inconsistent with the graph."""


@dataclass(frozen=True)
class Query:
    treatment: frozenset[str]
    outcome: frozenset[str]

    def __init__(self, treatment: Iterable[str], outcome: Iterable[str]):
        if isinstance(treatment, str):
            treatment = [treatment]
        if isinstance(outcome, str):
            outcome = [outcome]
        object.__setattr__(self, "treatment", frozenset(treatment))
        object.__setattr__(self, "outcome", frozenset(outcome))
        if not self.treatment or not self.outcome:
            raise QueryError("treatment and outcome must be non-empty")
        common = self.treatment & self.outcome
        if common:
            raise QueryError(f"treatment and outcome overlap on {sorted(common)}")

    def validate(self, g: AugmentedDag) -> None:
        for name in sorted(self.treatment | self.outcome):
            if name not in g:
                raise QueryError(f"unknown node {name!r}")
            if name == g.selection:
                raise QueryError(f"selection node {name} cannot appear in a query")


@dataclass(frozen=True)
class Decomposition:
    """Treatment split into ancestors (`x1`) and non-ancestors (`x2`) of S."""

    x1: frozenset[str]
    x2: frozenset[str]


@dataclass(frozen=True)
class Identifiable:
    estimand: Estimand
    decomposition: Decomposition
    identifiable = True


@dataclass(frozen=True)
class NotIdentifiable:
    """Fails the criterion; `witness` is an active path from X1 to Y."""

    decomposition: Decomposition
    witness: tuple[str, ...]
    identifiable = False


IdentifyResult = Identifiable | NotIdentifiable


def decompose_treatment(g: AugmentedDag, x: Iterable[str]) -> Decomposition:
    x = frozenset([x] if isinstance(x, str) else x)
    if g.selection in x:
        raise QueryError("treatment cannot contain the selection node")
    for name in x:
        g.index(name)
    anc = ancestors(g, [g.selection])
    return Decomposition(x1=x & anc, x2=x - anc)


def _surgered(g: AugmentedDag, dec: Decomposition) -> AugmentedDag:
    return edge_surgery(g, remove_incoming=dec.x2, remove_outgoing=dec.x1)


def is_s_id(g: AugmentedDag, q: Query) -> bool:
    """X1 is empty, or X1 and Y are d-separated by X2 and S after surgery."""
    q.validate(g)
    dec = decompose_treatment(g, q.treatment)
    if not dec.x1:
        return True
    h = _surgered(g, dec)
    return d_separated(h, dec.x1, q.outcome, dec.x2 | {g.selection})


def _factor(g: AugmentedDag, w: str) -> Prob:
    return Prob((w,), g.sort_nodes(g.parents(w)))


def _ancestral_part(g: AugmentedDag) -> tuple[list[str], list[Prob]]:
    anc = ancestors(g, [g.selection]) - {g.selection}
    anc_factor = [Prob(g.sort_nodes(anc))] if anc else []
    return sorted(anc), anc_factor


def x2_effect_estimand(g: AugmentedDag, x2: Iterable[str]) -> Estimand:
    """Estimand for ``P_{X2}(V \\ X2 | S=1)`` when X2 has no ancestor role.

    The ancestral block ``P^s(Anc(S) \\ S)`` times ``P^s(W | Pa(W))`` for
    every remaining observed node outside X2.
    """
    x2 = frozenset([x2] if isinstance(x2, str) else x2)
    for name in x2:
        g.index(name)
    anc = ancestors(g, [g.selection])
    bad = x2 & anc
    if bad:
        raise QueryError(f"{sorted(bad)} are ancestors of {g.selection}")
    _, anc_factor = _ancestral_part(g)
    rest = [w for w in g.observed if w not in x2 and w not in anc]
    factors = anc_factor + sorted((_factor(g, w) for w in rest), key=lambda p: _prob_key(g, p))
    return Product(tuple(factors))


def _prob_key(g: AugmentedDag, p: Prob):
    return tuple(g.indices(p.targets)), tuple(g.indices(p.givens))


def _wrap_sum(g: AugmentedDag, bound: Iterable[str], body: Estimand) -> Estimand:
    bound = g.sort_nodes(bound, topological=True)
    return SumOver(bound, body) if bound else body


def s_id(g: AugmentedDag, q: Query) -> IdentifyResult:
    """General identification procedure for one query.

    With X1 empty the result is the summed X2-effect factorization. With X1
    non-empty and the separation condition holding, the ancestral block is
    divided by ``P^s(X1)``. Otherwise the result is :class:`NotIdentifiable`
    with a shortest active path as witness.
    """
    q.validate(g)
    dec = decompose_treatment(g, q.treatment)
    bound = [v for v in g.observed if v not in q.treatment and v not in q.outcome]
    if not dec.x1:
        return Identifiable(_wrap_sum(g, bound, x2_effect_estimand(g, dec.x2)), dec)

    h = _surgered(g, dec)
    cond = dec.x2 | {g.selection}
    witness = find_active_path(h, dec.x1, q.outcome, cond)
    if witness is not None:
        return NotIdentifiable(dec, witness)

    prod = x2_effect_estimand(g, dec.x2)
    anc_block, rest = prod.factors[0], prod.factors[1:]
    ratio = Ratio(anc_block, Prob(g.sort_nodes(dec.x1)))
    return Identifiable(_wrap_sum(g, bound, Product((ratio,) + rest)), dec)


def singleton_estimand(g: AugmentedDag, x: str, y: str) -> IdentifyResult:
    """Decide a single-treatment, single-outcome query with the simplest formula.

    Cases tried in order: ``P^s(Y|X)`` when X and Y are separated by S once
    X's outgoing edges are cut; ``P^s(Y)`` when X is not an ancestor of S and
    Y is a parent of X; otherwise, for X not an ancestor of S, adjustment for
    the parents of X.
    """
    for name in (x, y):
        if name not in g:
            raise QueryError(f"unknown node {name!r}")
    if x == y:
        raise QueryError("treatment and outcome must differ")
    if g.selection in (x, y):
        raise QueryError(f"selection node {g.selection} cannot appear in a query")

    dec = decompose_treatment(g, [x])
    h = edge_surgery(g, remove_outgoing=[x])
    witness = find_active_path(h, [x], [y], [g.selection])
    if witness is None:
        return Identifiable(Prob((y,), (x,)), dec)
    if dec.x1:
        return NotIdentifiable(dec, witness)

    pa = g.parents(x)
    if y in pa:
        return Identifiable(Prob((y,)), dec)
    if not pa:
        return Identifiable(Prob((y,), (x,)), dec)
    pa_sorted = g.sort_nodes(pa)
    factors = sorted(
        [Prob((y,), g.sort_nodes((x,) + pa)), Prob(pa_sorted)],
        key=lambda p: _prob_key(g, p),
    )
    return Identifiable(_wrap_sum(g, pa, Product(tuple(factors))), dec)


def identify(g: AugmentedDag, q: Query) -> IdentifyResult:
    """Public entry point: simplest singleton formula, else the general procedure."""
    q.validate(g)
    if len(q.treatment) == 1 and len(q.outcome) == 1:
        (x,), (y,) = q.treatment, q.outcome
        return singleton_estimand(g, x, y)
    return s_id(g, q)


__all__ = [
    "Decomposition",
    "GraphError",
    "Identifiable",
    "IdentifyResult",
    "NotIdentifiable",
    "Query",
    "QueryError",
    "decompose_treatment",
    "identify",
    "is_s_id",
    "s_id",
    "singleton_estimand",
    "x2_effect_estimand",
]
