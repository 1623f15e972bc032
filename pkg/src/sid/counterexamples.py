"""Analytic non-identifiability certificates on the canonical chain graphs.

Two linear-Gaussian SEMs with a Bernoulli root ``Z`` and a Gaussian-kernel
selection mechanism differ only in the sign ``b`` of every noise mean.
They induce the same sub-population density over the observed nodes, yet
their interventional ratios at two outcome values differ, so the effect
cannot be a function of the sub-population distribution.

Path lengths follow the closed forms: ``k`` is the number of noise terms
between the outcome and the selection mechanism (Type 1: edges on the
``Y -> S`` path), and ``m`` the number of noise terms feeding the outcome
(Type 1) or the selection parent (Type 2).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .graph import AugmentedDag
from .identify import Query, is_s_id

LOG_2PI = math.log(2 * math.pi)

TYPE1 = "type1"
TYPE2_ANC = "type2-anc"  # X is an ancestor of Y
TYPE2_NONANC = "type2-nonanc"
FAMILIES = (TYPE1, TYPE2_ANC, TYPE2_NONANC)


@dataclass(frozen=True)
class ChainParams:
    k: int
    m: int
    b: float = 1.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if self.b not in (1, -1, 1.0, -1.0):
            raise ValueError("b must be +1 or -1")


def gaussian_bernoulli_marginal(mu_y: float, sigma2: float, b: float) -> float:
    """``P(S=1 | Y=y)`` when ``R | y ~ N(mu_y, sigma2)`` and ``S | r`` has the Gaussian kernel.

    Zero variance reduces to the kernel evaluated at ``r = mu_y``.
    """
    if sigma2 < 0:
        raise ValueError("sigma2 must be non-negative")
    v = sigma2 + 1.0
    return math.exp(-((mu_y + b) ** 2) / (2 * v)) / math.sqrt(2 * math.pi * v)


def log_type1_joint_selection(y: float, params: ChainParams) -> float:
    k, m, b = params.k, params.m, params.b
    log_c = -math.log(4 * math.pi) - 0.5 * math.log(k * m)
    a = -((y - m * b) ** 2) / (2 * m)
    c = -((y - 1 - m * b) ** 2) / (2 * m)
    return log_c - (y + k * b) ** 2 / (2 * k) + float(np.logaddexp(a, c))


def type1_joint_selection(y: float, params: ChainParams) -> float:
    """Density of ``P_{X=0}(Y=y, S=1)`` on the Type-1 chain."""
    return math.exp(log_type1_joint_selection(y, params))


def log_type2_joint_selection(y: float, params: ChainParams, x_ancestor_of_y: bool = True) -> float:
    """Type-2 closed form via reduction to Type 1 under ``y -> -y``.

    When X is not an ancestor of Y the outcome is a root, which is the
    ``k = 1`` case.
    """
    if not x_ancestor_of_y:
        params = ChainParams(1, params.m, params.b)
    return log_type1_joint_selection(-y, params)


def type2_joint_selection(y: float, params: ChainParams, x_ancestor_of_y: bool = True) -> float:
    return math.exp(log_type2_joint_selection(y, params, x_ancestor_of_y))


def _log_joint(family: str, y: float, k: int, m: int, b: float) -> float:
    params = ChainParams(k, m, b)
    if family == TYPE1:
        return log_type1_joint_selection(y, params)
    if family == TYPE2_ANC:
        return log_type2_joint_selection(y, params, True)
    if family == TYPE2_NONANC:
        return log_type2_joint_selection(y, params, False)
    raise ValueError(f"unknown family {family!r}")


def interventional_ratio(y: float, k: int, m: int, family: str = TYPE1) -> float:
    """``P^{M1}_{X=0}(y, S=1) / P^{M2}_{X=0}(y, S=1)``."""
    return math.exp(_log_joint(family, y, k, m, 1.0) - _log_joint(family, y, k, m, -1.0))


def ratio_gap_certificate(m: int) -> tuple[float, float, float]:
    """Return ``(r, e^-2 / r, |r - e^-2 / r|)`` for the ratio at ``y = 0``.

    ``r > 1/e`` for every m, so ``r`` never equals ``e^-2 / r``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    a = 1.0 / (2 * m)
    r = (1 + math.exp(-1 - a)) / (1 + math.exp(1 - a))
    if not r > math.exp(-1):
        raise ArithmeticError(f"ratio bound violated at m={m}: r={r}")
    other = math.exp(-2) / r
    return r, other, abs(r - other)


# -- explicit chain graphs ---------------------------------------------------------


@dataclass(frozen=True)
class ChainFamily:
    """A canonical chain graph with its role assignment.

    ``z_prime`` is the child of ``z`` on the path towards ``x`` (possibly
    ``x`` itself).
    """

    family: str
    graph: AugmentedDag
    k: int
    m: int
    z: str = "Z"
    x: str = "X"
    y: str = "Y"
    z_prime: str = "X"

    @property
    def observed(self) -> tuple[str, ...]:
        return self.graph.observed


def _path(edges: list, names: Sequence[str]) -> None:
    edges.extend(zip(names, names[1:]))


def type1_graph(k: int, m: int, *, z_extra: int = 0, x_extra: int = 0, zx_extra: int = 0) -> ChainFamily:
    """Type-1 chain: ``Z ~> X``, ``Z ~> N``, ``X ~> N``, ``N ~> Y ~> S``.

    The ``m`` noise terms feeding Y are split between the interior of
    ``Z ~> N`` (`z_extra`), the interior of ``X ~> N`` (`x_extra`), ``N``
    itself and the ``N ~> Y`` path. ``m = 1`` with no extras makes N = Y.
    ``Y ~> S`` has `k` edges.
    """
    ChainParams(k, m)
    tail = m - 1 - z_extra - x_extra
    if min(z_extra, x_extra, zx_extra, tail) < 0:
        raise ValueError("path extras exceed m - 1")
    edges: list = []
    zx = ["Z"] + [f"A{i}" for i in range(zx_extra)] + ["X"]
    _path(edges, zx)
    n_to_y = ["N"] + [f"W{i}" for i in range(tail - 1)] + ["Y"] if tail else ["Y"]
    n = n_to_y[0]
    _path(edges, ["Z"] + [f"C{i}" for i in range(z_extra)] + [n])
    _path(edges, ["X"] + [f"D{i}" for i in range(x_extra)] + [n])
    _path(edges, n_to_y)
    _path(edges, ["Y"] + [f"U{i}" for i in range(k - 1)] + ["S"])
    nodes = [u for e in edges for u in e]
    g = AugmentedDag(list(dict.fromkeys(nodes)), edges, selection="S")
    return ChainFamily(TYPE1, g, k, m, z_prime=zx[1])


def type2_graph(k: int, m: int, *, x_ancestor_of_y: bool = True) -> ChainFamily:
    """Type-2 chain with the selection parent collecting Z's and Y's paths.

    With `x_ancestor_of_y`, X reaches Y through `k` edges and the union of
    ``Z ~> N``, ``Y ~> N``, ``N ~> S`` has ``m + 2`` nodes. Otherwise Y is a
    root and X feeds N directly; ``m`` counts the observed nodes off the
    ``Z ~> X`` path.
    """
    ChainParams(k, m)
    edges: list = [("Z", "X")]
    interior = [f"W{i}" for i in range(m - 1)]
    if x_ancestor_of_y:
        _path(edges, ["X"] + [f"U{i}" for i in range(k - 1)] + ["Y"])
        # N is the first interior node, or S itself when m = 1
        n = interior[0] if interior else "S"
        edges += [("Z", n), ("Y", n)]
        _path(edges, [n] + interior[1:] + ["S"] if interior else [n])
        fam = TYPE2_ANC
    else:
        n = interior[0] if interior else "S"
        edges += [("Z", n), ("Y", n), ("X", n)]
        _path(edges, [n] + interior[1:] + ["S"] if interior else [n])
        fam = TYPE2_NONANC
    nodes = ["Z", "X", "Y"] + [u for e in edges for u in e]
    g = AugmentedDag(list(dict.fromkeys(nodes)), edges, selection="S")
    return ChainFamily(fam, g, k if x_ancestor_of_y else 1, m)


def build_family(family: str, k: int, m: int) -> ChainFamily:
    if family == TYPE1:
        return type1_graph(k, m)
    if family == TYPE2_ANC:
        return type2_graph(k, m, x_ancestor_of_y=True)
    if family == TYPE2_NONANC:
        return type2_graph(k, m, x_ancestor_of_y=False)
    raise ValueError(f"unknown family {family!r}")


# -- the SEM pair ------------------------------------------------------------------


def _log_normal(x: float, mean: float) -> float:
    return -0.5 * LOG_2PI - 0.5 * (x - mean) ** 2


def chain_log_density(fam: ChainFamily, values: dict[str, float], b: float, *, zprime_sign: float = -1.0) -> float:
    """``log P^{M_b}(V = values, S = 1)`` for the SEM with noise mean `b`.

    Z is Bernoulli(1/2); ``Z' = -Z + e``; every other observed node is the
    sum of its parents plus ``e``; ``e ~ N(b, 1)``; and
    ``P(S=1 | pa) = phi(sum(pa) + b)``. A `zprime_sign` other than -1
    breaks the construction (used as a negative control).
    """
    g = fam.graph
    terms = [math.log(0.5)]
    for v in g.observed:
        if v == fam.z:
            continue
        spa = math.fsum(values[p] for p in g.parents(v))
        if v == fam.z_prime:
            terms.append(_log_normal(values[v], zprime_sign * values[fam.z] + b))
        else:
            terms.append(_log_normal(values[v], spa + b))
    s_spa = math.fsum(values[p] for p in g.parents(g.selection))
    terms.append(-0.5 * LOG_2PI - 0.5 * (s_spa + b) ** 2)
    return math.fsum(terms)


def sample_grid(fam: ChainFamily, n_points: int = 100, seed: int = 0) -> list[dict[str, float]]:
    """Pseudo-random assignments: Z in {0, 1}, other nodes standard normal scaled by 2."""
    rng = np.random.default_rng(seed)
    names = [v for v in fam.observed if v != fam.z]
    grid = []
    for _ in range(n_points):
        point = {fam.z: float(rng.integers(0, 2))}
        point.update(zip(names, (2.0 * rng.standard_normal(len(names))).tolist()))
        grid.append(point)
    return grid


def observational_match_check(
    fam: ChainFamily,
    grid: Sequence[dict[str, float]] | None = None,
    *,
    n_points: int = 100,
    seed: int = 0,
    zprime_sign: float = -1.0,
) -> float:
    """Max ``|log P^{M1}(v, S=1) - log P^{M2}(v, S=1)|`` over the grid."""
    if grid is None:
        grid = sample_grid(fam, n_points, seed)
    worst = 0.0
    for point in grid:
        d = chain_log_density(fam, point, 1.0, zprime_sign=zprime_sign) - chain_log_density(
            fam, point, -1.0, zprime_sign=zprime_sign
        )
        worst = max(worst, abs(d))
    return worst


def parent_sum_coefficients(fam: ChainFamily) -> dict[str, int]:
    """Coefficient of each node in ``Z + sum(V) - sum_{W in V+S} SPa(W)``.

    All zero exactly when the ``b``-linear part of the joint exponent
    cancels.
    """
    g = fam.graph
    coef = {v: 1 for v in g.observed}
    coef[fam.z] += 1
    for w in g.nodes:
        for p in g.parents(w):
            coef[p] -= 1
    return coef


def child_multiplicities(fam: ChainFamily) -> dict[str, int]:
    return {v: len(fam.graph.children(v)) for v in fam.graph.nodes}


@dataclass
class PairReport:
    family: str
    k: int
    m: int
    y0: float
    y1: float
    grid: list = field(repr=False)
    max_observational_discrepancy: float
    ratio_y0: float
    ratio_y1: float
    gap: float
    graph_s_id: bool
    certified: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def falsification_report(
    k: int,
    m: int,
    family: str = TYPE1,
    *,
    n_points: int = 100,
    seed: int = 0,
    obs_tol: float = 1e-12,
    gap_tol: float = 1e-6,
) -> PairReport:
    """Certify non-identifiability on one chain graph.

    Certified when the two SEMs agree observationally (log-density
    discrepancy below `obs_tol`) and the interventional ratios at the two
    outcome values differ by more than `gap_tol`.
    """
    fam = build_family(family, k, m)
    grid = sample_grid(fam, n_points, seed)
    disc = observational_match_check(fam, grid)
    y0, y1 = (0.0, 1.0) if family == TYPE1 else (0.0, -1.0)
    kk = fam.k
    r0 = interventional_ratio(y0, kk, m, family)
    r1 = interventional_ratio(y1, kk, m, family)
    gap = abs(r0 - r1)
    s_id = is_s_id(fam.graph, Query([fam.x], [fam.y]))
    zy = [[p[fam.z], p[fam.y]] for p in grid]
    return PairReport(
        family=family,
        k=kk,
        m=m,
        y0=y0,
        y1=y1,
        grid=zy,
        max_observational_discrepancy=disc,
        ratio_y0=r0,
        ratio_y1=r1,
        gap=gap,
        graph_s_id=s_id,
        certified=bool(disc < obs_tol and gap > gap_tol),
    )
