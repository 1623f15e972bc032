"""Symbolic estimands over sub-population probabilities.

Every :class:`Prob` leaf is implicitly conditioned on ``S=1``. Trees are
immutable; variable tuples keep their construction order for rendering,
but semantics (evaluation, structural equality) treat them as sets.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np


class EstimandError(ValueError):
    """Malformed estimand or bad assignment."""


class EvaluationError(ArithmeticError):
    """Zero denominator while evaluating (positivity violation)."""


@dataclass(frozen=True)
class Prob:
    targets: tuple[str, ...]
    givens: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "givens", tuple(self.givens))
        if not self.targets:
            raise EstimandError("Prob needs at least one target")
        if set(self.targets) & set(self.givens):
            raise EstimandError(f"targets and givens overlap in P({self.targets}|{self.givens})")
        if len(set(self.targets)) != len(self.targets) or len(set(self.givens)) != len(self.givens):
            raise EstimandError("repeated variable in Prob")


@dataclass(frozen=True)
class Product:
    factors: tuple["Estimand", ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))


@dataclass(frozen=True)
class Ratio:
    num: "Estimand"
    den: "Estimand"


@dataclass(frozen=True)
class SumOver:
    over: tuple[str, ...]
    body: "Estimand"

    def __post_init__(self):
        object.__setattr__(self, "over", tuple(self.over))
        if len(set(self.over)) != len(self.over):
            raise EstimandError("repeated summation variable")
        clash = set(self.over) & _bound_anywhere(self.body)
        if clash:
            raise EstimandError(f"variables bound twice: {sorted(clash)}")


Estimand = Union[Prob, Product, Ratio, SumOver]


def _bound_anywhere(e: Estimand) -> set[str]:
    if isinstance(e, SumOver):
        return set(e.over) | _bound_anywhere(e.body)
    if isinstance(e, Product):
        return set().union(*(_bound_anywhere(f) for f in e.factors))
    if isinstance(e, Ratio):
        return _bound_anywhere(e.num) | _bound_anywhere(e.den)
    return set()


def variables(e: Estimand) -> frozenset[str]:
    """Every variable mentioned anywhere in `e`."""
    if isinstance(e, Prob):
        return frozenset(e.targets) | frozenset(e.givens)
    if isinstance(e, SumOver):
        return frozenset(e.over) | variables(e.body)
    if isinstance(e, Product):
        return frozenset().union(*(variables(f) for f in e.factors))
    return variables(e.num) | variables(e.den)


def free_variables(e: Estimand) -> frozenset[str]:
    if isinstance(e, Prob):
        return frozenset(e.targets) | frozenset(e.givens)
    if isinstance(e, SumOver):
        return free_variables(e.body) - frozenset(e.over)
    if isinstance(e, Product):
        return frozenset().union(*(free_variables(f) for f in e.factors))
    return free_variables(e.num) | free_variables(e.den)


def probs(e: Estimand) -> list[Prob]:
    """Prob leaves in left-to-right order."""
    if isinstance(e, Prob):
        return [e]
    if isinstance(e, SumOver):
        return probs(e.body)
    if isinstance(e, Product):
        return [p for f in e.factors for p in probs(f)]
    return probs(e.num) + probs(e.den)


# -- joint tables ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JointTable:
    """Dense joint distribution over discrete variables.

    ``probs`` has one axis per variable, in the order of ``variables``.
    """

    variables: tuple[str, ...]
    probs: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != len(self.variables):
            raise EstimandError(f"table has {p.ndim} axes for {len(self.variables)} variables")
        if len(set(self.variables)) != len(self.variables):
            raise EstimandError("repeated variable in table")
        if (p < 0).any():
            raise EstimandError("negative probability in table")
        if abs(p.sum() - 1.0) > 1e-12:
            raise EstimandError(f"table sums to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return self.probs.shape

    def card(self, var: str) -> int:
        return self.probs.shape[self._axis(var)]

    def _axis(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise EstimandError(f"variable {var!r} is not in the table") from None

    def marginal(self, vars: Sequence[str]) -> np.ndarray:
        """Marginal array with axes ordered as `vars` (cached, read-only)."""
        key = tuple(vars)
        if key not in self._cache:
            axes = [self._axis(v) for v in key]
            drop = tuple(i for i in range(len(self.variables)) if i not in axes)
            m = self.probs.sum(axis=drop) if drop else self.probs
            kept = sorted(axes)
            m = np.transpose(m, [kept.index(a) for a in axes]) if key else np.asarray(m)
            m = np.ascontiguousarray(m)
            m.setflags(write=False)
            self._cache[key] = m
        return self._cache[key]

    def marginal_table(self, vars: Sequence[str]) -> "JointTable":
        return JointTable(tuple(vars), self.marginal(vars))

    def condition(self, var: str, value: int) -> "JointTable":
        """Condition on ``var = value`` and drop that axis."""
        ax = self._axis(var)
        sl = np.take(self.probs, value, axis=ax)
        mass = sl.sum()
        if mass <= 0:
            raise EvaluationError(f"P({var}={value}) = 0")
        rest = self.variables[:ax] + self.variables[ax + 1 :]
        return JointTable(rest, sl / mass)

    def __repr__(self) -> str:
        return f"JointTable(variables={self.variables}, shape={self.probs.shape})"


def uniform_table(variables: Sequence[str], cards: Sequence[int]) -> JointTable:
    p = np.ones(tuple(cards))
    return JointTable(tuple(variables), p / p.sum())


# -- evaluation -----------------------------------------------------------------


def _fmt_assign(assign: Mapping[str, int], vars: Iterable[str]) -> str:
    return ", ".join(f"{v}={assign[v]}" for v in vars)


def _eval(e: Estimand, table: JointTable, env: dict[str, int]) -> float:
    if isinstance(e, Prob):
        joint_vars = e.targets + e.givens
        num = table.marginal(joint_vars)[tuple(env[v] for v in joint_vars)]
        if not e.givens:
            return float(num)
        den = table.marginal(e.givens)[tuple(env[v] for v in e.givens)]
        if den == 0:
            raise EvaluationError(
                f"P^s({_fmt_assign(env, e.givens)}) = 0 in factor {render(e)}"
            )
        return float(num / den)
    if isinstance(e, Product):
        out = 1.0
        for f in e.factors:
            out *= _eval(f, table, env)
        return out
    if isinstance(e, Ratio):
        den = _eval(e.den, table, env)
        if den == 0:
            fv = sorted(free_variables(e.den))
            raise EvaluationError(
                f"denominator {render(e.den)} is zero at {_fmt_assign(env, fv)}"
            )
        return _eval(e.num, table, env) / den
    # SumOver
    ranges = [range(table.card(v)) for v in e.over]
    total = 0.0
    for values in itertools.product(*ranges):
        env.update(zip(e.over, values))
        total += _eval(e.body, table, env)
    for v in e.over:
        del env[v]
    return total


def evaluate(e: Estimand, table: JointTable, assignment: Mapping[str, int]) -> float:
    """Evaluate `e` against `table` at `assignment` of its free variables.

    Entries for variables that do not occur in `e` are ignored; an entry for
    a bound variable, or a missing free variable, is an error.
    """
    free = free_variables(e)
    missing = free - set(assignment)
    if missing:
        raise EstimandError(f"no value for free variable(s) {sorted(missing)}")
    over = _bound_anywhere(e) & set(assignment)
    if over:
        raise EstimandError(f"assignment binds summation variable(s) {sorted(over)}")
    unknown = variables(e) - set(table.variables)
    if unknown:
        raise EstimandError(f"table lacks variable(s) {sorted(unknown)}")
    env = {}
    for v in free:
        val = int(assignment[v])
        if not 0 <= val < table.card(v):
            raise EstimandError(f"value {val} out of range for {v}")
        env[v] = val
    return _eval(e, table, env)


def evaluate_table(
    e: Estimand,
    table: JointTable,
    x_vars: Sequence[str],
    y_vars: Sequence[str],
    cards: Mapping[str, int] | None = None,
) -> np.ndarray:
    """Tabulate `e` over all (x, y) assignments.

    Returns an array with axes ``x_vars + y_vars``. Variables in `x_vars`
    that do not occur in `e` still get an axis; their cardinality comes from
    `cards` or the table.
    """
    x_vars, y_vars = tuple(x_vars), tuple(y_vars)
    all_vars = x_vars + y_vars

    def card(v):
        if cards is not None and v in cards:
            return cards[v]
        return table.card(v)

    shape = tuple(card(v) for v in all_vars)
    out = np.empty(shape)
    for values in itertools.product(*(range(c) for c in shape)):
        out[values] = evaluate(e, table, dict(zip(all_vars, values)))
    return out


# -- rendering ------------------------------------------------------------------


def _text(e: Estimand, top: bool = True) -> str:
    if isinstance(e, Prob):
        if e.givens:
            return f"P^s({','.join(e.targets)}|{','.join(e.givens)})"
        return f"P^s({','.join(e.targets)})"
    if isinstance(e, Product):
        if not e.factors:
            return "1"
        return " ".join(_text(f, top=False) for f in e.factors)
    if isinstance(e, Ratio):
        inner = f"{_text(e.num, top=False)} / {_text(e.den, top=False)}"
        return inner if top else f"[{inner}]"
    body = _text(e.body, top=True)
    return f"sum_{{{','.join(e.over)}}} {body}"


def _latex(e: Estimand) -> str:
    if isinstance(e, Prob):
        t = ",".join(e.targets)
        if e.givens:
            return f"P^{{s}}({t} \\mid {','.join(e.givens)})"
        return f"P^{{s}}({t})"
    if isinstance(e, Product):
        if not e.factors:
            return "1"
        return " ".join(_latex(f) for f in e.factors)
    if isinstance(e, Ratio):
        return f"\\frac{{{_latex(e.num)}}}{{{_latex(e.den)}}}"
    return f"\\sum_{{{','.join(e.over)}}} {_latex(e.body)}"


def to_json(e: Estimand) -> dict:
    if isinstance(e, Prob):
        return {"kind": "prob", "targets": list(e.targets), "givens": list(e.givens)}
    if isinstance(e, Product):
        return {"kind": "prod", "factors": [to_json(f) for f in e.factors]}
    if isinstance(e, Ratio):
        return {"kind": "ratio", "num": to_json(e.num), "den": to_json(e.den)}
    return {"kind": "sum", "over": list(e.over), "body": to_json(e.body)}


def from_json(obj: dict | str) -> Estimand:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        kind = obj["kind"]
        if kind == "prob":
            return Prob(tuple(obj["targets"]), tuple(obj.get("givens", ())))
        if kind == "prod":
            return Product(tuple(from_json(f) for f in obj["factors"]))
        if kind == "ratio":
            return Ratio(from_json(obj["num"]), from_json(obj["den"]))
        if kind == "sum":
            return SumOver(tuple(obj["over"]), from_json(obj["body"]))
    except (KeyError, TypeError) as exc:
        raise EstimandError(f"malformed estimand JSON: {exc}") from None
    raise EstimandError(f"unknown estimand kind {kind!r}")


def render(e: Estimand, format: str = "text") -> str:
    """Render as ``text``, ``latex`` or ``json``."""
    if format == "text":
        return _text(e)
    if format == "latex":
        return _latex(e)
    if format == "json":
        return json.dumps(to_json(e), separators=(",", ":"))
    raise ValueError(f"unknown format {format!r}")


# -- structural equality --------------------------------------------------------


def _key(vars) -> tuple[str, ...]:
    return tuple(sorted(set(vars)))


def _canon(e: Estimand):
    """Hashable normal form: sorted tuples for variable sets, sorted factors.

    A ratio of two probabilities sharing their conditioning set, where the
    denominator's targets are a strict subset of the numerator's, is
    rewritten as a single conditional.
    """
    if isinstance(e, Prob):
        return ("prob", _key(e.targets), _key(e.givens))
    if isinstance(e, SumOver):
        body = _canon(e.body)
        if not e.over:
            return body
        if body[0] == "sum":
            return ("sum", _key(e.over + body[1]), body[2])
        return ("sum", _key(e.over), body)
    if isinstance(e, Ratio):
        num, den = _canon(e.num), _canon(e.den)
        if (
            num[0] == "prob"
            and den[0] == "prob"
            and num[2] == den[2]
            and set(den[1]) < set(num[1])
        ):
            return ("prob", _key(set(num[1]) - set(den[1])), _key(den[1] + den[2]))
        return ("ratio", num, den)
    flat = []
    for f in e.factors:
        c = _canon(f)
        if c[0] == "prod":
            flat.extend(c[1])
        else:
            flat.append(c)
    if len(flat) == 1:
        return flat[0]
    return ("prod", tuple(sorted(flat, key=repr)))


def structurally_equal_mod_conditioning(a: Estimand, b: Estimand) -> bool:
    return _canon(a) == _canon(b)
