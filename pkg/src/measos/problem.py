"""Problem files: variables, relations, objective, generators, evaluators.

Line-oriented ``key: value`` text; ``#`` starts a comment.  See
``docs/problem_format.md`` for the grammar.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .polyalg import (Poly, PolySyntaxError, RelationSet, VarSpace, evaluate, normal_form,
                      parse_poly, parse_rule)
from .quadmod import MeasurableEvaluator, QuadraticModule, make_archimedean


class ProblemError(ValueError):
    """Syntax or semantic error in a problem file."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 rule: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if rule is not None:
            where.append(f"rule {rule}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line, self.column, self.rule = line, column, rule


@dataclass
class ProblemFile:
    space: VarSpace
    relations: RelationSet
    objective: Poly
    generators: list[Poly]
    epsilon: float
    evaluators: dict[int, str] = field(default_factory=dict)
    orders: tuple[int, int] | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    module: QuadraticModule | None = None

    def evaluator(self) -> MeasurableEvaluator | None:
        """Builtin realizations of h1..hm, or None if any is missing."""
        if any(j not in self.evaluators for j in range(self.space.m)):
            return None
        return MeasurableEvaluator(tuple(
            builtin_evaluator(self.evaluators[j], self.space) for j in range(self.space.m)))


_CMP = re.compile(r"(>=|<=|>|<)")


def _x_only(text: str, space: VarSpace) -> Poly:
    p = parse_poly(text, space)
    if any(any(e[space.d:]) for e in p.terms):
        raise PolySyntaxError("evaluator expressions may use only x-variables", 1)
    return p


def builtin_evaluator(spec: str, space: VarSpace):
    """``indicator(P >= Q)``, ``abs(P)``, ``sign(P)`` or ``floor(P)`` in the x-variables.

    The returned callable maps an ``(N, d)`` array to ``(N,)``.
    """
    m = re.fullmatch(r"\s*(indicator|abs|sign|floor)\s*\((.*)\)\s*", spec)
    if not m:
        raise PolySyntaxError(f"unknown evaluator {spec.strip()!r}", 1)
    kind, body = m.groups()

    def lift(p: Poly):
        def value(xs):
            xs = np.atleast_2d(xs)
            pts = np.hstack([xs, np.zeros((len(xs), space.m))])
            return np.atleast_1d(evaluate(p, pts))
        return value

    if kind == "indicator":
        parts = _CMP.split(body)
        if len(parts) != 3:
            raise PolySyntaxError("indicator needs one comparison like 'x1 >= 0'", 1)
        lhs, op, rhs = parts
        diff = lift(_x_only(lhs, space) - _x_only(rhs, space))
        cmp = {">=": np.greater_equal, ">": np.greater,
               "<=": np.less_equal, "<": np.less}[op]
        return lambda xs: cmp(diff(xs), 0.0).astype(float)
    inner = lift(_x_only(body, space))
    fn = {"abs": np.abs, "sign": np.sign, "floor": np.floor}[kind]
    return lambda xs: fn(inner(xs))


def parse_orders(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*(?:\.\.\s*(\d+))?\s*", text)
    if not m:
        raise ValueError(f"orders must look like 'A..B', got {text!r}")
    a = int(m.group(1))
    b = int(m.group(2)) if m.group(2) else a
    if a < 1 or b < a:
        raise ValueError(f"bad order range {text!r}")
    return a, b


_TOL_KEYS = {"tol_gap", "tol_feas", "tol_flat"}


def parse_problem(text: str) -> ProblemFile:
    entries: list[tuple[int, int, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if ":" not in line:
            raise ProblemError("expected 'key: value'", lineno, 1)
        key, value = line.split(":", 1)
        col = len(key) + 2 + (len(value) - len(value.lstrip()))
        entries.append((lineno, col, key.strip(), value.strip()))

    def one(key, default=None):
        hits = [e for e in entries if e[2] == key]
        if len(hits) > 1:
            raise ProblemError(f"duplicate key {key!r}", hits[1][0])
        return hits[0] if hits else default

    def num(entry, kind=float):
        try:
            return kind(entry[3])
        except ValueError:
            raise ProblemError(f"{entry[2]} must be a number", entry[0], entry[1]) from None

    known = {"d", "m", "names", "relation", "objective", "generator", "epsilon", "orders"}
    for lineno, col, key, _ in entries:
        if key not in known | _TOL_KEYS and not key.startswith("evaluator"):
            raise ProblemError(f"unknown key {key!r}", lineno, 1)

    d_e, m_e = one("d"), one("m")
    if d_e is None:
        raise ProblemError("missing 'd'")
    d = num(d_e, int)
    m = num(m_e, int) if m_e else 0
    names_e = one("names")
    try:
        space = VarSpace(d, m, tuple(names_e[3].split()) if names_e else ())
    except ValueError as exc:
        raise ProblemError(str(exc), (names_e or d_e)[0]) from None

    def poly(entry):
        try:
            return parse_poly(entry[3], space)
        except PolySyntaxError as exc:
            raise ProblemError(str(exc).rsplit(" (column", 1)[0], entry[0],
                               entry[1] + exc.column - 1) from None

    rules = []
    for idx, entry in enumerate((e for e in entries if e[2] == "relation"), 1):
        try:
            rules.append(parse_rule(entry[3], space))
        except PolySyntaxError as exc:
            raise ProblemError(str(exc).rsplit(" (column", 1)[0], entry[0],
                               entry[1] + exc.column - 1, rule=idx) from None
        except ValueError as exc:
            raise ProblemError(str(exc), entry[0], rule=idx) from None
    try:
        relations = RelationSet(space, tuple(rules))
    except ValueError as exc:
        raise ProblemError(str(exc)) from None

    obj_e = one("objective")
    if obj_e is None:
        raise ProblemError("missing 'objective'")
    objective = poly(obj_e)
    generators = [poly(e) for e in entries if e[2] == "generator"]
    eps_e = one("epsilon")
    if eps_e is None:
        raise ProblemError("missing 'epsilon'")
    epsilon = num(eps_e)
    if not epsilon > 0:
        raise ProblemError("epsilon must be positive", eps_e[0], eps_e[1])

    evaluators = {}
    for lineno, col, key, value in entries:
        if not key.startswith("evaluator"):
            continue
        name = key[len("evaluator"):].strip()
        if name not in space.names[space.d:]:
            raise ProblemError(f"evaluator for unknown h-variable {name!r}", lineno, 1)
        try:
            builtin_evaluator(value, space)
        except PolySyntaxError as exc:
            raise ProblemError(str(exc).rsplit(" (column", 1)[0], lineno, col) from None
        evaluators[space.names.index(name) - space.d] = value

    orders = None
    ord_e = one("orders")
    if ord_e:
        try:
            orders = parse_orders(ord_e[3])
        except ValueError as exc:
            raise ProblemError(str(exc), ord_e[0], ord_e[1]) from None
    tolerances = {}
    for key in sorted(_TOL_KEYS):
        e = one(key)
        if e:
            tolerances[key] = num(e)

    module = make_archimedean(space, relations, generators, epsilon)
    return ProblemFile(space, relations, normal_form(objective, relations), list(module.generators),
                       epsilon, evaluators, orders, tolerances, module)
