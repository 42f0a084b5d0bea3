"""Sparse polynomials in coordinate variables x1..xd and measurable generators h1..hm.

Elements of ``R[x1..xd, h1..hm]`` are stored as ``{exponent: coefficient}``
maps. Exponents are tuples of length ``d + m`` laid out as ``(alpha, beta)``:
the x-part first, then the h-part.

Algebraic dependences between the h's are entered as oriented rewrite rules
``h^beta -> rhs`` whose right-hand side is strictly smaller in the global
graded order, so repeated rewriting terminates.

The global monomial order is graded lexicographic with the h-variables more
significant than the x-variables: monomials compare by total degree, then
lexicographically on the h-part, then on the x-part.  Among the
x-variables, ``x1 > x2 > ... > xd`` (and likewise for h).
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]

DROP_TOL = 1e-14


class SpaceMismatchError(ValueError):
    """Raised when combining polynomials over different variable spaces."""


class PolySyntaxError(ValueError):
    """Malformed polynomial text.  ``column`` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


@dataclass(frozen=True)
class VarSpace:
    d: int
    m: int = 0
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.d < 0 or self.m < 0 or self.d + self.m < 1:
            raise ValueError("need d >= 1 or m >= 1")
        if not self.names:
            names = tuple(f"x{i + 1}" for i in range(self.d)) + tuple(
                f"h{j + 1}" for j in range(self.m)
            )
            object.__setattr__(self, "names", names)
        else:
            object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) != self.n:
            raise ValueError("one name per variable required")
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be unique")

    @property
    def n(self) -> int:
        return self.d + self.m

    def zero_exponent(self) -> Exponent:
        return (0,) * self.n

    def unit(self, k: int) -> Exponent:
        e = [0] * self.n
        e[k] = 1
        return tuple(e)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None


def order_key(e: Exponent, d: int) -> tuple:
    """Sort key of the global graded order (h-part more significant)."""
    return (sum(e), e[d:], e[:d])


def divides(a: Exponent, b: Exponent) -> bool:
    return all(i <= j for i, j in zip(a, b))


class Poly:
    """Immutable sparse polynomial over a :class:`VarSpace`."""

    __slots__ = ("space", "terms")

    def __init__(self, space: VarSpace, terms: Mapping[Exponent, float] | None = None,
                 drop_tol: float = DROP_TOL):
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != space.n or min(e, default=0) < 0:
                raise ValueError(f"bad exponent {e} for space with {space.n} variables")
            c = float(c)
            if abs(c) > drop_tol:
                clean[e] = clean.get(e, 0.0) + c
        self.space = space
        self.terms = {e: c for e, c in clean.items() if abs(c) > drop_tol}

    # construction helpers
    @classmethod
    def constant(cls, space: VarSpace, c: float) -> Poly:
        return cls(space, {space.zero_exponent(): c})

    @classmethod
    def var(cls, space: VarSpace, k: int | str) -> Poly:
        if isinstance(k, str):
            k = space.index(k)
        return cls(space, {space.unit(k): 1.0})

    @classmethod
    def monomial(cls, space: VarSpace, e: Exponent, c: float = 1.0) -> Poly:
        return cls(space, {tuple(e): c})

    # queries
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, e: Exponent) -> float:
        return self.terms.get(tuple(e), 0.0)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def sorted_terms(self, descending: bool = True) -> list[tuple[Exponent, float]]:
        d = self.space.d
        return sorted(self.terms.items(), key=lambda t: order_key(t[0], d), reverse=descending)

    # arithmetic
    def _coerce(self, other) -> Poly:
        if isinstance(other, Poly):
            if other.space != self.space:
                raise SpaceMismatchError("polynomials live in different variable spaces")
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Poly.constant(self.space, float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.space, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(self, -other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return add(other, -self)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self.scale(float(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.scale(1.0 / float(c))

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ValueError("only nonnegative integer powers")
        out = Poly.constant(self.space, 1.0)
        for _ in range(int(k)):
            out = mul(out, self)
        return out

    def scale(self, c: float) -> Poly:
        return Poly(self.space, {e: c * v for e, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.space == other.space and self.terms == other.terms

    def __hash__(self):
        return hash((self.space, frozenset(self.terms.items())))

    def __call__(self, point):
        return evaluate(self, point)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def _check_same(p: Poly, q: Poly):
    if p.space != q.space:
        raise SpaceMismatchError("polynomials live in different variable spaces")


def add(p: Poly, q: Poly) -> Poly:
    _check_same(p, q)
    out = dict(p.terms)
    for e, c in q.terms.items():
        out[e] = out.get(e, 0.0) + c
    return Poly(p.space, out)


def mul(p: Poly, q: Poly) -> Poly:
    """Distributive product.  The result is not reduced by any relation."""
    _check_same(p, q)
    out: dict[Exponent, float] = {}
    for e1, c1 in p.terms.items():
        for e2, c2 in q.terms.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0.0) + c1 * c2
    return Poly(p.space, out)


def evaluate(p: Poly, point) -> float | np.ndarray:
    """Evaluate at one point (length ``d + m``) or at an array of points
    with the variables along the last axis."""
    pts = np.asarray(point, dtype=float)
    if pts.shape[-1:] != (p.space.n,):
        raise ValueError(f"point must have {p.space.n} coordinates, got shape {pts.shape}")
    out = np.zeros(pts.shape[:-1])
    for e, c in p.terms.items():
        term = np.full(pts.shape[:-1], c)
        for k, a in enumerate(e):
            if a:
                term = term * pts[..., k] ** a
        out = out + term
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RewriteRule:
    """Oriented relation ``h^lhs -> rhs`` with a pure h-monomial on the left."""

    lhs: Exponent
    rhs: Poly

    def __post_init__(self):
        space = self.rhs.space
        lhs = tuple(int(k) for k in self.lhs)
        object.__setattr__(self, "lhs", lhs)
        if len(lhs) != space.n:
            raise ValueError("rule lhs has wrong length")
        if any(lhs[: space.d]):
            raise ValueError("rule lhs must involve only h-variables")
        if sum(lhs) == 0:
            raise ValueError("rule lhs must be nonconstant")
        top = order_key(lhs, space.d)
        for e in self.rhs.terms:
            if order_key(e, space.d) >= top:
                raise ValueError(
                    f"rule {format_monomial(lhs, space)} -> {format_poly(self.rhs)} "
                    "is not degree-reducing"
                )

    @property
    def space(self) -> VarSpace:
        return self.rhs.space


@dataclass(frozen=True)
class RelationSet:
    space: VarSpace
    rules: tuple[RewriteRule, ...] = ()
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        seen = set()
        for r in self.rules:
            if r.space != self.space:
                raise SpaceMismatchError("rule over a different variable space")
            if r.lhs in seen:
                raise ValueError(f"duplicate rule lhs {format_monomial(r.lhs, self.space)}")
            seen.add(r.lhs)

    def __len__(self):
        return len(self.rules)

    def is_standard(self, e: Exponent) -> bool:
        return not any(divides(r.lhs, e) for r in self.rules)

    def reduce_monomial(self, e: Exponent) -> dict[Exponent, float]:
        """Normal form of the monomial ``e`` as a term map (memoized)."""
        hit = self._cache.get(e)
        if hit is not None:
            return hit
        d = self.space.d
        pending: dict[Exponent, float] = {e: 1.0}
        out: dict[Exponent, float] = {}
        # Rewrites only produce smaller monomials, so the largest pending
        # monomial has received all of its contributions.
        while pending:
            top = max(pending, key=lambda k: order_key(k, d))
            c = pending.pop(top)
            rule = next((r for r in self.rules if divides(r.lhs, top)), None)
            if rule is None:
                out[top] = out.get(top, 0.0) + c
                continue
            rest = tuple(a - b for a, b in zip(top, rule.lhs))
            for re_, rc in rule.rhs.terms.items():
                k = tuple(a + b for a, b in zip(rest, re_))
                pending[k] = pending.get(k, 0.0) + c * rc
        self._cache[e] = out
        return out


def no_relations(space: VarSpace) -> RelationSet:
    return RelationSet(space, ())


def normal_form(p: Poly, relations: RelationSet, drop_tol: float = DROP_TOL) -> Poly:
    if relations.space != p.space:
        raise SpaceMismatchError("relations over a different variable space")
    if not relations.rules:
        return p
    out: dict[Exponent, float] = {}
    for e, c in p.terms.items():
        for k, v in relations.reduce_monomial(e).items():
            out[k] = out.get(k, 0.0) + c * v
    return Poly(p.space, out, drop_tol=drop_tol)


def monomial_basis(space: VarSpace, relations: RelationSet | None, t: int) -> list[Exponent]:
    """Standard monomials of total degree <= t, sorted ascending in the global order."""
    if t < 0:
        raise ValueError("degree must be nonnegative")
    out = []
    for e in itertools.product(range(t + 1), repeat=space.n):
        if sum(e) <= t and (relations is None or relations.is_standard(e)):
            out.append(e)
    out.sort(key=lambda e: order_key(e, space.d))
    return out


def n_monomials(n: int, t: int) -> int:
    return math.comb(n + t, t)


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------

def format_monomial(e: Exponent, space: VarSpace) -> str:
    parts = []
    for name, a in zip(space.names, e):
        if a == 1:
            parts.append(name)
        elif a > 1:
            parts.append(f"{name}^{a}")
    return "*".join(parts) if parts else "1"


def format_poly(p: Poly, digits: int = 17) -> str:
    """Expanded text form, terms in descending order; parseable by :func:`parse_poly`."""
    if p.is_zero():
        return "0"
    chunks = []
    for i, (e, c) in enumerate(p.sorted_terms()):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        mono = format_monomial(e, p.space)
        num = format(mag, f".{digits}g")
        if mono == "1":
            body = num
        elif float(num) == 1.0:
            body = mono
        else:
            body = f"{num}*{mono}"
        if i == 0:
            chunks.append(body if sign == "+" else f"-{body}")
        else:
            chunks.append(f" {sign} {body}")
    return "".join(chunks)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>\*\*|[-+*^()]))"
)


def _tokenize(text: str):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise PolySyntaxError(f"unexpected character {text[col - 1]!r}", col)
        kind = m.lastgroup
        val = m.group(kind)
        col = m.start(kind) + 1
        if val == "**":
            val = "^"
        toks.append((kind, val, col))
        pos = m.end()
    toks.append(("end", "", len(text) + 1))
    return toks


class _Parser:
    def __init__(self, text: str, space: VarSpace):
        self.toks = _tokenize(text)
        self.i = 0
        self.space = space

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, val):
        kind, v, col = self.take()
        if v != val:
            raise PolySyntaxError(f"expected {val!r}, got {v or 'end of input'!r}", col)

    def parse(self) -> Poly:
        p = self.expr()
        kind, v, col = self.peek()
        if kind != "end":
            raise PolySyntaxError(f"unexpected {v!r}", col)
        return p

    def expr(self) -> Poly:
        out = Poly(self.space)
        sign = 1.0
        kind, v, col = self.peek()
        if v in "+-" and kind == "op":
            self.take()
            sign = -1.0 if v == "-" else 1.0
        out = out + self.term().scale(sign)
        while True:
            kind, v, col = self.peek()
            if kind == "op" and v in ("+", "-"):
                self.take()
                t = self.term()
                out = out + t if v == "+" else out - t
            else:
                return out

    def term(self) -> Poly:
        out = self.power()
        while self.peek()[1] == "*":
            self.take()
            out = out * self.power()
        return out

    def power(self) -> Poly:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, v, col = self.take()
            if kind != "num" or not re.fullmatch(r"\d+", v):
                raise PolySyntaxError("exponent must be a nonnegative integer", col)
            base = base ** int(v)
        return base

    def atom(self) -> Poly:
        kind, v, col = self.take()
        if kind == "num":
            return Poly.constant(self.space, float(v))
        if kind == "name":
            if v not in self.space.names:
                raise PolySyntaxError(f"unknown variable {v!r}", col)
            return Poly.var(self.space, v)
        if v == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if v == "-":
            return -self.power()
        raise PolySyntaxError(f"unexpected {v or 'end of input'!r}", col)


def parse_poly(text: str, space: VarSpace) -> Poly:
    """Parse ``3*x1^2*h1 - 0.5*x2 + 1``; parentheses and ``**`` are also accepted."""
    return _Parser(text, space).parse()


def parse_rule(text: str, space: VarSpace) -> RewriteRule:
    """Parse ``"h1^2 -> h1"``."""
    if "->" not in text:
        raise PolySyntaxError("rule needs '->'", 1)
    left, right = text.split("->", 1)
    lhs = parse_poly(left, space)
    if len(lhs.terms) != 1 or next(iter(lhs.terms.values())) != 1.0:
        raise PolySyntaxError("rule lhs must be a single monic monomial", 1)
    try:
        rhs = parse_poly(right, space)
    except PolySyntaxError as exc:
        raise PolySyntaxError(str(exc).rsplit(" (column", 1)[0],
                              exc.column + len(left) + 2) from None
    return RewriteRule(next(iter(lhs.terms)), rhs)


def make_relations(space: VarSpace, rules: Iterable[str | RewriteRule]) -> RelationSet:
    parsed = [parse_rule(r, space) if isinstance(r, str) else r for r in rules]
    return RelationSet(space, tuple(parsed))


def idempotent_rules(space: VarSpace, which: Sequence[int] | None = None) -> RelationSet:
    """Rules ``hj^2 -> hj`` (indicator functions) for the given h-indices (0-based)."""
    which = range(space.m) if which is None else which
    rules = []
    for j in which:
        k = space.d + j
        e = [0] * space.n
        e[k] = 2
        rules.append(RewriteRule(tuple(e), Poly.var(space, k)))
    return RelationSet(space, tuple(rules))
