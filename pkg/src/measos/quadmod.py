"""Finitely generated archimedean quadratic modules and their positivity sets."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .polyalg import Poly, RelationSet, VarSpace, evaluate, normal_form, no_relations

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class QuadraticModule:
    """``Sigma^2 + q0 Sigma^2 + q1 Sigma^2 + ... + qn Sigma^2``.

    ``ball`` is the archimedean witness ``q0 = 1 - eps * (sum of all squared
    variables)`` reduced modulo ``relations``; ``generators`` are q1..qn.
    """

    space: VarSpace
    relations: RelationSet
    generators: tuple[Poly, ...]
    ball: Poly
    radius_sq: float

    @property
    def epsilon(self) -> float:
        return 1.0 / self.radius_sq

    @property
    def all_generators(self) -> tuple[Poly, ...]:
        """q0, q1, ..., qn."""
        return (self.ball,) + self.generators

    def weights(self) -> tuple[Poly, ...]:
        """Multipliers of the SOS blocks: the unit 1, then q0..qn."""
        return (Poly.constant(self.space, 1.0),) + self.all_generators

    def max_degree(self) -> int:
        return max(q.degree() for q in self.all_generators)

    def contains_point(self, point, tol: float = FEAS_TOL) -> bool:
        return all(evaluate(q, point) >= -tol for q in self.all_generators)


def make_archimedean(space: VarSpace, relations: RelationSet | None,
                     generators: Sequence[Poly], epsilon: float) -> QuadraticModule:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    relations = relations if relations is not None else no_relations(space)
    if relations.space != space:
        raise ValueError("relations over a different variable space")
    gens = []
    for g in generators:
        if g.space != space:
            raise ValueError("generator over a different variable space")
        gens.append(normal_form(g, relations))
    terms = {space.zero_exponent(): 1.0}
    for k in range(space.n):
        e = tuple(2 * a for a in space.unit(k))
        terms[e] = -epsilon
    ball = normal_form(Poly(space, terms), relations)
    return QuadraticModule(space, relations, tuple(gens), ball, 1.0 / epsilon)


# Evaluators receive an array of x-points of shape (N, d) and return shape (N,).
Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MeasurableEvaluator:
    """Concrete realizations of h1..hm, used only by sampling oracles."""

    funcs: tuple[Evaluator, ...] = ()

    def lift(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Graph map ``x -> (x, h1(x), ..., hm(x))``.

        Returns the lifted points and a mask of rows where every evaluator
        produced a finite value.
        """
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        cols = [xs]
        ok = np.ones(len(xs), dtype=bool)
        for fn in self.funcs:
            try:
                vals = np.asarray(fn(xs), dtype=float).reshape(len(xs))
            except Exception:  # noqa: BLE001 - fall back to pointwise calls
                vals = np.empty(len(xs))
                for i, x in enumerate(xs):
                    try:
                        vals[i] = float(fn(x[None, :])[0])
                    except Exception:  # noqa: BLE001
                        vals[i] = np.nan
            ok &= np.isfinite(vals)
            cols.append(vals[:, None])
        return np.hstack(cols), ok


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with spacing ``step`` over the box ``[-half_width, half_width]^d``.

    ``half_width=None`` uses the ball radius of the module being sampled.
    """

    step: float
    half_width: float | None = None

    def axis(self, radius: float) -> np.ndarray:
        hw = self.half_width if self.half_width is not None else radius
        if hw < radius - 1e-12:
            raise ValueError("grid does not cover the archimedean ball")
        k = int(np.floor(hw / self.step + 1e-9))
        return np.arange(-k, k + 1) * self.step


@dataclass
class FeasibleSample:
    points: np.ndarray
    skipped: int = 0
    space: VarSpace | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.points)


def sample_positivity_set(Q: QuadraticModule, ev: MeasurableEvaluator | None, grid: GridSpec,
                          tol: float = FEAS_TOL, chunk: int = 1_000_000) -> FeasibleSample:
    """Grid sample of P(Q) lifted through the graph map."""
    ev = ev or MeasurableEvaluator()
    if len(ev.funcs) != Q.space.m:
        raise ValueError(f"need {Q.space.m} evaluators, got {len(ev.funcs)}")
    if Q.space.d == 0:
        raise ValueError("sampling needs at least one coordinate variable")
    radius = float(np.sqrt(Q.radius_sq))
    ax = grid.axis(radius)
    d = Q.space.d
    n_total = len(ax) ** d
    kept = []
    skipped = 0
    for start in range(0, n_total, chunk):
        idx = np.arange(start, min(start + chunk, n_total))
        digits = np.stack(np.unravel_index(idx, (len(ax),) * d), axis=-1)
        xs = ax[digits]
        xs = xs[np.sum(xs ** 2, axis=1) <= Q.radius_sq + tol]
        if not len(xs):
            continue
        pts, ok = ev.lift(xs)
        skipped += int((~ok).sum())
        pts = pts[ok]
        good = np.ones(len(pts), dtype=bool)
        for q in Q.all_generators:
            good &= np.atleast_1d(evaluate(q, pts)) >= -tol
        kept.append(pts[good])
    if skipped:
        log.warning("evaluator failed at %d grid points; skipped", skipped)
    points = np.vstack(kept) if kept else np.empty((0, Q.space.n))
    return FeasibleSample(points, skipped, Q.space)


def min_on_sample(f: Poly, S: FeasibleSample) -> float:
    if len(S) == 0:
        raise ValueError("empty sample")
    return float(np.min(np.atleast_1d(evaluate(f, S.points))))


def argmin_on_sample(f: Poly, S: FeasibleSample) -> np.ndarray:
    if len(S) == 0:
        raise ValueError("empty sample")
    return S.points[int(np.argmin(np.atleast_1d(evaluate(f, S.points))))]
