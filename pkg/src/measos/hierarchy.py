"""Moment/SOS relaxations of ``min f over P(Q)`` and the hierarchy loop.

Each order ``t`` gives one SDP.  Its dual variables are the pseudo-moments
``y_e`` (``y_0 = 1`` substituted out), and the dual slack is the stack of the
moment matrix and localizing matrices, one block per weight ``1, q0, ..., qn``.
The primal variables are Gram matrices ``G_k`` with
``f - lambda = sum_k w_k * m_k^T G_k m_k`` coefficient by coefficient, so the
SOS certificate comes out of the same solve.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import sdp
from .moment import FLAT_TOL, MomentSequence, flatness_ranks, localizing_degree, pencil
from .polyalg import Exponent, Poly, monomial_basis, normal_form
from .quadmod import QuadraticModule


class OrderError(ValueError):
    """Relaxation order too small for the data."""


class StopReason(str, enum.Enum):
    FLATNESS = "FlatnessReached"
    GAP_CLOSED = "GapClosed"
    MAX_ORDER = "MaxOrder"
    SOLVER_FAILURE = "SolverFailure"

    def __str__(self):
        return self.value


@dataclass
class HierarchyOptions:
    sdp: sdp.SolverOptions = field(default_factory=sdp.SolverOptions)
    flat_tol: float = FLAT_TOL
    gap_tol: float = 1e-8
    parallel: bool = False


@dataclass
class Relaxation:
    t: int
    f: Poly
    module: QuadraticModule
    problem: sdp.SdpProblem
    exponents: list[Exponent]          # SDP coordinate i <-> pseudo-moment y_{exponents[i]}
    weights: list[Poly]                # block k multiplier: 1, q0, ..., qn
    bases: list[list[Exponent]]        # block k monomial basis

    @property
    def constant(self) -> float:
        return self.f.coeff(self.f.space.zero_exponent())

    def index(self) -> dict[Exponent, int]:
        return {e: i for i, e in enumerate(self.exponents)}


def min_order(f: Poly, Q: QuadraticModule) -> int:
    deg = max([f.degree()] + [q.degree() for q in Q.all_generators])
    return max(1, math.ceil(deg / 2))


def build_relaxation(f: Poly, Q: QuadraticModule, t: int) -> Relaxation:
    if f.space != Q.space:
        raise ValueError("objective and module over different spaces")
    f = normal_form(f, Q.relations)
    if t < min_order(f, Q):
        raise OrderError(f"order {t} below minimum {min_order(f, Q)} for these degrees")
    space, rel = Q.space, Q.relations
    zero = space.zero_exponent()
    exponents = [e for e in monomial_basis(space, rel, 2 * t) if e != zero]
    index = {e: i for i, e in enumerate(exponents)}
    weights = list(Q.weights())
    bases, C = [], []
    A = [[] for _ in exponents]
    for w in weights:
        basis = monomial_basis(space, rel, localizing_degree(t, w))
        n = len(basis)
        mats = pencil(space, rel, basis, w)
        bases.append(basis)
        C.append(mats.pop(zero, np.zeros((n, n))))
        for i in range(len(exponents)):
            A[i].append(np.zeros((n, n)))
        for e, B in mats.items():
            A[index[e]][-1] = -B
    b = np.array([0.0 - f.coeff(e) for e in exponents])
    problem = sdp.SdpProblem([len(bs) for bs in bases], C, A, b)
    return Relaxation(t, f, Q, problem, exponents, weights, bases)


@dataclass
class RelaxationResult:
    t: int
    lower_bound: float
    moments: MomentSequence | None
    gram: list[np.ndarray]
    status: sdp.Status
    flat: bool
    ranks: tuple[int, int]
    relaxation: Relaxation = field(repr=False)
    solution: sdp.SdpSolution | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == sdp.Status.OPTIMAL

    @property
    def moment_value(self) -> float:
        """``L(f)`` from the moment side; >= lower_bound up to solver tolerance."""
        if not self.optimal:
            return float("nan")
        return self.relaxation.constant - self.solution.dual_obj


def solve_order(f: Poly, Q: QuadraticModule, t: int,
                opts: HierarchyOptions | None = None) -> RelaxationResult:
    opts = opts or HierarchyOptions()
    rel = build_relaxation(f, Q, t)
    sol = sdp.solve(rel.problem, opts.sdp)
    if sol.status != sdp.Status.OPTIMAL:
        return RelaxationResult(t, float("nan"), None, [], sol.status, False, (0, 0), rel, sol)
    values = {Q.space.zero_exponent(): 1.0}
    values.update({e: float(v) for e, v in zip(rel.exponents, sol.y)})
    y = MomentSequence(Q.space, Q.relations, values, 2 * t)
    ranks = flatness_ranks(y, t, opts.flat_tol)
    bound = rel.constant - sol.primal_obj
    return RelaxationResult(t, bound, y, [g.copy() for g in sol.X], sol.status,
                            ranks[0] == ranks[1], ranks, rel, sol)


def progress_line(r: RelaxationResult) -> str:
    return (f"t={r.t} bound={r.lower_bound:.12g} status={r.status} "
            f"flat={str(r.flat).lower()} rank={r.ranks[0]}/{r.ranks[1]}")


@dataclass
class HierarchyReport:
    results: list[RelaxationResult]
    best_bound: float
    stop_reason: StopReason

    @property
    def last_optimal(self) -> RelaxationResult | None:
        good = [r for r in self.results if r.optimal]
        return good[-1] if good else None


def run(f: Poly, Q: QuadraticModule, t_min: int, t_max: int,
        opts: HierarchyOptions | None = None,
        progress: Callable[[str], None] | None = None) -> HierarchyReport:
    """Solve orders ``t_min..t_max``, stopping early on flatness or on two
    consecutive bound changes below ``opts.gap_tol``."""
    opts = opts or HierarchyOptions()
    if t_min > t_max:
        raise ValueError("t_min must not exceed t_max")
    if t_min < min_order(f, Q):
        raise OrderError(f"order {t_min} below minimum {min_order(f, Q)} for these degrees")
    orders = list(range(t_min, t_max + 1))
    if opts.parallel and len(orders) > 1:
        with ThreadPoolExecutor() as pool:
            precomputed = list(pool.map(lambda t: solve_order(f, Q, t, opts), orders))
    else:
        precomputed = None

    results: list[RelaxationResult] = []
    reason = StopReason.MAX_ORDER
    closures = 0
    prev = None
    for i, t in enumerate(orders):
        r = precomputed[i] if precomputed else solve_order(f, Q, t, opts)
        results.append(r)
        if progress:
            progress(progress_line(r))
        if not r.optimal:
            continue
        if r.flat:
            reason = StopReason.FLATNESS
            break
        if prev is not None:
            closures = closures + 1 if abs(r.lower_bound - prev.lower_bound) <= opts.gap_tol else 0
            if closures >= 2:
                reason = StopReason.GAP_CLOSED
                break
        prev = r
    bounds = [r.lower_bound for r in results if r.optimal]
    if not bounds:
        return HierarchyReport(results, float("nan"), StopReason.SOLVER_FAILURE)
    return HierarchyReport(results, max(bounds), reason)
