"""Pseudo-moment sequences, the Riesz functional, moment and localizing matrices.

Pseudo-moments are indexed by standard (normal-form) exponents only, so every
declared relation removes moment variables.  A product ``u * v * q`` of basis
monomials and a weight is reduced to normal form first and then read off
linearly, which makes each matrix an affine pencil ``sum_e y_e * B_e``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .polyalg import (Exponent, Poly, RelationSet, VarSpace, format_monomial, monomial_basis,
                      normal_form)

FLAT_TOL = 1e-6


class DegreeOverflowError(ValueError):
    """A moment beyond the stored degree was requested."""


@dataclass(frozen=True)
class MomentSequence:
    space: VarSpace
    relations: RelationSet
    values: Mapping[Exponent, float]
    max_degree: int

    def __post_init__(self):
        zero = self.space.zero_exponent()
        if abs(self.values.get(zero, float("nan")) - 1.0) > 1e-9:
            raise ValueError("moment sequence must be normalized: y_0 = 1")

    def __getitem__(self, e: Exponent) -> float:
        e = tuple(e)
        if sum(e) > self.max_degree:
            raise DegreeOverflowError(f"moment of degree {sum(e)} > {self.max_degree}")
        return self.values.get(e, 0.0)

    def as_array(self, exponents: Sequence[Exponent]) -> np.ndarray:
        return np.array([self[e] for e in exponents])


def riesz(y: MomentSequence, p: Poly) -> float:
    """``L(p) = sum_e coeff(nf p, e) * y_e``."""
    p = normal_form(p, y.relations)
    if p.degree() > y.max_degree:
        raise DegreeOverflowError(f"deg {p.degree()} exceeds stored degree {y.max_degree}")
    return float(sum(c * y[e] for e, c in p.terms.items()))


def localizing_degree(t: int, q: Poly) -> int:
    return t - math.ceil(q.degree() / 2)


def pencil(space: VarSpace, relations: RelationSet, basis: Sequence[Exponent],
           weight: Poly | None = None) -> dict[Exponent, np.ndarray]:
    """Coefficient matrices ``B_e`` with ``L(nf(u*v*weight)) = sum_e y_e B_e[u, v]``."""
    n = len(basis)
    wterms = weight.terms if weight is not None else {space.zero_exponent(): 1.0}
    out: dict[Exponent, np.ndarray] = {}
    for i, u in enumerate(basis):
        for j in range(i, n):
            v = basis[j]
            uv = tuple(a + b for a, b in zip(u, v))
            for we, wc in wterms.items():
                raw = tuple(a + b for a, b in zip(uv, we))
                for e, c in relations.reduce_monomial(raw).items():
                    mat = out.get(e)
                    if mat is None:
                        mat = out[e] = np.zeros((n, n))
                    mat[i, j] += wc * c
                    if i != j:
                        mat[j, i] += wc * c
    return {e: m for e, m in out.items() if np.any(m)}


@dataclass(frozen=True)
class MomentMatrix:
    basis: tuple[Exponent, ...]
    entries: np.ndarray

    def labels(self, space: VarSpace) -> list[str]:
        return [format_monomial(e, space) for e in self.basis]


@dataclass(frozen=True)
class LocalizingMatrix:
    generator: int | None
    weight: Poly
    basis: tuple[Exponent, ...]
    entries: np.ndarray


def _evaluate_pencil(y: MomentSequence, mats: Mapping[Exponent, np.ndarray], n: int) -> np.ndarray:
    out = np.zeros((n, n))
    for e, B in mats.items():
        out += y[e] * B
    return out


def moment_matrix(y: MomentSequence, t: int) -> MomentMatrix:
    if t < 0:
        raise ValueError("order must be nonnegative")
    if 2 * t > y.max_degree:
        raise DegreeOverflowError(f"order {t} needs moments up to {2 * t}, have {y.max_degree}")
    basis = tuple(monomial_basis(y.space, y.relations, t))
    mats = pencil(y.space, y.relations, basis)
    return MomentMatrix(basis, _evaluate_pencil(y, mats, len(basis)))


def localizing_matrix(y: MomentSequence, q: Poly, t: int, generator: int | None = None
                      ) -> LocalizingMatrix:
    q = normal_form(q, y.relations)
    s = localizing_degree(t, q)
    if s < 0:
        raise DegreeOverflowError(f"order {t} too small for a weight of degree {q.degree()}")
    if 2 * s + q.degree() > y.max_degree:
        raise DegreeOverflowError("localizing matrix exceeds stored moment degree")
    basis = tuple(monomial_basis(y.space, y.relations, s))
    mats = pencil(y.space, y.relations, basis, q)
    return LocalizingMatrix(generator, q, basis, _evaluate_pencil(y, mats, len(basis)))


def numerical_rank(M: np.ndarray, tol: float = FLAT_TOL) -> int:
    """Eigenvalues above ``tol * max(1, lambda_max)``."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    w = np.linalg.eigvalsh((M + M.T) / 2)
    return int(np.sum(w > tol * max(1.0, w[-1])))


def flatness_ranks(y: MomentSequence, t: int, tol: float = FLAT_TOL) -> tuple[int, int]:
    if t < 1:
        raise ValueError("flatness needs t >= 1")
    return (numerical_rank(moment_matrix(y, t).entries, tol),
            numerical_rank(moment_matrix(y, t - 1).entries, tol))


def is_flat(y: MomentSequence, t: int, tol: float = FLAT_TOL) -> bool:
    """rank M_t == rank M_{t-1}."""
    r_t, r_prev = flatness_ranks(y, t, tol)
    return r_t == r_prev


def moments_from_atoms(space: VarSpace, relations: RelationSet, points, weights,
                       max_degree: int) -> MomentSequence:
    """Moments ``y_e = sum_k w_k * point_k^e`` of a finite atomic measure.

    Weights are rescaled to total mass 1.  Points should satisfy the relations.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    vals = {}
    for e in monomial_basis(space, relations, max_degree):
        vals[e] = float(np.sum(w * np.prod(pts ** np.array(e), axis=1)))
    vals[space.zero_exponent()] = 1.0
    return MomentSequence(space, relations, vals, max_degree)


def format_matrix(M: np.ndarray, digits: int = 12) -> str:
    """Plain-text numeric grid, one row per line."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return "\n".join(" ".join(format(v, f".{digits}g") for v in row) for row in M)
