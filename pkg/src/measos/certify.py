"""Weighted SOS certificates and finite GNS multiplication operators.

Certificates are written ``f - lambda = sum_k w_k * sum_j g_kj^2 + residual``
with weights ``w_0 = 1, w_1 = q0 (ball), w_2.. = q1..qn``.

For the operator side, the truncated GNS space is spanned by the standard
monomials of degree <= t-1 with inner product ``<u, v> = L(u v)``, i.e. the
Gram matrix ``M_{t-1}``.  Multiplication by a variable ``v`` is compressed to
this space through ``S_v[u, w] = L(v u w)``; in an orthonormal frame of the
range of ``M_{t-1}`` the compression is a symmetric matrix, and under
flatness these matrices commute and their joint spectrum is the atom set.
"""
from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, field

import numpy as np

from .hierarchy import RelaxationResult
from .moment import (FLAT_TOL, MomentSequence, moment_matrix, moments_from_atoms,
                     numerical_rank, pencil)
from .polyalg import (Exponent, Poly, PolySyntaxError, VarSpace, format_poly, monomial_basis,
                      normal_form, parse_poly)
from .quadmod import QuadraticModule

log = logging.getLogger(__name__)

CLIP_TOL = 1e-7


class CertificateQualityError(ValueError):
    """A Gram block is too indefinite to factor."""


class DegenerateFunctionalError(ValueError):
    """The truncated inner product vanishes identically."""


class ExtractionError(ValueError):
    """Atom weights could not be recovered."""


@dataclass
class Certificate:
    lam: float
    squares: list[list[Poly]]        # squares[k] are the g_kj for weight k
    residual: Poly
    residual_norm: float

    def sigma(self, k: int) -> Poly:
        space = self.residual.space
        out = Poly(space)
        for g in self.squares[k]:
            out = out + g * g
        return out

    def absorbed(self) -> Certificate:
        """Same identity with ``lambda >= 0`` moved into the unit-weight SOS block,
        i.e. a membership certificate for ``f`` itself."""
        if self.lam < 0:
            raise ValueError("lambda is negative; f itself is not certified")
        space = self.residual.space
        squares = [list(s) for s in self.squares]
        if self.lam > 0:
            squares[0].append(Poly.constant(space, np.sqrt(self.lam)))
        return Certificate(0.0, squares, self.residual, self.residual_norm)


def _certificate_residual(f: Poly, lam: float, squares, Q: QuadraticModule) -> Poly:
    rest = f - lam
    for w, gs in zip(Q.weights(), squares):
        for g in gs:
            rest = rest - w * (g * g)
    return normal_form(rest, Q.relations)


def verify_certificate(f: Poly, cert: Certificate, Q: QuadraticModule) -> float:
    """Max coefficient of ``nf(f - lambda - sum_k w_k sum_j g_kj^2)``."""
    if len(cert.squares) > len(Q.weights()):
        raise ValueError("certificate has more SOS blocks than the module has weights")
    return _certificate_residual(f, cert.lam, cert.squares, Q).max_abs_coeff()


def extract_certificate(result: RelaxationResult, f: Poly | None = None,
                        Q: QuadraticModule | None = None) -> Certificate:
    if not result.optimal:
        raise ValueError(f"relaxation status {result.status}; no Gram matrices")
    rel = result.relaxation
    f = rel.f if f is None else normal_form(f, rel.module.relations)
    Q = rel.module if Q is None else Q
    space = Q.space
    squares = []
    for k, (G, basis) in enumerate(zip(result.gram, rel.bases)):
        w, U = np.linalg.eigh((G + G.T) / 2)
        if w.size and w[0] < -CLIP_TOL:
            raise CertificateQualityError(f"Gram block {k} has eigenvalue {w[0]:.3g}")
        gs = []
        for lam_j, v in zip(w, U.T):
            if lam_j <= 0:
                continue
            s = np.sqrt(lam_j)
            gs.append(Poly(space, {e: s * c for e, c in zip(basis, v)}))
        squares.append(gs)
    residual = _certificate_residual(f, result.lower_bound, squares, Q)
    return Certificate(result.lower_bound, squares, residual, residual.max_abs_coeff())


def format_certificate(cert: Certificate, digits: int = 17) -> str:
    lines = [f"lambda {cert.lam:.{digits}g}"]
    for k, gs in enumerate(cert.squares):
        for j, g in enumerate(gs):
            lines.append(f"sigma[{k}] square {j + 1}: {format_poly(g, digits)}")
    lines.append(f"residual_norm {cert.residual_norm:.{digits}g}")
    return "\n".join(lines) + "\n"


_SQ_LINE = re.compile(r"sigma\[(\d+)\]\s+square\s+(\d+)\s*:(.*)$")


def parse_certificate(text: str, space: VarSpace) -> Certificate:
    """Inverse of :func:`format_certificate`.  Errors carry line numbers."""
    lam = None
    stored_norm = float("nan")
    squares: dict[int, list[Poly]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("lambda"):
            lam = float(line.split(None, 1)[1])
        elif line.startswith("residual_norm"):
            stored_norm = float(line.split(None, 1)[1])
        else:
            m = _SQ_LINE.match(line)
            if not m:
                raise PolySyntaxError(f"line {lineno}: unrecognized certificate line", 1)
            try:
                g = parse_poly(m.group(3), space)
            except PolySyntaxError as exc:
                raise PolySyntaxError(f"line {lineno}: {exc}", exc.column) from None
            squares.setdefault(int(m.group(1)), []).append(g)
    if lam is None:
        raise PolySyntaxError("certificate lacks a 'lambda' line", 1)
    n = max(squares, default=-1) + 1
    return Certificate(lam, [squares.get(k, []) for k in range(n)], Poly(space), stored_norm)


# ---------------------------------------------------------------------------
# GNS truncation and atoms
# ---------------------------------------------------------------------------

@dataclass
class GnsOperators:
    """Multiplication operators on the degree-(t-1) truncation.

    ``matrices[v]`` acts on coefficient vectors in ``basis`` (``G^+ S_v``);
    ``reduced[v]`` is the same operator in an orthonormal frame of the range
    of ``gram`` (symmetric by construction).  ``unit`` holds the coordinates
    of the constant function 1 in that frame.
    """

    space: VarSpace
    basis: list[Exponent]
    gram: np.ndarray
    matrices: list[np.ndarray]
    reduced: list[np.ndarray]
    frame: np.ndarray
    unit: np.ndarray
    moments: MomentSequence = field(repr=False)
    t: int = 1

    @property
    def rank(self) -> int:
        return self.frame.shape[1]

    def self_adjointness_defect(self) -> float:
        """max_v ||G X_v - (G X_v)^T||_max."""
        out = 0.0
        for X in self.matrices:
            GX = self.gram @ X
            out = max(out, float(np.max(np.abs(GX - GX.T), initial=0.0)))
        return out

    def commutator_norms(self) -> dict[tuple[int, int], float]:
        out = {}
        for i, j in itertools.combinations(range(len(self.reduced)), 2):
            A, B = self.reduced[i], self.reduced[j]
            out[(i, j)] = float(np.linalg.norm(A @ B - B @ A, 2)) if A.size else 0.0
        return out

    def max_commutator(self) -> float:
        return max(self.commutator_norms().values(), default=0.0)


def gns_operators(y: MomentSequence, t: int, tol: float = FLAT_TOL) -> GnsOperators:
    if t < 1:
        raise ValueError("GNS truncation needs t >= 1")
    if 2 * t - 1 > y.max_degree:
        raise ValueError(f"need moments up to degree {2 * t - 1}")
    space = y.space
    basis = monomial_basis(space, y.relations, t - 1)
    G = moment_matrix(y, t - 1).entries
    r = numerical_rank(G, tol)
    if r == 0:
        raise DegenerateFunctionalError("truncated Gram matrix is numerically zero")
    w, U = np.linalg.eigh(G)
    Ur, wr = U[:, -r:], w[-r:]
    frame = Ur / np.sqrt(wr)
    pinv = (Ur / wr) @ Ur.T
    e1 = np.zeros(len(basis))
    e1[basis.index(space.zero_exponent())] = 1.0
    unit = frame.T @ G @ e1
    mats, red = [], []
    for k in range(space.n):
        S = np.zeros((len(basis), len(basis)))
        for e, B in pencil(space, y.relations, basis, Poly.var(space, k)).items():
            S += y[e] * B
        mats.append(pinv @ S)
        red.append(frame.T @ S @ frame)
    return GnsOperators(space, basis, G, mats, red, frame, unit, y, t)


@dataclass
class AtomSet:
    points: np.ndarray               # (k, d + m)
    weights: np.ndarray
    reliable: bool = True
    max_violation: float = 0.0
    commutator: float = 0.0

    def __len__(self):
        return len(self.weights)

    def moments(self, space: VarSpace, relations, max_degree: int) -> MomentSequence:
        return moments_from_atoms(space, relations, self.points, self.weights, max_degree)


def extract_atoms(ops: GnsOperators, Q: QuadraticModule | None = None, seed: int = 0,
                  comm_tol: float = 1e-5, feas_tol: float = 1e-5) -> AtomSet:
    """Joint eigen-decomposition of the reduced operators and moment matching."""
    space = ops.space
    comm = ops.max_commutator()
    reliable = comm <= comm_tol
    if not reliable:
        log.warning("multiplication operators do not commute (%.3g); atoms unreliable", comm)
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal(space.n)
    coef /= np.linalg.norm(coef)
    T = sum(c * X for c, X in zip(coef, ops.reduced))
    _, V = np.linalg.eigh(T)
    points = np.array([[v @ X @ v for X in ops.reduced] for v in V.T])
    # moment matching on the truncation basis: sum_k w_k atom_k^a = y_a
    vander = np.array([[np.prod(p ** np.array(a)) for p in points] for a in ops.basis])
    rhs = np.array([ops.moments[a] for a in ops.basis])
    weights, _, rank, _ = np.linalg.lstsq(vander, rhs, rcond=None)
    if rank < len(points):
        raise ExtractionError("moment-matching system is singular")
    if np.any(weights <= 0) or abs(weights.sum() - 1) > 1e-6:
        reliable = False
    viol = 0.0
    if Q is not None:
        for p in points:
            for q in Q.all_generators:
                viol = max(viol, -q(p))
        if viol > feas_tol:
            reliable = False
    return AtomSet(points, weights, reliable, viol, comm)


def reconstruction_error(atoms: AtomSet, y: MomentSequence, degree: int) -> float:
    """Max |moment of atoms - y| over standard monomials of degree <= ``degree``."""
    z = atoms.moments(y.space, y.relations, degree)
    return max(abs(z[e] - y[e]) for e in monomial_basis(y.space, y.relations, degree))
