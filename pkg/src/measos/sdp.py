"""Dense primal-dual interior-point solver for block-diagonal SDPs.

Standard form::

    primal   minimize <C, X>  s.t.  <A_i, X> = b_i,  X >= 0
    dual     maximize b.y     s.t.  Z = C - sum_i y_i A_i >= 0

An infeasible-start path-following method with Nesterov-Todd scaling and a
Mehrotra predictor-corrector step.  Constraint matrices are held in packed
lower-triangular (svec) form, one column range per block, and the Schur
complement ``M_ij = <A_i, W A_j W>`` is assembled block by block and factored
by dense Cholesky.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

log = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITER_LIMIT = "IterLimit"
    NUMERICAL_TROUBLE = "NumericalTrouble"

    def __str__(self):
        return self.value


class SdpInputError(ValueError):
    pass


@dataclass
class SdpProblem:
    """``C`` and each ``A[i]`` are lists of per-block symmetric arrays."""

    blocks: list[int]
    C: list[np.ndarray]
    A: list[list[np.ndarray]]
    b: np.ndarray

    def __post_init__(self):
        self.blocks = [int(n) for n in self.blocks]
        if not self.blocks or min(self.blocks) < 1:
            raise SdpInputError("block sizes must be positive")
        self.C = [np.asarray(c, dtype=float) for c in self.C]
        self.A = [[np.asarray(a, dtype=float) for a in Ai] for Ai in self.A]
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if len(self.A) != len(self.b):
            raise SdpInputError("need one right-hand side per constraint")
        for mats in [self.C] + self.A:
            if len(mats) != len(self.blocks):
                raise SdpInputError("every matrix needs one array per block")
            for M, n in zip(mats, self.blocks):
                if M.shape != (n, n):
                    raise SdpInputError(f"block of shape {M.shape}, expected {(n, n)}")
                if not np.allclose(M, M.T, atol=1e-12, rtol=0):
                    raise SdpInputError("matrices must be symmetric")

    @property
    def n_constraints(self) -> int:
        return len(self.b)


@dataclass
class SolverOptions:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iter: int = 200
    infeas_tol: float = 1e-8
    refine_steps: int = 3
    verbose: bool = False


@dataclass
class SdpSolution:
    X: list[np.ndarray]
    y: np.ndarray
    Z: list[np.ndarray]
    primal_obj: float
    dual_obj: float
    status: Status
    iterations: int
    history: list[tuple[float, float, float, float]] = field(default_factory=list, repr=False)

    @property
    def yvec(self) -> np.ndarray:
        return self.y


# --------------------------------------------------------------------------
# packed symmetric storage
# --------------------------------------------------------------------------

class _Packing:
    def __init__(self, blocks: Sequence[int]):
        self.blocks = list(blocks)
        self.tril = [np.tril_indices(n) for n in blocks]
        self.scale = [np.where(r == c, 1.0, SQRT2) for r, c in self.tril]
        sizes = [n * (n + 1) // 2 for n in blocks]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        self.size = int(self.offsets[-1])

    def slice(self, k: int) -> slice:
        return slice(self.offsets[k], self.offsets[k + 1])

    def svec_block(self, k: int, M: np.ndarray) -> np.ndarray:
        r, c = self.tril[k]
        return M[r, c] * self.scale[k]

    def svec(self, mats: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([self.svec_block(k, M) for k, M in enumerate(mats)])

    def smat(self, v: np.ndarray) -> list[np.ndarray]:
        out = []
        for k, n in enumerate(self.blocks):
            r, c = self.tril[k]
            M = np.zeros((n, n))
            M[r, c] = v[self.slice(k)] / self.scale[k]
            M = M + np.tril(M, -1).T
            out.append(M)
        return out


def _inner(P: Sequence[np.ndarray], Q: Sequence[np.ndarray]) -> float:
    return float(sum(np.vdot(a, b) for a, b in zip(P, Q)))


def _sym(M: np.ndarray) -> np.ndarray:
    return (M + M.T) / 2


def _max_step(L: np.ndarray, D: np.ndarray) -> float:
    """Largest alpha with L L^T + alpha D >= 0 (inf if unbounded)."""
    T = sla.solve_triangular(L, D, lower=True)
    T = sla.solve_triangular(L, T.T, lower=True)
    lam = np.linalg.eigvalsh(_sym(T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def residuals(p: SdpProblem, s: SdpSolution) -> tuple[float, float, float]:
    """(max |<A_i,X> - b_i|, max |Z - (C - sum y_i A_i)|, |<C,X> - b.y|)."""
    AX = np.array([_inner(Ai, s.X) for Ai in p.A]) if p.A else np.zeros(0)
    pinf = float(np.max(np.abs(AX - p.b))) if len(p.b) else 0.0
    dinf = 0.0
    for k in range(len(p.blocks)):
        S = p.C[k] - sum((yi * Ai[k] for yi, Ai in zip(s.y, p.A)), np.zeros_like(p.C[k]))
        dinf = max(dinf, float(np.max(np.abs(s.Z[k] - S))))
    gap = abs(_inner(p.C, s.X) - float(np.dot(p.b, s.y)))
    return pinf, dinf, gap


def _independent_rows(Amat: np.ndarray, b: np.ndarray):
    """Return (kept row indices, None) or (None, Farkas ray) if inconsistent."""
    m = Amat.shape[0]
    if m == 0:
        return np.arange(0), None
    U, sv, _ = np.linalg.svd(Amat, full_matrices=True)
    tol = max(Amat.shape) * np.finfo(float).eps * (sv[0] if len(sv) else 1.0) * 10
    rank = int(np.sum(sv > tol))
    if rank == m:
        return np.arange(m), None
    null = U[:, rank:]
    proj = null.T @ b
    if np.linalg.norm(proj) > 1e-9 * (1 + np.linalg.norm(b)):
        ray = null @ proj
        return None, ray / float(b @ ray)
    _, _, piv = sla.qr(Amat.T, pivoting=True, mode="economic")
    return np.sort(piv[:rank]), None


def _initial_point(p: SdpProblem, A_blocks):
    X, Z = [], []
    for k, n in enumerate(p.blocks):
        normsA = [np.linalg.norm(A_blocks[i][k]) for i in range(len(A_blocks))]
        xi = max(10.0, np.sqrt(n), n * max(
            ((1 + abs(bi)) / (1 + na) for bi, na in zip(p.b, normsA)), default=1.0))
        eta = max(10.0, np.sqrt(n), max(normsA, default=0.0), np.linalg.norm(p.C[k]))
        X.append(xi * np.eye(n))
        Z.append(eta * np.eye(n))
    return X, Z


def solve(p: SdpProblem, opts: SolverOptions | None = None,
          initial: tuple | None = None) -> SdpSolution:
    """Solve ``p``.  ``initial=(X, y, Z)`` overrides the default starting point."""
    opts = opts or SolverOptions()
    pack = _Packing(p.blocks)
    m_full = p.n_constraints
    Amat_full = (np.array([pack.svec(Ai) for Ai in p.A]) if m_full
                 else np.zeros((0, pack.size)))
    keep, ray = _independent_rows(Amat_full, p.b)
    nblocks = len(p.blocks)
    if ray is not None:
        zeros = [np.zeros((n, n)) for n in p.blocks]
        log.info("constraints are linearly dependent and inconsistent")
        return SdpSolution(zeros, ray, zeros, float("nan"), float("nan"), Status.INFEASIBLE, 0)
    Amat = Amat_full[keep]
    b = p.b[keep]
    A_blocks = [p.A[i] for i in keep]
    m = len(b)
    nonzero = [[bool(np.any(A_blocks[i][k])) for i in range(m)] for k in range(nblocks)]
    cvec = pack.svec(p.C)
    n_total = sum(p.blocks)
    bnorm = 1.0 + (np.max(np.abs(b)) if m else 0.0)
    cnorm = 1.0 + np.max(np.abs(cvec))

    if initial is not None:
        X = [np.array(x, dtype=float) for x in initial[0]]
        y = np.asarray(initial[1], dtype=float)[keep]
        Z = [np.array(z, dtype=float) for z in initial[2]]
    else:
        X, Z = _initial_point(p, A_blocks)
        y = np.zeros(m)

    def A_op(mats):
        return Amat @ pack.svec(mats)

    def AT_op(v):
        return pack.smat(Amat.T @ v)

    history = []
    status = Status.ITER_LIMIT
    it = 0
    small_steps = 0
    best = None            # (merit, X, y, Z) of the most accurate iterate so far

    def finish(st, use_best=False):
        Xo, yo, Zo = (best[1], best[2], best[3]) if use_best and best else (X, y, Z)
        yfull = np.zeros(m_full)
        yfull[keep] = yo
        return SdpSolution(Xo, yfull, Zo, _inner(p.C, Xo), float(p.b @ yfull), st, it, history)

    for it in range(opts.max_iter + 1):
        rp = b - A_op(X)
        ATy = AT_op(y)
        Rd = [p.C[k] - Z[k] - ATy[k] for k in range(nblocks)]
        pobj = float(cvec @ pack.svec(X))
        dobj = float(b @ y)
        pinf = float(np.max(np.abs(rp))) if m else 0.0
        dinf = max(float(np.max(np.abs(R))) for R in Rd)
        gap = abs(pobj - dobj)
        history.append((pobj, dobj, pinf, dinf))
        if opts.verbose:
            log.info("it=%d pobj=%.10g dobj=%.10g pinf=%.2e dinf=%.2e", it, pobj, dobj, pinf, dinf)
        if (pinf <= opts.feas_tol * bnorm and dinf <= opts.feas_tol * cnorm
                and gap <= opts.gap_tol * (1 + abs(pobj))):
            return finish(Status.OPTIMAL)
        merit = max(pinf / (opts.feas_tol * bnorm), dinf / (opts.feas_tol * cnorm),
                    gap / (opts.gap_tol * (1 + abs(pobj))))
        if best is None or merit < best[0]:
            best = (merit, X, y, Z)
        elif best[0] < 1e3 and merit > 1e2 * best[0]:
            # close to the tolerances and now losing accuracy: stop with the best iterate
            return finish(Status.NUMERICAL_TROUBLE, use_best=True)
        if it >= 3:
            if dobj > 0:
                ray_res = np.linalg.norm(pack.svec(ATy) + pack.svec(Z))
                if ray_res / dobj <= opts.infeas_tol and pinf > opts.feas_tol * bnorm:
                    return finish(Status.INFEASIBLE)
            if pobj < 0:
                ax = np.linalg.norm(A_op(X)) if m else 0.0
                if ax / -pobj <= opts.infeas_tol and dinf > opts.feas_tol * cnorm:
                    return finish(Status.UNBOUNDED)
        if it == opts.max_iter:
            break

        # Nesterov-Todd scaling: W Z W = X with G^{-1} X G^{-T} = G^T Z G = diag(dvals)
        try:
            LX = [np.linalg.cholesky(Xk) for Xk in X]
            LZ = [np.linalg.cholesky(Zk) for Zk in Z]
        except np.linalg.LinAlgError:
            return finish(Status.NUMERICAL_TROUBLE, use_best=True)
        G, Ginv, W, dvals = [], [], [], []
        for k in range(nblocks):
            U, s, Vt = np.linalg.svd(LZ[k].T @ LX[k])
            Gk = LX[k] @ Vt.T / np.sqrt(s)
            Ginv_k = (np.sqrt(s)[:, None] * Vt) @ sla.solve_triangular(
                LX[k], np.eye(p.blocks[k]), lower=True)
            G.append(Gk)
            Ginv.append(Ginv_k)
            W.append(Gk @ Gk.T)
            dvals.append(s)

        M = np.zeros((m, m))
        for k in range(nblocks):
            cols = [j for j in range(m) if nonzero[k][j]]
            if not cols:
                continue
            sl = pack.slice(k)
            S = np.empty((sl.stop - sl.start, len(cols)))
            for c, j in enumerate(cols):
                S[:, c] = pack.svec_block(k, W[k] @ A_blocks[j][k] @ W[k])
            M[:, cols] += Amat[:, sl] @ S
        M = _sym(M)
        try:
            chol = sla.cho_factor(M)
        except (np.linalg.LinAlgError, ValueError):
            try:
                chol = sla.cho_factor(M + 1e-13 * np.trace(M) / max(m, 1) * np.eye(m))
            except (np.linalg.LinAlgError, ValueError):
                return finish(Status.NUMERICAL_TROUBLE)

        WRdW = [W[k] @ Rd[k] @ W[k] for k in range(nblocks)]
        A_WRdW = A_op(WRdW)

        def schur_apply(v):
            ATv = AT_op(v)
            return A_op([W[k] @ ATv[k] @ W[k] for k in range(nblocks)])

        def direction(Rc):
            rhs = rp - A_op(Rc) + A_WRdW
            dy = sla.cho_solve(chol, rhs) if m else np.zeros(0)
            # refinement against the unassembled operator; M is ill-conditioned near mu -> 0
            for _ in range(opts.refine_steps if m else 0):
                r = rhs - schur_apply(dy)
                if np.max(np.abs(r)) <= 1e-15 * (1 + np.max(np.abs(rhs))):
                    break
                dy = dy + sla.cho_solve(chol, r)
            ATdy = AT_op(dy)
            dZ = [_sym(Rd[k] - ATdy[k]) for k in range(nblocks)]
            dX = [_sym(Rc[k] - W[k] @ dZ[k] @ W[k]) for k in range(nblocks)]
            if m:
                # forming dX cancels large terms; restore A(dX) = rp with a small
                # correction that keeps dX + W dZ W unchanged
                u = sla.cho_solve(chol, rp - A_op(dX))
                ATu = AT_op(u)
                dX = [_sym(dX[k] + W[k] @ ATu[k] @ W[k]) for k in range(nblocks)]
                dZ = [dZ[k] - ATu[k] for k in range(nblocks)]
                dy = dy + u
            return dX, dy, dZ

        def steps(dX, dZ, frac):
            ap = min(_max_step(LX[k], dX[k]) for k in range(nblocks))
            ad = min(_max_step(LZ[k], dZ[k]) for k in range(nblocks))
            return min(1.0, frac * ap), min(1.0, frac * ad)

        mu = _inner(X, Z) / n_total
        dXa, dya, dZa = direction([-Xk for Xk in X])
        ap_a, ad_a = steps(dXa, dZa, 1.0)
        mu_aff = _inner([X[k] + ap_a * dXa[k] for k in range(nblocks)],
                        [Z[k] + ad_a * dZa[k] for k in range(nblocks)]) / n_total
        sigma = min(1.0, max(0.0, mu_aff / mu) ** 3)

        Rc = []
        for k in range(nblocks):
            dXs = Ginv[k] @ dXa[k] @ Ginv[k].T
            dZs = G[k].T @ dZa[k] @ G[k]
            dk = dvals[k]
            R = sigma * mu * np.eye(p.blocks[k]) - np.diag(dk ** 2) - _sym(dXs @ dZs)
            S = 2.0 * R / (dk[:, None] + dk[None, :])
            Rc.append(G[k] @ S @ G[k].T)
        dX, dy, dZ = direction(Rc)
        frac = 0.9 + 0.09 * min(ap_a, ad_a)
        ap, ad = steps(dX, dZ, frac)
        X = [_sym(X[k] + ap * dX[k]) for k in range(nblocks)]
        Z = [_sym(Z[k] + ad * dZ[k]) for k in range(nblocks)]
        y = y + ad * dy
        small_steps = small_steps + 1 if max(ap, ad) < 1e-8 else 0
        if small_steps >= 5:
            return finish(Status.NUMERICAL_TROUBLE, use_best=True)

    return finish(status)
