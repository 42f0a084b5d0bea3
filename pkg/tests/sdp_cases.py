"""SDPs with a known strictly feasible primal-dual pair."""
from __future__ import annotations

import numpy as np

from measos.sdp import SdpProblem


def _sym(M):
    return (M + M.T) / 2


def random_pd(rng, n, floor=0.1):
    R = rng.standard_normal((n, n))
    return R @ R.T / n + floor * np.eye(n)


def constructed(rng, blocks, m):
    """Return (problem, X0, y0, Z0) with b = A(X0) and C = Z0 + A^T y0.

    X0 and Z0 are positive definite, so both sides are strictly feasible and
    the optimum exists; it is generally not (X0, y0, Z0) itself.
    """
    X0 = [random_pd(rng, n) for n in blocks]
    Z0 = [random_pd(rng, n) for n in blocks]
    A = [[_sym(rng.standard_normal((n, n))) for n in blocks] for _ in range(m)]
    y0 = rng.standard_normal(m)
    b = np.array([sum(np.vdot(a, x) for a, x in zip(Ai, X0)) for Ai in A])
    C = [Z0[k] + sum(y0[i] * A[i][k] for i in range(m)) for k in range(len(blocks))]
    return SdpProblem(blocks, C, A, b), X0, y0, Z0


def constructed_optimal(rng, blocks, ranks, m):
    """Problem whose optimal pair (X*, y*, Z*) is known exactly.

    X* and Z* share eigenvectors with complementary supports, so <X*, Z*> = 0.
    """
    Xs, Zs = [], []
    for n, r in zip(blocks, ranks):
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        lx = np.concatenate([rng.uniform(0.5, 2, r), np.zeros(n - r)])
        lz = np.concatenate([np.zeros(r), rng.uniform(0.5, 2, n - r)])
        Xs.append((Q * lx) @ Q.T)
        Zs.append((Q * lz) @ Q.T)
    A = [[_sym(rng.standard_normal((n, n))) for n in blocks] for _ in range(m)]
    ys = rng.standard_normal(m)
    b = np.array([sum(np.vdot(a, x) for a, x in zip(Ai, Xs)) for Ai in A])
    C = [Zs[k] + sum(ys[i] * A[i][k] for i in range(m)) for k in range(len(blocks))]
    obj = float(b @ ys)
    return SdpProblem(blocks, C, A, b), Xs, ys, Zs, obj
