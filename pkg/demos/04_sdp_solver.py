"""
The interior-point solver
=========================

A small block-diagonal SDP built from a known strictly feasible pair, solved,
checked with the residual function, and written out in SDPA sparse format for
cross-checking with another solver.
"""
import numpy as np

from measos.sdp import SdpProblem, residuals, solve
from measos.sdpa import to_sdpa

rng = np.random.default_rng(0)
blocks, m = [4, 2], 3
X0 = [np.eye(n) for n in blocks]
Z0 = [np.eye(n) * 0.5 for n in blocks]
A = [[(lambda R: R + R.T)(rng.standard_normal((n, n))) for n in blocks] for _ in range(m)]
y0 = rng.standard_normal(m)
b = [sum(np.vdot(a, x) for a, x in zip(Ai, X0)) for Ai in A]
C = [Z0[k] + sum(y0[i] * A[i][k] for i in range(m)) for k in range(len(blocks))]
p = SdpProblem(blocks, C, A, b)

s = solve(p)
print(s.status, "after", s.iterations, "iterations")
print("primal", s.primal_obj, "dual", s.dual_obj)
print("residuals (primal, dual, gap):", residuals(p, s))

# Convergence trace: primal and dual objective per iteration.
for it, (pobj, dobj, pinf, dinf) in enumerate(s.history):
    print(f"{it:3d}  {pobj:+.8f}  {dobj:+.8f}  {pinf:.1e}  {dinf:.1e}")

print(to_sdpa(p, comment="demo problem")[:300])
