"""SDPA sparse text format (``.dat-s``).

SDPA's primal is ``min c.x  s.t.  sum_i F_i x_i - F_0 >= 0`` with dual
``max <F_0, Y>  s.t. <F_i, Y> = c_i, Y >= 0``.  Our primal maps onto the SDPA
dual with ``Y = X``, ``F_0 = -C``, ``F_i = A_i`` and ``c = b``; the SDPA optimal
value is therefore the negative of ours.
"""
from __future__ import annotations

import numpy as np

from .sdp import SdpProblem


def _num(v: float) -> str:
    return repr(float(v) + 0.0)


def to_sdpa(p: SdpProblem, comment: str = "") -> str:
    lines = []
    for c in comment.splitlines():
        lines.append(f'"{c}')
    lines.append(str(p.n_constraints))
    lines.append(str(len(p.blocks)))
    lines.append(" ".join(str(n) for n in p.blocks))
    lines.append(" ".join(_num(v) for v in p.b))
    mats = [[-C for C in p.C]] + p.A
    for matno, blocks in enumerate(mats):
        for blkno, M in enumerate(blocks, 1):
            n = M.shape[0]
            for i in range(n):
                for j in range(i, n):
                    if M[i, j] != 0.0:
                        lines.append(f"{matno} {blkno} {i + 1} {j + 1} {_num(M[i, j])}")
    return "\n".join(lines) + "\n"


def read_sdpa(text: str) -> SdpProblem:
    rows = [ln for ln in text.splitlines() if ln.strip() and ln[0] not in '"*']
    strip = str.maketrans({c: " " for c in "{},()"})
    m = int(rows[0].split()[0])
    nblocks = int(rows[1].split()[0])
    blocks = [abs(int(v)) for v in rows[2].translate(strip).split()[:nblocks]]
    b = np.array([float(v) for v in rows[3].translate(strip).split()[:m]])
    mats = [[np.zeros((n, n)) for n in blocks] for _ in range(m + 1)]
    for ln in rows[4:]:
        matno, blk, i, j, v = ln.split()[:5]
        M = mats[int(matno)][int(blk) - 1]
        M[int(i) - 1, int(j) - 1] = M[int(j) - 1, int(i) - 1] = float(v)
    return SdpProblem(blocks, [-F for F in mats[0]], mats[1:], b)
