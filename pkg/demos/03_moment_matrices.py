"""
Moment and localizing matrices
==============================

Pseudo-moments are indexed by standard monomials only.  For a finite atomic
measure the moment matrices are PSD and their rank counts the atoms, which is
what the flatness test looks for.
"""
import numpy as np

from measos.moment import (format_matrix, is_flat, localizing_matrix, moment_matrix,
                           moments_from_atoms, numerical_rank, riesz)
from measos.polyalg import VarSpace, idempotent_rules, parse_poly

S = VarSpace(1, 1)
R = idempotent_rules(S)
atoms = [[-0.5, 0.0], [0.0, 1.0], [0.8, 0.0]]
y = moments_from_atoms(S, R, atoms, [0.2, 0.3, 0.5], max_degree=6)

print("L(h1^5) = L(h1) =", riesz(y, parse_poly("h1^5", S)))
for t in (1, 2, 3):
    M = moment_matrix(y, t)
    print(f"t={t}: size {len(M.basis)}, rank {numerical_rank(M.entries)}, "
          f"flat {is_flat(y, t)}")

M1 = moment_matrix(y, 1)
print(" ".join(M1.labels(S)))
print(format_matrix(M1.entries, 6))

# Localizing at the ball generator: PSD because every atom lies inside.
q0 = parse_poly("1 - x1^2 - h1", S)
L = localizing_matrix(y, q0, 2)
print("min eigenvalue of the ball localizer:", np.linalg.eigvalsh(L.entries)[0])
