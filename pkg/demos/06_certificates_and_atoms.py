"""
Certificates and minimizers
===========================

The dual Gram matrices of an order-t relaxation factor into a weighted sum of
squares identity f - lambda = sigma_0 + q0*sigma_1 + ...; the moment side,
once flat, yields commuting multiplication operators whose joint spectrum is
the set of minimizers.
"""
import numpy as np

from measos.certify import (extract_atoms, extract_certificate, format_certificate,
                            gns_operators, reconstruction_error, verify_certificate)
from measos.hierarchy import solve_order
from measos.polyalg import VarSpace, parse_poly
from measos.quadmod import make_archimedean

S = VarSpace(2)
Q = make_archimedean(S, None, [], 1.0)
f = parse_poly("(x1^2 - 0.25)^2 + (x2^2 - 0.25)^2", S)
r = solve_order(f, Q, 3)
print("bound", r.lower_bound, "ranks", r.ranks, "flat", r.flat)

cert = extract_certificate(r)
print(format_certificate(cert, digits=6))
print("independent check:", verify_certificate(f, cert, Q))

ops = gns_operators(r.moments, 3)
print("rank", ops.rank, "commutator", ops.max_commutator(),
      "self-adjointness", ops.self_adjointness_defect())
atoms = extract_atoms(ops, Q)
for p, w in zip(atoms.points, atoms.weights):
    print(np.round(p, 6), round(float(w), 6))
print("moment mismatch up to degree 4:", reconstruction_error(atoms, r.moments, 4))
