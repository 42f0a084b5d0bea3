"""
Lower bounds by relaxation order
================================

Two problems with a measurable generator.  With h idempotent the hierarchy is
exact at the first order; with h = |x| the bounds creep up towards the true
minimum 0 and never become exact at the orders tried here.
"""
from measos.certify import extract_atoms, gns_operators
from measos.hierarchy import HierarchyOptions, run, solve_order
from measos.polyalg import VarSpace, idempotent_rules, make_relations, parse_poly
from measos.quadmod import make_archimedean

S = VarSpace(1, 1)

Q = make_archimedean(S, idempotent_rules(S), [], 1.0)
f = parse_poly("3*h1 + x1^2 - x1", S)
rep = run(f, Q, 1, 3, progress=print)
print("best bound", rep.best_bound, "stop:", rep.stop_reason)

# h1 = |x1|: the relation h1^2 = x1^2 plus the generator h1 >= 0.
R = make_relations(S, ["h1^2 -> x1^2"])
Q = make_archimedean(S, R, [parse_poly("h1", S)], 1.0)
f = parse_poly("x1^2 + h1 - x1", S)
for t in (1, 2, 3, 4):
    r = solve_order(f, Q, t)
    print(f"t={t}  bound={r.lower_bound:+.6f}  ranks={r.ranks}  L(f)={r.moment_value:+.6f}")

# At t=4 the rank test reports 6/6, yet the spectrum of M_4 decays smoothly
# from 1 down to 1e-8: the cut at 1e-6 falls in a gap by accident.  The
# multiplication operators then fail to commute and extraction says so.
atoms = extract_atoms(gns_operators(r.moments, 4), Q)
print("commutator", atoms.commutator, "reliable", atoms.reliable)

# Orders can also be solved concurrently; the results are identical.
par = run(f, Q, 1, 3, HierarchyOptions(parallel=True))
print([round(r.lower_bound, 9) for r in par.results])
