"""
Polynomials with measurable generators
======================================

Variables come in two kinds: coordinates x1..xd and formal symbols h1..hm
standing for measurable functions of x.  Whatever is known about the h's
algebraically goes in as rewrite rules.
"""
from measos.polyalg import (VarSpace, evaluate, format_monomial, format_poly, make_relations,
                            monomial_basis, normal_form, parse_poly)

# One coordinate and one indicator-like generator: h1^2 = h1.
S = VarSpace(1, 1)
idem = make_relations(S, ["h1^2 -> h1"])

p = parse_poly("(h1 - 1)*h1 + x1*h1^3", S)
print("p       =", format_poly(p))
print("nf(p)   =", format_poly(normal_form(p, idem)))

# Rewriting is sound wherever the relation holds, i.e. for h1 in {0, 1}.
for pt in ([0.3, 0.0], [0.3, 1.0]):
    print(pt, evaluate(p, pt), evaluate(normal_form(p, idem), pt))

# The relation shrinks the monomial basis: no power of h1 above the first survives.
print("basis, degree 2:", [format_monomial(e, S) for e in monomial_basis(S, idem, 2)])

# h1 = |x1| satisfies h1^2 = x1^2.  That rule keeps the degree, but h-monomials
# rank above x-monomials of the same degree, so it still terminates.
absrel = make_relations(S, ["h1^2 -> x1^2"])
q = parse_poly("h1^3 - x1*h1^2", S)
print("nf(h1^3 - x1*h1^2) under h1^2 -> x1^2:", format_poly(normal_form(q, absrel)))
