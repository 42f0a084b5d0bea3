import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from measos.polyalg import (Poly, PolySyntaxError, RewriteRule, SpaceMismatchError, VarSpace,
                            add, evaluate, format_poly, idempotent_rules, make_relations,
                            monomial_basis, mul, no_relations, normal_form, parse_poly, parse_rule)
from strategies import polys

S1 = VarSpace(1)
S11 = VarSpace(1, 1)
S22 = VarSpace(2, 2)


def P(text, space=S11):
    return parse_poly(text, space)


def close(p, q, tol=1e-12):
    return (p - q).max_abs_coeff() <= tol


# -- add / mul -------------------------------------------------------------

def test_add_cancels():
    assert add(P("x1 + 1", S1), P("-x1", S1)) == P("1", S1)


def test_add_zero_identity():
    p = P("3*x1^2*h1 - h1 + 2")
    assert add(p, Poly(S11)) == p


def test_add_merges_like_terms():
    assert add(P("2*x1^2", S1), P("3*x1^2", S1)) == P("5*x1^2", S1)


def test_mul_difference_of_squares():
    assert mul(P("x1 + 1", S1), P("x1 - 1", S1)) == P("x1^2 - 1", S1)


def test_mul_identity():
    p = P("x1*h1 - 0.25")
    assert mul(p, Poly.constant(S11, 1.0)) == p


def test_mul_does_not_reduce():
    h = Poly.var(S11, "h1")
    assert mul(h, h).terms == {(0, 2): 1.0}


def test_mismatched_spaces_rejected():
    with pytest.raises(SpaceMismatchError):
        add(P("x1", S1), P("x1", S11))
    with pytest.raises(SpaceMismatchError):
        mul(P("x1", S1), P("x1", S11))


# -- normal form -----------------------------------------------------------

IDEM = idempotent_rules(S11)


def test_nf_cube_of_idempotent():
    assert normal_form(P("h1^3"), IDEM) == P("h1")


def test_nf_without_rules_is_identity():
    p = P("x1^2*h1")
    assert normal_form(p, no_relations(S11)) == p


def test_nf_kills_h_times_h_minus_one():
    p = mul(P("h1 - 1"), P("h1"))
    assert normal_form(p, IDEM).is_zero()
    for h in (0.0, 1.0):
        assert evaluate(p, [0.7, h]) == 0.0


def test_rule_must_reduce():
    with pytest.raises(ValueError, match="degree-reducing"):
        parse_rule("h1 -> h1^2", S11)
    with pytest.raises(ValueError):
        parse_rule("h1^2 -> h1^2 + x1", S11)


def test_rule_lhs_must_be_pure_h():
    with pytest.raises(ValueError):
        RewriteRule((1, 1), P("h1"))
    with pytest.raises(PolySyntaxError):
        parse_rule("2*h1^2 -> h1", S11)


def test_rule_to_x_squared_is_allowed():
    # same degree, but h is more significant than x in the global order
    R = make_relations(S11, ["h1^2 -> x1^2"])
    assert normal_form(P("h1^3"), R) == P("x1^2*h1")


def test_duplicate_lhs_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        make_relations(S11, ["h1^2 -> h1", "h1^2 -> 1"])


# -- evaluation --------------------------------------------------------------

def test_eval_examples():
    assert evaluate(P("x1^2 + h1"), [2, 1]) == 5
    assert evaluate(P("1"), [0.3, -7]) == 1
    assert evaluate(P("1 - x1^2 - h1^2"), [0.6, 0.8]) == pytest.approx(0, abs=1e-15)


def test_eval_length_mismatch():
    with pytest.raises(ValueError):
        evaluate(P("x1"), [1.0])


def test_eval_vectorized_matches_pointwise():
    p = P("3*x1^2*h1 - x1 + 0.5")
    pts = np.random.default_rng(1).normal(size=(7, 2))
    assert np.allclose(evaluate(p, pts), [evaluate(p, q) for q in pts])


# -- basis -------------------------------------------------------------------

def test_basis_d2_t1():
    assert monomial_basis(VarSpace(2), None, 1) == [(0, 0), (0, 1), (1, 0)]


def test_basis_with_idempotent():
    assert monomial_basis(S11, IDEM, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)]


def test_basis_pure_idempotent():
    S = VarSpace(0, 1)
    assert monomial_basis(S, idempotent_rules(S), 5) == [(0,), (1,)]


@pytest.mark.parametrize("d,m,t", [(1, 0, 4), (2, 0, 3), (1, 1, 3), (2, 2, 2), (3, 1, 2)])
def test_basis_count_without_relations(d, m, t):
    S = VarSpace(d, m)
    assert len(monomial_basis(S, no_relations(S), t)) == math.comb(d + m + t, t)


def test_basis_is_deterministic_and_standard():
    R = make_relations(S22, ["h1^2 -> h1", "h1*h2 -> 0", "h2^2 -> x1^2"])
    b = monomial_basis(S22, R, 3)
    assert b == monomial_basis(S22, R, 3)
    assert all(R.is_standard(e) for e in b)
    assert len(set(b)) == len(b)


# -- text form ----------------------------------------------------------------

def test_parse_accepts_whitespace_and_implicit_exponent():
    assert P(" 3 * x1 ^2*h1 -  h1 ") == Poly(S11, {(2, 1): 3.0, (0, 1): -1.0})
    assert P("x1**2 + 2*(x1 - h1)") == P("x1^2 + 2*x1 - 2*h1")


def test_parse_unknown_variable():
    with pytest.raises(PolySyntaxError) as exc:
        P("x1 + y7")
    assert exc.value.column == 6


def test_parse_trailing_operator():
    with pytest.raises(PolySyntaxError):
        P("x1 +")


@settings(max_examples=200, deadline=None)
@given(polys(S22, max_deg=4))
def test_format_parse_round_trip(p):
    assert parse_poly(format_poly(p), S22) == p


# -- algebraic properties ------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(polys(S22), polys(S22), polys(S22))
def test_ring_axioms(p, q, r):
    assert close(p + q, q + p)
    assert close((p + q) + r, p + (q + r))
    assert close(p * q, q * p)
    assert close((p * q) * r, p * (q * r), 1e-11)
    assert close(p * (q + r), p * q + p * r, 1e-11)


RULES = make_relations(S22, ["h1^2 -> h1", "h2^2 -> x1^2"])


def relation_points(rng, n):
    """Points with h1 in {0,1} and h2 = +-x1, so both rules hold."""
    x = rng.uniform(-1.5, 1.5, size=(n, 2))
    h1 = rng.integers(0, 2, size=n)
    h2 = x[:, 0] * rng.choice([-1.0, 1.0], size=n)
    return np.column_stack([x, h1, h2])


@settings(max_examples=100, deadline=None)
@given(polys(S22, max_deg=5))
def test_nf_idempotent(p):
    n = normal_form(p, RULES)
    assert normal_form(n, RULES).terms == n.terms
    assert all(RULES.is_standard(e) for e in n.terms)


@settings(max_examples=100, deadline=None)
@given(polys(S22, max_deg=5), st.integers(0, 2**32 - 1))
def test_nf_sound_on_relation_points(p, seed):
    pts = relation_points(np.random.default_rng(seed), 8)
    n = normal_form(p, RULES)
    assert np.allclose(evaluate(n, pts), evaluate(p, pts), atol=1e-10, rtol=0)


@settings(max_examples=100, deadline=None)
@given(polys(S22), polys(S22))
def test_nf_multiplicative(p, q):
    lhs = normal_form(p * q, RULES)
    rhs = normal_form(normal_form(p, RULES) * normal_form(q, RULES), RULES)
    assert close(lhs, rhs, 1e-11)
