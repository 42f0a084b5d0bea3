import numpy as np
import pytest

from measos.certify import (Certificate, DegenerateFunctionalError, extract_atoms,
                            extract_certificate, format_certificate, gns_operators,
                            parse_certificate, reconstruction_error, verify_certificate)
from measos.hierarchy import solve_order
from measos.moment import MomentSequence, moments_from_atoms
from measos.polyalg import Poly, PolySyntaxError, VarSpace, idempotent_rules, make_relations, \
    no_relations, parse_poly
from measos.problem import parse_problem
from measos.quadmod import make_archimedean
from corpus import BY_NAME, CORPUS

S1 = VarSpace(1)
S11 = VarSpace(1, 1)
BALL1 = make_archimedean(S1, None, [], 1.0)
IDEM = idempotent_rules(S11)


def cert_at(f_text, t, Q=BALL1):
    f = parse_poly(f_text, Q.space)
    r = solve_order(f, Q, t)
    assert r.optimal
    return f, extract_certificate(r)


# -- certificates ----------------------------------------------------------------

def test_square_objective():
    f, c = cert_at("x1^2", 1)
    assert c.lam == pytest.approx(0, abs=1e-7)
    assert (c.sigma(0) - f).max_abs_coeff() <= 1e-6
    assert c.sigma(1).max_abs_coeff() <= 1e-6
    assert c.residual_norm <= 1e-8


def test_ball_objective():
    f, c = cert_at("1 - x1^2", 1)
    assert c.lam == pytest.approx(0, abs=1e-7)
    assert c.sigma(1).coeff((0,)) == pytest.approx(1, abs=1e-6)
    assert c.residual_norm <= 1e-8


def test_affine_objective():
    f, c = cert_at("2 + x1", 1)
    assert c.lam == pytest.approx(1, abs=1e-7)
    assert c.residual_norm <= 1e-8
    assert verify_certificate(f, c, BALL1) == pytest.approx(c.residual_norm, abs=1e-10)


def test_hand_certificate_is_exact():
    f = parse_poly("1 - x1^2", S1)
    one = Poly.constant(S1, 1.0)
    assert verify_certificate(f, Certificate(0.0, [[], [one]], Poly(S1), 0.0), BALL1) == 0


def test_generator_certificate_with_relation():
    h = parse_poly("h1", S11)
    Q = make_archimedean(S11, IDEM, [h], 1.0)
    one = Poly.constant(S11, 1.0)
    assert verify_certificate(h, Certificate(0.0, [[], [], [one]], Poly(S11), 0.0), Q) == 0


def test_corrupted_coefficient():
    f, c = cert_at("2 + x1", 1)
    k, j = max(((k, j) for k, gs in enumerate(c.squares) for j in range(len(gs))),
               key=lambda kj: c.squares[kj[0]][kj[1]].max_abs_coeff())
    g = c.squares[k][j]
    e = max(g.terms, key=lambda e: abs(g.terms[e]))
    bad = [list(gs) for gs in c.squares]
    bad[k][j] = g + Poly.monomial(S1, e, 1e-3)
    norm = verify_certificate(f, Certificate(c.lam, bad, Poly(S1), 0.0), BALL1)
    assert 1e-4 < norm < 1e-2


def test_too_many_blocks_rejected():
    f = parse_poly("x1", S1)
    with pytest.raises(ValueError):
        verify_certificate(f, Certificate(0.0, [[], [], []], Poly(S1), 0.0), BALL1)


@pytest.mark.parametrize("inst", CORPUS, ids=lambda i: i.name)
def test_round_trip(inst):
    r = solve_order(inst.f, inst.module, max(2, inst.t_flat))
    c = extract_certificate(r)
    assert verify_certificate(inst.f, c, inst.module) == pytest.approx(c.residual_norm, abs=1e-10)
    back = parse_certificate(format_certificate(c), inst.space)
    assert back.lam == c.lam
    assert verify_certificate(inst.f, back, inst.module) == pytest.approx(c.residual_norm,
                                                                          abs=1e-10)


def test_absorbed_certifies_f_itself():
    f, c = cert_at("2 + x1", 1)
    a = c.absorbed()
    assert a.lam == 0.0
    assert verify_certificate(f, a, BALL1) <= 1e-8


def test_parse_certificate_errors():
    with pytest.raises(PolySyntaxError, match="line 2"):
        parse_certificate("lambda 0\nsigma[0] square 1: x1 + y2\n", S1)
    with pytest.raises(PolySyntaxError):
        parse_certificate("sigma[0] square 1: x1\n", S1)
    with pytest.raises(PolySyntaxError, match="line 2"):
        parse_certificate("lambda 0\ngarbage\n", S1)


# -- GNS operators ------------------------------------------------------------------

def test_gns_point_mass():
    a = 0.3
    y = MomentSequence(S1, no_relations(S1), {(k,): a ** k for k in range(3)}, 2)
    ops = gns_operators(y, 1)
    assert ops.rank == 1
    np.testing.assert_allclose(ops.reduced[0], [[a]])
    atoms = extract_atoms(ops)
    np.testing.assert_allclose(atoms.points, [[a]])
    np.testing.assert_allclose(atoms.weights, [1.0])


def test_gns_two_atoms():
    y = moments_from_atoms(S1, no_relations(S1), [[-1.0], [1.0]], [0.5, 0.5], 4)
    ops = gns_operators(y, 2)
    assert ops.basis == [(0,), (1,)]
    np.testing.assert_allclose(ops.matrices[0], [[0, 1], [1, 0]], atol=1e-12)
    np.testing.assert_allclose(np.linalg.eigvalsh(ops.reduced[0]), [-1, 1], atol=1e-12)
    atoms = extract_atoms(ops, BALL1)
    order = np.argsort(atoms.points[:, 0])
    np.testing.assert_allclose(atoms.points[order, 0], [-1, 1], atol=1e-10)
    np.testing.assert_allclose(atoms.weights[order], [0.5, 0.5], atol=1e-10)
    assert atoms.reliable


def test_gns_idempotent_operator():
    y = moments_from_atoms(S11, IDEM, [[0.3, 1.0]], [1.0], 2)
    ops = gns_operators(y, 1)
    H = ops.reduced[1]
    np.testing.assert_allclose(H, [[1.0]])
    assert np.abs(H @ H - H).max() <= 1e-14


def test_gns_degenerate():
    S = VarSpace(1)
    y = MomentSequence(S, no_relations(S), {(0,): 1.0}, 2)
    object.__setattr__(y, "values", {(0,): 0.0})
    with pytest.raises(DegenerateFunctionalError):
        gns_operators(y, 1)


def test_gns_needs_odd_moments():
    y = moments_from_atoms(S1, no_relations(S1), [[0.5]], [1.0], 2)
    with pytest.raises(ValueError):
        gns_operators(y, 2)


def test_minimizer_two_var():
    inst = BY_NAME["two_var"]
    r = solve_order(inst.f, inst.module, 2)
    atoms = extract_atoms(gns_operators(r.moments, 2), inst.module)
    assert len(atoms) == 1 and atoms.reliable
    np.testing.assert_allclose(atoms.points[0], [0.3, -0.4], atol=1e-3)


@pytest.mark.parametrize("inst", CORPUS, ids=lambda i: i.name)
def test_flat_corpus_properties(inst):
    for t in range(max(1, inst.t_flat), 4):
        r = solve_order(inst.f, inst.module, t)
        assert r.flat, f"{inst.name} expected flat at t={t}"
        ops = gns_operators(r.moments, t)
        assert ops.max_commutator() <= 1e-5
        assert ops.self_adjointness_defect() <= 1e-6
        atoms = extract_atoms(ops, inst.module)
        assert atoms.reliable
        assert abs(atoms.weights.sum() - 1) <= 1e-6 and np.all(atoms.weights > 0)
        assert atoms.max_violation <= 1e-5
        assert reconstruction_error(atoms, r.moments, 2 * t - 2) <= 1e-5
        got = sorted(map(tuple, np.round(atoms.points, 3)))
        np.testing.assert_allclose(got, sorted(inst.atoms), atol=1e-3)
        for j in range(inst.space.m):
            H = ops.reduced[inst.d + j]
            assert np.abs(H @ H - H).max() <= 1e-5
            ev = np.linalg.eigvalsh(H)
            assert np.all(np.minimum(np.abs(ev), np.abs(ev - 1)) <= 1e-4)


def test_spurious_flatness_is_flagged():
    src = """
d: 1
m: 1
relation: h1^2 -> x1^2
objective: h1 - x1 + x1^2
generator: h1
epsilon: 1
"""
    prob = parse_problem(src)
    r = solve_order(prob.objective, prob.module, 4)
    # the rank test at 1e-6 calls this flat, but the spectrum only decays geometrically
    assert r.flat
    atoms = extract_atoms(gns_operators(r.moments, 4), prob.module)
    assert atoms.commutator > 1e-5
    assert not atoms.reliable
