import numpy as np
import pytest

from measos.sdp import (SdpInputError, SdpProblem, SdpSolution, SolverOptions, Status, residuals,
                        solve)
from measos.sdpa import read_sdpa, to_sdpa
from sdp_cases import constructed, constructed_optimal


def trace_problem(C, rhs=(1.0,)):
    n = len(C)
    return SdpProblem([n], [np.asarray(C, float)], [[np.eye(n)] for _ in rhs], list(rhs))


def test_forced_scalar():
    s = solve(trace_problem([[1.0]]))
    assert s.status == Status.OPTIMAL
    assert s.primal_obj == pytest.approx(1.0, abs=1e-8)
    assert s.X[0][0, 0] == pytest.approx(1.0, abs=1e-8)


def test_smallest_eigenvalue():
    s = solve(trace_problem(np.diag([1.0, 2.0])))
    assert s.status == Status.OPTIMAL
    assert s.primal_obj == pytest.approx(1.0, abs=1e-7)
    np.testing.assert_allclose(s.X[0], np.diag([1.0, 0.0]), atol=1e-6)


def test_contradictory_constraints():
    s = solve(trace_problem(np.eye(2), rhs=(1.0, 2.0)))
    assert s.status == Status.INFEASIBLE


def test_negative_trace_infeasible():
    s = solve(trace_problem(np.eye(2), rhs=(-1.0,)))
    assert s.status == Status.INFEASIBLE


def test_unbounded():
    # min -x11 with only x12 pinned: trace can grow without limit
    E = np.array([[0.0, 1.0], [1.0, 0.0]])
    p = SdpProblem([2], [-np.diag([1.0, 0.0])], [[E]], [0.0])
    assert solve(p).status == Status.UNBOUNDED


def test_redundant_constraint_is_dropped():
    p = trace_problem(np.diag([1.0, 2.0]), rhs=(1.0, 1.0))
    s = solve(p)
    assert s.status == Status.OPTIMAL
    assert s.primal_obj == pytest.approx(1.0, abs=1e-7)
    assert len(s.y) == 2


def test_input_validation():
    with pytest.raises(SdpInputError):
        SdpProblem([2], [np.eye(3)], [], [])
    with pytest.raises(SdpInputError):
        SdpProblem([2], [np.array([[0.0, 1.0], [0.0, 0.0]])], [], [])
    with pytest.raises(SdpInputError):
        SdpProblem([1], [np.eye(1)], [[np.eye(1)]], [1.0, 2.0])
    with pytest.raises(SdpInputError):
        SdpProblem([0], [np.zeros((0, 0))], [], [])


# -- residuals -----------------------------------------------------------------

def test_residuals_exact_pair():
    rng = np.random.default_rng(0)
    p, Xs, ys, Zs, obj = constructed_optimal(rng, [4, 3], [2, 1], 5)
    s = SdpSolution(Xs, ys, Zs, obj, obj, Status.OPTIMAL, 0)
    assert max(residuals(p, s)) <= 1e-12


def test_residuals_perturbed_primal():
    rng = np.random.default_rng(1)
    p, Xs, ys, Zs, obj = constructed_optimal(rng, [3], [1], 1)
    A = p.A[0][0]
    D = A / np.vdot(A, A) * 1e-3          # moves <A, X> by exactly 1e-3
    s = SdpSolution([Xs[0] + D], ys, Zs, obj, obj, Status.OPTIMAL, 0)
    pinf, dinf, _ = residuals(p, s)
    assert pinf == pytest.approx(1e-3, rel=1e-9)
    assert dinf <= 1e-12


def test_residuals_all_zero():
    z = [np.zeros((2, 2))]
    p = SdpProblem([2], z, [z], [0.0])
    assert residuals(p, SdpSolution(z, np.zeros(1), z, 0.0, 0.0, Status.OPTIMAL, 0)) == (0, 0, 0)


# -- properties -----------------------------------------------------------------

@pytest.mark.parametrize("seed", range(6))
def test_recovers_known_optimum(seed):
    rng = np.random.default_rng(seed)
    p, Xs, ys, Zs, obj = constructed_optimal(rng, [6, 4], [2, 3], 8)
    s = solve(p)
    assert s.status == Status.OPTIMAL
    assert s.primal_obj == pytest.approx(obj, abs=1e-6 * (1 + abs(obj)))
    assert min(np.linalg.eigvalsh(X)[0] for X in s.X) >= -1e-8
    assert min(np.linalg.eigvalsh(Z)[0] for Z in s.Z) >= -1e-8


@pytest.mark.parametrize("seed", range(4))
def test_weak_duality_from_feasible_start(seed):
    rng = np.random.default_rng(100 + seed)
    p, X0, y0, Z0 = constructed(rng, [7, 3], 6)
    s = solve(p, initial=(X0, y0, Z0))
    assert s.status == Status.OPTIMAL
    for pobj, dobj, pinf, dinf in s.history:
        assert pobj >= dobj - 1e-9


def test_deterministic():
    rng = np.random.default_rng(7)
    p, *_ = constructed(rng, [10, 5], 9)
    a, b = solve(p), solve(p)
    assert a.iterations == b.iterations
    assert np.array_equal(a.y, b.y)
    assert all(np.array_equal(x, y) for x, y in zip(a.X, b.X))


def test_iteration_limit_is_a_status():
    rng = np.random.default_rng(8)
    p, *_ = constructed(rng, [10], 5)
    s = solve(p, SolverOptions(max_iter=2))
    assert s.status == Status.ITER_LIMIT


# -- SDPA ------------------------------------------------------------------------

def test_sdpa_round_trip():
    rng = np.random.default_rng(11)
    p, *_ = constructed(rng, [3, 2], 4)
    q = read_sdpa(to_sdpa(p, comment="round trip"))
    assert q.blocks == p.blocks
    np.testing.assert_array_equal(q.b, p.b)
    for M, N in zip(p.C, q.C):
        np.testing.assert_array_equal(M, N)
    for Ai, Bi in zip(p.A, q.A):
        for M, N in zip(Ai, Bi):
            np.testing.assert_array_equal(M, N)


def test_sdpa_layout():
    p = SdpProblem([2, 1], [np.diag([1.0, 2.0]), np.eye(1)],
                   [[np.array([[0.0, 0.5], [0.5, 1.0]]), np.zeros((1, 1))]], [3.0])
    lines = to_sdpa(p, comment="demo").splitlines()
    assert lines == ['"demo', "1", "2", "2 1", "3.0",
                     "0 1 1 1 -1.0", "0 1 2 2 -2.0", "0 2 1 1 -1.0",
                     "1 1 1 2 0.5", "1 1 2 2 1.0"]
