import numpy as np
import pytest

from bgsdc.collocation import CollocationTables
from bgsdc.driver import WorkCounter
from bgsdc.fields import MirrorField, MirrorParams, UniformField
from bgsdc.sdc_core import (
    FrozenField,
    NodeSolution,
    apply_collocation_operator,
    apply_QF,
    collocation_residual,
    collocation_update,
    eval_F,
    nonlinear_sweep,
    picard_iteration,
    predictor_sweep,
    solve_preconditioner,
)


def random_frozen(rng, M, e_scale=1.0):
    return FrozenField(rng.standard_normal((M, 3)),
                       e_scale * rng.standard_normal((M, 3)))


def dense_linear_part(op, n):
    """Matrix and offset of an affine map on flat vectors."""
    b = op(np.zeros(n))
    A = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        A[:, i] = op(e) - b
    return A, b


def flat_collocation_op(tables, frozen, alpha):
    M = tables.M

    def op(u):
        U = NodeSolution.unflatten(u, M)
        return apply_collocation_operator(U, tables, frozen, alpha).flatten()

    return op


def flat_precond_solve(tables, frozen, alpha):
    M = tables.M

    def op(u):
        b = NodeSolution.unflatten(u, M)
        return solve_preconditioner(b, tables, frozen, alpha).flatten()

    return op


def forward_precond_op(tables, frozen, alpha):
    """The low-order operator the elimination solve inverts, applied
    forward: b.xs[m] = xs[m] - QdE[m] vs - QdE2[m]/2 fs and
    b.vs[m] = vs[m] - QdT[m] fs with frozen-field forces."""
    M = tables.M

    def op(u):
        U = NodeSolution.unflatten(u, M)
        fs = frozen.force_all(U.vs, alpha)
        bx = U.xs - tables.QdE @ U.vs - 0.5 * (tables.QdE2 @ fs)
        bv = U.vs - tables.QdT @ fs
        return NodeSolution(bx, bv).flatten()

    return op


class TestNodeSolution:
    def test_flatten_roundtrip(self, rng):
        U = NodeSolution(rng.standard_normal((4, 3)),
                         rng.standard_normal((4, 3)))
        V = NodeSolution.unflatten(U.flatten(), 4)
        np.testing.assert_array_equal(U.xs, V.xs)
        np.testing.assert_array_equal(U.vs, V.vs)

    def test_constant(self):
        U = NodeSolution.constant([1.0, 2, 3], [4.0, 5, 6], 3)
        assert U.xs.shape == (3, 3)
        np.testing.assert_array_equal(U.xs[2], [1, 2, 3])
        np.testing.assert_array_equal(U.vs[0], [4, 5, 6])

    def test_copy_is_deep(self):
        U = NodeSolution(np.zeros((2, 3)), np.zeros((2, 3)))
        V = U.copy()
        V.xs[0, 0] = 1.0
        assert U.xs[0, 0] == 0.0


class TestFrozenField:
    def test_force_matches_lorentz(self, rng):
        frozen = random_frozen(rng, 3)
        v = rng.standard_normal(3)
        expected = 2.0 * (frozen.Es[1] + np.cross(v, frozen.Bs[1]))
        np.testing.assert_allclose(frozen.force(1, v, 2.0), expected,
                                   atol=1e-14)

    def test_force_all_rowwise(self, rng):
        frozen = random_frozen(rng, 5)
        vs = rng.standard_normal((5, 3))
        out = frozen.force_all(vs, 1.3)
        for m in range(5):
            np.testing.assert_allclose(out[m], frozen.force(m, vs[m], 1.3),
                                       atol=1e-14)


class TestCollocationOperator:
    @pytest.mark.parametrize("M", [2, 3, 5])
    def test_matches_dense_construction(self, rng, M):
        # oracle: assemble I - Q (x) F for the frozen linear right-hand
        # side explicitly and compare against the matrix-free operator
        tables = CollocationTables.lobatto(M, 0.37)
        frozen = random_frozen(rng, M)
        alpha = 1.4
        A, b = dense_linear_part(flat_collocation_op(tables, frozen, alpha),
                                 6 * M)
        # dense assembly: unknown ordering [xs(M,3); vs(M,3)]
        n = 3 * M
        Amat = np.eye(2 * n)
        Qk = np.kron(tables.Q, np.eye(3))
        Amat[:n, n:] -= Qk  # positions couple to velocities
        Fv = np.zeros((n, n))  # velocity block of the frozen force
        for m in range(M):
            Bx, By, Bz = frozen.Bs[m]
            Fv[3 * m : 3 * m + 3, 3 * m : 3 * m + 3] = alpha * np.array(
                [[0.0, Bz, -By], [-Bz, 0.0, Bx], [By, -Bx, 0.0]])
        Amat[n:, n:] -= Qk @ Fv
        np.testing.assert_allclose(A, Amat, atol=1e-12)
        # the affine offset comes from the frozen electric field alone
        offset = -Qk @ (1.4 * frozen.Es.ravel())
        np.testing.assert_allclose(b[n:], offset, atol=1e-12)
        np.testing.assert_allclose(b[:n], 0.0, atol=1e-15)

    def test_u0_shift(self, rng):
        tables = CollocationTables.lobatto(3, 0.2)
        frozen = random_frozen(rng, 3)
        U = NodeSolution(rng.standard_normal((3, 3)),
                         rng.standard_normal((3, 3)))
        U0 = NodeSolution.constant([1.0, 0, 0], [0, 1.0, 0], 3)
        plain = apply_collocation_operator(U, tables, frozen, 1.0)
        shifted = apply_collocation_operator(U, tables, frozen, 1.0, U0=U0)
        np.testing.assert_allclose(shifted.xs, plain.xs - U0.xs, atol=1e-14)
        np.testing.assert_allclose(shifted.vs, plain.vs - U0.vs, atol=1e-14)


class TestPreconditioner:
    @pytest.mark.parametrize("M", [2, 3, 5])
    def test_forward_inverse_pair(self, rng, M):
        # the elimination must invert the low-order operator exactly
        tables = CollocationTables.lobatto(M, 0.29)
        frozen = random_frozen(rng, M)
        alpha = 1.7
        forward = forward_precond_op(tables, frozen, alpha)
        solve = flat_precond_solve(tables, frozen, alpha)
        for _ in range(5):
            b = rng.standard_normal(6 * M)
            resid = np.linalg.norm(forward(solve(b)) - b)
            assert resid <= 1e-12 * (1.0 + np.linalg.norm(b))

    def test_affine_in_rhs(self, rng):
        # with E frozen the solve is affine: differences are linear
        tables = CollocationTables.lobatto(3, 0.5)
        frozen = random_frozen(rng, 3)
        solve = flat_precond_solve(tables, frozen, 1.0)
        b1, b2 = rng.standard_normal(18), rng.standard_normal(18)
        lhs = solve(b1 + b2) - solve(np.zeros(18))
        rhs = (solve(b1) - solve(np.zeros(18))) + (solve(b2) - solve(np.zeros(18)))
        np.testing.assert_allclose(lhs, rhs, atol=1e-11)


class TestPredictorSweep:
    def test_equals_preconditioner_solve_when_fields_agree(self, rng):
        # for a uniform field the live sweep and the frozen elimination
        # applied to the constant initial state are the same computation
        field = UniformField([0.2, -0.1, 0.9])
        tables = CollocationTables.lobatto(4, 0.3)
        x0, v0 = rng.standard_normal(3), rng.standard_normal(3)
        U, frozen, fs = predictor_sweep(x0, v0, tables, field, 1.0)
        U0 = NodeSolution.constant(x0, v0, 4)
        V = solve_preconditioner(U0, tables, frozen, 1.0)
        np.testing.assert_allclose(U.xs, V.xs, atol=1e-13)
        np.testing.assert_allclose(U.vs, V.vs, atol=1e-13)

    def test_first_node_pinned(self, mirror_scenario_2):
        field, alpha, omega, x0, v0 = mirror_scenario_2
        tables = CollocationTables.lobatto(5, 0.1 / omega)
        U, frozen, fs = predictor_sweep(x0, v0, tables, field, alpha)
        np.testing.assert_array_equal(U.xs[0], x0)
        np.testing.assert_array_equal(U.vs[0], v0)
        np.testing.assert_allclose(frozen.Bs[0], field.B_at(x0))

    def test_work_count(self, mirror_scenario_2):
        field, alpha, omega, x0, v0 = mirror_scenario_2
        tables = CollocationTables.lobatto(5, 0.1 / omega)
        counter = WorkCounter()
        predictor_sweep(x0, v0, tables, field, alpha, counter=counter)
        assert counter.f_evals == 5


class TestEvalF:
    def test_cached_first_node(self, mirror_scenario_2):
        field, alpha, omega, x0, v0 = mirror_scenario_2
        U = NodeSolution.constant(x0, v0, 3)
        counter = WorkCounter()
        f0 = np.array([1.0, 2.0, 3.0])
        stack = eval_F(U, field, alpha, counter=counter, cached_f0=f0)
        assert counter.f_evals == 2
        np.testing.assert_array_equal(stack.dvs[0], f0)
        np.testing.assert_array_equal(stack.dxs, U.vs)

    def test_without_cache_counts_all(self, mirror_scenario_2):
        field, alpha, omega, x0, v0 = mirror_scenario_2
        U = NodeSolution.constant(x0, v0, 4)
        counter = WorkCounter()
        eval_F(U, field, alpha, counter=counter)
        assert counter.f_evals == 4


class TestPicardAndUpdate:
    def test_picard_formula(self, rng, mirror_scenario_2):
        field, alpha, omega, x0, v0 = mirror_scenario_2
        tables = CollocationTables.lobatto(3, 0.1 / omega)
        U = NodeSolution(x0 + rng.standard_normal((3, 3)),
                         v0 + rng.standard_normal((3, 3)))
        out = picard_iteration(U, x0, v0, tables, field, alpha)
        stack = eval_F(U, field, alpha)
        inc = apply_QF(stack, tables)
        np.testing.assert_allclose(out.xs, x0 + inc.xs, atol=1e-12)
        np.testing.assert_allclose(out.vs, v0 + inc.vs, atol=1e-12)

    def test_picard_contracts_residual(self, mirror_scenario_2):
        field, alpha, omega, x0, v0 = mirror_scenario_2
        tables = CollocationTables.lobatto(5, 0.1 / omega)
        U, frozen, fs = predictor_sweep(x0, v0, tables, field, alpha)
        r_prev = collocation_residual(U, x0, v0, tables, field, alpha)
        for _ in range(4):
            U = picard_iteration(U, x0, v0, tables, field, alpha)
            r = collocation_residual(U, x0, v0, tables, field, alpha)
            assert r < r_prev
            r_prev = r

    def test_update_velocity_quadrature(self, mirror_scenario_2):
        field, alpha, omega, x0, v0 = mirror_scenario_2
        tables = CollocationTables.lobatto(3, 0.1 / omega)
        U, frozen, fs = predictor_sweep(x0, v0, tables, field, alpha)
        x_new, v_new = collocation_update(U, x0, v0, tables, field, alpha)
        stack = eval_F(U, field, alpha)
        np.testing.assert_array_equal(x_new, U.xs[-1])
        np.testing.assert_allclose(v_new, v0 + tables.q_end @ stack.dvs,
                                   atol=1e-12)

    def test_update_work_count(self, mirror_scenario_2):
        field, alpha, omega, x0, v0 = mirror_scenario_2
        tables = CollocationTables.lobatto(5, 0.1 / omega)
        U, frozen, fs = predictor_sweep(x0, v0, tables, field, alpha)
        counter = WorkCounter()
        collocation_update(U, x0, v0, tables, field, alpha,
                           counter=counter, cached_f0=fs[0])
        assert counter.f_evals == 4


class TestNonlinearSweep:
    def test_reduces_to_predictor_for_plain_rhs(self, mirror_scenario_2):
        field, alpha, omega, x0, v0 = mirror_scenario_2
        tables = CollocationTables.lobatto(4, 0.1 / omega)
        b = NodeSolution.constant(x0, v0, 4)
        U, fs = nonlinear_sweep(b, tables, field, alpha)
        V, _, _ = predictor_sweep(x0, v0, tables, field, alpha)
        np.testing.assert_allclose(U.xs, V.xs, atol=1e-13)
        np.testing.assert_allclose(U.vs, V.vs, atol=1e-13)
