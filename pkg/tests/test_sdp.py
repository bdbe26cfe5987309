"""Solver checks against closed-form optima and an independent audit."""

import numpy as np
import pytest

from qbroadcast.corpus import random_state
from qbroadcast.info import fidelity
from qbroadcast.sdp import (
    AffineMatrixExpr,
    SdpBuilder,
    SdpProblem,
    audit,
    dump_sdpa,
    embed_hermitian,
    fidelity_sdp,
    hermitian_basis,
    solve,
    unembed_hermitian,
)
from qbroadcast.states import DensityMatrix

SQRT_HALF = 0.7071067811865476


def trace_constrained(c_mat, rhs=1.0):
    b = SdpBuilder()
    blk = b.add_block(c_mat.shape[0])
    b.add_objective(blk, c_mat)
    b.add_constraint({blk: np.eye(c_mat.shape[0], dtype=complex)}, rhs)
    return b.build()


class TestBasisAndEmbedding:
    def test_hermitian_basis_orthonormal(self):
        for n in (2, 3, 4):
            basis = hermitian_basis(n)
            assert len(basis) == n * n
            gram = np.array(
                [[np.trace(a @ b).real for b in basis] for a in basis]
            )
            assert np.allclose(gram, np.eye(n * n), atol=1e-12)

    def test_embedding_roundtrip_and_inner_products(self):
        rng = np.random.default_rng(11)
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = (g + g.conj().T) / 2
        x = random_state(3, rng).matrix
        assert np.allclose(unembed_hermitian(embed_hermitian(h)), h)
        lhs = np.trace(embed_hermitian(h) / 2 @ embed_hermitian(x)).real
        assert abs(lhs - np.trace(h @ x).real) < 1e-12

    def test_embedded_psd_iff_complex_psd(self):
        rng = np.random.default_rng(12)
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        pos = g @ g.conj().T
        assert np.linalg.eigvalsh(embed_hermitian(pos))[0] > -1e-12
        indef = pos - np.eye(3) * np.trace(pos).real
        assert np.linalg.eigvalsh(embed_hermitian(indef))[0] < -1e-9


class TestSolverBasics:
    def test_trace_objective_unit_trace(self):
        sol = solve(trace_constrained(np.eye(2, dtype=complex)))
        assert sol.status == "optimal"
        assert abs(sol.primal_value - 1.0) < 1e-7
        assert abs(sol.dual_value - 1.0) < 1e-7

    def test_spectral_norm_via_trace_one(self):
        c = np.diag([3.0, 1.0]).astype(complex)
        sol = solve(trace_constrained(c))
        assert sol.status == "optimal"
        assert abs(sol.primal_value - 3.0) < 1e-6
        # optimizer should concentrate on the top eigenvector
        assert abs(sol.primal_blocks[0][0, 0] - 1.0) < 1e-5

    def test_complex_objective_pauli_y(self):
        c = np.array([[0.0, -1j], [1j, 0.0]])
        sol = solve(trace_constrained(c))
        assert sol.status == "optimal"
        assert abs(sol.primal_value - 1.0) < 1e-6
        top = np.array([1.0, 1j]) / np.sqrt(2)
        assert abs(top.conj() @ sol.primal_blocks[0] @ top - 1.0) < 1e-5

    def test_random_hermitian_max_eigenvalue(self):
        rng = np.random.default_rng(5)
        for _ in range(4):
            g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            c = (g + g.conj().T) / 2
            sol = solve(trace_constrained(c))
            assert sol.status == "optimal"
            target = np.linalg.eigvalsh(c)[-1]
            assert abs(sol.primal_value - target) < 1e-6
            assert abs(sol.dual_value - target) < 1e-6

    def test_two_blocks_with_shared_constraint(self):
        b = SdpBuilder()
        one = b.add_block(2)
        two = b.add_block(3)
        b.add_objective(one, np.eye(2, dtype=complex))
        b.add_constraint(
            {one: np.eye(2, dtype=complex), two: np.eye(3, dtype=complex)},
            1.0,
        )
        b.add_constraint({two: np.eye(3, dtype=complex)}, 0.3)
        sol = solve(b.build())
        assert sol.status == "optimal"
        assert abs(sol.primal_value - 0.7) < 1e-6

    def test_deterministic_replay(self):
        c = np.array([[1.0, 0.2 + 0.1j], [0.2 - 0.1j, -0.5]])
        first = solve(trace_constrained(c))
        second = solve(trace_constrained(c))
        assert first.primal_value == second.primal_value
        assert np.array_equal(first.primal_blocks[0], second.primal_blocks[0])
        assert first.iterations == second.iterations

    def test_residuals_reported_small_when_optimal(self):
        sol = solve(trace_constrained(np.diag([2.0, -1.0]).astype(complex)))
        assert sol.status == "optimal"
        assert sol.residuals.primal < 1e-7
        assert sol.residuals.dual < 1e-7
        assert sol.residuals.gap < 1e-7
        assert sol.primal_value <= sol.dual_value + 1e-6


class TestPreprocessingAndFailureModes:
    def test_duplicate_consistent_constraint_is_dropped(self):
        b = SdpBuilder()
        blk = b.add_block(2)
        b.add_objective(blk, np.diag([1.0, 0.0]).astype(complex))
        eye = np.eye(2, dtype=complex)
        b.add_constraint({blk: eye}, 1.0)
        b.add_constraint({blk: 2 * eye}, 2.0)
        sol = solve(b.build())
        assert sol.status == "optimal"
        assert abs(sol.primal_value - 1.0) < 1e-6
        assert sol.dual_vector.shape == (2,)

    def test_inconsistent_duplicates_raise(self):
        b = SdpBuilder()
        blk = b.add_block(2)
        eye = np.eye(2, dtype=complex)
        b.add_constraint({blk: eye}, 1.0)
        b.add_constraint({blk: eye}, 2.0)
        with pytest.raises(ValueError, match="structurally inconsistent"):
            solve(b.build())

    def test_zero_row_with_nonzero_rhs_raises(self):
        b = SdpBuilder()
        blk = b.add_block(2)
        b.add_constraint({blk: np.zeros((2, 2), dtype=complex)}, 0.5)
        with pytest.raises(ValueError, match="structurally inconsistent"):
            solve(b.build())

    def test_conic_infeasibility_detected(self):
        b = SdpBuilder()
        blk = b.add_block(2)
        b.add_constraint({blk: np.eye(2, dtype=complex)}, -1.0)
        sol = solve(b.build())
        assert sol.status in ("infeasible", "max-iterations")
        assert sol.status != "optimal"

    def test_iteration_cap_reported(self):
        sol = solve(trace_constrained(np.eye(2, dtype=complex)), max_iters=2)
        assert sol.status == "max-iterations"

    def test_non_hermitian_coefficient_rejected(self):
        bad = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(ValueError, match="Hermitian"):
            SdpProblem((2,), (bad,), ())

    def test_audit_passes_and_detects_corruption(self):
        sol = solve(trace_constrained(np.diag([1.0, 0.0]).astype(complex)))
        ok, details = audit(trace_constrained(np.diag([1.0, 0.0]).astype(complex)), sol)
        assert ok
        assert details["max_constraint_violation"] < 1e-7
        corrupted = SdpSolutionLike(sol)
        ok_bad, _ = audit(
            trace_constrained(np.diag([1.0, 0.0]).astype(complex)), corrupted
        )
        assert not ok_bad

    def test_sdpa_dump_layout(self, tmp_path):
        path = tmp_path / "prob.dat-s"
        dump_sdpa(trace_constrained(np.diag([1.0, 2.0]).astype(complex)), str(path))
        lines = path.read_text().strip().splitlines()
        assert lines[0].startswith("1 ")
        assert lines[1].startswith("1 ")
        assert lines[2].split("=")[0].strip() == "4"
        entry = lines[4].split()
        assert len(entry) == 5


class SdpSolutionLike:
    """Copy of a solution with a deliberately infeasible primal block."""

    def __init__(self, sol):
        broken = sol.primal_blocks[0].copy()
        broken[0, 0] += 1.0
        self.primal_blocks = (broken,) + sol.primal_blocks[1:]
        self.dual_vector = sol.dual_vector
        self.primal_value = sol.primal_value
        self.dual_value = sol.dual_value
        self.status = sol.status


def solve_fidelity(rho, sigma):
    b = SdpBuilder()
    expr = AffineMatrixExpr(side=sigma.shape[0], const=sigma)
    fidelity_sdp(b, rho, expr, sigma_support=sigma)
    return solve(b.build())


class TestFidelityGadget:
    def test_pure_vs_maximally_mixed(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        sol = solve_fidelity(rho, np.eye(2, dtype=complex) / 2)
        assert sol.status == "optimal"
        assert abs(sol.primal_value - SQRT_HALF) < 1e-7

    def test_orthogonal_pure_states(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        sigma = np.diag([0.0, 1.0]).astype(complex)
        sol = solve_fidelity(rho, sigma)
        assert sol.status == "optimal"
        assert abs(sol.primal_value) < 1e-6

    def test_identical_states_reach_one(self):
        rng = np.random.default_rng(21)
        rho = random_state(3, rng).matrix
        sol = solve_fidelity(rho, rho)
        assert sol.status == "optimal"
        assert abs(sol.primal_value - 1.0) < 1e-6

    @pytest.mark.parametrize("dim", [2, 3])
    def test_matches_closed_form_on_random_pairs(self, dim):
        rng = np.random.default_rng(100 + dim)
        for _ in range(5):
            rho = random_state(dim, rng)
            sigma = random_state(dim, rng)
            sol = solve_fidelity(rho.matrix, sigma.matrix)
            assert sol.status == "optimal"
            closed = fidelity(rho, sigma)
            assert abs(sol.primal_value - closed) < 1e-6
            assert sol.residuals.primal < 1e-7
            assert sol.residuals.dual < 1e-7

    def test_rank_deficient_inputs(self):
        rng = np.random.default_rng(31)
        rho = random_state(3, rng, rank=1)
        sigma = random_state(3, rng, rank=2)
        sol = solve_fidelity(rho.matrix, sigma.matrix)
        assert sol.status == "optimal"
        closed = fidelity(rho, sigma)
        assert abs(sol.primal_value - closed) < 1e-6

    def test_affine_sigma_free_over_states_reaches_one(self):
        # with sigma ranging over the whole state set, the best fidelity
        # against any fixed rho is exactly one (take sigma = rho)
        rng = np.random.default_rng(41)
        rho = random_state(2, rng).matrix
        b = SdpBuilder()
        free = b.add_block(2)
        b.add_constraint({free: np.eye(2, dtype=complex)}, 1.0)
        expr = AffineMatrixExpr(
            side=2, const=np.zeros((2, 2), dtype=complex), terms=((free, lambda e: e),)
        )
        fidelity_sdp(b, rho, expr)
        sol = solve(b.build())
        assert sol.status == "optimal"
        assert abs(sol.primal_value - 1.0) < 1e-6
        best = sol.primal_blocks[free]
        assert np.allclose(best, rho, atol=1e-4)

    def test_affine_sigma_scaled_trace(self):
        # fidelity scales as sqrt of a scalar multiplier on sigma
        rho = np.diag([0.5, 0.5]).astype(complex)
        b = SdpBuilder()
        free = b.add_block(2)
        b.add_constraint({free: np.eye(2, dtype=complex)}, 0.25)
        expr = AffineMatrixExpr(
            side=2,
            const=np.zeros((2, 2), dtype=complex),
            terms=((free, lambda e: e),),
        )
        fidelity_sdp(b, rho, expr)
        sol = solve(b.build())
        assert sol.status == "optimal"
        assert abs(sol.primal_value - 0.5) < 1e-6


def test_density_matrix_inputs_accepted_via_matrix_attribute():
    rho = DensityMatrix((2,), np.diag([0.75, 0.25]).astype(complex))
    sol = solve_fidelity(rho.matrix, rho.matrix)
    assert abs(sol.primal_value - 1.0) < 1e-6
