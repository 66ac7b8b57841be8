import math

import numpy as np
import pytest

from henonball.closedform import ProblemParams, lambda1_closed
from henonball.errors import BracketError, DomainError
from henonball.radial import solve_dirichlet_ball
from henonball.rescaling import rescale
from henonball.spectral import (
    EigenResult,
    SLProblem,
    assemble_pencil,
    default_spectral_grid,
    eigenvalues,
    eigfun_decay_check,
    limit_eigen,
    limit_problem,
    node_count,
    prufer_eigen,
    radial_kernel_test,
    radial_pencil,
    scale_equivalence_test,
    solve_eigen,
)


def zero_potential(r):
    return np.zeros_like(np.asarray(r, dtype=float))


@pytest.fixture(scope="module")
def profile_3_2_005():
    return solve_dirichlet_ball(ProblemParams(3, 2.0, 0.05))


@pytest.fixture(scope="module")
def ball_problem(profile_3_2_005):
    return SLProblem.from_profile(profile_3_2_005)


class TestAssembly:
    def test_matrices_symmetric_and_weight_positive(self, ball_problem):
        pen = assemble_pencil(ball_problem, default_spectral_grid(1.0, 300))
        # tridiagonal symmetric by construction: one diagonal + one off band
        assert pen.a_diag.shape == (300,) and pen.a_off.shape == (299,)
        assert np.all(pen.b_diag > 0)

    def test_grid_validation(self, ball_problem):
        with pytest.raises(DomainError):
            assemble_pencil(ball_problem, np.array([0.0, 0.5, 0.9]))
        with pytest.raises(DomainError):
            assemble_pencil(ball_problem, np.array([0.1, 0.1, 0.9]))
        with pytest.raises(DomainError):
            assemble_pencil(ball_problem, np.array([0.1, 0.5, 1.0]))

    def test_dense_solver_oracle_q0(self):
        # q = 0, N = 3 on (0, pi): bisection against an independent dense
        # eigensolver on the same 200-point pencil
        prob = SLProblem(3, math.pi, zero_potential)
        pen = assemble_pencil(prob, default_spectral_grid(math.pi, 200))
        mine = pen.eigenvalue_batch([1, 2, 3])
        a = np.diag(pen.a_diag) + np.diag(pen.a_off, 1) + np.diag(pen.a_off, -1)
        b = np.diag(pen.b_diag)
        dense = np.sort(np.linalg.eigvalsh(np.linalg.solve(b, a) @ np.eye(len(b))))
        # generalized problem via symmetric transform for the oracle
        binv = np.diag(1.0 / np.sqrt(pen.b_diag))
        dense = np.sort(np.linalg.eigvalsh(binv @ a @ binv))
        assert np.allclose(mine, dense[:3], rtol=1e-9, atol=1e-9)

    def test_own_bisection_matches_fast_path(self, ball_problem):
        pen = assemble_pencil(ball_problem, default_spectral_grid(1.0, 400))
        fast = pen.eigenvalue_batch([1, 2])
        slow = [pen.eigenvalue_bisect(1), pen.eigenvalue_bisect(2)]
        assert np.allclose(fast, slow, rtol=1e-10, atol=1e-10)

    def test_natural_bc_bessel_eigenvalue(self):
        # k = 0 radial problem with q = 0: -(r^2 v')' = nu r^2 v, v'(0)=0,
        # v(1)=0 has nu_k = (k pi)^2
        prob = SLProblem(3, 1.0, zero_potential)
        vals = []
        for n in (500, 1000):
            pen = assemble_pencil(
                prob, default_spectral_grid(1.0, n), left_bc="natural", weight_power=2.0
            )
            vals.append(pen.eigenvalue_bisect(1))
        extrap = vals[1] + (vals[1] - vals[0]) / 3.0
        assert extrap == pytest.approx(math.pi**2, abs=2e-5)


class TestEigenvalues:
    def test_ordering_and_certificates(self, ball_problem):
        pen = assemble_pencil(ball_problem, default_spectral_grid(1.0, 1500))
        res = eigenvalues(pen, 3)
        vals = [r.lambda_j for r in res]
        assert vals[0] < vals[1] < vals[2]
        assert [r.node_count for r in res] == [0, 1, 2]

    def test_first_eigenfunction_positive(self, ball_problem):
        pen = assemble_pencil(ball_problem, default_spectral_grid(1.0, 1500))
        res = eigenvalues(pen, 2)
        assert np.all(res[0].z >= -1e-12)
        assert np.max(res[0].z) == pytest.approx(1.0)
        assert res[1].node_count == 1  # second eigenfunction: one sign change

    def test_weighted_orthogonality(self, ball_problem):
        pen = assemble_pencil(ball_problem, default_spectral_grid(1.0, 1200))
        res = eigenvalues(pen, 2)
        z1, z2 = res[0].z, res[1].z
        b = pen.b_diag
        ip = z1 @ (b * z2) / math.sqrt((z1 @ (b * z1)) * (z2 @ (b * z2)))
        assert abs(ip) < 1e-8

    def test_inertia_counts_bracket_each_value(self, ball_problem):
        pen = assemble_pencil(ball_problem, default_spectral_grid(1.0, 800))
        vals = pen.eigenvalue_batch([1, 2, 3])
        for j, v in enumerate(vals, start=1):
            assert pen.count(v - 1e-8 * max(1, abs(v))) <= j - 1
            assert pen.count(v + 1e-8 * max(1, abs(v))) >= j


class TestLimitProblem:
    @pytest.mark.parametrize(
        "n_dim, alpha, target",
        [(3, 2.0, -6.0), (3, 0.0, -2.0), (4, 2.0, -8.0)],
    )
    def test_first_eigenvalue_closed_form(self, n_dim, alpha, target):
        assert lambda1_closed(n_dim, alpha) == target
        res = limit_eigen(n_dim, alpha)
        assert abs(res.lambda1 - target) < 1e-4
        assert res.lambda1_trunc_shift < 1e-6

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
    def test_second_eigenvalue_zero(self, alpha):
        res = limit_eigen(3, alpha)
        assert abs(res.lambda2) < 1e-2
        assert res.lambda2_trunc_shift < 5e-3

    def test_grid_refinement_second_order(self):
        prob = limit_problem(3, 2.0, 1e3)
        errs = []
        for n in (750, 1500, 3000):
            pen = assemble_pencil(prob, default_spectral_grid(1e3, n))
            errs.append(abs(pen.eigenvalue(1) + 6.0))
        rate1 = math.log(errs[0] / errs[1]) / math.log(2.0)
        rate2 = math.log(errs[1] / errs[2]) / math.log(2.0)
        assert rate1 > 1.9 and rate2 > 1.9


class TestPrufer:
    def test_agreement_with_pencil(self, ball_problem):
        lam1 = solve_eigen(ball_problem, 1, with_vectors=False)[0].extrapolated
        pv = prufer_eigen(ball_problem, 1, (lam1 - 0.05, lam1 + 0.05))
        assert abs(pv - lam1) < 1e-6

    def test_limit_problem_first_eigenvalue(self):
        pv = prufer_eigen(limit_problem(3, 2.0, 1e3), 1, (-6.5, -5.5))
        assert abs(pv + 6.0) < 1e-4

    def test_oscillation_count_monotone(self):
        # the angle at the outer end increases with the spectral shift
        prob = limit_problem(3, 1.0, 100.0)
        misses = []
        for lam in (-4.0, -3.0, -2.0):
            try:
                prufer_eigen(prob, 1, (lam, lam + 1e-9))
            except BracketError as err:
                misses.append(str(err))
        # extract the reported miss at the lower end of each degenerate bracket
        los = [float(m.split("(")[-1].split(",")[0]) for m in misses]
        assert los[0] < los[1] < los[2]

    def test_bad_bracket_raises(self, ball_problem):
        with pytest.raises(BracketError):
            prufer_eigen(ball_problem, 1, (-20.0, -15.0))


class TestRadialKernel:
    @pytest.mark.parametrize("alpha", [0.5, 1.5, 2.5, 3.5, 4.5])
    def test_nondegenerate_across_alphas(self, alpha):
        prof = solve_dirichlet_ball(ProblemParams(3, alpha, 0.05))
        assert abs(radial_kernel_test(prof)) > 1e-3

    def test_pencil_has_no_kernel_and_one_negative(self, profile_3_2_005):
        pen = radial_pencil(profile_3_2_005)
        assert pen.count(-1e-6) == pen.count(1e-6)  # nothing within 1e-6 of 0
        assert pen.count(0.0) == 1  # single radial negative direction


class TestScaleEquivalence:
    def test_matched_grids_exact(self, profile_3_2_005):
        rs = rescale(profile_3_2_005)
        assert scale_equivalence_test(profile_3_2_005, rs, j_max=3) < 1e-8

    def test_independent_grids(self, profile_3_2_005):
        rs = rescale(profile_3_2_005)
        d = scale_equivalence_test(
            profile_3_2_005, rs, j_max=1, matched_grids=False
        )
        assert d < 1e-4  # separate discretizations of the same spectrum


class TestEigfunDecay:
    def test_fitted_constant_definition(self):
        r = np.geomspace(0.5, 50.0, 500)
        z = 1.0 / np.maximum(r, 1.0)  # ~ r^-(N-2) for N = 3
        eig = EigenResult(1, -1.0, 0, (500,), None, None, r, z)
        c = eigfun_decay_check(eig, 3)
        assert c >= 1.0

    def test_stability_over_sweep(self):
        cs = []
        for eps in (0.05, 0.02):
            for alpha in (1.0, 2.0):
                rs = rescale(solve_dirichlet_ball(ProblemParams(3, alpha, eps)))
                res = solve_eigen(SLProblem.from_rescaled(rs), 1, n_points=1500)
                cs.append(eigfun_decay_check(res[0], 3))
        assert max(cs) / min(cs) < 10.0


def test_node_count_helper():
    assert node_count(np.array([0.1, 0.5, 1.0, 0.4])) == 0
    assert node_count(np.array([0.1, 0.5, -0.2, -1.0])) == 1
    # noise-level entries must not create spurious crossings
    assert node_count(np.array([0.5, -1e-12, 0.4])) == 0
    assert node_count(np.array([1e-14, 0.5, -0.2, -1e-15, -0.3])) == 1
