import numpy as np
import pytest

from henonball.bifurcation import (
    SolverCache,
    alpha_resolution,
    convergence_study,
    find_bifurcation_alpha,
    lambda1_curve,
    lambda2_floor,
    lambda_values,
    morse_index,
)
from henonball.closedform import bifurcation_alpha, lambda1_closed, sphere_eigen
from henonball.errors import BracketError, DegeneratePointError, DomainError


@pytest.fixture(scope="module")
def cache():
    return SolverCache()


class TestLambdaCurve:
    def test_negativity_and_continuity(self, cache):
        curve = lambda1_curve(3, 0.05, np.linspace(1.5, 2.5, 9), cache=cache)
        assert curve.all_negative
        assert curve.is_continuous()

    def test_uniform_closeness_to_limit(self, cache):
        # the deviation from the closed-form limit curve is a boundary tail
        # effect, far below any ε power; assert the uniform smallness and the
        # floored trend along decreasing ε
        sups = []
        for eps in (0.1, 0.05, 0.02):
            curve = lambda1_curve(3, eps, np.linspace(1.5, 2.5, 5), cache=cache)
            sups.append(curve.sup_limit_deviation)
        assert all(s < 1e-5 for s in sups)
        floor = 5e-9  # spectral discretization reproducibility
        assert all(b <= a + floor for a, b in zip(sups, sups[1:]))

    def test_rejects_bad_grid(self, cache):
        with pytest.raises(DomainError):
            lambda1_curve(3, 0.05, [2.0, 1.0], cache=cache)
        with pytest.raises(DomainError):
            lambda1_curve(3, 0.05, [-1.0, 1.0], cache=cache)


class TestFindBifurcation:
    def test_k2_small_eps(self, cache):
        bp = find_bifurcation_alpha(3, 0.01, 2, cache=cache)
        lo, hi = bp.bracket
        assert lo < bp.alpha_k_eps < hi
        assert 1.1 < bp.alpha_k_eps < 2.9
        assert bp.residual < 1e-6
        assert bp.unique and bp.exclusion_ok
        assert bp.error_vs_limit < 1e-4

    def test_bracketing_inequality(self, cache):
        # the curve straddles -sigma_2 across the default bracket
        sigma2, _ = sphere_eigen(3, 2)
        for alpha, side in ((1.1, 1.0), (2.9, -1.0)):
            lam1 = lambda_values(3, 0.01, alpha, 1, cache=cache)[0]
            assert side * (lam1 + sigma2) > 0

    def test_sign_change_bracket_certificate(self, cache):
        bp = find_bifurcation_alpha(3, 0.05, 2, cache=cache)
        lo, hi = bp.bracket
        f_lo = lambda_values(3, 0.05, lo, 1, cache=cache)[0] + bp.sigma_k
        f_hi = lambda_values(3, 0.05, hi, 1, cache=cache)[0] + bp.sigma_k
        assert f_lo > 0 > f_hi

    def test_k1_rejected(self, cache):
        with pytest.raises(DomainError):
            find_bifurcation_alpha(3, 0.05, 1, cache=cache)

    def test_hopeless_bracket_raises(self, cache):
        with pytest.raises(BracketError):
            find_bifurcation_alpha(3, 0.05, 2, bracket=(0.2, 0.6), cache=cache)


class TestMorseIndex:
    def test_jump_across_k2_crossing(self, cache):
        lo = morse_index(3, 0.01, 1.95, cache=cache)
        hi = morse_index(3, 0.01, 2.05, cache=cache)
        assert hi.index_invariant - lo.index_invariant == 1
        assert hi.index_full - lo.index_full == 5  # multiplicity of sigma_2, N=3

    def test_constant_on_each_side(self, cache):
        a = morse_index(3, 0.01, 1.90, cache=cache)
        b = morse_index(3, 0.01, 1.95, cache=cache)
        assert a.index_full == b.index_full
        assert a.index_invariant == b.index_invariant

    def test_radial_contribution_is_one(self, cache):
        rep = morse_index(3, 0.01, 1.95, cache=cache)
        assert rep.radial_count == 1

    def test_small_alpha_first_channel(self, cache):
        # lambda_1 < -sigma_1 for every alpha > 0: pair (1,1) contributes
        rep = morse_index(3, 0.01, 0.3, cache=cache)
        assert (1, 1, 3) in rep.contributing_pairs
        assert rep.index_invariant == 2  # radial + the (1,1) channel
        assert rep.index_full == 4       # radial + multiplicity 3

    def test_degenerate_point_rejected(self, cache):
        with pytest.raises(DegeneratePointError):
            morse_index(3, 0.01, 2.0, cache=cache)

    def test_mode_accessor(self, cache):
        rep = morse_index(3, 0.01, 0.3, cache=cache)
        assert rep.index("full") == rep.index_full
        assert rep.index("invariant") == rep.index_invariant
        with pytest.raises(DomainError):
            rep.index("sideways")


class TestLambda2Floor:
    def test_floor_above_minus_sigma1(self, cache):
        vals = lambda2_floor(3, 0.01, np.linspace(1.0, 5.0, 9), cache=cache)
        assert vals > -2.0

    def test_ordering_against_lambda1(self, cache):
        for alpha in (1.0, 3.0, 5.0):
            l1, l2 = lambda_values(3, 0.01, alpha, 2, cache=cache)
            assert l2 > l1


class TestConvergenceStudy:
    def test_k2_dim3(self, cache):
        cs = convergence_study(3, 2, [0.1, 0.05, 0.02], cache=cache)
        assert cs.max_error < 1e-4
        assert cs.monotone_nonincreasing()
        for eps, alpha, err in cs.rows:
            assert err == abs(alpha - bifurcation_alpha(2))

    def test_alpha_resolution_floor(self):
        # residual tolerance 1e-6 against slope (alpha_k + N)/2
        assert alpha_resolution(3, 2, 1e-6) == pytest.approx(2e-6 / 2.5)

    def test_rejects_nondecreasing_eps(self, cache):
        with pytest.raises(DomainError):
            convergence_study(3, 2, [0.05, 0.1], cache=cache)

    def test_limit_roots_exact(self):
        # closed-form sanity: the limit curve crosses -sigma_k exactly at
        # alpha = 2(k-1)
        for n_dim in (3, 4, 5):
            for k in (2, 3, 4):
                sigma, _ = sphere_eigen(n_dim, k)
                a = bifurcation_alpha(k)
                assert abs(lambda1_closed(n_dim, a) + sigma) < 1e-12
