"""Boundary-engine tests: closed forms, grid suprema, and their agreement."""

import math

import numpy as np
import pytest

from sparse_detect.boundary import (
    ExponentFunction,
    alpha_family,
    beta_convolution,
    beta_sharp,
    beta_star_general,
    beta_star_idj,
    boundary_closed_form,
    check_admissible,
    ess_sup_grid,
    gamma_from_alpha,
    hc_achievable_boundary,
    hellinger_exponent,
    laplace_log_integral,
    tail_exponent,
)
from sparse_detect.errors import (
    AdmissibilityError,
    EmptySupportError,
    HCBoundaryUndefinedError,
    InvalidParameterError,
    OutOfRegimeError,
    WrongParametrizationError,
)

U_GRID = np.linspace(-5.0, 5.0, 20001)


class TestClosedForms:
    def test_classical_golden_values(self):
        assert boundary_closed_form("idj", r=0.25) == pytest.approx(0.75, abs=1e-12)
        assert boundary_closed_form("idj", mode="r-of-beta", beta=0.75) == pytest.approx(
            0.25, abs=1e-12
        )

    def test_idj_branches(self):
        assert boundary_closed_form("idj", r=0.1) == pytest.approx(0.6, abs=1e-12)
        assert boundary_closed_form("idj", r=0.81) == pytest.approx(
            1 - (1 - 0.9) ** 2, abs=1e-12
        )
        assert boundary_closed_form("idj", r=4.0) == 1.0

    def test_idj_inverse_pair(self):
        for r in np.linspace(0.01, 0.99, 49):
            beta = boundary_closed_form("idj", r=float(r))
            back = boundary_closed_form("idj", mode="r-of-beta", beta=beta)
            assert back == pytest.approx(float(r), abs=1e-9)

    def test_hetero_golden_values(self):
        assert boundary_closed_form("hetero", r=0.0, sigma2=2.0) == pytest.approx(
            0.5, abs=1e-12
        )
        # signal variance tau^2 = 4 on top of unit noise
        assert boundary_closed_form("hetero", r=0.0, sigma2=5.0) == pytest.approx(
            0.8, abs=1e-12
        )
        # sigma2 = 1 collapses to the classical boundary
        for r in (0.1, 0.25, 0.6):
            assert boundary_closed_form("hetero", r=r, sigma2=1.0) == pytest.approx(
                boundary_closed_form("idj", r=r), abs=1e-12
            )

    def test_hetero_inverse_pair(self):
        for sigma2 in (0.5, 1.0, 1.5, 3.0):
            for r in np.linspace(0.02, 0.9, 23):
                beta = boundary_closed_form("hetero", r=float(r), sigma2=sigma2)
                if beta >= 1.0 - 1e-9:
                    continue
                back = boundary_closed_form(
                    "hetero", mode="r-of-beta", beta=beta, sigma2=sigma2
                )
                assert back == pytest.approx(float(r), abs=1e-9)

    def test_dilate_golden_values(self):
        assert boundary_closed_form("dilate", linf=0.5) == pytest.approx(0.75, abs=1e-12)
        assert boundary_closed_form("dilate", linf=0.7) == pytest.approx(0.91, abs=1e-12)
        assert boundary_closed_form("dilate", linf=1.3) == 1.0

    def test_ggconv_golden_values(self):
        assert boundary_closed_form("ggconv", tau=1.0, r=4.0) == pytest.approx(
            0.5625, abs=1e-12
        )
        assert boundary_closed_form("ggconv", tau=1.0, r=2.0) == 0.5  # below threshold
        assert boundary_closed_form("ggconv", tau=2.0, r=2.0) == pytest.approx(
            2.0 / 3.0, abs=1e-12
        )
        assert boundary_closed_form("ggconv", tau=2.0, r=0.5) == 0.5

    def test_ggconv_generic_tau_matches_bullets(self):
        # the generic 1-D supremum must agree with the exact bullets
        for tau, r in ((1.0, 4.0), (1.0, 8.0), (2.0, 2.0), (2.0, 5.0)):
            zs = np.linspace(0.0, 6.0, 200001)
            brute = np.max(
                np.where(
                    zs > 0,
                    np.array([beta_star_idj(r * z * z) for z in zs]) - zs**tau,
                    0.5,
                )
            )
            want = boundary_closed_form("ggconv", tau=tau, r=r)
            assert max(0.5, brute) == pytest.approx(want, abs=1e-8)

    def test_gglocation_golden_values(self):
        assert boundary_closed_form("gglocation", tau=1.0, r=0.5) == pytest.approx(
            0.75, abs=1e-12
        )
        assert boundary_closed_form("gglocation", tau=0.7, r=1.5) == 1.0
        assert boundary_closed_form("gglocation", tau=2.0, r=0.25) == pytest.approx(
            0.75, abs=1e-12
        )

    def test_gglocation_branch_continuity(self):
        # threshold between the linear and the power branch at tau = 2 is 1/4
        below = boundary_closed_form("gglocation", tau=2.0, r=0.25 - 1e-12)
        above = boundary_closed_form("gglocation", tau=2.0, r=0.25 + 1e-12)
        assert abs(below - above) <= 1e-9
        at_one = boundary_closed_form("gglocation", tau=2.0, r=1.0)
        just_above = boundary_closed_form("gglocation", tau=2.0, r=1.0 + 1e-12)
        assert abs(at_one - just_above) <= 1e-9

    def test_invalid_parameters_name_the_branch(self):
        with pytest.raises(InvalidParameterError, match="r must be > 0"):
            boundary_closed_form("idj", r=-1.0)
        with pytest.raises(InvalidParameterError, match="beta must lie in"):
            boundary_closed_form("idj", mode="r-of-beta", beta=1.2)
        with pytest.raises(InvalidParameterError, match="sigma2"):
            boundary_closed_form("hetero", r=0.1, sigma2=0.0)
        with pytest.raises(InvalidParameterError, match="r-of-beta"):
            boundary_closed_form("dilate", mode="r-of-beta", linf=0.5)
        with pytest.raises(InvalidParameterError):
            boundary_closed_form("nope", r=0.5)


class TestAlphaFamilies:
    def test_idj_value(self):
        alpha = alpha_family("idj", r=0.25)
        assert float(alpha.evaluate(1.0)) == pytest.approx(0.75, abs=1e-15)

    def test_symmetric_idj(self):
        alpha = alpha_family("symmetric_idj", r=0.3)
        assert float(alpha.evaluate(-1.0)) == float(alpha.evaluate(1.0))

    def test_hetero_value(self):
        alpha = alpha_family("hetero", r=0.25, sigma2=2.0)
        u = 1.3
        assert float(alpha.evaluate(u)) == pytest.approx(
            u * u - (u - 0.5) ** 2 / 2.0, abs=1e-14
        )

    def test_dilate_interval_is_square_inside(self):
        alpha = alpha_family("dilate", interval=(-0.5, 0.5))
        for u in (0.0, 0.2, -0.4):
            assert float(alpha.evaluate(u)) == pytest.approx(u * u, abs=1e-14)
        assert float(alpha.evaluate(2.0)) == pytest.approx(
            2 * 2.0 * 0.5 - 0.25, abs=1e-14
        )

    def test_dilate_uniform_support_boundary(self):
        alpha = alpha_family("dilate", interval=(-0.5, 0.5))
        assert beta_sharp(alpha).beta == pytest.approx(0.75, abs=1e-9)

    def test_conv_from_f_matches_idj(self):
        # point mass at sqrt(r) reproduces the location-model exponent
        alpha = alpha_family("conv_from_f", ts=[0.5], fs=[0.0])
        ref = alpha_family("idj", r=0.25)
        us = np.linspace(-2, 2, 9)
        np.testing.assert_allclose(alpha.evaluate(us), ref.evaluate(us), atol=1e-12)

    def test_ggconv_tau2_matches_hetero(self):
        # Gaussian signal of variance r on unit noise is hetero sigma2 = 1 + r
        alpha = alpha_family("gen_gaussian_conv", r=2.0, tau=2.0)
        ref = alpha_family("hetero", r=0.0, sigma2=3.0)
        us = np.linspace(-3, 3, 13)
        np.testing.assert_allclose(alpha.evaluate(us), ref.evaluate(us), atol=1e-9)


class TestAdmissibility:
    def test_idj_admissible(self):
        report = check_admissible(alpha_family("idj", r=0.25))
        assert report.admissible
        assert abs(report.ladder_values[-1]) <= 0.05

    def test_everywhere_violation(self):
        bad = ExponentFunction.from_grid(U_GRID, U_GRID**2 + 0.1)
        report = check_admissible(bad)
        assert not report.admissible
        assert any("exceeds u^2" in v for v in report.violations)

    def test_concave_with_convolutional_flag(self):
        alpha = ExponentFunction.from_grid(U_GRID, -np.abs(U_GRID), convolutional=True)
        report = check_admissible(alpha)
        assert not report.admissible
        assert any("not convex" in v for v in report.violations)

    def test_wrong_axis(self):
        gamma = alpha_family("gen_gaussian_location", r=0.5, tau=1.0)
        with pytest.raises(WrongParametrizationError):
            check_admissible(gamma)


class TestBetaSharp:
    def test_idj_quarter(self):
        res = beta_sharp(alpha_family("idj", r=0.25))
        assert res.beta == pytest.approx(0.75, abs=1e-9)
        assert res.maximizer == pytest.approx(1.0, abs=1e-6)

    def test_weak_signal_floor(self):
        res = beta_sharp(alpha_family("hetero", r=0.0, sigma2=2.0))
        assert res.beta == pytest.approx(0.5, abs=1e-12)

    def test_strong_signal_ceiling(self):
        alpha = ExponentFunction.from_grid(U_GRID, U_GRID**2)
        assert beta_sharp(alpha).beta == pytest.approx(1.0, abs=1e-12)

    def test_inadmissible_rejected(self):
        bad = ExponentFunction.from_grid(U_GRID, U_GRID**2 + 0.1)
        with pytest.raises(AdmissibilityError):
            beta_sharp(bad)

    def test_wrong_axis(self):
        gamma = alpha_family("gen_gaussian_location", r=0.5, tau=1.0)
        with pytest.raises(WrongParametrizationError):
            beta_sharp(gamma)

    @pytest.mark.parametrize("r", [0.05, 0.25, 0.5, 0.75, 1.0])
    def test_matches_closed_form_idj(self, r):
        got = beta_sharp(alpha_family("idj", r=r)).beta
        assert got == pytest.approx(boundary_closed_form("idj", r=r), abs=1e-3)

    @pytest.mark.parametrize("sigma2", [0.5, 1.5, 3.0])
    def test_matches_closed_form_hetero(self, sigma2):
        for r in (0.1, 0.4):
            got = beta_sharp(alpha_family("hetero", r=r, sigma2=sigma2)).beta
            want = boundary_closed_form("hetero", r=r, sigma2=sigma2)
            assert got == pytest.approx(want, abs=1e-3)

    def test_matches_closed_form_ggconv(self):
        got = beta_sharp(alpha_family("gen_gaussian_conv", r=2.0, tau=2.0)).beta
        assert got == pytest.approx(2.0 / 3.0, abs=1e-5)
        got = beta_sharp(alpha_family("gen_gaussian_conv", r=4.0, tau=1.0)).beta
        assert got == pytest.approx(0.5625, abs=1e-5)

    def test_symmetrization_invariance(self):
        for r in (0.05, 0.25, 0.6, 1.0):
            plain = beta_sharp(alpha_family("idj", r=r)).beta
            mirrored = beta_sharp(alpha_family("symmetric_idj", r=r)).beta
            assert abs(plain - mirrored) <= 1e-9

    def test_results_stay_in_the_sparse_band(self):
        # positive-part exponents land in [1/2, 1]; maximizers stay in domain
        for alpha in (
            alpha_family("idj", r=0.05),
            alpha_family("idj", r=2.5),
            alpha_family("hetero", r=0.0, sigma2=0.5),
            alpha_family("dilate", linf=1.5),
        ):
            res = beta_sharp(alpha)
            assert 0.5 <= res.beta <= 1.0
            lo, hi = alpha.domain()
            assert lo <= res.maximizer <= hi


class TestBetaStarGeneral:
    @pytest.mark.parametrize("r", [0.1, 0.25, 0.5, 1.0])
    def test_substitution_identity(self, r):
        alpha = alpha_family("idj", r=r)
        gamma = gamma_from_alpha(alpha)
        assert beta_star_general(gamma).beta == pytest.approx(
            beta_sharp(alpha).beta, abs=1e-9
        )

    def test_gglocation_laplace(self):
        gamma = alpha_family("gen_gaussian_location", r=0.5, tau=1.0)
        assert beta_star_general(gamma).beta == pytest.approx(0.75, abs=1e-9)

    def test_gglocation_matches_closed_form(self):
        for tau, r in ((1.0, 0.3), (2.0, 0.25), (2.0, 0.6), (3.0, 0.1), (0.5, 0.8)):
            gamma = alpha_family("gen_gaussian_location", r=r, tau=tau)
            want = boundary_closed_form("gglocation", tau=tau, r=r)
            assert beta_star_general(gamma).beta == pytest.approx(want, abs=1e-6)

    def test_constant_negative_gamma(self):
        s = np.linspace(0.0, 5.0, 1001)
        gamma = ExponentFunction.from_grid(s, np.full_like(s, -1.0), axis="s")
        assert beta_star_general(gamma).beta == 0.5

    def test_wrong_axis(self):
        with pytest.raises(WrongParametrizationError):
            beta_star_general(alpha_family("idj", r=0.25))


class TestHellingerExponent:
    def test_spot_values_idj_quarter(self):
        alpha = alpha_family("idj", r=0.25)
        assert hellinger_exponent(alpha, 0.6) == pytest.approx(-0.7225, abs=1e-9)
        assert hellinger_exponent(alpha, 0.75) == pytest.approx(-1.0, abs=1e-9)
        assert hellinger_exponent(alpha, 0.9) == pytest.approx(-1.3, abs=1e-9)

    def test_sign_characterization(self):
        cases = [
            alpha_family("idj", r=0.25),
            alpha_family("hetero", r=0.4, sigma2=1.5),
            alpha_family("dilate", linf=0.7),
        ]
        closed = [
            boundary_closed_form("idj", r=0.25),
            boundary_closed_form("hetero", r=0.4, sigma2=1.5),
            boundary_closed_form("dilate", linf=0.7),
        ]
        for alpha, bstar in zip(cases, closed):
            assert hellinger_exponent(alpha, bstar - 0.05) > -1.0
            assert hellinger_exponent(alpha, bstar + 0.05) < -1.0
            assert hellinger_exponent(alpha, bstar) == pytest.approx(-1.0, abs=5e-3)

    def test_out_of_regime(self):
        with pytest.raises(OutOfRegimeError):
            hellinger_exponent(alpha_family("idj", r=0.25), 0.4)


class TestTailExponent:
    def test_flat_before_the_peak(self):
        alpha = alpha_family("idj", r=0.25)
        for u in (0.0, 0.2, 0.5):
            assert tail_exponent(alpha, u) == pytest.approx(0.0, abs=1e-12)

    def test_decay_after_the_peak(self):
        alpha = alpha_family("idj", r=0.25)
        assert tail_exponent(alpha, 1.0) == pytest.approx(-0.25, abs=1e-9)

    def test_zero_exponent(self):
        alpha = ExponentFunction.from_grid(U_GRID, np.zeros_like(U_GRID))
        for u in (0.0, 1.5, 3.0):
            assert tail_exponent(alpha, u) == pytest.approx(-u * u, abs=1e-6)

    def test_nonincreasing(self):
        alpha = alpha_family("hetero", r=0.3, sigma2=2.0)
        us = np.linspace(0.0, 3.0, 61)
        vals = [tail_exponent(alpha, float(u)) for u in us]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_negative_u_rejected(self):
        with pytest.raises(InvalidParameterError):
            tail_exponent(alpha_family("idj", r=0.25), -0.5)


class TestHCAchievableBoundary:
    @pytest.mark.parametrize(
        "alpha,want",
        [
            (alpha_family("idj", r=0.25), 0.75),
            (alpha_family("hetero", r=0.25, sigma2=1.0), 0.75),
            (alpha_family("dilate", linf=0.5), 0.75),
        ],
    )
    def test_golden_values(self, alpha, want):
        assert hc_achievable_boundary(alpha).beta == pytest.approx(want, abs=1e-6)

    def test_adaptivity_identity(self):
        for alpha in (
            alpha_family("idj", r=0.1),
            alpha_family("idj", r=0.8),
            alpha_family("hetero", r=0.3, sigma2=2.5),
            alpha_family("dilate", linf=0.9),
        ):
            direct = hc_achievable_boundary(alpha).beta
            swept = hc_achievable_boundary(alpha, via_sweep=True).beta
            reference = beta_sharp(alpha).beta
            assert direct == pytest.approx(reference, abs=1e-3)
            assert swept == pytest.approx(reference, abs=1e-3)

    def test_nowhere_positive_rejected(self):
        alpha = ExponentFunction.from_grid(U_GRID, -(U_GRID**2))
        with pytest.raises(HCBoundaryUndefinedError):
            hc_achievable_boundary(alpha)


class TestBetaConvolution:
    def test_laplace_tail_cost(self):
        ts = np.linspace(-5, 5, 20001)
        fs = np.abs(ts) * 4.0 ** (-0.5)
        res = beta_convolution(ts, fs)
        assert res.beta == pytest.approx(0.5625, abs=1e-6)
        assert abs(res.maximizer) == pytest.approx(0.75, abs=1e-3)

    def test_zero_cost_saturates(self):
        ts = np.linspace(-5, 5, 2001)
        assert beta_convolution(ts, np.zeros_like(ts)).beta == 1.0

    def test_point_support(self):
        ts = np.linspace(-2, 2, 4001)
        fs = np.where(ts == 0.5, 0.0, np.inf)
        res = beta_convolution(ts, fs)
        assert res.beta == pytest.approx(0.75, abs=1e-12)
        assert res.maximizer == pytest.approx(0.5, abs=1e-12)

    def test_empty_support(self):
        ts = np.linspace(-1, 1, 101)
        with pytest.raises(EmptySupportError):
            beta_convolution(ts, np.full_like(ts, np.inf))


class TestEssSupGrid:
    def test_parabola(self):
        val, arg = ess_sup_grid(U_GRID, -(U_GRID**2))
        assert val == 0.0
        assert arg == 0.0

    def test_constant_ties_break_left(self):
        xs = np.linspace(0.0, 1.0, 11)
        val, arg = ess_sup_grid(xs, np.full_like(xs, 2.5))
        assert (val, arg) == (2.5, 0.0)

    def test_idj_margin(self):
        alpha = alpha_family("idj", r=0.25)
        xs, vals = alpha.grid()
        val, arg = ess_sup_grid(
            xs, vals - xs * xs, refine=lambda u: float(alpha.evaluate(u)) - u * u
        )
        assert val == pytest.approx(0.0, abs=1e-12)
        assert arg == pytest.approx(0.5, abs=1e-6)

    def test_neg_inf_skipped(self):
        xs = np.linspace(0, 1, 5)
        vals = np.array([-np.inf, 1.0, -np.inf, 0.5, -np.inf])
        assert ess_sup_grid(xs, vals) == (1.0, 0.25)
        with pytest.raises(EmptySupportError):
            ess_sup_grid(xs, np.full_like(xs, -np.inf))


class TestLaplaceLogIntegral:
    def test_gaussian_closed_form(self):
        want = 0.005 * (math.log(math.pi) - math.log(100.0))  # -0.01730220...
        got = laplace_log_integral(U_GRID, -(U_GRID**2), 100.0)
        assert got == pytest.approx(want, abs=1e-6)

    def test_constant(self):
        xs = np.linspace(0.0, 1.0, 101)
        assert laplace_log_integral(xs, np.full_like(xs, 2.5), 37.0) == pytest.approx(
            2.5, abs=1e-12
        )

    def test_idj_margin_increases_toward_zero(self):
        alpha = alpha_family("idj", r=0.25)
        xs, vals = alpha.grid()
        seq = [laplace_log_integral(xs, vals - xs * xs, m) for m in (1e2, 1e3, 1e4)]
        assert seq[0] < seq[1] < seq[2] < 0.0

    def test_invalid_m(self):
        with pytest.raises(InvalidParameterError):
            laplace_log_integral(U_GRID, -(U_GRID**2), 0.0)
