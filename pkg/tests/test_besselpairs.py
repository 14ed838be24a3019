import dataclasses
import math

import mpmath
import numpy as np
import pytest

from python_hardyverify.besselpairs import (
    BesselPair,
    PoincareWeight,
    bracket_psi_second,
    get_allowed_pairs,
    hardy_pair,
    log_sinh_over_r,
    make_pair,
    poincare_pair,
    power_pair,
    psi_lambda,
    psi_log_derivative,
    solve_pair,
    validate_pair,
    w_lambda,
)
from python_hardyverify.errors import ValidationError

GRID = np.geomspace(1.0e-2, 20.0, 200)
FRACTIONS = (0.0, 0.3, 0.7, 1.0)


def psi_oracle(N, lam, r):
    with mpmath.workdps(40):
        gamma = mpmath.sqrt((N - 1) ** 2 - 4 * mpmath.mpf(lam))
        k = (N - 1 + gamma) / 2
        r = mpmath.mpf(r)
        return float(r ** (-mpmath.mpf(N - 2) / 2) * (mpmath.sinh(r) / r) ** (-k))


class TestPoincareWeight:
    def test_parameters(self):
        pw = PoincareWeight.of(3, 0.0)
        assert (pw.gamma, pw.h, pw.k, pw.lambda1) == (2.0, 1.5, 2.0, 1.0)

    def test_bottom_of_spectrum(self):
        pw = PoincareWeight.of(5, 4.0)
        assert pw.gamma == 0.0
        assert pw.h == 0.5

    @pytest.mark.parametrize("N, lam", [(3, 5.0), (3, -0.1), (2, 0.3)])
    def test_rejects(self, N, lam):
        with pytest.raises(ValidationError) as e:
            PoincareWeight.of(N, lam)
        assert e.value.field == "lambda"


class TestPsiLambda:
    @pytest.mark.parametrize("N, lam", [(2, 0.0), (3, 0.5), (4, 1.0), (5, 4.0)])
    @pytest.mark.parametrize("r", [0.01, 1.0, 10.0, 50.0])
    def test_against_mpmath(self, N, lam, r):
        psi, _, _ = psi_lambda(PoincareWeight.of(N, lam), np.asarray(r))
        assert float(psi) == pytest.approx(psi_oracle(N, lam, r), rel=1e-12)

    @pytest.mark.parametrize("N, lam", [(3, 0.0), (3, 0.5), (5, 2.0)])
    def test_derivatives(self, N, lam):
        pw = PoincareWeight.of(N, lam)
        r = np.geomspace(0.1, 10.0, 30)
        h = 1.0e-6 * r
        psi_p, dpsi_p, _ = psi_lambda(pw, r + h)
        psi_m, dpsi_m, _ = psi_lambda(pw, r - h)
        _, dpsi, d2psi = psi_lambda(pw, r)
        np.testing.assert_allclose(dpsi, (psi_p - psi_m) / (2 * h), rtol=1e-7)
        np.testing.assert_allclose(d2psi, (dpsi_p - dpsi_m) / (2 * h), rtol=1e-6)

    def test_displayed_bracket_fails(self):
        pw = PoincareWeight.of(3, 0.0)
        r = np.array([0.5, 1.0, 2.0])
        h = 1.0e-6 * r
        fd = (psi_lambda(pw, r + h)[1] - psi_lambda(pw, r - h)[1]) / (2 * h)
        displayed = psi_lambda(pw, r)[0] * bracket_psi_second(pw, r, displayed=True)
        assert np.all(np.abs(displayed - fd) > 1e-3 * np.abs(fd))

    def test_displayed_bracket_agrees_for_gamma_one(self):
        pw = PoincareWeight.of(3, 0.75)
        assert pw.gamma == 1.0
        r = np.array([0.3, 2.0])
        np.testing.assert_array_equal(bracket_psi_second(pw, r), bracket_psi_second(pw, r, displayed=True))

    def test_log_derivative(self):
        pw = PoincareWeight.of(4, 1.5)
        r = np.array([0.2, 3.0])
        psi, dpsi, _ = psi_lambda(pw, r)
        np.testing.assert_allclose(psi_log_derivative(pw, r), dpsi / psi, rtol=1e-14)

    def test_no_overflow(self):
        psi, dpsi, d2psi = psi_lambda(PoincareWeight.of(3, 0.0), np.array([700.0, 800.0]))
        assert np.all(np.isfinite(psi)) and np.all(np.isfinite(dpsi)) and np.all(np.isfinite(d2psi))

    def test_rejects_pole(self):
        with pytest.raises(ValidationError) as e:
            psi_lambda(PoincareWeight.of(3, 0.0), np.array([0.0, 1.0]))
        assert e.value.field == "r"

    @pytest.mark.parametrize("r", [0.3, 5.0, 800.0])
    def test_log_sinh_over_r(self, r):
        with mpmath.workdps(40):
            exact = float(mpmath.log(mpmath.sinh(r) / r))
        assert float(log_sinh_over_r(r)) == pytest.approx(exact, rel=1e-13)


class TestWLambda:
    @pytest.mark.parametrize("N", [2, 3, 4, 5])
    @pytest.mark.parametrize("fraction", FRACTIONS)
    def test_pole_limit(self, N, fraction):
        pw = PoincareWeight.of(N, fraction * ((N - 1) / 2.0) ** 2)
        r = 1.0e-4
        assert float(w_lambda(pw, np.asarray(r))) * r * r == pytest.approx((N - 2) ** 2 / 4.0, abs=1e-6)

    def test_two_dimensional_limit(self):
        pw = PoincareWeight.of(2, 0.0)
        r = 1.0e-3
        assert abs(float(w_lambda(pw, np.asarray(r))) * r * r) < 1e-5

    @pytest.mark.parametrize("N", [3, 5])
    def test_far_field(self, N):
        # W_lambda -> lambda - (N-1) k = -k^2, with O(1/r) corrections
        pw = PoincareWeight.of(N, 0.5 * ((N - 1) / 2.0) ** 2)
        assert float(w_lambda(pw, np.asarray(1000.0))) == pytest.approx(-pw.k**2, abs=5e-2)


class TestValidatePair:
    @pytest.mark.parametrize("N", [2, 3, 4, 5])
    @pytest.mark.parametrize("fraction", FRACTIONS)
    def test_poincare_pair(self, N, fraction):
        result = validate_pair(poincare_pair(N, fraction * ((N - 1) / 2.0) ** 2), GRID)
        assert result.positive
        assert result.residual <= 1e-8

    @pytest.mark.parametrize("N", [2, 3, 5])
    @pytest.mark.parametrize("alpha", [-1.0, 0.0, 1.0, 2.5])
    def test_power_pair(self, N, alpha):
        result = validate_pair(power_pair(N, alpha), GRID)
        assert result.positive
        assert result.residual <= 1e-12

    def test_hardy_pair_at_threshold(self):
        result = validate_pair(hardy_pair(3, 0.25), GRID)
        assert result.positive
        assert result.residual <= 1e-12

    def test_perturbed_weight_is_detected(self):
        bp = poincare_pair(3, 0.5)
        W = bp.W
        perturbed = dataclasses.replace(bp, W=lambda r: 1.01 * W(r))
        assert validate_pair(perturbed, GRID).residual > 1e-4

    def test_residual_is_scaled_by_second_order_terms(self):
        # f = 1/r is harmonic on R^3; f'' scaled by 1.01 leaves 0.02/r^3 against |f''| = 2.02/r^3
        one = lambda r: np.ones_like(np.asarray(r, dtype=float))  # noqa: E731
        bp = BesselPair(
            N=3,
            V=one,
            V_prime=lambda r: 0 * one(r),
            W=lambda r: 0 * one(r),
            f=lambda r: 1.0 / r,
            f_prime=lambda r: -1.0 / r**2,
            f_second=lambda r: 1.01 * 2.0 / r**3,
            log_derivative=lambda r: -1.0 / r,
            name="harmonic",
        )
        result = validate_pair(bp, np.geomspace(0.1, 10.0, 20))
        assert result.positive
        assert result.residual == pytest.approx(0.02 / 2.02, rel=1e-9)

    def test_sign_change_is_reported(self):
        one = lambda r: np.ones_like(np.asarray(r, dtype=float))  # noqa: E731
        bp = BesselPair(
            N=2,
            V=one,
            V_prime=lambda r: 0 * one(r),
            W=one,
            f=np.cos,
            f_prime=lambda r: -np.sin(r),
            f_second=lambda r: -np.cos(r),
            log_derivative=lambda r: -np.tan(r),
            name="cosine",
        )
        result = validate_pair(bp, np.linspace(0.1, 3.0, 30))
        assert not result.positive
        assert 1.5 < result.nonpositive_at < 1.8

    def test_supercritical_hardy_pair_has_no_solution(self):
        bp = hardy_pair(3, 1.0)
        assert not bp.has_solution()
        with pytest.raises(ValidationError) as e:
            validate_pair(bp, GRID)
        assert e.value.field == "pair"

    def test_grid_outside_interval(self):
        bp = dataclasses.replace(power_pair(3, 0.0), interval=(0.0, 1.0))
        with pytest.raises(ValidationError) as e:
            validate_pair(bp, GRID)
        assert e.value.field == "grid"


class TestCatalog:
    def test_names(self):
        assert get_allowed_pairs() == ["poincare", "power", "hardy"]
        assert make_pair("power", 3, alpha=1.0).parameters["constant"] == 0.0
        assert make_pair("hardy", 4, c=1.0).to_dict() == {"pair": "hardy", "N": 4, "interval": [0.0, math.inf], "constant": 1.0}
        with pytest.raises(ValidationError) as e:
            make_pair("bessel", 3)
        assert e.value.field == "pair"

    def test_power_pair_weights(self):
        bp = power_pair(5, 1.0)
        r = np.array([0.5, 2.0])
        np.testing.assert_allclose(bp.W(r), 1.0 * r**-3.0, rtol=1e-15)
        np.testing.assert_allclose(bp.f(r), r**-1.0, rtol=1e-15)


class TestSolvePair:
    def test_subcritical_hardy(self):
        c = 0.2
        s = (1.0 - math.sqrt(1.0 - 4.0 * c)) / 2.0
        bp = hardy_pair(3, c)
        sol = solve_pair(bp.V, bp.W, (1.0e-3, 1.0e3), 1.0, 1.0, -s, 3)
        assert sol.positive
        assert not sol.flagged
        np.testing.assert_allclose(sol.y, sol.r**-s, rtol=1e-7)
        np.testing.assert_allclose(sol.dy, -s * sol.r ** (-s - 1.0), rtol=1e-6)

    def test_supercritical_hardy(self):
        bp = hardy_pair(3, 1.0)
        sol = solve_pair(bp.V, bp.W, (1.0e-3, 1.0e3), 1.0, 1.0, -0.5, 3)
        assert sol.sign_change is not None
        assert not sol.positive
        # y = r^(-1/2) cos(sqrt(3)/2 ln r): roots at ln r = +-pi / sqrt(3), the nearer one below r0
        assert sol.sign_change == pytest.approx(math.exp(-math.pi / math.sqrt(3.0)), rel=1e-6)

    def test_rejects_interval(self):
        bp = hardy_pair(3, 0.2)
        with pytest.raises(ValidationError) as e:
            solve_pair(bp.V, bp.W, (0.0, 1.0), 0.5, 1.0, 0.0, 3)
        assert e.value.field == "interval"
