import dataclasses
import json
import math

import pytest

from python_hardyverify.besselpairs import hardy_pair, poincare_pair, power_pair
from python_hardyverify.errors import ValidationError
from python_hardyverify.geometry import euclidean, hyperbolic, scaled_hyperbolic
from python_hardyverify.profiles import random_testfunction
from python_hardyverify.verifier import (
    IDENTITY_TOL,
    SURPLUS_TOL,
    ckn_constant,
    get_allowed_targets,
    verify_ckn,
    verify_ckn_remainder,
    verify_cor23,
    verify_cor24,
    verify_eq12,
    verify_model,
    verify_model_identity,
    verify_thm21,
    verify_thm22,
)

LAMBDAS_H3 = (0.0, 0.5, 0.75, 1.0)
CKN_GRID = [(a, b) for a in (0.0, 0.5, 1.0) for b in (0.0, 1.0, 2.0)]


class TestEq12:
    @pytest.mark.parametrize("lam", LAMBDAS_H3)
    def test_identity(self, H3, lam):
        u = random_testfunction(H3, [0, 1, 2], (0.5, 3.0), seed=31)
        report = verify_eq12(u, lam)
        assert report.kind == "identity"
        assert report.verdict == "pass"
        assert abs(report.gap_or_residual) <= IDENTITY_TOL * report.scale
        assert report.quadrature_converged

    def test_higher_dimension(self):
        u = random_testfunction(hyperbolic(5), [0, 3], (0.2, 2.0), seed=2)
        assert verify_eq12(u, 2.0).passed

    def test_rejects_euclidean(self, radial_bump_R3):
        with pytest.raises(ValidationError) as e:
            verify_eq12(radial_bump_R3, 0.5)
        assert e.value.field == "manifold"

    def test_rejects_lambda(self, radial_bump_H3):
        with pytest.raises(ValidationError) as e:
            verify_eq12(radial_bump_H3, 1.5)
        assert e.value.field == "lambda"


class TestThm21:
    @pytest.mark.parametrize("lam", LAMBDAS_H3)
    def test_single_mode_is_sharp(self, H3, lam):
        u = random_testfunction(H3, [1], (0.5, 3.0), seed=4, j=0)
        report = verify_thm21(u, poincare_pair(3, lam))
        assert report.verdict == "pass"
        assert abs(report.gap_or_residual) <= SURPLUS_TOL * report.scale
        assert report.auxiliary["surplus"] == 0.0

    def test_gap_is_the_surplus(self, H3):
        u = random_testfunction(H3, [1, 2, 4], (0.5, 3.0), seed=17, j=0)
        report = verify_thm21(u, poincare_pair(3, 0.5))
        assert report.passed
        assert report.gap_or_residual > 0
        assert abs(report.auxiliary["surplus_residual"]) <= SURPLUS_TOL * report.scale
        assert report.parameters["subspace_constant"] == 2

    def test_explicit_subspace_index(self, H3):
        u = random_testfunction(H3, [2, 3], (1.0, 2.5), seed=5, j=1)
        assert verify_thm21(u, poincare_pair(3, 0.0), j=0).passed
        assert verify_thm21(u, poincare_pair(3, 0.0), j=1).parameters["subspace_constant"] == 6

    def test_power_pair(self, H3):
        u = random_testfunction(H3, [0, 1], (0.5, 2.0), seed=13)
        assert verify_thm21(u, power_pair(3, 1.0)).passed

    def test_rejects_modes_below_subspace(self, H3):
        u = random_testfunction(H3, [0, 1], (1.0, 2.0), seed=1)
        with pytest.raises(ValidationError) as e:
            verify_thm21(u, poincare_pair(3, 0.5), j=0)
        assert e.value.field == "modes"

    def test_rejects_subspace_index(self, radial_bump_H3):
        with pytest.raises(ValidationError) as e:
            verify_thm21(radial_bump_H3, poincare_pair(3, 0.5), j=-2)
        assert e.value.field == "j"

    def test_rejects_support_outside_interval(self, radial_bump_H3):
        pair = dataclasses.replace(poincare_pair(3, 0.5), interval=(0.0, 2.0))
        with pytest.raises(ValidationError) as e:
            verify_thm21(radial_bump_H3, pair)
        assert e.value.field == "support"


class TestModel27:
    @pytest.mark.parametrize(
        "M, pair",
        [
            (euclidean(3), hardy_pair(3, 0.25)),
            (euclidean(4), power_pair(4, 0.5)),
            (scaled_hyperbolic(3, 2.0), hardy_pair(3, 0.2)),
        ],
    )
    def test_passes(self, M, pair):
        u = random_testfunction(M, [0, 1], (0.5, 2.0), seed=23)
        report = verify_model(u, pair)
        assert report.target == "model27"
        assert report.passed
        assert abs(report.auxiliary["surplus_residual"]) <= SURPLUS_TOL * report.scale


class TestThm22:
    def test_single_mode_is_an_identity(self, H3):
        u = random_testfunction(H3, [2], (0.5, 3.0), seed=3, j=1)
        report = verify_thm22(u)
        assert report.passed
        assert abs(report.gap_or_residual) <= SURPLUS_TOL * report.scale
        assert abs(report.auxiliary["exact_residual"]) <= SURPLUS_TOL * report.scale

    def test_several_modes(self, H3):
        u = random_testfunction(H3, [1, 3], (0.5, 3.0), seed=9, j=0)
        report = verify_thm22(u, V=2.0)
        assert report.passed
        assert report.gap_or_residual == pytest.approx(report.auxiliary["surplus"], rel=1e-8)
        assert report.auxiliary["rhs_exact"] > report.rhs

    def test_model_identity(self):
        u = random_testfunction(scaled_hyperbolic(4, 0.5), [1, 2], (0.3, 2.0), seed=14, j=0)
        report = verify_model_identity(u)
        assert report.target == "model28"
        assert report.passed

    def test_modes_below_subspace(self, H3):
        u = random_testfunction(H3, [0, 2], (0.5, 2.0), seed=2)
        with pytest.raises(ValidationError) as e:
            verify_thm22(u, j=1)
        assert e.value.field == "modes"


class TestCor23:
    @pytest.mark.parametrize("lam", LAMBDAS_H3)
    def test_passes(self, H3, lam):
        u = random_testfunction(H3, [1, 2], (0.5, 3.0), seed=41, j=0)
        report = verify_cor23(u, lam)
        assert report.passed
        assert report.gap_or_residual == pytest.approx(report.auxiliary["surplus"], rel=1e-6, abs=1e-8 * report.scale)
        assert report.auxiliary["displayed_full_gradient_gap"] < 0

    def test_radial(self, radial_bump_H3):
        report = verify_cor23(radial_bump_H3, 1.0)
        assert report.passed
        assert "hardy_h0_gap" not in report.auxiliary

    def test_sinh_coefficient(self, H3):
        u = random_testfunction(H3, [1], (0.5, 3.0), seed=2, j=0)
        report = verify_cor23(u, 0.0)
        # (N/2)^2 - h^2 + j(N+j) with h = 3/2
        assert report.auxiliary["sinh_coefficient"] == pytest.approx(0.0, abs=1e-15)

    def test_h0_hardy(self, H3):
        u = random_testfunction(H3, [1, 2], (0.2, 3.0), seed=7, j=0)
        report = verify_cor23(u, 0.0)
        assert report.auxiliary["hardy_h0_gap"] >= 0

    def test_rejects_euclidean(self, radial_bump_R3):
        with pytest.raises(ValidationError) as e:
            verify_cor23(radial_bump_R3, 0.0)
        assert e.value.field == "manifold"


class TestCor24:
    @pytest.mark.parametrize("M", [euclidean(3), hyperbolic(3)])
    @pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5, 1.0])
    def test_passes(self, M, alpha):
        u = random_testfunction(M, [1, 3], (0.5, 2.5), seed=19, j=0)
        report = verify_cor24(u, alpha)
        assert report.passed
        assert report.auxiliary["hardy_constant"] == pytest.approx(((1.0 - alpha) / 2.0) ** 2)
        assert report.auxiliary["displayed_full_gradient_gap"] < 0

    def test_radial_euclidean(self, radial_bump_R3):
        report = verify_cor24(radial_bump_R3, 0.0)
        assert report.passed
        assert report.auxiliary["surplus"] == 0.0
        assert report.auxiliary["coth_coefficient"] == 1.0


class TestCKNConstant:
    def test_first_term(self):
        assert ckn_constant(3, 0.0, 0.0) == 2.25

    def test_displayed_sign_differs(self):
        assert ckn_constant(3, -1.0, 2.0) == 2.25
        assert ckn_constant(3, -1.0, 2.0, displayed=True) == 0.25

    @pytest.mark.parametrize("alpha, beta", CKN_GRID)
    def test_first_term_dominates_on_grid(self, alpha, beta):
        assert ckn_constant(3, alpha, beta) == (3 - beta) ** 2 / 4.0


class TestCKN:
    @pytest.mark.parametrize("alpha, beta", CKN_GRID)
    def test_euclidean_passes(self, R3, alpha, beta):
        u = random_testfunction(R3, [0, 1], (0.5, 2.0), seed=29)
        report = verify_ckn(u, alpha, beta)
        assert report.kind == "inequality"
        assert report.verdict == "pass"
        assert "divergence_residual_beta" not in report.auxiliary

    def test_hyperbolic_is_measured(self, radial_bump_H3, pinned):
        report = verify_ckn(radial_bump_H3, 0.5, 1.0)
        assert report.kind == "measured"
        assert report.verdict == "measured"
        assert report.passed
        for key in ("divergence_residual_beta", "divergence_residual_alpha2", "divergence_scale_beta"):
            assert key in report.auxiliary
        pinned.check("verifier/ckn25(H3,bump(1,3),0.5,1)", report.gap_or_residual)

    @pytest.mark.parametrize("alpha, beta", CKN_GRID)
    def test_remainder_identity(self, R3, alpha, beta):
        u = random_testfunction(R3, [0, 2], (0.5, 2.0), seed=37)
        report = verify_ckn_remainder(u, alpha, beta)
        assert report.kind == "identity"
        assert report.verdict == "pass"
        assert report.auxiliary["t"] > 0

    def test_remainder_on_hyperbolic_matches_divergence(self, H3):
        u = random_testfunction(H3, [0, 1], (0.5, 2.0), seed=8)
        report = verify_ckn_remainder(u, 0.5, 1.0)
        assert report.kind == "measured"
        assert report.gap_or_residual == pytest.approx(report.auxiliary["divergence_prediction"], rel=1e-6)

    def test_minus_sign_is_not_an_identity(self, radial_bump_R3):
        report = verify_ckn_remainder(radial_bump_R3, 0.0, 0.0)
        assert abs(report.auxiliary["displayed_minus_residual"]) > 1e-3 * report.scale


class TestReport:
    def test_to_json(self, radial_bump_H3):
        report = verify_eq12(radial_bump_H3, 0.5)
        data = json.loads(report.to_json())
        assert data["target"] == "eq12"
        assert data["parameters"]["N"] == 3
        assert data["parameters"]["manifold"] == "hyperbolic"
        assert data["parameters"]["modes"] == [0]
        assert data["quadrature"]["rel_tol"] == 1e-10
        assert "functionals" not in data
        assert math.isfinite(data["scale"])

    def test_targets(self):
        assert get_allowed_targets() == ["eq12", "thm21", "thm22", "cor23", "cor24", "ckn25", "ckn26", "model27", "model28"]


@pytest.mark.slow
class TestSeededSweeps:
    @pytest.mark.parametrize("seed", range(20))
    def test_eq12(self, seed):
        N = (2, 3, 5)[seed % 3]
        lam1 = ((N - 1) / 2.0) ** 2
        lam = (0.0, 0.3, 1.0)[(seed // 3) % 3] * lam1
        modes = [n for n in range(4) if (seed >> n) & 1] or [0]
        support = (0.5, 3.0) if seed % 2 else (1.0, 5.0)
        report = verify_eq12(random_testfunction(hyperbolic(N), modes, support, seed=100 + seed), lam)
        assert report.verdict == "pass"
        assert abs(report.gap_or_residual) <= IDENTITY_TOL * report.scale

    @pytest.mark.parametrize("j", [0, 1, 2])
    @pytest.mark.parametrize("seed", range(10))
    def test_thm21(self, j, seed):
        modes = [j + 1, j + 1 + (seed % 3) + 1]
        u = random_testfunction(hyperbolic(3), modes, (0.5, 3.0), seed=200 + seed, j=j)
        report = verify_thm21(u, poincare_pair(3, 0.25 * (seed % 5)), j=j)
        assert report.passed
        assert report.gap_or_residual >= -1e-9 * report.scale
        assert report.gap_or_residual == pytest.approx(report.auxiliary["surplus"], rel=1e-8, abs=1e-8 * report.scale)

    @pytest.mark.parametrize("j", [0, 1])
    @pytest.mark.parametrize("lam", [0.0, 0.5, 1.0])
    def test_cor23(self, j, lam):
        u = random_testfunction(hyperbolic(3), [j + 1, j + 2], (0.5, 3.0), seed=300 + j, j=j)
        assert verify_cor23(u, lam, j=j).passed

    @pytest.mark.parametrize("j", [0, 1])
    @pytest.mark.parametrize("alpha", [-1.0, 0.0, 1.0, 2.0])
    def test_cor24(self, j, alpha):
        u = random_testfunction(hyperbolic(3), [j + 1, j + 3], (0.5, 3.0), seed=400 + j, j=j)
        assert verify_cor24(u, alpha, j=j).passed

    @pytest.mark.parametrize("N", [2, 3, 4])
    @pytest.mark.parametrize("seed", range(0, 50, 5))
    def test_hardy_on_h0(self, N, seed):
        u = random_testfunction(hyperbolic(N), [1 + seed % 3], (0.2, 3.0), seed=500 + seed, j=0)
        assert verify_cor23(u, 0.0).auxiliary["hardy_h0_gap"] >= 0

    @pytest.mark.parametrize("seed", range(20))
    def test_thm22_gap_grows_with_higher_modes(self, seed):
        u = random_testfunction(hyperbolic(3), [1, 2 + seed % 3], (0.5, 3.0), seed=600 + seed, j=0)
        report = verify_thm22(u)
        assert report.passed
        assert report.gap_or_residual > 0
