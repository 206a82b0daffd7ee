"""Standard-bubble constants: closed-form oracles, identities, scale maps.

Frozen literals are exact closed forms (Beta/digamma evaluations of the
radial integrals), independently cross-checked with 50-digit mpmath
quadrature before being written down here.
"""

import math

import numpy as np
import pytest

from nodalbubbles import (
    BubbleParams,
    ParameterError,
    QuadratureSettings,
    alpha_N,
    bubble_integrals,
    compute_constants,
    eval_bubble,
    eval_bubble_gradient,
    lambda_of_Lambda,
    lambda_of_Lambda_quadratic,
    sigma_N,
    single_bubble_energy_limit,
    two_star,
)

# N=3 closed forms: int U^6 = 3^{3/2} pi^2 / 4, int U^5 = 3^{1/4} * 4 pi.
INT_U6_N3 = 12.820992204969127
INT_U5_N3 = 16.538273802687954
INT_U6_LOGU_N3 = -2.1602616502888234
OMEGA3 = 2.1368320341615211
C3 = 10.684160170807606
GAMMA3 = -4.4678045685905848

# Higher dimensions, same derivation route (frozen before implementation).
OMEGA4 = 26.318945069571623
C4 = 78.956835208714869
C_SMALL_4 = 0.0021108579925487036
GAMMA4 = -79.923209728237358
OMEGA5 = 253.30807942882157
C5 = 591.05218533391699
C_SMALL_5 = 0.00069941137100930567
GAMMA5 = -1053.5670310027475


def rel(a, b):
    return abs(a - b) / abs(b)


class TestBasicScalars:
    def test_two_star(self):
        assert two_star(3) == 6.0
        assert two_star(4) == 4.0
        assert two_star(6) == 3.0

    def test_alpha_N_closed_form(self):
        assert alpha_N(3) == pytest.approx(3.0 ** 0.25, rel=1e-15)
        assert alpha_N(4) == pytest.approx(8.0 ** 0.5, rel=1e-15)
        assert alpha_N(5) == pytest.approx(15.0 ** 0.75, rel=1e-15)

    def test_sigma_N(self):
        assert sigma_N(3) == pytest.approx(4.0 * math.pi, rel=1e-15)
        assert sigma_N(4) == pytest.approx(2.0 * math.pi ** 2, rel=1e-15)


class TestBubbleIntegralsN3:
    def test_closed_forms(self):
        ints = bubble_integrals(3)
        assert rel(ints.int_U_2star, INT_U6_N3) <= 1e-10
        assert rel(ints.int_U_2star_m1, INT_U5_N3) <= 1e-10
        assert rel(ints.int_U_2star_logU, INT_U6_LOGU_N3) <= 1e-8

    def test_gradient_energy_identity(self):
        # int |grad U|^2 = int U^{2*} (the bubble solves -ΔU = U^{2*-1}).
        ints = bubble_integrals(3)
        assert rel(ints.int_grad_sq, ints.int_U_2star) <= 1e-8

    def test_flux_identity_all_dims(self):
        # int U^{2*-1} = alpha_N (N-2) sigma_N: total flux of -ΔU.
        for N in (3, 4, 5):
            ints = bubble_integrals(N)
            exact = alpha_N(N) * (N - 2) * sigma_N(N)
            assert rel(ints.int_U_2star_m1, exact) <= 1e-9

    def test_quad_error_bar(self):
        ints = bubble_integrals(3)
        assert 0 < ints.quad_error < 1e-9
        assert abs(ints.int_U_2star - INT_U6_N3) <= 10 * ints.quad_error


class TestConstantsTable:
    def test_n3_values(self, table3):
        assert rel(table3.omegaN, OMEGA3) <= 1e-10
        assert rel(table3.CN, C3) <= 1e-10
        assert table3.cN == pytest.approx(1.0 / 128.0, rel=1e-12)
        assert rel(table3.gammaN, GAMMA3) <= 1e-8
        assert table3.alphaN == pytest.approx(3.0 ** 0.25, rel=1e-15)

    def test_cn_identity(self, table3):
        # C_N = (1 - 1/2*) int U^{2*}; for N=3 that is (5/6) int U^6.
        assert abs(table3.CN - 5.0 / 6.0 * INT_U6_N3) <= 1e-10 * abs(C3)

    def test_omega_identity(self, table3):
        # omega_N = int U^{2*} / 2*.
        assert rel(table3.omegaN, INT_U6_N3 / 6.0) <= 1e-12

    def test_small_c_identity(self, table3):
        # c_N = omega_N / (int U^{2*-1})^2; equals 1/128 exactly for N=3.
        assert rel(table3.cN, OMEGA3 / INT_U5_N3 ** 2) <= 1e-12

    def test_n4_n5_values(self):
        t4 = compute_constants(4)
        assert rel(t4.omegaN, OMEGA4) <= 1e-9
        assert rel(t4.CN, C4) <= 1e-9
        assert rel(t4.cN, C_SMALL_4) <= 1e-9
        assert rel(t4.gammaN, GAMMA4) <= 1e-8
        assert t4.quad_error < 1e-9
        t5 = compute_constants(5)
        assert rel(t5.omegaN, OMEGA5) <= 1e-9
        assert rel(t5.CN, C5) <= 1e-9
        assert rel(t5.cN, C_SMALL_5) <= 1e-9
        assert rel(t5.gammaN, GAMMA5) <= 1e-8

    def test_rejects_low_dimension(self):
        with pytest.raises(ParameterError):
            compute_constants(2)

    def test_json_dict_flags_derived_values(self, table3):
        d = table3.to_json_dict()
        assert d["values_implementer_derived"] is True
        assert set(d) >= {"N", "alphaN", "CN", "cN", "omegaN", "gammaN",
                          "quad_error"}

    def test_custom_quadrature_settings(self):
        loose = compute_constants(3, QuadratureSettings(abs_tol=1e-8))
        assert rel(loose.omegaN, OMEGA3) <= 1e-6


class TestScaleMaps:
    def test_linear_map_n3(self, table3):
        # lam = (c_N Lambda)^{1/(N-2)}: Lambda = 1/c_N maps to 1.
        assert lambda_of_Lambda(1.0 / table3.cN, table3) == pytest.approx(
            1.0, rel=1e-14)
        assert lambda_of_Lambda(1.0, table3) == pytest.approx(
            table3.cN, rel=1e-14)

    def test_linear_map_n4(self):
        t4 = compute_constants(4)
        lam = lambda_of_Lambda(2.0, t4)
        assert lam == pytest.approx((2.0 * t4.cN) ** 0.5, rel=1e-14)

    def test_quadratic_map(self, table3):
        # lam = (c_N Lambda^2)^{1/(N-2)}: the map under which the energy
        # expansion holds (interaction weights Lambda_i Lambda_j).
        assert lambda_of_Lambda_quadratic(1.0, table3) == pytest.approx(
            table3.cN, rel=1e-14)
        assert lambda_of_Lambda_quadratic(3.0, table3) == pytest.approx(
            9.0 * table3.cN, rel=1e-14)

    def test_maps_reject_nonpositive(self, table3):
        with pytest.raises(ParameterError):
            lambda_of_Lambda(0.0, table3)
        with pytest.raises(ParameterError):
            lambda_of_Lambda_quadratic(-1.0, table3)

    def test_single_bubble_energy_limit(self, table3):
        # E_N = (1/2 - 1/2*) int U^{2*} = (2/(N-2)) omega_N.
        E = single_bubble_energy_limit(table3)
        assert rel(E, 2.0 * OMEGA3) <= 1e-12
        assert rel(E, (0.5 - 1.0 / 6.0) * INT_U6_N3) <= 1e-10


class TestBubbleEvaluation:
    def test_peak_value(self):
        p = BubbleParams(N=3, eps=0.04, lam=1.0, xi=np.zeros(3))
        m = p.core_width
        assert m == pytest.approx(0.04, rel=1e-15)
        # U(xi) = alpha_N m^{-(N-2)/2}.
        assert eval_bubble(p, p.xi) == pytest.approx(
            alpha_N(3) / math.sqrt(m), rel=1e-13)

    def test_far_field_decay(self):
        p = BubbleParams(N=3, eps=0.01, lam=1.0, xi=np.zeros(3))
        x = np.array([10.0, 0.0, 0.0])
        # U ~ alpha_N m^{(N-2)/2} |x|^{2-N} far from the core.
        expected = alpha_N(3) * math.sqrt(p.core_width) / 10.0
        assert eval_bubble(p, x) == pytest.approx(expected, rel=1e-3)

    def test_vectorized_evaluation(self):
        p = BubbleParams(N=3, eps=0.05, lam=2.0, xi=np.array([0.1, 0.0, 0.0]))
        xs = np.array([[0.1, 0.0, 0.0], [0.5, 0.2, -0.1], [0.0, 0.0, 0.9]])
        vals = eval_bubble(p, xs)
        assert vals.shape == (3,)
        for i in range(3):
            assert vals[i] == pytest.approx(eval_bubble(p, xs[i]), rel=1e-14)

    def test_gradient_matches_finite_differences(self):
        p = BubbleParams(N=3, eps=0.05, lam=1.3, xi=np.array([0.2, -0.1, 0.0]))
        x = np.array([0.35, 0.05, -0.2])
        g = eval_bubble_gradient(p, x)
        h = 1e-6
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd = (eval_bubble(p, x + e) - eval_bubble(p, x - e)) / (2 * h)
            assert g[i] == pytest.approx(fd, rel=1e-7, abs=1e-10)

    def test_solves_critical_equation(self):
        # -ΔU = U^{2*-1} checked by a second-difference stencil.
        p = BubbleParams(N=3, eps=0.05, lam=1.0, xi=np.zeros(3))
        x = np.array([0.3, 0.1, -0.05])
        h = 1e-4
        lap = 0.0
        u0 = eval_bubble(p, x)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            lap += (eval_bubble(p, x + e) - 2.0 * u0
                    + eval_bubble(p, x - e)) / h ** 2
        assert -lap == pytest.approx(u0 ** 5, rel=1e-4)

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            BubbleParams(N=2, eps=0.1, lam=1.0, xi=np.zeros(2))
        with pytest.raises(ParameterError):
            BubbleParams(N=3, eps=-0.1, lam=1.0, xi=np.zeros(3))
        with pytest.raises(ParameterError):
            BubbleParams(N=3, eps=0.1, lam=0.0, xi=np.zeros(3))
        with pytest.raises(ParameterError):
            BubbleParams(N=3, eps=0.1, lam=1.0, xi=np.zeros(4))

    def test_core_width_n4(self):
        p = BubbleParams(N=4, eps=0.04, lam=3.0, xi=np.zeros(4))
        assert p.core_width == pytest.approx(3.0 * 0.2, rel=1e-14)
