"""Ball Green/Robin kernels: image-formula oracles and hypothesis checks."""

import math

import numpy as np
import pytest

from nodalbubbles import (
    AxisSection,
    BallDomain,
    DomainError,
    ParameterError,
    SingularityError,
    axis_derivatives,
    axis_g,
    axis_g_dt,
    axis_h,
    axis_h_d1,
    axis_h_d2,
    check_boundary_expansion,
    check_directional_monotonicity,
    grad_x_G,
    green_G,
    harmonic_defect_order,
    robin_H,
    validate_A3,
)

FOUR_PI = 4.0 * math.pi


class TestGreenFunction:
    def test_center_oracle(self, domain):
        # G(0, y) = (1/(4 pi)) (1/|y| - 1) on the unit ball.
        y = np.array([0.5, 0.0, 0.0])
        assert green_G(domain, np.zeros(3), y) == pytest.approx(
            (1.0 / 0.5 - 1.0) / FOUR_PI, rel=1e-14)
        y2 = np.array([0.0, 0.25, 0.0])
        assert green_G(domain, np.zeros(3), y2) == pytest.approx(
            (1.0 / 0.25 - 1.0) / FOUR_PI, rel=1e-14)

    def test_symmetry_sampled(self, domain):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(1000):
            x = rng.uniform(-0.57, 0.57, size=3)
            y = rng.uniform(-0.57, 0.57, size=3)
            if np.linalg.norm(x - y) < 1e-3:
                continue
            gxy, gyx = green_G(domain, x, y), green_G(domain, y, x)
            worst = max(worst, abs(gxy - gyx) / max(abs(gxy), 1.0))
        assert worst <= 1e-13

    def test_boundary_exact_zero(self, domain):
        rng = np.random.default_rng(11)
        y = np.array([0.2, 0.1, -0.3])
        for _ in range(64):
            v = rng.normal(size=3)
            x = v / np.linalg.norm(v)
            assert green_G(domain, x, y) == 0.0

    def test_positive_inside(self, domain):
        rng = np.random.default_rng(3)
        for _ in range(200):
            x = rng.uniform(-0.5, 0.5, size=3)
            y = rng.uniform(-0.5, 0.5, size=3)
            if np.linalg.norm(x - y) < 1e-2:
                continue
            assert green_G(domain, x, y) > 0.0

    def test_coincident_points_rejected(self, domain):
        x = np.array([0.1, 0.2, 0.3])
        with pytest.raises(SingularityError):
            green_G(domain, x, x.copy())

    def test_outside_rejected(self, domain):
        with pytest.raises(DomainError):
            green_G(domain, np.array([1.5, 0.0, 0.0]), np.zeros(3))

    def test_gradient_matches_finite_differences(self, domain):
        x = np.array([0.25, -0.1, 0.3])
        y = np.array([-0.2, 0.15, 0.05])
        g = grad_x_G(domain, x, y)
        h = 1e-6
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd = (green_G(domain, x + e, y) - green_G(domain, x - e, y)) / (2 * h)
            assert g[i] == pytest.approx(fd, rel=2e-8, abs=1e-11)


class TestRobinFunction:
    def test_center_diagonal(self, domain):
        # H(x, x) = 1/(4 pi (1 - |x|^2)) on the unit ball.
        assert robin_H(domain, np.zeros(3), np.zeros(3)) == pytest.approx(
            1.0 / FOUR_PI, rel=1e-13)
        x = np.array([0.5, 0.0, 0.0])
        assert robin_H(domain, x, x) == pytest.approx(
            1.0 / (FOUR_PI * 0.75), rel=1e-13)

    def test_dilation_scaling(self):
        # H_{R Omega}(R x, R x) = R^{2-N} H_Omega(x, x).
        big = BallDomain(N=3, center=np.zeros(3), radius=2.0)
        x = np.array([0.3, 0.1, 0.0])
        small_val = robin_H(BallDomain.unit(3), x, x)
        assert robin_H(big, 2.0 * x, 2.0 * x) == pytest.approx(
            small_val / 2.0, rel=1e-13)

    def test_fundamental_solution_split(self, domain):
        # G = kappa |x-y|^{2-N} - H with kappa = 1/((N-2) sigma_N).
        x = np.array([0.2, 0.0, 0.1])
        y = np.array([-0.1, 0.3, 0.0])
        kappa = 1.0 / FOUR_PI
        lhs = green_G(domain, x, y)
        rhs = kappa / np.linalg.norm(x - y) - robin_H(domain, x, y)
        assert lhs == pytest.approx(rhs, rel=1e-13)

    def test_harmonicity_order(self, domain):
        # Discrete Laplacian of H in x vanishes at measured order ~2.
        x = np.array([0.2, -0.15, 0.1])
        y = np.array([-0.3, 0.05, 0.2])
        order = harmonic_defect_order(domain, x, y, h0=0.02)
        assert 1.7 <= order <= 2.3


class TestAxisKernels:
    def test_axis_values(self, domain, kern):
        sec = AxisSection.of_ball(domain)
        assert axis_h(domain, sec, 0.0) == pytest.approx(1.0 / FOUR_PI,
                                                         rel=1e-13)
        assert axis_h(domain, sec, 0.5) == pytest.approx(
            1.0 / (3.0 * math.pi), rel=1e-13)
        assert axis_g(domain, sec, 0.0, 0.5) == pytest.approx(
            1.0 / FOUR_PI, rel=1e-13)
        assert kern.h(0.0) == pytest.approx(1.0 / FOUR_PI, rel=1e-13)

    def test_h_second_derivative_closed_form(self, domain):
        # h(t) = 1/(4 pi (1-t^2)) gives
        # h''(t) = (1/(4 pi)) (2 (1-t^2)^{-2} + 8 t^2 (1-t^2)^{-3}).
        sec = AxisSection.of_ball(domain)
        for t in (-0.6, -0.25, 0.0, 0.3, 0.7):
            s = 1.0 - t * t
            exact = (2.0 / s ** 2 + 8.0 * t * t / s ** 3) / FOUR_PI
            assert axis_h_d2(domain, sec, t) == pytest.approx(exact, rel=1e-6)

    def test_h_second_derivative_at_center(self, domain):
        sec = AxisSection.of_ball(domain)
        assert abs(axis_h_d2(domain, sec, 0.0) - 1.0 / (2.0 * math.pi)) <= 1e-6

    def test_h_first_derivative(self, domain):
        sec = AxisSection.of_ball(domain)
        t, h = 0.35, 1e-6
        fd = (axis_h(domain, sec, t + h) - axis_h(domain, sec, t - h)) / (2 * h)
        assert axis_h_d1(domain, sec, t) == pytest.approx(fd, rel=1e-7)

    def test_g_dt_matches_finite_differences(self, domain):
        sec = AxisSection.of_ball(domain)
        t, s, h = 0.2, -0.4, 1e-6
        fd = (axis_g(domain, sec, t + h, s) - axis_g(domain, sec, t - h, s)) / (2 * h)
        assert axis_g_dt(domain, sec, t, s) == pytest.approx(fd, rel=1e-7)

    def test_axis_derivatives_bundle(self, domain):
        sec = AxisSection.of_ball(domain)
        d = axis_derivatives(domain, sec, 0.2, -0.4)
        assert d["dg_dt"] == pytest.approx(
            axis_g_dt(domain, sec, 0.2, -0.4), rel=1e-14)
        assert d["h_diag_d2"] > 0.0

    def test_positions_outside_chord_rejected(self, domain):
        sec = AxisSection.of_ball(domain)
        with pytest.raises((ParameterError, DomainError)):
            axis_h(domain, sec, 1.5)


class TestHypothesisChecks:
    def test_validate_a3_passes(self, domain):
        sec = AxisSection.of_ball(domain)
        convexity, monotonicity = validate_A3(domain, sec)
        assert convexity.passed and convexity.worst_value > 0.0
        assert monotonicity.passed and monotonicity.worst_value < 0.0
        assert convexity.sample_count >= 256
        assert monotonicity.sample_count >= 9000

    def test_boundary_expansion_passes(self, domain):
        reports = check_boundary_expansion(domain)
        assert len(reports) >= 2
        assert all(r.passed for r in reports)
        # Fitted constants stable within a factor 2 across distance halvings.
        for r in reports[:2]:
            assert 0.5 <= r.worst_value <= 2.0

    def test_directional_monotonicity_passes(self, domain):
        report = check_directional_monotonicity(domain, n_samples=1000, seed=0)
        assert report.passed
        assert report.worst_value < 0.0
        assert report.sample_count == 1000

    def test_report_serialization(self, domain):
        report = check_directional_monotonicity(domain, n_samples=50, seed=1)
        d = report.to_json_dict()
        assert d["pass"] is report.passed
        assert set(d) >= {"check", "sample_count", "worst_value", "pass"}


class TestDomainValidation:
    def test_bad_radius(self):
        with pytest.raises(ParameterError):
            BallDomain(N=3, center=np.zeros(3), radius=-1.0)

    def test_bad_dimension(self):
        with pytest.raises(ParameterError):
            BallDomain(N=2, center=np.zeros(2), radius=1.0)

    def test_bad_section(self):
        with pytest.raises(ParameterError):
            AxisSection(a=1.0, b=-1.0)
