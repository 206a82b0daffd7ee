"""Reduced interaction energies: closed-form k=1 oracle, signs, gradients."""

import math

import numpy as np
import pytest

from nodalbubbles import (
    ALTERNATING_SIGNS_4,
    AxisKernels,
    Configuration,
    ParameterError,
    base_spacing_points,
    bounds_report,
    find_t0_r0,
    grad_psi_k,
    grad_psi_tilde,
    in_D,
    log_plus,
    mu_embed,
    phi_penalty,
    psi_k,
    psi_tilde,
    robin_min,
    scaling_products,
    spacing_margin,
)

FOUR_PI = 4.0 * math.pi

# k=1 oracle on the unit ball: Psi_1(L) = L^2 h(0)/2 - log L with
# h(0) = 1/(4 pi); minimized at L* = sqrt(4 pi) with value (1 - log(4 pi))/2.
LAMBDA_STAR = 3.5449077018110321
PSI1_MIN = -0.7655121234846454

# Frozen a-priori bracket at the canonical spacing (t0, r0) = (0, 0.06).
LOWER_BOUND = -15.669274432356726
UPPER_BOUND = 4.100326821536164


def config1(L, t=0.0):
    return Configuration(k=1, signs=(1,), Lambda=(L,), t=(t,))


class TestPsiK:
    def test_k1_closed_form(self, kern):
        for L in (0.5, 1.0, 2.0, LAMBDA_STAR):
            expected = 0.5 * L * L / FOUR_PI - math.log(L)
            assert psi_k(config1(L), kern) == pytest.approx(expected,
                                                            rel=1e-12)

    def test_k1_minimum(self, kern):
        assert psi_k(config1(LAMBDA_STAR), kern) == pytest.approx(
            PSI1_MIN, abs=1e-12)
        # Dense-scan confirmation that L* is the 1D minimizer at t = 0.
        Ls = np.linspace(1.0, 8.0, 2001)
        vals = [psi_k(config1(L), kern) for L in Ls]
        assert min(vals) >= PSI1_MIN - 1e-12
        assert abs(Ls[int(np.argmin(vals))] - LAMBDA_STAR) < 0.01

    def test_k2_pair_structure(self, kern):
        # Psi_2 = sum_i (L_i^2 h(t_i)/2 - log L_i) - a1 a2 L1 L2 g(t1,t2):
        # equal signs subtract the attractive interaction.
        cfg = Configuration(k=2, signs=(1, 1), Lambda=(1.5, 2.0),
                            t=(-0.2, 0.3))
        singles = sum(0.5 * L * L * kern.h(t) - math.log(L)
                      for L, t in zip(cfg.Lambda, cfg.t))
        inter = 1.5 * 2.0 * kern.g(-0.2, 0.3)
        assert psi_k(cfg, kern) == pytest.approx(singles - inter, rel=1e-12)

    def test_opposite_signs_flip_interaction(self, kern):
        same = Configuration(k=2, signs=(1, 1), Lambda=(1.5, 2.0),
                             t=(-0.2, 0.3))
        opp = Configuration(k=2, signs=(1, -1), Lambda=(1.5, 2.0),
                            t=(-0.2, 0.3))
        inter = 1.5 * 2.0 * kern.g(-0.2, 0.3)
        assert psi_k(opp, kern) - psi_k(same, kern) == pytest.approx(
            2.0 * inter, rel=1e-10)


class TestPsiTilde:
    def test_requires_alternating_four(self, kern):
        bad = Configuration(k=4, signs=(1, 1, -1, 1),
                            Lambda=(1.0,) * 4, t=(-0.3, -0.1, 0.1, 0.3))
        with pytest.raises(ParameterError):
            psi_tilde(bad, kern)
        too_few = Configuration(k=2, signs=(1, -1), Lambda=(1.0, 1.0),
                                t=(-0.1, 0.1))
        with pytest.raises(ParameterError):
            psi_tilde(too_few, kern)

    def test_equals_psi_k_on_alternating(self, kern, saddle_config):
        assert psi_tilde(saddle_config, kern) == pytest.approx(
            psi_k(saddle_config, kern), rel=1e-12)

    def test_adjacent_interaction_enters_positively(self, domain,
                                                    saddle_config):
        # Bumping g(t2, t3) by delta raises the alternating energy by
        # exactly Lambda_2 Lambda_3 delta (the 2-3 pair has opposite signs,
        # so -a2 a3 L2 L3 g = +L2 L3 g).
        kern = AxisKernels.for_ball(domain)
        base = psi_tilde(saddle_config, kern)
        delta = 1e-3
        t2, t3 = saddle_config.t[1], saddle_config.t[2]
        orig_g = kern.g

        class Bumped:
            def __init__(self, inner):
                self._inner = inner

            def g(self, t, s):
                val = orig_g(t, s)
                if {round(float(t), 12), round(float(s), 12)} == \
                        {round(t2, 12), round(t3, 12)}:
                    val = val + delta
                return val

            def __getattr__(self, name):
                return getattr(self._inner, name)

        bumped = psi_tilde(saddle_config, Bumped(kern))
        L2, L3 = saddle_config.Lambda[1], saddle_config.Lambda[2]
        assert bumped - base == pytest.approx(L2 * L3 * delta, rel=1e-9)


class TestGradients:
    def test_grad_psi_k_matches_fd(self, kern):
        cfg = Configuration(k=2, signs=(1, -1), Lambda=(1.3, 2.1),
                            t=(-0.25, 0.2))
        g = grad_psi_k(cfg, kern)
        assert g.shape == (4,)
        h = 1e-6
        for i in range(2):
            Lp = list(cfg.Lambda)
            Lm = list(cfg.Lambda)
            Lp[i] += h
            Lm[i] -= h
            fd = (psi_k(cfg.with_params(Lambda=Lp), kern)
                  - psi_k(cfg.with_params(Lambda=Lm), kern)) / (2 * h)
            assert g[i] == pytest.approx(fd, rel=1e-6)
        for i in range(2):
            tp = list(cfg.t)
            tm = list(cfg.t)
            tp[i] += h
            tm[i] -= h
            fd = (psi_k(cfg.with_params(t=tp), kern)
                  - psi_k(cfg.with_params(t=tm), kern)) / (2 * h)
            assert g[2 + i] == pytest.approx(fd, rel=1e-6)

    def test_grad_psi_tilde_matches_fd(self, kern, saddle_config):
        cfg = saddle_config.with_params(
            Lambda=tuple(L * 1.1 for L in saddle_config.Lambda))
        g = grad_psi_tilde(cfg, kern)
        assert g.shape == (8,)
        h = 1e-6
        for i in range(4):
            Lp = list(cfg.Lambda)
            Lm = list(cfg.Lambda)
            Lp[i] += h
            Lm[i] -= h
            fd = (psi_tilde(cfg.with_params(Lambda=Lp), kern)
                  - psi_tilde(cfg.with_params(Lambda=Lm), kern)) / (2 * h)
            assert g[i] == pytest.approx(fd, rel=1e-6, abs=1e-9)

    def test_gradient_vanishes_at_k1_minimizer(self, kern):
        g = grad_psi_k(config1(LAMBDA_STAR), kern)
        assert abs(g[0]) <= 1e-12   # dPsi/dLambda at the minimizer
        assert abs(g[1]) <= 1e-12   # dPsi/dt at the Robin minimum t = 0


class TestPenaltyAndEmbedding:
    def test_phi_dominates_psi_tilde(self, kern, saddle_config):
        # Phi flips every interaction attractive, so Phi >= Psi-tilde
        # pointwise on alternating configurations.
        assert phi_penalty(saddle_config, kern) >= psi_tilde(saddle_config,
                                                             kern)

    def test_in_D(self, kern, saddle_config):
        assert in_D(saddle_config, kern, M=100.0)
        assert not in_D(saddle_config, kern, M=-1000.0)

    def test_log_plus(self):
        assert log_plus(0.5) == 0.0
        assert log_plus(1.0) == 0.0
        assert log_plus(math.e) == pytest.approx(1.0, rel=1e-15)

    def test_mu_embed_structure(self):
        t = base_spacing_points(0.0, 0.06)
        cfg = mu_embed(1.0, 1.0, 1.0, t)
        assert cfg.k == 4
        assert cfg.signs == ALTERNATING_SIGNS_4
        assert cfg.t == t
        assert len(set(cfg.Lambda)) <= 2  # inner pair shares one scaling

    def test_scaling_products(self, saddle_config):
        prods = scaling_products(saddle_config)
        L = saddle_config.Lambda
        assert prods[0] == pytest.approx(L[0] * L[1], rel=1e-14)

    def test_base_spacing_points(self):
        # Left-anchored ladder: (t0, t0 + r0, t0 + 2 r0, t0 + 3 r0).
        pts = base_spacing_points(0.1, 0.05)
        assert pts == (pytest.approx(0.1), pytest.approx(0.15),
                       pytest.approx(0.2), pytest.approx(0.25))
        with pytest.raises(ParameterError):
            base_spacing_points(0.0, -0.01)


class TestSearchAndBounds:
    def test_find_t0_r0_canonical(self, domain):
        t0, r0 = find_t0_r0(domain)
        assert t0 == pytest.approx(0.0, abs=1e-12)
        assert r0 == pytest.approx(0.06, abs=1e-12)

    def test_spacing_margin_positive(self, kern):
        assert spacing_margin(kern, 0.0, 0.06) > 0.0

    def test_robin_min(self, kern):
        assert robin_min(kern) == pytest.approx(1.0 / FOUR_PI, rel=1e-9)

    def test_bounds_report_frozen(self, domain):
        rep = bounds_report(domain, None, 0.0, 0.06)
        assert rep.H0 == pytest.approx(1.0 / FOUR_PI, rel=1e-9)
        assert rep.lower == pytest.approx(LOWER_BOUND, abs=1e-9)
        assert rep.upper == pytest.approx(UPPER_BOUND, abs=1e-9)
        assert rep.lower < rep.upper
        d = rep.to_json_dict()
        assert set(d) == {"H0", "lower", "upper", "t0", "r0"}


class TestConfigurationType:
    def test_json_round_trip(self, saddle_config):
        d = saddle_config.to_json_dict()
        back = Configuration.from_json_dict(d)
        assert back == saddle_config

    def test_validation(self):
        with pytest.raises(ParameterError):
            Configuration(k=2, signs=(1, -1), Lambda=(1.0, 1.0),
                          t=(0.3, 0.1))   # not increasing
        with pytest.raises(ParameterError):
            Configuration(k=2, signs=(1, 2), Lambda=(1.0, 1.0),
                          t=(-0.1, 0.1))  # bad sign
        with pytest.raises(ParameterError):
            Configuration(k=2, signs=(1, -1), Lambda=(1.0, -1.0),
                          t=(-0.1, 0.1))  # bad scaling

    def test_with_params(self, saddle_config):
        cfg = saddle_config.with_params(Lambda=(1.0, 2.0, 3.0, 4.0))
        assert cfg.Lambda == (1.0, 2.0, 3.0, 4.0)
        assert cfg.t == saddle_config.t
        assert cfg.signs == saddle_config.signs
