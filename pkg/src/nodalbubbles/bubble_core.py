"""Standard bubble profiles and the dimension-dependent energy constants.

The *bubble* with concentration parameter ``eps``, scaling ``lam`` and center
``xi`` in dimension ``N >= 3`` is

    U(x) = alpha_N * ( m / (m^2 + |x - xi|^2) )^{(N-2)/2},
    m    = lam * eps^{1/(N-2)},
    alpha_N = (N(N-2))^{(N-2)/4}.

``m`` is the *core width*: the profile is of height ~ m^{-(N-2)/2} on a ball
of radius ~ m and solves the critical equation -ΔU = U^{2*-1} on R^N exactly,
where 2* = 2N/(N-2) is the critical Sobolev exponent.

The unit-parameter profile ``U_0 = U`` with ``m = 1`` determines four
dimension-dependent constants used by the asymptotic energy expansion of a
projected multi-bubble ansatz:

    C_N     = ∫|∇U_0|^2 - (1/2*) ∫U_0^{2*},
    c_N     = (1/2*) ∫U_0^{2*} / (∫U_0^{2*-1})^2,
    omega_N = (1/2*) ∫U_0^{2*},
    gamma_N = (1/(2*)^2) ∫U_0^{2*} - (1/2*) ∫U_0^{2*} log U_0
              + (1/2) omega_N log c_N.

All integrals reduce, by radial symmetry, to one-dimensional integrals over
the radius; they are evaluated here by adaptive quadrature on a finite window
plus an explicit asymptotic tail, cross-checked against a fixed Gauss-Legendre
rule, and reported together with an error estimate.  None of these constants
is quoted numerically by the underlying theory, so reports flag the values as
implementer-derived.

The scaling change of variables ``lam = (c_N * Lambda)^{1/(N-2)}`` converts
the dimensionless scaling ``Lambda`` used by the reduced energies into the
bubble parameter ``lam``; :func:`lambda_of_Lambda_quadratic` applies the
variant ``lam = (c_N * Lambda^2)^{1/(N-2)}`` under which the computed energy
of a projected multi-bubble ansatz reproduces the reduced energy's quadratic
scaling weights term by term (see the pde harness module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ParameterError, QuadratureError

__all__ = [
    "BubbleParams",
    "ConstantsTable",
    "QuadratureSettings",
    "BubbleIntegrals",
    "alpha_N",
    "sigma_N",
    "two_star",
    "eval_bubble",
    "eval_bubble_gradient",
    "bubble_integrals",
    "compute_constants",
    "lambda_of_Lambda",
    "lambda_of_Lambda_quadratic",
    "single_bubble_energy_limit",
]


def alpha_N(N: int) -> float:
    """The normalizing constant (N(N-2))^{(N-2)/4} of the bubble profile."""
    if N < 3:
        raise ParameterError(f"dimension N must be >= 3, got {N}")
    return float((N * (N - 2)) ** ((N - 2) / 4.0))


def sigma_N(N: int) -> float:
    """Surface area 2 pi^{N/2} / Gamma(N/2) of the unit sphere in R^N."""
    if N < 1:
        raise ParameterError(f"dimension N must be >= 1, got {N}")
    return float(2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0))


def two_star(N: int) -> float:
    """Critical Sobolev exponent 2N/(N-2)."""
    if N < 3:
        raise ParameterError(f"dimension N must be >= 3, got {N}")
    return 2.0 * N / (N - 2.0)


@dataclass(frozen=True)
class BubbleParams:
    """Parameters (N, eps, lam, xi) of a single bubble.

    Attributes
    ----------
    N : int
        Ambient dimension, >= 3.
    eps : float
        Subcriticality parameter, > 0.
    lam : float
        Scaling parameter, > 0.
    xi : numpy.ndarray
        Center, shape ``(N,)``.
    """

    N: int
    eps: float
    lam: float
    xi: np.ndarray

    def __post_init__(self):
        if self.N < 3:
            raise ParameterError(f"dimension N must be >= 3, got {self.N}")
        if not (self.eps > 0):
            raise ParameterError(f"eps must be positive, got {self.eps}")
        if not (self.lam > 0):
            raise ParameterError(f"lam must be positive, got {self.lam}")
        xi = np.asarray(self.xi, dtype=float).reshape(-1)
        if xi.size != self.N:
            raise ParameterError(
                f"center xi must have length N={self.N}, got {xi.size}")
        object.__setattr__(self, "xi", xi)

    @property
    def core_width(self) -> float:
        """The concentration length scale m = lam * eps^{1/(N-2)}."""
        return self.lam * self.eps ** (1.0 / (self.N - 2.0))


def eval_bubble(p: BubbleParams, x) -> float | np.ndarray:
    """Evaluate the bubble profile at one or many points.

    Parameters
    ----------
    p : BubbleParams
    x : array_like
        A single point of shape ``(N,)`` or a batch of shape ``(..., N)``.

    Returns
    -------
    float or numpy.ndarray
        ``U(x)``; strictly positive, radially decreasing in ``|x - xi|``.
    """
    x = np.asarray(x, dtype=float)
    scalar = (x.ndim == 1)
    m = p.core_width
    r2 = np.sum((x - p.xi) ** 2, axis=-1)
    val = alpha_N(p.N) * (m / (m * m + r2)) ** ((p.N - 2) / 2.0)
    return float(val) if scalar else val


def eval_bubble_gradient(p: BubbleParams, x) -> np.ndarray:
    """Spatial gradient of :func:`eval_bubble`.

    Differentiating ``U = alpha (m / (m^2 + r^2))^{(N-2)/2}`` in ``x`` gives

        ∇U(x) = -(N-2) * U(x) * (x - xi) / (m^2 + |x - xi|^2),

    which vanishes at the center and always points toward ``xi``.
    Accepts the same point shapes as :func:`eval_bubble`.
    """
    x = np.asarray(x, dtype=float)
    scalar = (x.ndim == 1)
    m = p.core_width
    d = x - p.xi
    r2 = np.sum(d * d, axis=-1)
    u = alpha_N(p.N) * (m / (m * m + r2)) ** ((p.N - 2) / 2.0)
    grad = -(p.N - 2) * u[..., None] * d / (m * m + r2)[..., None]
    return grad[0] if (scalar and grad.ndim == 2) else grad


@dataclass(frozen=True)
class QuadratureSettings:
    """Controls for the radial quadratures behind :func:`compute_constants`.

    Attributes
    ----------
    r_cut : float
        Outer edge of the adaptive window; beyond it the integrand is replaced
        by its two-term power-law asymptotics (added in closed form) and the
        third term bounds the tail error.
    abs_tol : float
        Target absolute tolerance for each radial integral.
    cross_check_nodes : int
        Node count for the independent Gauss-Legendre cross-check rule on the
        compactified half-line.
    """

    r_cut: float = 1.0e4
    abs_tol: float = 1.0e-10
    cross_check_nodes: int = 400


@dataclass(frozen=True)
class BubbleIntegrals:
    """Whole-space integrals of the unit bubble ``U_0`` in dimension N.

    ``int_U_2star`` is ∫U_0^{2*}, ``int_U_2star_m1`` is ∫U_0^{2*-1},
    ``int_U_2star_logU`` is ∫U_0^{2*} log U_0, and ``int_grad_sq`` is
    ∫|∇U_0|^2 (equal to ∫U_0^{2*} analytically; computed independently as a
    consistency probe).  ``quad_error`` bounds the worst absolute error among
    the four.
    """

    N: int
    int_U_2star: float
    int_U_2star_m1: float
    int_U_2star_logU: float
    int_grad_sq: float
    quad_error: float


@dataclass(frozen=True)
class ConstantsTable:
    """The five constants of the energy expansion plus a quadrature error bar.

    Invariants: ``alphaN = (N(N-2))^{(N-2)/4}`` exactly, and
    ``CN = (1 - 1/2*) * (2* * omegaN)`` up to quadrature error (a consequence
    of ∫|∇U_0|^2 = ∫U_0^{2*}).
    """

    N: int
    alphaN: float
    CN: float
    cN: float
    omegaN: float
    gammaN: float
    quad_error: float

    def to_json_dict(self) -> dict:
        """Serializable report with the documented field names."""
        return {
            "N": self.N,
            "alphaN": self.alphaN,
            "CN": self.CN,
            "cN": self.cN,
            "omegaN": self.omegaN,
            "gammaN": self.gammaN,
            "quad_error": self.quad_error,
            "values_implementer_derived": True,
        }


def _tail_power_log(R: float, m: float, want_log: bool) -> tuple[float, float]:
    """Closed forms for ∫_R^∞ r^{-m} dr and, when asked, ∫_R^∞ r^{-m} log r dr.

    Requires m > 1.  Returns the pair (plain, log) with the log entry zero
    when ``want_log`` is false.
    """
    plain = R ** (1.0 - m) / (m - 1.0)
    logpart = 0.0
    if want_log:
        logpart = R ** (1.0 - m) * (math.log(R) / (m - 1.0) + 1.0 / (m - 1.0) ** 2)
    return plain, logpart


def _radial_integral(N: int, p_exp: float, quad: QuadratureSettings,
                     log_factor: bool = False) -> tuple[float, float]:
    """Integrate r^{N-1} (1+r^2)^{-p} [log(1+r^2)] over (0, ∞).

    Adaptive quadrature on (0, r_cut] plus the first two terms of the
    large-r expansion (1+r^2)^{-p} = r^{-2p}(1 - p r^{-2} + O(r^{-4})) in
    closed form; the third binomial term bounds the truncation.  Returns
    ``(value, error_bound)``.
    """
    R = quad.r_cut

    if log_factor:
        def f(r):
            return r ** (N - 1) * (1.0 + r * r) ** (-p_exp) * math.log1p(r * r)
    else:
        def f(r):
            return r ** (N - 1) * (1.0 + r * r) ** (-p_exp)

    val, err = integrate.quad(f, 0.0, R, epsabs=quad.abs_tol * 1e-2,
                              epsrel=1e-13, limit=400)

    # Tail: integrand ~ r^{N-1-2p} (1 - p r^{-2}) * [2 log r + r^{-2} ...].
    m0 = 2.0 * p_exp - (N - 1.0)          # r^{-m0} leading power
    if m0 <= 1.0:
        raise QuadratureError(
            f"tail of radial integral does not converge (power {m0})")
    t0_plain, t0_log = _tail_power_log(R, m0, log_factor)
    t1_plain, t1_log = _tail_power_log(R, m0 + 2.0, log_factor)
    if log_factor:
        # (1 - p r^{-2} + ...)(2 log r + r^{-2} - ...):
        #   r^{-m0} * 2 log r  +  r^{-m0-2} * (1 - 2p log r)  +  O(r^{-m0-4} log r)
        tail = 2.0 * t0_log + t1_plain - 2.0 * p_exp * t1_log
        t2_plain, t2_log = _tail_power_log(R, m0 + 4.0, True)
        tail_err = (2.0 * abs(p_exp * (p_exp + 1.0)) * t2_log
                    + (1.0 + 2.0 * p_exp) * t2_plain)
    else:
        tail = t0_plain - p_exp * t1_plain
        t2_plain, _ = _tail_power_log(R, m0 + 4.0, False)
        tail_err = abs(p_exp * (p_exp + 1.0) / 2.0) * t2_plain

    return val + tail, err + tail_err


def _radial_integral_gauss(N: int, p_exp: float, nodes: int,
                           log_factor: bool = False) -> float:
    """Independent fixed rule: Gauss-Legendre on u in (0,1), r = u/(1-u)."""
    u, w = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (u + 1.0)
    w = 0.5 * w
    r = u / (1.0 - u)
    jac = 1.0 / (1.0 - u) ** 2
    g = r ** (N - 1) * (1.0 + r * r) ** (-p_exp)
    if log_factor:
        g = g * np.log1p(r * r)
    return float(np.sum(w * g * jac))


def bubble_integrals(N: int, quad: QuadratureSettings | None = None) -> BubbleIntegrals:
    """Compute the four whole-space radial integrals of the unit bubble.

    Each integral is the 1D radial reduction times the sphere area; the
    returned ``quad_error`` is the worst of (adaptive estimate + tail bound)
    and the discrepancy against the independent Gauss-Legendre rule.
    """
    if N < 3:
        raise ParameterError(f"dimension N must be >= 3, got {N}")
    quad = quad or QuadratureSettings()
    a = alpha_N(N)
    s = sigma_N(N)
    ts = two_star(N)

    # ∫ U^{2*} = alpha^{2*} sigma ∫ r^{N-1} (1+r^2)^{-N} dr
    v1, e1 = _radial_integral(N, float(N), quad)
    int_U_2star = a ** ts * s * v1
    err1 = a ** ts * s * e1
    g1 = a ** ts * s * _radial_integral_gauss(N, float(N), quad.cross_check_nodes)

    # ∫ U^{2*-1} = alpha^{2*-1} sigma ∫ r^{N-1} (1+r^2)^{-(N+2)/2} dr
    v2, e2 = _radial_integral(N, (N + 2) / 2.0, quad)
    int_U_2star_m1 = a ** (ts - 1.0) * s * v2
    err2 = a ** (ts - 1.0) * s * e2
    g2 = a ** (ts - 1.0) * s * _radial_integral_gauss(
        N, (N + 2) / 2.0, quad.cross_check_nodes)

    # ∫ U^{2*} log U = log(alpha) ∫U^{2*} - (N-2)/2 * alpha^{2*} sigma
    #                  * ∫ r^{N-1}(1+r^2)^{-N} log(1+r^2) dr
    v3, e3 = _radial_integral(N, float(N), quad, log_factor=True)
    int_U_2star_logU = math.log(a) * int_U_2star - (N - 2) / 2.0 * a ** ts * s * v3
    err3 = abs(math.log(a)) * err1 + (N - 2) / 2.0 * a ** ts * s * e3
    g3 = math.log(a) * g1 - (N - 2) / 2.0 * a ** ts * s * _radial_integral_gauss(
        N, float(N), quad.cross_check_nodes, log_factor=True)

    # ∫ |∇U|^2 = alpha^2 (N-2)^2 sigma ∫ r^{N+1} (1+r^2)^{-N} dr
    # (|∇U| = (N-2) U r/(1+r^2); the extra r^2 shifts the radial power by 2.)
    v4, e4 = _radial_integral(N + 2, float(N), quad)
    int_grad_sq = a ** 2 * (N - 2) ** 2 * s * v4
    err4 = a ** 2 * (N - 2) ** 2 * s * e4
    g4 = a ** 2 * (N - 2) ** 2 * s * _radial_integral_gauss(
        N + 2, float(N), quad.cross_check_nodes)

    cross = max(abs(int_U_2star - g1), abs(int_U_2star_m1 - g2),
                abs(int_U_2star_logU - g3), abs(int_grad_sq - g4))
    quad_error = max(err1, err2, err3, err4, cross)
    if not np.isfinite(quad_error) or quad_error > 1e-6:
        raise QuadratureError(
            f"radial quadrature failed to converge for N={N}: "
            f"error estimate {quad_error:.3e} "
            f"(adaptive {max(err1, err2, err3, err4):.3e}, cross-check {cross:.3e})")

    return BubbleIntegrals(
        N=N,
        int_U_2star=int_U_2star,
        int_U_2star_m1=int_U_2star_m1,
        int_U_2star_logU=int_U_2star_logU,
        int_grad_sq=int_grad_sq,
        quad_error=quad_error,
    )


def compute_constants(N: int, quad: QuadratureSettings | None = None) -> ConstantsTable:
    """Evaluate alpha_N, C_N, c_N, omega_N, gamma_N by radial quadrature.

    ``quad_error`` propagates the integral error bars linearly through the
    defining formulas (first-order sensitivity), so the table's constants are
    accurate to roughly that bound.
    """
    ints = bubble_integrals(N, quad)
    ts = two_star(N)
    omega = ints.int_U_2star / ts
    C = ints.int_grad_sq - ints.int_U_2star / ts
    c = (ints.int_U_2star / ts) / ints.int_U_2star_m1 ** 2
    gamma = (ints.int_U_2star / ts ** 2
             - ints.int_U_2star_logU / ts
             + 0.5 * omega * math.log(c))

    e = ints.quad_error
    # linear sensitivities of the derived constants to the integral errors
    e_omega = e / ts
    e_C = e * (1.0 + 1.0 / ts)
    e_c = e * (1.0 / ts / ints.int_U_2star_m1 ** 2
               + 2.0 * c / ints.int_U_2star_m1)
    e_gamma = (e / ts ** 2 + e / ts + 0.5 * e_omega * abs(math.log(c))
               + 0.5 * omega * e_c / c)
    quad_error = max(e, e_omega, e_C, e_c, e_gamma)

    return ConstantsTable(
        N=N,
        alphaN=alpha_N(N),
        CN=C,
        cN=c,
        omegaN=omega,
        gammaN=gamma,
        quad_error=quad_error,
    )


def lambda_of_Lambda(Lambda: float, table: ConstantsTable,
                     N: int | None = None) -> float:
    """Change of variables lam = (c_N * Lambda)^{1/(N-2)}.

    ``N`` defaults to the table's dimension; passing it explicitly guards
    against mixing tables across dimensions.
    """
    if not (Lambda > 0):
        raise ParameterError(f"Lambda must be positive, got {Lambda}")
    n = table.N if N is None else N
    if n != table.N:
        raise ParameterError(
            f"dimension mismatch: table has N={table.N}, caller says N={n}")
    return float((table.cN * Lambda) ** (1.0 / (n - 2.0)))


def lambda_of_Lambda_quadratic(Lambda: float, table: ConstantsTable,
                               N: int | None = None) -> float:
    """Change of variables lam = (c_N * Lambda^2)^{1/(N-2)}.

    This is the scaling map under which the energy of a projected
    multi-bubble sum expands, coefficient for coefficient, as

        I_eps(V) = k*E_N - (k/2) omega_N eps log(eps) - k gamma_N eps
                   + omega_N eps Psi_k(Lambda, t) + o(eps),

    with E_N the single-bubble energy limit below: the identity
    ∫U^{2*-1} = alpha_N (N-2) sigma_N turns the pairwise interaction
    ∫U_i^{2*-1} P U_j into omega_N (m_i m_j)^{(N-2)/2}/c_N * G(xi_i, xi_j),
    so matching the reduced energy's Lambda_i Lambda_j weights forces
    m_i^{N-2} = c_N Lambda_i^2 eps.  The linear map
    :func:`lambda_of_Lambda` does not reproduce those quadratic weights.
    """
    if not (Lambda > 0):
        raise ParameterError(f"Lambda must be positive, got {Lambda}")
    n = table.N if N is None else N
    if n != table.N:
        raise ParameterError(
            f"dimension mismatch: table has N={table.N}, caller says N={n}")
    return float((table.cN * Lambda * Lambda) ** (1.0 / (n - 2.0)))


def single_bubble_energy_limit(table: ConstantsTable) -> float:
    """The eps -> 0 energy of one projected bubble.

    For the functional I_eps(u) = (1/2)∫|∇u|^2 - (1/(2*-eps))∫|u|^{2*-eps},
    the energy of a single projected bubble tends to

        E_N = (1/2)∫|∇U_0|^2 - (1/2*)∫U_0^{2*} = (2/(N-2)) * omega_N,

    using ∫|∇U_0|^2 = ∫U_0^{2*} = 2* omega_N.  Note E_N differs from the
    table's ``CN`` (which carries no 1/2 on the gradient term) by
    (N/(N-2)) * omega_N.
    """
    return 2.0 / (table.N - 2.0) * table.omegaN
