"""Closed-form Green and Robin kernels on ball domains, with validators.

For the ball B_R(z0) in R^N (N >= 3) the Dirichlet Green's function of -Δ has
the image-charge closed form (coordinates below are centered, x -> x - z0):

    G(x,y) = kappa * ( |x-y|^{2-N} - rho(x,y)^{2-N} ),
    H(x,y) = kappa * rho(x,y)^{2-N},
    rho(x,y)^2 = |x|^2 |y|^2 / R^2 - 2 x·y + R^2,
    kappa = 1 / ((N-2) sigma_N),

where sigma_N is the unit-sphere area and H is the regular part,
H = fundamental solution - G.  The quadratic form rho^2 is symmetric in
(x,y), stays positive on the open ball, and is perfectly regular at y = 0,
where it reduces to R^2 — so the classical "image point at R^2 y/|y|^2
escapes to infinity" degeneracy never appears in this parametrization, and
G(x,0) = kappa (|x|^{2-N} - R^{2-N}) comes out of the same formula.

The chord of the x1-axis through the ball carries the one-dimensional
restrictions used by the reduced energies:

    g(t,s)  = G((t,0,..),(s,0,..)) = kappa ( |t-s|^{2-N} - (R - ts/R)^{2-N} ),
    h(t)    = H((t,0,..),(t,0,..)) = kappa ( R - t^2/R )^{2-N},

together with their closed-form derivatives.  The validators sample the two
structural hypotheses behind the four-bubble construction — convexity of the
diagonal Robin function t -> h(t,t) and the radial monotonicity
(t-s) ∂g/∂t < 0 — as well as the near-boundary reflection expansions of H and
the directional monotonicity (x-y)·∇_x G < 0.  Validation is sampled
evidence, not a certificate: reports carry worst observed values and counts.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .bubble_core import sigma_N
from .errors import (ConfigurationError, DomainError, ParameterError,
                     SingularityError)

__all__ = [
    "BallDomain",
    "AxisSection",
    "ValidationReport",
    "green_G",
    "robin_H",
    "grad_x_G",
    "grad_x_H",
    "axis_g",
    "axis_h",
    "axis_g_dt",
    "axis_h_d1",
    "axis_h_d2",
    "axis_derivatives",
    "validate_A3",
    "check_boundary_expansion",
    "check_directional_monotonicity",
    "stencil_laplacian",
    "harmonic_defect_order",
    "dump_axis_tables",
]


@dataclass(frozen=True)
class BallDomain:
    """A ball in R^N: the concrete domain carrying closed-form kernels.

    Attributes
    ----------
    N : int
        Dimension, >= 3.
    center : numpy.ndarray
        Center point, shape ``(N,)``.
    radius : float
        Radius R > 0.
    """

    N: int
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.N < 3:
            raise ParameterError(f"dimension N must be >= 3, got {self.N}")
        if not (self.radius > 0):
            raise ParameterError(f"radius must be positive, got {self.radius}")
        c = np.asarray(self.center, dtype=float).reshape(-1)
        if c.size != self.N:
            raise ParameterError(
                f"center must have length N={self.N}, got {c.size}")
        object.__setattr__(self, "center", c)

    @classmethod
    def unit(cls, N: int = 3) -> "BallDomain":
        """The unit ball centered at the origin."""
        return cls(N=N, center=np.zeros(N), radius=1.0)

    @property
    def sigma(self) -> float:
        """Unit-sphere area sigma_N in this dimension."""
        return sigma_N(self.N)

    @property
    def kappa(self) -> float:
        """Fundamental-solution normalization 1/((N-2) sigma_N)."""
        return 1.0 / ((self.N - 2) * self.sigma)

    def contains(self, x, *, closed: bool = False, tol: float = 1e-12) -> np.ndarray:
        """Vectorized membership test for the (open or closed) ball."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x - self.center, axis=-1)
        if closed:
            return r <= self.radius * (1.0 + tol)
        return r < self.radius


@dataclass(frozen=True)
class AxisSection:
    """Endpoints (a, b) of the x1-axis chord through the ball."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a < self.b):
            raise ParameterError(
                f"section requires a < b, got a={self.a}, b={self.b}")

    @classmethod
    def of_ball(cls, d: BallDomain) -> "AxisSection":
        """The full chord (center_1 - R, center_1 + R)."""
        return cls(a=float(d.center[0] - d.radius),
                   b=float(d.center[0] + d.radius))


@dataclass
class ValidationReport:
    """Outcome of one sampled check.

    ``worst_value`` is the extreme of the monitored quantity over the sample
    (its admissible side depends on the check and is stated in ``check``).
    Serializes with key ``pass`` as documented.
    """

    check: str
    sample_count: int
    worst_value: float
    passed: bool
    note: str = ""

    def to_json_dict(self) -> dict:
        out = {
            "check": self.check,
            "sample_count": self.sample_count,
            "worst_value": self.worst_value,
            "pass": bool(self.passed),
        }
        if self.note:
            out["note"] = self.note
        return out


# ---------------------------------------------------------------------------
# kernel evaluation
# ---------------------------------------------------------------------------

def _centered(d: BallDomain, x) -> np.ndarray:
    return np.asarray(x, dtype=float) - d.center


def _check_inside(d: BallDomain, x, *, closed: bool, what: str) -> None:
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x - d.center, axis=-1)
    if closed:
        bad = r > d.radius * (1.0 + 1e-12)
    else:
        bad = r >= d.radius * (1.0 - 1e-14)
    if np.any(bad):
        raise DomainError(
            f"{what} lies outside the {'closed' if closed else 'open'} "
            f"ball of radius {d.radius} (max |x-center| = {float(np.max(r)):.6g})")


def _rho_sq(d: BallDomain, xc: np.ndarray, yc: np.ndarray) -> np.ndarray:
    R = d.radius
    nx2 = np.sum(xc * xc, axis=-1)
    ny2 = np.sum(yc * yc, axis=-1)
    return nx2 * ny2 / R ** 2 - 2.0 * np.sum(xc * yc, axis=-1) + R ** 2


def green_G(d: BallDomain, x, y) -> float | np.ndarray:
    """Dirichlet Green's function of -Δ on the ball.

    Positive inside, exactly zero when either argument reaches the boundary,
    symmetric in (x, y).  Accepts broadcastable batches of points with
    trailing dimension N.
    """
    xc, yc = _centered(d, x), _centered(d, y)
    scalar = (xc.ndim == 1 and yc.ndim == 1)
    _check_inside(d, x, closed=True, what="x")
    _check_inside(d, y, closed=True, what="y")
    diff2 = np.sum((xc - yc) ** 2, axis=-1)
    if np.any(diff2 < (1e-14 * d.radius) ** 2):
        raise SingularityError("green_G evaluated on the diagonal x == y")
    e = (2.0 - d.N) / 2.0
    val = d.kappa * (diff2 ** e - _rho_sq(d, xc, yc) ** e)
    # Dirichlet condition: an argument on the sphere gives an exact zero
    # (analytically |x-y| == rho there; enforce it against rounding).
    R2 = d.radius ** 2
    on_bnd = (np.abs(np.sum(xc * xc, axis=-1) - R2) <= 4e-15 * R2) \
        | (np.abs(np.sum(yc * yc, axis=-1) - R2) <= 4e-15 * R2)
    val = np.where(on_bnd, 0.0, val)
    return float(val) if scalar else val


def robin_H(d: BallDomain, x, y) -> float | np.ndarray:
    """Regular part H = fundamental solution - G; finite on the diagonal.

    On the diagonal of a centered ball, H(x,x) = kappa (R - |x|^2/R)^{2-N};
    for the unit ball in R^3 this is 1/(4 pi (1-|x|^2)).
    """
    xc, yc = _centered(d, x), _centered(d, y)
    scalar = (xc.ndim == 1 and yc.ndim == 1)
    _check_inside(d, x, closed=False, what="x")
    _check_inside(d, y, closed=False, what="y")
    e = (2.0 - d.N) / 2.0
    val = d.kappa * _rho_sq(d, xc, yc) ** e
    return float(val) if scalar else val


def grad_x_G(d: BallDomain, x, y) -> np.ndarray:
    """Analytic gradient of G in its first argument.

    ∇_x G = -kappa (N-2) [ (x-y)|x-y|^{-N} - (|y|^2/R^2 x - y) rho^{-N} ]
    in centered coordinates (the shift drops out of the gradient).
    """
    xc, yc = _centered(d, x), _centered(d, y)
    _check_inside(d, x, closed=True, what="x")
    _check_inside(d, y, closed=True, what="y")
    diff = xc - yc
    diff2 = np.sum(diff * diff, axis=-1)
    if np.any(diff2 < (1e-14 * d.radius) ** 2):
        raise SingularityError("grad_x_G evaluated on the diagonal x == y")
    rho2 = _rho_sq(d, xc, yc)
    ny2 = np.sum(yc * yc, axis=-1)
    img = ny2[..., None] / d.radius ** 2 * xc - yc
    return -d.kappa * (d.N - 2) * (
        diff * diff2[..., None] ** (-d.N / 2.0)
        - img * rho2[..., None] ** (-d.N / 2.0))


def grad_x_H(d: BallDomain, x, y) -> np.ndarray:
    """Analytic gradient of H in its first argument.

    ∇_x H = -kappa (N-2) (|y|^2/R^2 x - y) rho^{-N}.
    """
    xc, yc = _centered(d, x), _centered(d, y)
    _check_inside(d, x, closed=False, what="x")
    _check_inside(d, y, closed=False, what="y")
    rho2 = _rho_sq(d, xc, yc)
    ny2 = np.sum(yc * yc, axis=-1)
    img = ny2[..., None] / d.radius ** 2 * xc - yc
    return -d.kappa * (d.N - 2) * img * rho2[..., None] ** (-d.N / 2.0)


# ---------------------------------------------------------------------------
# axis restrictions
# ---------------------------------------------------------------------------

def _axis_check(d: BallDomain, sec: AxisSection, *vals) -> None:
    for v in vals:
        v = np.asarray(v, dtype=float)
        if np.any(v <= sec.a) or np.any(v >= sec.b):
            raise DomainError(
                f"axis coordinate outside the open chord ({sec.a}, {sec.b})")


def _axis_centered(d: BallDomain, t) -> np.ndarray:
    return np.asarray(t, dtype=float) - d.center[0]


def axis_g(d: BallDomain, sec: AxisSection, t, s) -> float | np.ndarray:
    """Green's function restricted to the axis chord: g(t,s) = G(te1, se1)."""
    _axis_check(d, sec, t, s)
    tc, sc = _axis_centered(d, t), _axis_centered(d, s)
    scalar = (np.ndim(tc) == 0 and np.ndim(sc) == 0)
    tc, sc = np.broadcast_arrays(np.atleast_1d(tc), np.atleast_1d(sc))
    if np.any(tc == sc):
        raise SingularityError("axis_g evaluated at t == s")
    R = d.radius
    e = 2.0 - d.N
    val = d.kappa * (np.abs(tc - sc) ** e - (R - tc * sc / R) ** e)
    return float(val[0]) if scalar else val


def axis_h(d: BallDomain, sec: AxisSection, t) -> float | np.ndarray:
    """Diagonal Robin function on the axis: h(t) = H(te1, te1)."""
    _axis_check(d, sec, t)
    tc = _axis_centered(d, t)
    R = d.radius
    val = d.kappa * (R - tc * tc / R) ** (2.0 - d.N)
    return float(val) if np.ndim(val) == 0 else val


def axis_g_dt(d: BallDomain, sec: AxisSection, t, s) -> float | np.ndarray:
    """∂g/∂t of the axis Green's function (first-argument derivative)."""
    _axis_check(d, sec, t, s)
    tc, sc = _axis_centered(d, t), _axis_centered(d, s)
    scalar = (np.ndim(tc) == 0 and np.ndim(sc) == 0)
    tc, sc = np.broadcast_arrays(np.atleast_1d(tc), np.atleast_1d(sc))
    if np.any(tc == sc):
        raise SingularityError("axis_g_dt evaluated at t == s")
    R = d.radius
    val = -d.kappa * (d.N - 2) * (
        np.sign(tc - sc) * np.abs(tc - sc) ** (1.0 - d.N)
        + (sc / R) * (R - tc * sc / R) ** (1.0 - d.N))
    return float(val[0]) if scalar else val


def axis_h_d1(d: BallDomain, sec: AxisSection, t) -> float | np.ndarray:
    """First derivative of the diagonal Robin function h(t,t)."""
    _axis_check(d, sec, t)
    tc = _axis_centered(d, t)
    R = d.radius
    val = 2.0 * d.kappa * (d.N - 2) * (tc / R) * (R - tc * tc / R) ** (1.0 - d.N)
    return float(val) if np.ndim(val) == 0 else val


def axis_h_d2(d: BallDomain, sec: AxisSection, t) -> float | np.ndarray:
    """Second derivative of the diagonal Robin function h(t,t).

    For the unit ball in R^3 this reduces to
    (1/(4 pi)) (2 (1-t^2)^{-2} + 8 t^2 (1-t^2)^{-3}),
    strictly positive on (-1, 1).
    """
    _axis_check(d, sec, t)
    tc = _axis_centered(d, t)
    R = d.radius
    w = R - tc * tc / R
    val = (2.0 * d.kappa * (d.N - 2) / R * w ** (1.0 - d.N)
           + 4.0 * d.kappa * (d.N - 2) * (d.N - 1) * (tc / R) ** 2 * w ** (-float(d.N)))
    return float(val) if np.ndim(val) == 0 else val


def axis_derivatives(d: BallDomain, sec: AxisSection, t, s) -> dict:
    """Bundle {∂g/∂t at (t,s), h''(t)} of the axis kernels."""
    return {
        "dg_dt": axis_g_dt(d, sec, t, s),
        "h_diag_d2": axis_h_d2(d, sec, t),
    }


# ---------------------------------------------------------------------------
# validators
# ---------------------------------------------------------------------------

def validate_A3(d: BallDomain, sec: AxisSection, n_grid: int = 256,
                margin: float | None = None,
                n_pairs: int = 10_000) -> list[ValidationReport]:
    """Sample the two axis hypotheses: h'' > 0 and (t-s) ∂g/∂t < 0.

    ``n_grid`` uniform points of (a+margin, b-margin) feed the convexity
    check; a uniform ~sqrt(n_pairs) x sqrt(n_pairs) lattice with the diagonal
    removed feeds the monotonicity check.  The default margin is
    0.02 (b-a), excluding the endpoints where h blows up.

    Returns two reports, in order: convexity (worst = min h'', passes iff
    positive) and monotonicity (worst = max (t-s) ∂g/∂t, passes iff negative).
    """
    if n_grid < 16:
        raise ConfigurationError(f"n_grid must be >= 16, got {n_grid}")
    width = sec.b - sec.a
    m = 0.02 * width if margin is None else float(margin)
    if m >= width / 2.0:
        raise ConfigurationError(
            f"margin {m} leaves an empty sample interval of ({sec.a}, {sec.b})")

    ts = np.linspace(sec.a + m, sec.b - m, n_grid)
    h2 = axis_h_d2(d, sec, ts)
    min_h2 = float(np.min(h2))
    conv = ValidationReport(
        check="axis_robin_convexity (min h'' > 0)",
        sample_count=int(n_grid),
        worst_value=min_h2,
        passed=bool(min_h2 > 0.0),
    )

    side = max(2, int(math.isqrt(n_pairs)))
    tt = np.linspace(sec.a + m, sec.b - m, side)
    T, S = np.meshgrid(tt, tt, indexing="ij")
    off = np.abs(T - S) > 1e-9 * width
    prod = (T[off] - S[off]) * axis_g_dt(d, sec, T[off], S[off])
    max_prod = float(np.max(prod))
    mono = ValidationReport(
        check="axis_green_monotonicity (max (t-s) dg/dt < 0)",
        sample_count=int(off.sum()),
        worst_value=max_prod,
        passed=bool(max_prod < 0.0),
    )
    return [conv, mono]


def _default_boundary_samples(d: BallDomain, n_dirs: int = 6) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic (x, y) sample set for the boundary-expansion check.

    Directions spread over the sphere via a Fibonacci-style lattice; targets y
    at the center, at mid-radius along the axis, and near the boundary
    opposite each direction.  x is placed at distance 0.1 R from the boundary
    (the check halves this internally).
    """
    R, c = d.radius, d.center
    dirs = []
    ga = math.pi * (3.0 - math.sqrt(5.0))
    for i in range(n_dirs):
        z = 1.0 - 2.0 * (i + 0.5) / n_dirs
        r = math.sqrt(max(0.0, 1.0 - z * z))
        phi = ga * i
        v = np.zeros(d.N)
        v[0] = z
        v[1] = r * math.cos(phi)
        if d.N > 2:
            v[2] = r * math.sin(phi)
        dirs.append(v / np.linalg.norm(v))
    ys = [c.copy(), c + 0.5 * R * np.eye(d.N)[0]]
    samples = []
    for v in dirs:
        x = c + (R - 0.1 * R) * v
        for y in ys + [c - 0.6 * R * v]:
            samples.append((x, y.copy()))
    return samples


def check_boundary_expansion(d: BallDomain, samples=None,
                             halvings: int = 2) -> list[ValidationReport]:
    """Probe the near-boundary reflection expansions of the regular part.

    For x in the boundary strip (dist(x, ∂Ω) < R/4) with nearest boundary
    point p(x), reflection x̄ = 2 p(x) - x, and inward normal ν = (x-p)/|x-p|:

    * regular part:   H(x,y) = kappa |x̄-y|^{2-N} + O(d(x)/|x̄-y|^{N-2});
      the fitted constant C1 = |H - kappa |x̄-y|^{2-N}| |x̄-y|^{N-2} / d(x)
      must stay within a factor 2 as d(x) is halved;
    * normal derivative: ∂H/∂ν(x,y) = (x̄-y)·ν / (sigma_N |x̄-y|^N)
      + O(|x̄-y|^{2-N}); the fitted constant
      C2 = |∂H/∂ν - lead| |x̄-y|^{N-2} must stay within a factor 2;
    * the leading ratio H(x,y) (N-2) sigma_N |x̄-y|^{N-2} tends to 1 as
      d(x) -> 0 (reported at the deepest halving).

    ``samples`` is a list of (x, y) pairs; x deeper than R/4 is skipped with a
    note, and configurations where x̄ lands on y are rejected as singular.
    Returns three reports: the two fitted-constant stability checks (worst =
    most extreme halving ratio) and the leading-ratio check (worst = max
    |ratio - 1|, informational threshold 0.15).
    """
    if samples is None:
        samples = _default_boundary_samples(d)
    R, c = d.radius, d.center
    delta0 = R / 4.0
    kappa = d.kappa

    ratios1, ratios2, lead_dev = [], [], []
    skipped = []
    n_used = 0
    for (x, y) in samples:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        dist0 = R - float(np.linalg.norm(x - c))
        if dist0 <= 0 or dist0 >= delta0:
            skipped.append(f"sample at depth {dist0:.3g} outside the boundary strip")
            continue
        xdir = (x - c) / np.linalg.norm(x - c)
        c1_fits, c2_fits = [], []
        for k in range(halvings + 1):
            dk = dist0 / 2 ** k
            xk = c + (R - dk) * xdir
            p = c + R * xdir
            xbar = 2.0 * p - xk
            nu = (xk - p) / np.linalg.norm(xk - p)        # inward normal
            rbar = float(np.linalg.norm(xbar - y))
            if rbar < 1e-10 * R:
                raise SingularityError(
                    "boundary-expansion sample has reflection x̄ == y")
            Hval = robin_H(d, xk, y)
            lead1 = kappa * rbar ** (2.0 - d.N)
            c1_fits.append(abs(Hval - lead1) * rbar ** (d.N - 2.0) / dk)
            dHdnu = float(grad_x_H(d, xk, y) @ nu)
            lead2 = float((xbar - y) @ nu) / (d.sigma * rbar ** d.N)
            c2_fits.append(abs(dHdnu - lead2) * rbar ** (d.N - 2.0))
            if k == halvings:
                lead_dev.append(abs(Hval / lead1 - 1.0))
        for a, b in zip(c1_fits, c1_fits[1:]):
            ratios1.append(b / a if a > 0 else 1.0)
        for a, b in zip(c2_fits, c2_fits[1:]):
            ratios2.append(b / a if a > 0 else 1.0)
        n_used += 1

    note = "; ".join(skipped)

    def _extreme(rs: list[float]) -> float:
        # the ratio farthest from 1 on a log scale
        return max(rs, key=lambda r: abs(math.log(max(r, 1e-300)))) if rs else 1.0

    w1, w2 = _extreme(ratios1), _extreme(ratios2)
    w3 = max(lead_dev) if lead_dev else 0.0
    return [
        ValidationReport(
            check="boundary_expansion_regular_part (fitted C ratio in [1/2,2])",
            sample_count=n_used, worst_value=w1,
            passed=bool(0.5 <= w1 <= 2.0), note=note),
        ValidationReport(
            check="boundary_expansion_normal_derivative (fitted C ratio in [1/2,2])",
            sample_count=n_used, worst_value=w2,
            passed=bool(0.5 <= w2 <= 2.0), note=note),
        ValidationReport(
            check="boundary_expansion_leading_ratio (|H/lead - 1| at deepest halving)",
            sample_count=n_used, worst_value=w3,
            passed=bool(w3 <= 0.15), note=note),
    ]


def check_directional_monotonicity(d: BallDomain, n_samples: int = 1000,
                                   seed: int = 0) -> ValidationReport:
    """Sample (x-y)·∇_x G(x,y) < 0 on random interior pairs.

    On a convex domain the directional derivative of G along the ray from y
    is strictly negative away from the singularity.  Pairs closer than
    1e-6 R are re-drawn; the report's worst value is the sample maximum
    (passes iff negative).
    """
    rng = np.random.default_rng(seed)
    R, c = d.radius, d.center
    worst = -math.inf
    count = 0
    while count < n_samples:
        m = n_samples - count
        x = rng.uniform(-R, R, size=(2 * m, d.N))
        y = rng.uniform(-R, R, size=(2 * m, d.N))
        keep = ((np.linalg.norm(x, axis=1) < 0.999 * R)
                & (np.linalg.norm(y, axis=1) < 0.999 * R)
                & (np.linalg.norm(x - y, axis=1) > 1e-6 * R))
        x, y = x[keep][:m] + c, y[keep][:m] + c
        if len(x) == 0:
            continue
        vals = np.sum((x - y) * grad_x_G(d, x, y), axis=-1)
        worst = max(worst, float(np.max(vals)))
        count += len(x)
    return ValidationReport(
        check="directional_monotonicity (max (x-y)·grad_x G < 0)",
        sample_count=count,
        worst_value=worst,
        passed=bool(worst < 0.0),
    )


# ---------------------------------------------------------------------------
# discrete-harmonicity probes
# ---------------------------------------------------------------------------

def stencil_laplacian(func, x: np.ndarray, h: float) -> float:
    """Second-order (2N+1)-point discrete Laplacian of ``func`` at ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    f0 = func(x)
    acc = 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        acc += func(x + e) - 2.0 * f0 + func(x - e)
    return float(acc / h ** 2)


def harmonic_defect_order(d: BallDomain, x: np.ndarray, y: np.ndarray,
                          h0: float, which: str = "H") -> float:
    """Measured convergence order of the discrete Laplacian defect of a kernel.

    Applies the stencil in the second argument at ``y`` with steps h0 and
    h0/2 and returns log2 of the defect ratio; for a harmonic function the
    defect is O(h^2), so the measurement should sit near 2.
    """
    if which == "H":
        f = lambda z: robin_H(d, x, z)
    elif which == "G":
        f = lambda z: green_G(d, x, z)
    else:
        raise ParameterError(f"unknown kernel {which!r}; use 'G' or 'H'")
    d1 = abs(stencil_laplacian(f, y, h0))
    d2 = abs(stencil_laplacian(f, y, h0 / 2.0))
    if d2 == 0.0:
        return float("inf")
    return math.log2(d1 / d2)


# ---------------------------------------------------------------------------
# table dumps
# ---------------------------------------------------------------------------

def dump_axis_tables(d: BallDomain, sec: AxisSection, out_dir, n: int = 257,
                     margin: float | None = None) -> list[str]:
    """Write plot-ready CSV tables of the axis kernels.

    ``axis_h_table.csv`` holds (t, h(t,t), h''(t)) on a uniform grid;
    ``axis_g_table.csv`` holds (t, s, g, dg_dt) on the off-diagonal lattice.
    Returns the written file paths.
    """
    import os
    width = sec.b - sec.a
    m = 0.02 * width if margin is None else float(margin)
    ts = np.linspace(sec.a + m, sec.b - m, n)
    os.makedirs(out_dir, exist_ok=True)

    p1 = os.path.join(out_dir, "axis_h_table.csv")
    with open(p1, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "h", "h_d2"])
        for t in ts:
            w.writerow([f"{t:.17g}", f"{axis_h(d, sec, t):.17g}",
                        f"{axis_h_d2(d, sec, t):.17g}"])

    p2 = os.path.join(out_dir, "axis_g_table.csv")
    side = max(2, int(math.isqrt(n)))
    tt = np.linspace(sec.a + m, sec.b - m, side)
    with open(p2, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "s", "g", "dg_dt"])
        for t in tt:
            for s in tt:
                if abs(t - s) <= 1e-9 * width:
                    continue
                w.writerow([f"{t:.17g}", f"{s:.17g}",
                            f"{axis_g(d, sec, t, s):.17g}",
                            f"{axis_g_dt(d, sec, t, s):.17g}"])
    return [p1, p2]
