"""Reduced finite-dimensional energies of multi-bubble configurations.

After projecting a sum of k signed bubbles onto a ball and integrating out
the remainder, the leading configuration dependence of the energy collapses
to a function of the dimensionless scalings Λ_i > 0 and the axis positions
t_1 < ... < t_k:

    Ψ_k(Λ, t) = ½ Σ_i Λ_i² h(t_i) − Σ_{i<j} a_i a_j Λ_i Λ_j g(t_i, t_j)
                − Σ_i log Λ_i,

where g is the axis Green's function, h the axis Robin function and
a_i ∈ {−1, +1} the bubble signs.  The four-bubble alternating pattern
a = (1, −1, 1, −1) gives the sign-changing energy Ψ̃ whose saddle points
the solver module hunts.  Dropping the signs yields the all-attractive
penalty

    Φ(Λ, t) = ½ Σ Λ_i² h(t_i) + Σ_{i<j} Λ_i Λ_j g(t_i, t_j) − Σ log Λ_i,

which dominates Ψ̃ (their difference is 2Λ_1Λ_3 g_13 + 2Λ_2Λ_4 g_24 > 0)
and is coercive, so its sublevel set {Φ < M} is a compact working set for
the saddle search.

Besides the evaluators and analytic gradients, the module provides:

* ``mu_embed`` — the three-parameter scaling family
  Λ(μ) = (μ_1/√μ, √μ, √μ, μ_4/√μ) with equal middle entries, inverted by
  ``scaling_products`` (products of adjacent scalings);
* ``find_t0_r0`` — a coarse-to-fine search for a base point t0 and spacing
  r0 such that the window [t0−4r0, t0+4r0] sits inside the chord and the
  near-diagonal dominance ½h(t) + ½h(s) ≤ g(t,s) holds throughout, which
  makes the equally spaced start t⁰ = (t0, t0+r0, t0+2r0, t0+3r0) usable;
* ``bounds_report`` — the a-priori bracket for the saddle level: an upper
  bound from the four attractive interactions at t⁰ and a lower bound
  −8 log⁺(2/√H_0) driven by the Robin minimum H_0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import ParameterError, SearchError
from .green_domain import (AxisSection, BallDomain, axis_g, axis_g_dt, axis_h,
                           axis_h_d1, axis_h_d2)

__all__ = [
    "ALTERNATING_SIGNS_4",
    "Configuration",
    "AxisKernels",
    "BoundsReport",
    "psi_k",
    "psi_tilde",
    "grad_psi_k",
    "grad_psi_tilde",
    "phi_penalty",
    "in_D",
    "log_plus",
    "mu_embed",
    "scaling_products",
    "base_spacing_points",
    "spacing_margin",
    "find_t0_r0",
    "robin_min",
    "bounds_report",
]

ALTERNATING_SIGNS_4 = (1, -1, 1, -1)


@dataclass(frozen=True)
class Configuration:
    """A k-bubble configuration: signs, scalings and ordered axis positions.

    Attributes
    ----------
    k : int
        Number of bubbles, >= 1.
    signs : tuple of int
        Bubble signs, each −1 or +1.
    Lambda : tuple of float
        Dimensionless scalings, each > 0.
    t : tuple of float
        Axis positions, strictly increasing.

    Containment of the positions in a particular chord is a property of the
    kernels the configuration is evaluated against, not of the configuration
    itself; it is enforced at evaluation time.
    """

    k: int
    signs: tuple
    Lambda: tuple
    t: tuple

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be an integer >= 1, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        signs = tuple(int(a) for a in self.signs)
        if len(signs) != self.k or any(a not in (-1, 1) for a in signs):
            raise ParameterError(
                f"signs must be {self.k} entries of ±1, got {self.signs}")
        lam = tuple(float(v) for v in self.Lambda)
        if len(lam) != self.k or any(not (v > 0 and math.isfinite(v)) for v in lam):
            raise ParameterError(
                f"Lambda must be {self.k} positive finite reals, got {self.Lambda}")
        tt = tuple(float(v) for v in self.t)
        if len(tt) != self.k or any(not math.isfinite(v) for v in tt):
            raise ParameterError(
                f"t must be {self.k} finite reals, got {self.t}")
        if any(tt[i] >= tt[i + 1] for i in range(self.k - 1)):
            raise ParameterError(
                f"t must be strictly increasing, got {tt}")
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "Lambda", lam)
        object.__setattr__(self, "t", tt)

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "signs": list(self.signs),
            "Lambda": list(self.Lambda),
            "t": list(self.t),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Configuration":
        try:
            return cls(k=data["k"], signs=tuple(data["signs"]),
                       Lambda=tuple(data["Lambda"]), t=tuple(data["t"]))
        except KeyError as exc:
            raise ParameterError(
                f"configuration dict is missing key {exc}") from exc

    def with_params(self, Lambda=None, t=None) -> "Configuration":
        """Copy with replaced scalings and/or positions (signs fixed)."""
        return Configuration(
            k=self.k, signs=self.signs,
            Lambda=tuple(Lambda) if Lambda is not None else self.Lambda,
            t=tuple(t) if t is not None else self.t)


@dataclass(frozen=True)
class AxisKernels:
    """The axis Green/Robin kernels of one ball, bundled for evaluation.

    Thin, immutable adapter so that energy code can say ``kern.g(t, s)``
    instead of threading (domain, section) everywhere.
    """

    domain: BallDomain
    section: AxisSection

    @classmethod
    def for_ball(cls, d: BallDomain) -> "AxisKernels":
        return cls(domain=d, section=AxisSection.of_ball(d))

    def g(self, t, s):
        return axis_g(self.domain, self.section, t, s)

    def g_dt(self, t, s):
        return axis_g_dt(self.domain, self.section, t, s)

    def h(self, t):
        return axis_h(self.domain, self.section, t)

    def h_d1(self, t):
        return axis_h_d1(self.domain, self.section, t)

    def h_d2(self, t):
        return axis_h_d2(self.domain, self.section, t)


@dataclass(frozen=True)
class BoundsReport:
    """A-priori bracket for the four-bubble saddle level.

    ``lower = −8 log⁺(2/√H0)`` with ``H0`` the Robin minimum; ``upper`` is
    the sum of the four attractive axis interactions at the equally spaced
    start generated by ``(t0, r0)``.  A saddle between them requires
    lower <= upper.
    """

    H0: float
    lower: float
    upper: float
    t0: float
    r0: float

    def to_json_dict(self) -> dict:
        return {
            "H0": self.H0,
            "lower": self.lower,
            "upper": self.upper,
            "t0": self.t0,
            "r0": self.r0,
        }


# ---------------------------------------------------------------------------
# energies and gradients
# ---------------------------------------------------------------------------

def _unpack(cfg: Configuration):
    return (np.asarray(cfg.signs, dtype=float),
            np.asarray(cfg.Lambda, dtype=float),
            np.asarray(cfg.t, dtype=float))


def _pair_sum(cfg: Configuration, kern: AxisKernels, pair_coeff) -> float:
    """Σ_{i<j} pair_coeff(i,j) g(t_i, t_j) for the configuration's positions."""
    _, L, t = _unpack(cfg)
    acc = 0.0
    for i in range(cfg.k):
        for j in range(i + 1, cfg.k):
            acc += pair_coeff(i, j) * L[i] * L[j] * kern.g(t[i], t[j])
    return acc


def psi_k(cfg: Configuration, kern: AxisKernels) -> float:
    """The k-bubble reduced energy Ψ_k(Λ, t).

    ½ Σ Λ_i² h(t_i) − Σ_{i<j} a_i a_j Λ_i Λ_j g(t_i, t_j) − Σ log Λ_i.
    Positions outside the chord raise a domain error; coincident positions
    cannot occur in a valid configuration (strict ordering).
    """
    a, L, t = _unpack(cfg)
    hd = np.atleast_1d(kern.h(t))
    quad = 0.5 * float(np.sum(L * L * hd)) - float(np.sum(np.log(L)))
    inter = _pair_sum(cfg, kern, lambda i, j: a[i] * a[j])
    return quad - inter


def _require_alternating4(cfg: Configuration, who: str) -> None:
    if cfg.k != 4 or cfg.signs != ALTERNATING_SIGNS_4:
        raise ParameterError(
            f"{who} requires k=4 with signs (1, -1, 1, -1); "
            f"got k={cfg.k}, signs={cfg.signs}")


def psi_tilde(cfg: Configuration, kern: AxisKernels) -> float:
    """The alternating four-bubble energy Ψ̃ = Ψ_4 with signs (1,−1,1,−1)."""
    _require_alternating4(cfg, "psi_tilde")
    return psi_k(cfg, kern)


def grad_psi_k(cfg: Configuration, kern: AxisKernels) -> np.ndarray:
    """Analytic gradient of Ψ_k: the 2k-vector (∂/∂Λ_1..k, ∂/∂t_1..k).

        ∂Ψ/∂Λ_i = Λ_i h(t_i) − Σ_{j≠i} a_i a_j Λ_j g(t_i, t_j) − 1/Λ_i,
        ∂Ψ/∂t_i = ½ Λ_i² h'(t_i) − Σ_{j≠i} a_i a_j Λ_i Λ_j ∂g/∂t(t_i, t_j),

    using the symmetry g(t,s) = g(s,t) to reduce both partner derivatives to
    the first-argument derivative.
    """
    a, L, t = _unpack(cfg)
    k = cfg.k
    hd = np.atleast_1d(kern.h(t))
    hd1 = np.atleast_1d(kern.h_d1(t))
    gL = np.empty(k)
    gt = np.empty(k)
    for i in range(k):
        sL = L[i] * hd[i] - 1.0 / L[i]
        st = 0.5 * L[i] * L[i] * hd1[i]
        for j in range(k):
            if j == i:
                continue
            sL -= a[i] * a[j] * L[j] * kern.g(t[i], t[j])
            st -= a[i] * a[j] * L[i] * L[j] * kern.g_dt(t[i], t[j])
        gL[i] = sL
        gt[i] = st
    return np.concatenate([gL, gt])


def grad_psi_tilde(cfg: Configuration, kern: AxisKernels) -> np.ndarray:
    """Analytic gradient of Ψ̃ as an 8-vector (∂/∂Λ then ∂/∂t)."""
    _require_alternating4(cfg, "grad_psi_tilde")
    return grad_psi_k(cfg, kern)


def phi_penalty(cfg: Configuration, kern: AxisKernels) -> float:
    """The all-attractive penalty Φ(Λ, t) (every interaction taken positive)."""
    _, L, t = _unpack(cfg)
    hd = np.atleast_1d(kern.h(t))
    quad = 0.5 * float(np.sum(L * L * hd)) - float(np.sum(np.log(L)))
    inter = _pair_sum(cfg, kern, lambda i, j: 1.0)
    return quad + inter


def in_D(cfg: Configuration, kern: AxisKernels, M: float) -> bool:
    """Membership in the working sublevel set {Φ < M}."""
    return bool(phi_penalty(cfg, kern) < M)


def log_plus(x):
    """The positive part of the logarithm, max(log x, 0); requires x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0.0):
        raise ParameterError(f"log_plus requires positive input, got {x}")
    val = np.maximum(np.log(arr), 0.0)
    return float(val) if np.ndim(x) == 0 else val


# ---------------------------------------------------------------------------
# scaling family and its inverse
# ---------------------------------------------------------------------------

def mu_embed(mu1: float, mu: float, mu4: float, t) -> Configuration:
    """The equal-middle scaling family Λ(μ) = (μ_1/√μ, √μ, √μ, μ_4/√μ).

    Produces an alternating four-bubble configuration; the products of
    adjacent scalings recover (μ_1, μ, μ_4), see :func:`scaling_products`.
    """
    for name, v in (("mu1", mu1), ("mu", mu), ("mu4", mu4)):
        if not (v > 0 and math.isfinite(v)):
            raise ParameterError(f"{name} must be positive and finite, got {v}")
    s = math.sqrt(mu)
    return Configuration(
        k=4, signs=ALTERNATING_SIGNS_4,
        Lambda=(mu1 / s, s, s, mu4 / s), t=tuple(float(v) for v in t))


def scaling_products(cfg: Configuration) -> tuple:
    """Adjacent scaling products (Λ1Λ2, Λ2Λ3, Λ3Λ4) plus the positions.

    On the image of :func:`mu_embed` this is exactly the inverse map:
    scaling_products(mu_embed(μ1, μ, μ4, t)) == (μ1, μ, μ4, t).
    """
    if cfg.k != 4:
        raise ParameterError(f"scaling_products requires k=4, got k={cfg.k}")
    L = cfg.Lambda
    return (L[0] * L[1], L[1] * L[2], L[2] * L[3], cfg.t)


def base_spacing_points(t0: float, r0: float) -> tuple:
    """The equally spaced four-point start t⁰ = (t0, t0+r0, t0+2r0, t0+3r0)."""
    if not (r0 > 0):
        raise ParameterError(f"r0 must be positive, got {r0}")
    return tuple(t0 + i * r0 for i in range(4))


# ---------------------------------------------------------------------------
# admissible spacing search and bounds
# ---------------------------------------------------------------------------

def spacing_margin(kern: AxisKernels, t0: float, r0: float,
                   n_check: int = 33) -> float:
    """Worst-case slack of ½h(t) + ½h(s) ≤ g(t,s) on [t0−4r0, t0+4r0].

    Samples an ``n_check`` × ``n_check`` lattice of the window (off-diagonal
    pairs) and returns min g − ½h − ½h; positive means the near-diagonal
    dominance holds with that margin.
    """
    ts = np.linspace(t0 - 4.0 * r0, t0 + 4.0 * r0, n_check)
    T, S = np.meshgrid(ts, ts, indexing="ij")
    mask = np.abs(T - S) > 1e-12 * max(abs(r0), 1.0)
    Tm, Sm = T[mask], S[mask]
    vals = (kern.g(Tm, Sm) - 0.5 * kern.h(Tm) - 0.5 * kern.h(Sm))
    return float(np.min(vals))


def find_t0_r0(domain: BallDomain, section: AxisSection | None = None,
               *, n_t0: int = 9, n_r0: int = 200, n_check: int = 33
               ) -> tuple:
    """Search for an admissible base point and spacing (t0, r0).

    Admissibility means the window [t0−4r0, t0+4r0] lies strictly inside the
    chord (with a 1% end guard) and the near-diagonal dominance
    ½h(t) + ½h(s) ≤ g(t,s) holds on it with strictly positive margin.
    Candidates are scanned with r0 descending (largest admissible spacing
    wins) and t0 ordered center-out; the winning pair is re-validated on a
    10× finer pair lattice before being returned.

    Returns (t0, r0); raises a search error with the scanned grid sizes if
    no candidate passes.
    """
    sec = section or AxisSection.of_ball(domain)
    kern = AxisKernels(domain, sec)
    width = sec.b - sec.a
    mid = 0.5 * (sec.a + sec.b)
    guard = 0.01 * width

    step = width / float(n_r0)
    r_max = (width / 2.0 - guard) / 4.0
    r_cands = np.arange(math.floor(r_max / step), 0, -1) * step

    offsets = [0.0]
    for i in range(1, (n_t0 + 1) // 2):
        delta = 0.025 * i * width
        offsets.extend([delta, -delta])
    t_cands = [mid + o for o in offsets[:n_t0]]

    for r0 in r_cands:
        for t0 in t_cands:
            if not (t0 - 4.0 * r0 > sec.a + guard
                    and t0 + 4.0 * r0 < sec.b - guard):
                continue
            if spacing_margin(kern, t0, r0, n_check) <= 0.0:
                continue
            if spacing_margin(kern, t0, r0, 10 * n_check) <= 0.0:
                continue
            return (float(t0), float(r0))
    raise SearchError(
        "no admissible (t0, r0) found: near-diagonal dominance failed on "
        f"every candidate ({len(r_cands)} spacings x {len(t_cands)} base "
        f"points, {n_check}^2 pair lattice); try a finer grid (larger n_r0)")


def robin_min(kern: AxisKernels, n_grid: int = 2001) -> float:
    """Minimum H_0 of the diagonal Robin function over the chord.

    Grid scan (odd count, so a symmetric chord samples its midpoint exactly)
    polished by bounded scalar minimization between the neighbors of the
    grid argmin.
    """
    a, b = kern.section.a, kern.section.b
    m = 1e-3 * (b - a)
    n = n_grid if n_grid % 2 == 1 else n_grid + 1
    ts = np.linspace(a + m, b - m, n)
    vals = np.atleast_1d(kern.h(ts))
    i = int(np.argmin(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, n - 1)]
    res = optimize.minimize_scalar(
        lambda t: float(kern.h(t)), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-13})
    return float(min(float(res.fun), float(vals[i])))


def bounds_report(domain: BallDomain, section: AxisSection | None,
                  t0: float, r0: float) -> BoundsReport:
    """A-priori saddle-level bracket at the equally spaced start.

    upper = g(t1,t2) + g(t2,t3) + g(t3,t4) + g(t1,t4) at
    t⁰ = (t0, t0+r0, t0+2r0, t0+3r0); lower = −8 log⁺(2/√H0) with H0 the
    Robin minimum of the chord.
    """
    sec = section or AxisSection.of_ball(domain)
    kern = AxisKernels(domain, sec)
    H0 = robin_min(kern)
    lower = -8.0 * log_plus(2.0 / math.sqrt(H0))
    t1, t2, t3, t4 = base_spacing_points(t0, r0)
    upper = (kern.g(t1, t2) + kern.g(t2, t3)
             + kern.g(t3, t4) + kern.g(t1, t4))
    return BoundsReport(H0=float(H0), lower=float(lower), upper=float(upper),
                        t0=float(t0), r0=float(r0))
