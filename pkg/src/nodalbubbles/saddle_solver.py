"""Locate and certify critical points of the alternating four-bubble energy.

The reduced energy Ψ̃ has, on a ball, a critical point of saddle type
bracketed between an explicit lower bound driven by the Robin minimum and
the attractive-interaction sum at an equally spaced admissible start.  This
module finds it by a damped Newton iteration on the analytic gradient:

* the Newton direction d = −H⁻¹ ∇Ψ̃ (H the finite-difference Hessian of the
  analytic gradient) is always a descent direction for ½‖∇Ψ̃‖², whatever the
  inertia of H, so an Armijo backtracking line search on that merit function
  is globally well-defined;
* iterates are kept in the admissible set (positive scalings, strictly
  ordered positions inside the chord) by step halving — never by reordering,
  since the ordering is structural;
* at convergence the Hessian inertia (n₊, n₋, n₀) certifies the saddle
  character, and the stationarity identities
  Λ_i² h(t_i) − Σ_{j≠i} a_i a_j Λ_i Λ_j g(t_i,t_j) = 1 are available as an
  independent check.

A multi-start fallback perturbs the scaling-family parameters and reports
all distinct critical points found.  The coercivity probe samples the
minimum of Ψ̃ on the level sets {Φ = M/2} of the penalty for increasing M;
the minima must increase, which is the observable trace of the coercivity
of the construction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ParameterError, SearchError, SolverDivergenceError
from .green_domain import AxisSection, BallDomain
from .reduced_energy import (ALTERNATING_SIGNS_4, AxisKernels, BoundsReport,
                             Configuration, base_spacing_points, find_t0_r0,
                             grad_psi_k, grad_psi_tilde, mu_embed, phi_penalty,
                             psi_k, psi_tilde)

__all__ = [
    "SaddleReport",
    "GuardSettings",
    "hessian_psi_k",
    "hessian_psi_tilde",
    "inertia_of",
    "solve_saddle",
    "solve_saddle_multistart",
    "stationarity_identities",
    "verify_bounds",
    "coercivity_scan",
    "write_trace_csv",
]


@dataclass
class SaddleReport:
    """Converged critical point of Ψ̃ with its certification data.

    ``inertia`` counts (positive, negative, zero) Hessian eigenvalues;
    ``bounds_ok`` is None until :func:`verify_bounds` fills it; ``trace``
    rows are (iteration, Ψ̃, ‖∇Ψ̃‖, step).
    """

    config: Configuration
    value: float
    grad_norm: float
    inertia: tuple
    bounds_ok: bool | None
    iterations: int
    trace: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "value": self.value,
            "grad_norm": self.grad_norm,
            "inertia": list(self.inertia),
            "bounds_ok": self.bounds_ok,
            "iterations": self.iterations,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class GuardSettings:
    """Admissible-set guards for solver iterates.

    Scalings are confined to [lam_min, lam_max] and positions to the chord
    shrunk by ``t_margin``, with strict ordering always enforced.
    """

    lam_min: float = 1e-6
    lam_max: float = 1e6
    t_margin: float = 1e-6


def _pack(cfg: Configuration) -> np.ndarray:
    return np.asarray(cfg.Lambda + cfg.t, dtype=float)


def _unpack_x(x: np.ndarray, k: int, signs) -> Configuration:
    return Configuration(k=k, signs=signs, Lambda=tuple(x[:k]),
                         t=tuple(x[k:]))


def _admissible(x: np.ndarray, k: int, sec: AxisSection,
                guards: GuardSettings) -> bool:
    lam, t = x[:k], x[k:]
    if np.any(lam < guards.lam_min) or np.any(lam > guards.lam_max):
        return False
    if (np.any(t <= sec.a + guards.t_margin)
            or np.any(t >= sec.b - guards.t_margin)):
        return False
    return bool(np.all(np.diff(t) > 0.0))


# ---------------------------------------------------------------------------
# finite-difference Hessian and inertia
# ---------------------------------------------------------------------------

def hessian_psi_k(cfg: Configuration, kern: AxisKernels,
                  rel_step: float = 1e-4, symmetrize: bool = True
                  ) -> np.ndarray:
    """Finite-difference Hessian of Ψ_k from its analytic gradient.

    Central differences with Richardson extrapolation (steps h and h/2
    combined as (4 D(h/2) − D(h))/3); the per-coordinate step is
    ``rel_step * max(|x_i|, 1)`` capped so that perturbed configurations
    stay admissible (positive scalings, preserved ordering, inside the
    chord).  With ``symmetrize`` the matrix is replaced by its symmetric
    part; pass False to inspect the raw finite-difference asymmetry.
    """
    k = cfg.k
    x0 = _pack(cfg)
    sec = kern.section
    n = 2 * k

    caps = np.empty(n)
    for i in range(k):
        caps[i] = 0.5 * x0[i]                       # keep Lambda positive
    t = x0[k:]
    gaps_lo = np.diff(np.concatenate([[sec.a], t]))
    gaps_hi = np.diff(np.concatenate([t, [sec.b]]))
    for i in range(k):
        caps[k + i] = 0.25 * min(gaps_lo[i], gaps_hi[i])

    def grad_at(x):
        return grad_psi_k(_unpack_x(x, k, cfg.signs), kern)

    H = np.empty((n, n))
    for i in range(n):
        h = min(rel_step * max(abs(x0[i]), 1.0), caps[i])
        if h <= 0.0 or x0[i] + h == x0[i]:
            raise ParameterError(
                f"finite-difference step underflow at coordinate {i} "
                f"(x = {x0[i]!r}, step = {h!r})")

        def column(step):
            xp, xm = x0.copy(), x0.copy()
            xp[i] += step
            xm[i] -= step
            return (grad_at(xp) - grad_at(xm)) / (2.0 * step)

        H[:, i] = (4.0 * column(h / 2.0) - column(h)) / 3.0
    if symmetrize:
        H = 0.5 * (H + H.T)
    return H


def hessian_psi_tilde(cfg: Configuration, kern: AxisKernels,
                      rel_step: float = 1e-4, symmetrize: bool = True
                      ) -> np.ndarray:
    """8×8 finite-difference Hessian of Ψ̃ (alternating four-bubble case)."""
    if cfg.k != 4 or cfg.signs != ALTERNATING_SIGNS_4:
        raise ParameterError(
            "hessian_psi_tilde requires k=4 with signs (1, -1, 1, -1)")
    return hessian_psi_k(cfg, kern, rel_step=rel_step, symmetrize=symmetrize)


def inertia_of(H: np.ndarray, zero_tol: float = 1e-7) -> tuple:
    """Eigenvalue sign counts (n₊, n₋, n₀) with a relative zero threshold."""
    w = np.linalg.eigvalsh(0.5 * (H + H.T))
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    thr = zero_tol * max(scale, 1.0)
    n_plus = int(np.sum(w > thr))
    n_minus = int(np.sum(w < -thr))
    return (n_plus, n_minus, int(w.size) - n_plus - n_minus)


# ---------------------------------------------------------------------------
# Newton solver
# ---------------------------------------------------------------------------

def solve_saddle(domain: BallDomain, section: AxisSection | None,
                 init: Configuration, tol: float = 1e-8, max_iter: int = 50,
                 guards: GuardSettings | None = None) -> SaddleReport:
    """Damped Newton iteration on ∇Ψ̃ from an admissible start.

    Each step solves H d = −∇Ψ̃ with the finite-difference Hessian and
    backtracks on the merit ½‖∇Ψ̃‖² (Armijo), halving also whenever the
    trial iterate would leave the admissible set.  Near-singular Hessians
    are Tikhonov-regularized and noted.  Raises a divergence error carrying
    the iteration trace if the step collapses or the iteration cap is hit;
    on success returns the report with inertia counts (a zero count adds a
    degenerate-critical-point warning).
    """
    if not (tol > 0):
        raise ParameterError(f"tol must be positive, got {tol}")
    sec = section or AxisSection.of_ball(domain)
    kern = AxisKernels(domain, sec)
    guards = guards or GuardSettings()
    if init.k != 4 or init.signs != ALTERNATING_SIGNS_4:
        raise ParameterError(
            "solve_saddle requires an alternating four-bubble start")

    x = _pack(init)
    if not _admissible(x, 4, sec, guards):
        raise ParameterError("initial configuration violates the guards")

    warnings: list[str] = []
    cfg = _unpack_x(x, 4, init.signs)
    F = grad_psi_tilde(cfg, kern)
    gnorm = float(np.linalg.norm(F))
    trace = [(0, psi_tilde(cfg, kern), gnorm, 0.0)]

    it = 0
    while gnorm > tol:
        if it >= max_iter:
            raise SolverDivergenceError(
                f"Newton did not reach |grad| <= {tol:g} in {max_iter} "
                f"iterations (last |grad| = {gnorm:.3e})", trace=trace)
        it += 1

        H = hessian_psi_tilde(cfg, kern)
        try:
            d = np.linalg.solve(H, -F)
        except np.linalg.LinAlgError:
            d = None
        if d is None or not np.all(np.isfinite(d)):
            reg = 1e-8 * max(float(np.max(np.abs(H))), 1.0)
            d = np.linalg.solve(H + reg * np.eye(8), -F)
            warnings.append(
                f"iteration {it}: Hessian numerically singular, "
                f"regularized by {reg:.3e}")

        phi0 = 0.5 * float(F @ F)
        step = 1.0
        accepted = False
        while step >= 1e-12:
            x_try = x + step * d
            if _admissible(x_try, 4, sec, guards):
                cfg_try = _unpack_x(x_try, 4, init.signs)
                F_try = grad_psi_tilde(cfg_try, kern)
                phi_try = 0.5 * float(F_try @ F_try)
                # d is exact Newton for F, so d·∇(½|F|²) = −|F|²; Armijo:
                if phi_try <= phi0 - 1e-4 * step * (2.0 * phi0):
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            raise SolverDivergenceError(
                f"line search stalled at iteration {it} "
                f"(|grad| = {gnorm:.3e})", trace=trace)

        x, cfg, F = x_try, cfg_try, F_try
        gnorm = float(np.linalg.norm(F))
        trace.append((it, psi_tilde(cfg, kern), gnorm, step))

    H = hessian_psi_tilde(cfg, kern)
    inertia = inertia_of(H)
    if inertia[2] > 0:
        warnings.append(
            f"degenerate critical point: {inertia[2]} Hessian eigenvalue(s) "
            "below the zero threshold")
    return SaddleReport(
        config=cfg, value=float(psi_tilde(cfg, kern)), grad_norm=gnorm,
        inertia=inertia, bounds_ok=None, iterations=it, trace=trace,
        warnings=warnings)


def solve_saddle_multistart(domain: BallDomain, section: AxisSection | None,
                            t_base, n_starts: int = 8, seed: int = 0,
                            tol: float = 1e-8, max_iter: int = 50,
                            guards: GuardSettings | None = None
                            ) -> list[SaddleReport]:
    """Newton from perturbed scaling-family starts; distinct solutions only.

    Starts are ``mu_embed`` points with log-uniform parameters in [1/4, 4]
    (the first start is the unperturbed (1,1,1)) and the given base
    positions.  Failed starts are dropped; converged configurations closer
    than 1e-4 (max-norm over scalings and positions) count as the same
    point.  Results are sorted by energy.
    """
    rng = np.random.default_rng(seed)
    t_base = tuple(float(v) for v in t_base)
    reports: list[SaddleReport] = []
    for s in range(n_starts):
        if s == 0:
            mus = (1.0, 1.0, 1.0)
        else:
            mus = tuple(float(np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
                        for _ in range(3))
        try:
            init = mu_embed(*mus, t_base)
            rep = solve_saddle(domain, section, init, tol=tol,
                               max_iter=max_iter, guards=guards)
        except (SolverDivergenceError, ParameterError):
            continue
        is_new = True
        for prev in reports:
            delta = max(
                max(abs(a - b) for a, b in
                    zip(rep.config.Lambda, prev.config.Lambda)),
                max(abs(a - b) for a, b in zip(rep.config.t, prev.config.t)))
            if delta <= 1e-4:
                is_new = False
                break
        if is_new:
            reports.append(rep)
    reports.sort(key=lambda r: r.value)
    return reports


def stationarity_identities(cfg: Configuration, kern: AxisKernels
                            ) -> np.ndarray:
    """The k per-bubble stationarity combinations, each 1 at a critical point.

    Entry i is Λ_i² h(t_i) − Σ_{j≠i} a_i a_j Λ_i Λ_j g(t_i, t_j), which is
    Λ_i ∂Ψ/∂Λ_i + 1; the scaling part of the gradient vanishes exactly when
    every entry equals 1.
    """
    g = grad_psi_k(cfg, kern)
    lam = np.asarray(cfg.Lambda, dtype=float)
    return lam * g[:cfg.k] + 1.0


def verify_bounds(report: SaddleReport, bounds: BoundsReport) -> bool:
    """Check lower <= value <= upper; record the outcome on the report.

    A failure is a warning, not an error: the computed critical value and
    the a-priori bracket are reported side by side.
    """
    ok = bool(bounds.lower <= report.value <= bounds.upper)
    report.bounds_ok = ok
    if not ok:
        report.warnings.append(
            f"critical value {report.value:.9g} outside the a-priori "
            f"bracket [{bounds.lower:.9g}, {bounds.upper:.9g}]")
    return ok


def write_trace_csv(report: SaddleReport, path) -> None:
    """Dump the iteration trace as CSV rows (iter, psi_tilde, grad_norm, step)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iter", "psi_tilde", "grad_norm", "step"])
        for row in report.trace:
            w.writerow([row[0], f"{row[1]:.17g}", f"{row[2]:.17g}",
                        f"{row[3]:.17g}"])


# ---------------------------------------------------------------------------
# coercivity probe
# ---------------------------------------------------------------------------

def _phi_ray_coefficients(cfg: Configuration, kern: AxisKernels):
    """Split Φ along the scaling ray Λ → √c Λ as Φ(c) = c A − 2 log c + B.

    A collects the quadratic terms (diagonal plus all-attractive
    interactions), B = −Σ log Λ_i at c = 1; Φ(c) is strictly convex in c.
    """
    lam = np.asarray(cfg.Lambda, dtype=float)
    t = np.asarray(cfg.t, dtype=float)
    hd = np.atleast_1d(kern.h(t))
    A = 0.5 * float(np.sum(lam * lam * hd))
    for i in range(cfg.k):
        for j in range(i + 1, cfg.k):
            A += lam[i] * lam[j] * kern.g(t[i], t[j])
    B = -float(np.sum(np.log(lam)))
    return A, B


def _scale_config(cfg: Configuration, c: float) -> Configuration:
    return cfg.with_params(Lambda=tuple(math.sqrt(c) * v for v in cfg.Lambda))


def _level_roots(cfg: Configuration, kern: AxisKernels, level: float):
    """Both scalings c with Φ(√c Λ, t) = level, bracketing the ray minimum.

    Returns (c_lo, c_hi) or None if the ray never dips below the level.
    Convexity of Φ(c) = cA − 2 log c + B guarantees the segment between the
    roots stays in the sublevel set.
    """
    A, B = _phi_ray_coefficients(cfg, kern)
    c_star = 2.0 / A
    phi_min = 2.0 - 2.0 * math.log(c_star) + B
    if phi_min >= level:
        return None

    def f(c):
        return c * A - 2.0 * math.log(c) + B - level

    lo = c_star
    while f(lo) < 0.0:
        lo *= 0.5
    c_lo = optimize.brentq(f, lo, c_star, xtol=1e-14, rtol=1e-14)
    hi = c_star
    while f(hi) < 0.0:
        hi *= 2.0
    c_hi = optimize.brentq(f, c_star, hi, xtol=1e-14, rtol=1e-14)
    return c_lo, c_hi


def _anchor_config(kern: AxisKernels, t_base) -> Configuration:
    """Penalty-minimal point of the unit scaling ray at the base positions."""
    base = mu_embed(1.0, 1.0, 1.0, t_base)
    A, _ = _phi_ray_coefficients(base, kern)
    return _scale_config(base, 2.0 / A)


def _certified_path(kern: AxisKernels, anchor: Configuration,
                    cfg: Configuration, level: float, n_checks: int = 17
                    ) -> bool:
    """Is the straight segment from anchor to cfg inside {Φ < level}?

    Linear interpolation in (log Λ, t); a True result certifies that cfg
    lies in the same connected component of the sublevel set as the anchor.
    """
    la = np.log(np.asarray(anchor.Lambda))
    lb = np.log(np.asarray(cfg.Lambda))
    ta = np.asarray(anchor.t)
    tb = np.asarray(cfg.t)
    for s in np.linspace(0.0, 1.0, n_checks):
        lam = np.exp((1.0 - s) * la + s * lb)
        t = (1.0 - s) * ta + s * tb
        if np.any(np.diff(t) <= 0.0):
            return False
        mid = Configuration(k=4, signs=ALTERNATING_SIGNS_4,
                            Lambda=tuple(lam), t=tuple(t))
        if phi_penalty(mid, kern) >= level:
            return False
    return True


def coercivity_scan(domain: BallDomain, section: AxisSection | None = None,
                    M_list=(10.0, 20.0, 40.0), n_samples: int = 64,
                    seed: int = 0, t0: float | None = None,
                    r0: float | None = None, refine: bool = True
                    ) -> list[dict]:
    """Sampled minima of Ψ̃ on the penalty level sets {Φ = M/2}.

    For each M the scan draws scaling-family configurations (log-uniform
    μ's in [1/4, 4], ordered positions in the admissible window with a
    minimum gap of r0/8), keeps those connected to the base family's
    penalty-minimal anchor inside {Φ < M/2} along a straight certified
    path, pushes each along its scaling ray to both crossings of the level
    (the convex ray segment stays in the sublevel set, so the crossings
    remain in the anchored component), and records the smallest Ψ̃ seen;
    with ``refine`` a Nelder-Mead polish of the level-set parametrization
    around the best sample tightens the minimum.  Levels the anchor cannot
    reach are skipped with a note.  Minima must increase with M — the
    observable trace of penalty coercivity.
    """
    sec = section or AxisSection.of_ball(domain)
    kern = AxisKernels(domain, sec)
    if t0 is None or r0 is None:
        t0, r0 = find_t0_r0(domain, sec)
    t_base = base_spacing_points(t0, r0)
    anchor = _anchor_config(kern, t_base)
    anchor_phi = phi_penalty(anchor, kern)
    window = (t0 - 4.0 * r0, t0 + 4.0 * r0)
    min_gap = r0 / 8.0

    if list(M_list) != sorted(M_list) or len(set(M_list)) != len(M_list):
        raise ParameterError(f"M_list must be strictly increasing, got {M_list}")

    rng = np.random.default_rng(seed)

    def draw_positions():
        for _ in range(200):
            t = np.sort(rng.uniform(window[0], window[1], 4))
            if np.min(np.diff(t)) >= min_gap:
                return tuple(t)
        return t_base

    def draw_mus():
        return tuple(float(np.exp(rng.uniform(np.log(0.25), np.log(4.0))))
                     for _ in range(3))

    results = []
    for M in M_list:
        level = 0.5 * float(M)
        if anchor_phi >= level:
            results.append({
                "M": float(M), "min_psi_tilde": None, "n_certified": 0,
                "note": (f"level set skipped: anchor penalty "
                         f"{anchor_phi:.6g} >= M/2 = {level:.6g}")})
            continue

        best_val = math.inf
        best_point = None
        n_cert = 0
        for _ in range(n_samples):
            cfg = mu_embed(*draw_mus(), draw_positions())
            roots = _level_roots(cfg, kern, level)
            if roots is None:
                continue
            interior = _scale_config(cfg, 0.5 * (roots[0] + roots[1]))
            if phi_penalty(interior, kern) >= level:
                continue
            if not _certified_path(kern, anchor, interior, level):
                continue
            n_cert += 1
            for c in roots:
                on_level = _scale_config(cfg, c)
                val = psi_tilde(on_level, kern)
                if val < best_val:
                    best_val = val
                    best_point = (cfg, c)

        note = ""
        if best_point is None:
            results.append({
                "M": float(M), "min_psi_tilde": None, "n_certified": 0,
                "note": "no certified sample reached the level"})
            continue

        if refine:
            best_val, note = _refine_level_min(
                kern, anchor, best_point[0], level, best_val, window, min_gap)

        results.append({
            "M": float(M), "min_psi_tilde": float(best_val),
            "n_certified": n_cert, "note": note})
    return results


def _refine_level_min(kern: AxisKernels, anchor: Configuration,
                      cfg0: Configuration, level: float, val0: float,
                      window, min_gap) -> tuple:
    """Nelder-Mead polish of min Ψ̃ on the level set around a best sample.

    Free parameters are (log μ1, log μ, log μ4, t1..t4); each trial point is
    pushed to both level crossings of its scaling ray and must re-certify
    its path to the anchor, so the polish cannot leave the anchored
    component.  Returns (refined value, note).
    """
    mu1, mu, mu4, t = (cfg0.Lambda[0] * cfg0.Lambda[1],
                       cfg0.Lambda[1] * cfg0.Lambda[2],
                       cfg0.Lambda[2] * cfg0.Lambda[3], cfg0.t)
    z0 = np.array([math.log(mu1), math.log(mu), math.log(mu4), *t])

    def objective(z):
        tt = z[3:]
        if np.any(np.diff(tt) < min_gap) or tt[0] < window[0] or tt[-1] > window[1]:
            return 1e6
        try:
            cfg = mu_embed(math.exp(z[0]), math.exp(z[1]), math.exp(z[2]),
                           tuple(tt))
        except ParameterError:
            return 1e6
        roots = _level_roots(cfg, kern, level)
        if roots is None:
            return 1e6
        interior = _scale_config(cfg, 0.5 * (roots[0] + roots[1]))
        if (phi_penalty(interior, kern) >= level
                or not _certified_path(kern, anchor, interior, level)):
            return 1e6
        return min(psi_tilde(_scale_config(cfg, c), kern) for c in roots)

    res = optimize.minimize(objective, z0, method="Nelder-Mead",
                            options={"maxiter": 400, "xatol": 1e-8,
                                     "fatol": 1e-10})
    if res.fun < val0:
        return float(res.fun), "refined by level-set polish"
    return float(val0), "polish did not improve the sampled minimum"
