"""Verification harness for signed sums of projected bubbles on a ball.

Everything here serves one question: does the computed energy of the
projected multi-bubble ansatz match the reduced-energy expansion, and does
the ansatz nearly solve the slightly subcritical equation?  Two independent
instruments are provided.

Grid instrument
    An axisymmetric finite-volume discretization of the ball on its
    ``(z, r)`` half-section (``z`` along the symmetry axis through the bubble
    centers, ``r`` the transverse radius).  It solves the Dirichlet Laplace
    problem behind the projection ``P U = U - (harmonic extension of U's
    boundary trace)``, assembles ``V = sum_i a_i P U_i``, and evaluates
    discrete residuals and energies.  The discrete operator uses exact
    finite-volume face areas (including the ``r = 0`` axis cells), giving a
    symmetric positive-definite system solved by a cached sparse LU
    factorization.

Quadrature instrument
    On a ball the harmonic correction of an axis-centered bubble is known in
    closed form (a Kelvin image of the bubble, see
    :class:`ProjectedBubbleExact`), so ``V`` is evaluable pointwise to
    machine precision at any core width -- far below what any grid can
    resolve.  Energies then reduce to integrals of explicit functions,
    computed with spherical panels about each bubble center: Gauss-Legendre
    nodes on geometrically graded radial panels (resolving the core scale)
    times angular panels split at the slab/ball switch directions.  The
    gradient term uses the exact identity
    ``∫∇PU_i·∇PU_j = ∫U_i^{2*-1} PU_j`` (the harmonic parts drop out), whose
    numerical asymmetry in (i, j) doubles as an accuracy diagnostic.

:func:`expansion_gap` compares the computed energy against

    I_eps(V) = k*E_N - (k/2) omega_N eps log(eps) - k gamma_N eps
               + omega_N eps Psi_k(Lambda, t) + o(eps),

with ``E_N`` the single-bubble energy limit and scales
``lam_i = (c_N Lambda_i^2)^{1/(N-2)}``; both the constant and the scale map
were validated against exact radial quadrature of the centered single-bubble
energy (see the package notes on conventions in the README).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .bubble_core import (
    BubbleParams,
    ConstantsTable,
    alpha_N,
    eval_bubble,
    lambda_of_Lambda_quadratic,
    sigma_N,
    single_bubble_energy_limit,
    two_star,
)
from .errors import (
    DomainError,
    ParameterError,
    ResolutionError,
    SolverDivergenceError,
)
from .green_domain import BallDomain
from .reduced_energy import AxisKernels, Configuration, psi_k

__all__ = [
    "AxisymGrid",
    "Field",
    "ProjectedBubbleExact",
    "projected_bubbles_of_config",
    "solve_dirichlet_laplace",
    "solve_poisson",
    "project_bubble",
    "assemble_V",
    "residual_norm",
    "energy_I",
    "energy_quadrature",
    "energy_gradient_quadrature",
    "residual_quadrature",
    "expansion_gap",
]


# --------------------------------------------------------------------------
# Exact projections
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectedBubbleExact:
    """Closed-form projection of an axis-centered bubble onto H^1_0 of a ball.

    Work in coordinates centered at the ball's center, with the bubble at
    axis offset ``t`` (|t| < R) and core width ``m``.  The harmonic function
    matching the bubble's boundary trace is itself an inverse-power profile

        w(x) = alpha_N m^{(N-2)/2} q(x)^{-(N-2)/2},
        q(x) = c (z^2 + r^2) - 2 t z + (s - c R^2),

    with ``s = m^2 + R^2 + t^2`` and ``c`` the smaller root of
    ``R^2 c^2 - s c + t^2 = 0`` (the root choice is exactly the condition
    that ``q^{-(N-2)/2}`` is harmonic),

        c = 2 t^2 / (s + sqrt((m^2 + (R-t)^2)(m^2 + (R+t)^2))).

    On the sphere ``z^2 + r^2 = R^2`` one has ``q = m^2 + |x - xi|^2``
    identically, so ``w`` equals the bubble there and ``pu = u - w``
    vanishes on the boundary *exactly*.  The quadratic ``q`` has its zero
    set outside the closed ball (the pole of the Kelvin image), so all three
    evaluators are smooth inside.
    """

    N: int
    R: float
    m: float
    t: float

    def __post_init__(self):
        if self.N < 3:
            raise ParameterError(f"dimension N must be >= 3, got {self.N}")
        if not (self.R > 0):
            raise ParameterError(f"radius must be positive, got {self.R}")
        if not (self.m > 0):
            raise ParameterError(f"core width must be positive, got {self.m}")
        if not (abs(self.t) < self.R):
            raise DomainError(
                f"bubble center offset {self.t} not inside ball of radius {self.R}")

    @property
    def _coeffs(self) -> tuple[float, float]:
        m2 = self.m * self.m
        s = m2 + self.R * self.R + self.t * self.t
        disc = (m2 + (self.R - self.t) ** 2) * (m2 + (self.R + self.t) ** 2)
        c = 2.0 * self.t * self.t / (s + math.sqrt(disc))
        return c, s - c * self.R * self.R

    def u(self, z, r):
        """The bubble itself at half-section points (z, r)."""
        z = np.asarray(z, dtype=float)
        r = np.asarray(r, dtype=float)
        d2 = (z - self.t) ** 2 + r * r
        h = (self.N - 2) / 2.0
        return alpha_N(self.N) * (self.m / (self.m * self.m + d2)) ** h

    def w(self, z, r):
        """The harmonic correction (boundary trace of ``u``, extended)."""
        z = np.asarray(z, dtype=float)
        r = np.asarray(r, dtype=float)
        c, q0 = self._coeffs
        q = c * (z * z + r * r) - 2.0 * self.t * z + q0
        h = (self.N - 2) / 2.0
        return alpha_N(self.N) * self.m ** h * q ** (-h)

    def pu(self, z, r):
        """The projection ``u - w``; zero on the sphere, positive inside."""
        return self.u(z, r) - self.w(z, r)


def projected_bubbles_of_config(
        domain: BallDomain, cfg: Configuration, table: ConstantsTable,
        eps: float) -> list[ProjectedBubbleExact]:
    """Exact projected bubbles for a reduced-energy configuration.

    Scales follow ``lam_i = (c_N Lambda_i^2)^{1/(N-2)}``,
    ``m_i = lam_i eps^{1/(N-2)}`` (see
    :func:`nodalbubbles.bubble_core.lambda_of_Lambda_quadratic`); axis
    positions are taken relative to the ball center.
    """
    if not (eps > 0):
        raise ParameterError(f"eps must be positive, got {eps}")
    N = domain.N
    if N != table.N:
        raise ParameterError(
            f"dimension mismatch: domain N={N}, table N={table.N}")
    zc = float(domain.center[0])
    out = []
    for Lam, t in zip(cfg.Lambda, cfg.t):
        lam = lambda_of_Lambda_quadratic(float(Lam), table)
        m = lam * eps ** (1.0 / (N - 2.0))
        tc = float(t) - zc
        if not (abs(tc) < domain.radius):
            raise DomainError(
                f"configuration point t={t} lies outside the ball section")
        out.append(ProjectedBubbleExact(N=N, R=domain.radius, m=m, t=tc))
    return out


# --------------------------------------------------------------------------
# Spherical-panel quadrature
# --------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _panel_nodes(breaks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on each interval of ``breaks``, flattened."""
    a = breaks[:-1]
    b = breaks[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _geometric_breaks(scale: float, refine: int) -> np.ndarray:
    """Panel edges [0, scale, scale*g, ..., 1] with ratio g = 2^{1/refine}.

    ``scale`` is the finest feature size relative to the full span; panels
    grow geometrically away from the origin so a 16-node rule per panel
    resolves every decade between the core width and the span.
    """
    if scale >= 0.5:
        return np.array([0.0, 0.5, 1.0])
    g = 2.0 ** (1.0 / refine)
    edges = [0.0, scale]
    while edges[-1] * g < 1.0:
        edges.append(edges[-1] * g)
    edges.append(1.0)
    return np.array(edges)


def _section_integral(f, N: int, R: float, t: float, core_scale: float,
                      zlo: float | None = None, zhi: float | None = None,
                      n_u: int = 12, refine: int = 1) -> float:
    """Integrate an axisymmetric ``f(z, r)`` over a slab of the ball.

    The region is ``{z^2 + r^2 < R^2} ∩ {zlo < z < zhi}`` (either bound may
    be None); coordinates are centered at the ball center.  Spherical
    coordinates about the axis point ``(t, 0)`` reduce the integral to

        |S^{N-2}| ∫_{-1}^{1} ∫_0^{rho_max(u)} f rho^{N-1} (1-u^2)^{(N-3)/2} drho du,

    where ``rho_max`` is the exit radius through the sphere or a slab plane.
    Angular panels are split where the active exit constraint switches (the
    only non-smooth points of ``rho_max``); radial panels are geometrically
    graded from ``core_scale/8`` so the bubble core is fully resolved.
    ``refine`` doubles the angular panel count and halves the geometric
    ratio, giving an independent accuracy column.
    """
    ang = sigma_N(N - 1)
    pw = (N - 3) / 2.0

    u_edges = [-1.0, 1.0]
    if zhi is not None and abs(zhi) < R:
        u_edges.append((zhi - t) / math.sqrt((zhi - t) ** 2 + R * R - zhi * zhi))
    if zlo is not None and abs(zlo) < R:
        u_edges.append((zlo - t) / math.sqrt((zlo - t) ** 2 + R * R - zlo * zlo))
    u_edges = sorted(set(u_edges))

    total = 0.0
    for a, b in zip(u_edges[:-1], u_edges[1:]):
        npan = max(1, math.ceil(n_u * refine * (b - a) / 2.0))
        u, wu = _panel_nodes(np.linspace(a, b, npan + 1))

        rmax = -t * u + np.sqrt(t * t * u * u + R * R - t * t)
        if zhi is not None:
            pos = u > 0
            rmax = np.where(pos, np.minimum(rmax, (zhi - t) / np.where(pos, u, 1.0)),
                            rmax)
        if zlo is not None:
            neg = u < 0
            rmax = np.where(neg, np.minimum(rmax, (zlo - t) / np.where(neg, u, 1.0)),
                            rmax)
        top = float(np.max(rmax))
        if top <= 0.0:
            continue

        sig = _geometric_breaks(min(core_scale / 8.0 / top, 1.0), refine)
        s_nodes, s_w = _panel_nodes(sig)

        rho = rmax[:, None] * s_nodes[None, :]
        wgt = (wu * rmax)[:, None] * s_w[None, :]
        z = t + rho * u[:, None]
        r = rho * np.sqrt(np.maximum(1.0 - u[:, None] ** 2, 0.0))
        dens = rho ** (N - 1)
        if pw != 0.0:
            dens = dens * (1.0 - u[:, None] ** 2) ** pw
        total += float(np.sum(wgt * dens * f(z, r)))
    return ang * total


def energy_quadrature(domain: BallDomain, cfg: Configuration,
                      table: ConstantsTable, eps: float, *,
                      n_u: int = 12, refine: int = 1) -> tuple[float, dict]:
    """Energy ``(1/2)∫|∇V|^2 - (1/(2*-eps))∫|V|^{2*-eps}`` of the ansatz.

    The gradient term is assembled from the pairwise integrals
    ``K_ij = ∫ U_i^{2*-1} PU_j`` (exact identity; harmonic corrections drop
    out of the cross terms), each computed in spherical panels about center
    ``i``.  The nonlinear term is split into slabs at the midpoints between
    consecutive centers so each slab contains exactly one core.  Returns
    ``(value, info)`` with ``info`` carrying the K-matrix asymmetry (an
    a-posteriori accuracy check: the matrix is symmetric analytically) and
    the two raw terms.
    """
    bubbles = projected_bubbles_of_config(domain, cfg, table, eps)
    k = cfg.k
    N = domain.N
    R = domain.radius
    ts = two_star(N)
    p_grad = ts - 1.0
    signs = np.asarray(cfg.signs, dtype=float)

    K = np.zeros((k, k))
    for i in range(k):
        bi = bubbles[i]
        for j in range(k):
            bj = bubbles[j]

            def f(z, r, bi=bi, bj=bj):
                return bi.u(z, r) ** p_grad * bj.pu(z, r)

            K[i, j] = _section_integral(f, N, R, bi.t, bi.m,
                                        n_u=n_u, refine=refine)
    sym_defect = float(np.max(np.abs(K - K.T)) / np.max(np.abs(K)))
    Ks = 0.5 * (K + K.T)
    grad_sq = float(signs @ Ks @ signs)

    centers = [b.t for b in bubbles]
    cuts = [0.5 * (centers[i] + centers[i + 1]) for i in range(k - 1)]
    p_nl = ts - eps

    def v_abs_pow(z, r):
        v = np.zeros_like(z, dtype=float)
        for s, b in zip(signs, bubbles):
            v += s * b.pu(z, r)
        return np.abs(v) ** p_nl

    nonlin = 0.0
    for i in range(k):
        zlo = cuts[i - 1] if i > 0 else None
        zhi = cuts[i] if i < k - 1 else None
        nonlin += _section_integral(v_abs_pow, N, R, bubbles[i].t, bubbles[i].m,
                                    zlo=zlo, zhi=zhi, n_u=n_u, refine=refine)

    value = 0.5 * grad_sq - nonlin / p_nl
    info = {"K_sym_defect": sym_defect, "grad_sq": grad_sq,
            "nonlinear": nonlin}
    return value, info


def energy_gradient_quadrature(domain: BallDomain, cfg: Configuration,
                               table: ConstantsTable, eps: float, *,
                               n_u: int = 12, refine: int = 1,
                               rel_step: float = 1.0e-3) -> np.ndarray:
    """Central differences of :func:`energy_quadrature` in (Lambda, t).

    The returned 2k-vector equals the pairing of the PDE residual of ``V``
    against the configuration tangent fields (differentiating the energy
    under the integral), so it measures how close the ansatz is to a
    critical point *within its own family* -- near-criticality that a plain
    residual norm cannot see because of the configuration-independent
    O(eps) mismatch of every projected bubble.
    """
    lam = np.asarray(cfg.Lambda, dtype=float)
    tt = np.asarray(cfg.t, dtype=float)
    k = cfg.k
    gaps = np.diff(tt)
    out = np.zeros(2 * k)

    def value(L, T):
        c = Configuration(k=k, signs=cfg.signs, Lambda=tuple(L), t=tuple(T))
        v, _ = energy_quadrature(domain, c, table, eps, n_u=n_u, refine=refine)
        return v

    for i in range(k):
        h = rel_step * lam[i]
        Lp = lam.copy(); Lp[i] += h
        Lm = lam.copy(); Lm[i] -= h
        out[i] = (value(Lp, tt) - value(Lm, tt)) / (2.0 * h)
    for i in range(k):
        room = min(gaps[i - 1] if i > 0 else np.inf,
                   gaps[i] if i < k - 1 else np.inf)
        room = min(room, domain.radius - abs(tt[i] - float(domain.center[0])))
        h = min(rel_step, 0.25 * room)
        Tp = tt.copy(); Tp[i] += h
        Tm = tt.copy(); Tm[i] -= h
        out[k + i] = (value(lam, Tp) - value(lam, Tm)) / (2.0 * h)
    return out


def residual_quadrature(domain: BallDomain, cfg: Configuration,
                        table: ConstantsTable, eps: float, *,
                        n_u: int = 12, refine: int = 1,
                        relative: bool = True) -> float:
    """L^2 norm of ``-ΔV - |V|^{2*-2-eps} V`` by spherical-panel quadrature.

    ``-ΔV = sum_i a_i U_i^{2*-1}`` holds exactly (the harmonic corrections
    have zero Laplacian), so the residual is an explicit function evaluable
    at any core width.  With ``relative=True`` the norm is divided by
    ``||ΔV||_{L^2}``, which removes the core-width divergence of the
    absolute norm and makes values comparable across eps.
    """
    bubbles = projected_bubbles_of_config(domain, cfg, table, eps)
    N = domain.N
    R = domain.radius
    ts = two_star(N)
    p1 = ts - 1.0
    signs = np.asarray(cfg.signs, dtype=float)
    centers = [b.t for b in bubbles]
    cuts = [0.5 * (centers[i] + centers[i + 1]) for i in range(cfg.k - 1)]

    def resid_sq(z, r):
        lap = np.zeros_like(z, dtype=float)
        v = np.zeros_like(z, dtype=float)
        for s, b in zip(signs, bubbles):
            lap += s * b.u(z, r) ** p1
            v += s * b.pu(z, r)
        return (lap - np.abs(v) ** (ts - 2.0 - eps) * v) ** 2

    def lap_sq(z, r):
        lap = np.zeros_like(z, dtype=float)
        for s, b in zip(signs, bubbles):
            lap += s * b.u(z, r) ** p1
        return lap * lap

    num = 0.0
    den = 0.0
    for i in range(cfg.k):
        zlo = cuts[i - 1] if i > 0 else None
        zhi = cuts[i] if i < cfg.k - 1 else None
        num += _section_integral(resid_sq, N, R, bubbles[i].t, bubbles[i].m,
                                 zlo=zlo, zhi=zhi, n_u=n_u, refine=refine)
        if relative:
            den += _section_integral(lap_sq, N, R, bubbles[i].t, bubbles[i].m,
                                     zlo=zlo, zhi=zhi, n_u=n_u, refine=refine)
    num = math.sqrt(max(num, 0.0))
    if not relative:
        return num
    return num / math.sqrt(max(den, 1e-300))


def expansion_gap(cfg: Configuration, eps_list, table: ConstantsTable,
                  grid: "AxisymGrid | None" = None,
                  domain: BallDomain | None = None, *,
                  n_u: int = 12) -> dict:
    """Deviation of the computed energy from its first-order expansion.

    For each ``eps`` (the list must be strictly decreasing) computes

        gap(eps) = (I_eps(V) - k E_N + (k/2) omega eps log eps
                    + k gamma eps) / (omega eps) - Psi_k(cfg),

    where ``E_N`` is the single-bubble energy limit and ``I_eps(V)`` comes
    from :func:`energy_quadrature`.  The remainder theory predicts
    ``gap = o(1)``; empirically it decays like ``eps log^2(eps)``.  Each row
    carries the gap at two quadrature refinements; their difference
    separates quadrature error from the genuine remainder.  When a grid is
    supplied and can resolve every core, a grid-energy column is added as a
    cross-check (the default grid cannot resolve saddle-scale cores, in
    which case the column is ``None``).
    """
    if domain is None:
        domain = grid.domain if grid is not None else BallDomain.unit(table.N)
    eps_arr = [float(e) for e in eps_list]
    if len(eps_arr) < 2 or any(b >= a for a, b in zip(eps_arr, eps_arr[1:])):
        raise ParameterError(
            f"eps_list must be strictly decreasing with >= 2 entries, got {eps_arr}")

    kern = AxisKernels.for_ball(domain)
    psi = psi_k(cfg, kern)
    k = cfg.k
    omega = table.omegaN
    gamma = table.gammaN
    E = single_bubble_energy_limit(table)

    rows = []
    for eps in eps_arr:
        I1, info1 = energy_quadrature(domain, cfg, table, eps,
                                      n_u=n_u, refine=1)
        I2, info2 = energy_quadrature(domain, cfg, table, eps,
                                      n_u=n_u, refine=2)

        def gap_of(I):
            lead = k * E - 0.5 * k * omega * eps * math.log(eps) - k * gamma * eps
            return (I - lead) / (omega * eps) - psi

        grid_I = None
        if grid is not None:
            try:
                V = assemble_V(cfg, eps, table, grid)
                grid_I = energy_I(V, eps)
            except ResolutionError:
                grid_I = None
        rows.append({
            "eps": eps,
            "I": I2,
            "gap": gap_of(I2),
            "gap_coarse": gap_of(I1),
            "refinement_delta": abs(gap_of(I2) - gap_of(I1)),
            "K_sym_defect": max(info1["K_sym_defect"], info2["K_sym_defect"]),
            "grid_I": grid_I,
        })

    gaps = [abs(r["gap"]) for r in rows]
    decrements = [a - b for a, b in zip(gaps, gaps[1:])]
    max_delta = max(r["refinement_delta"] for r in rows)
    return {
        "k": k,
        "psi": psi,
        "rows": rows,
        "monotone_decreasing": all(d > 0 for d in decrements),
        "decrements": decrements,
        "max_refinement_delta": max_delta,
        "refinement_below_decrement": (bool(decrements)
                                       and max_delta < min(decrements)),
    }


# --------------------------------------------------------------------------
# Finite-volume grid
# --------------------------------------------------------------------------

class AxisymGrid:
    """Finite-volume grid on the (z, r) half-section of a three-dimensional ball.

    Nodes sit at ``z_i = z_c - R + i hz`` (0 <= i < nz) and ``r_j = j hr``
    (0 <= j < nr) with ``hz = 2R/(nz-1)``, ``hr = R/(nr-1)``.  A node is
    *interior* when strictly inside the ball; a *boundary* node is a
    non-interior node with an interior 4-neighbor, and carries Dirichlet
    data (staircase boundary: data comes from globally defined traces, so
    the scheme retains second order against smooth exact solutions).

    The discrete Laplacian is the finite-volume balance over the cell
    ``[z - hz/2, z + hz/2] x [r - hr/2, r + hr/2]`` revolved about the
    axis: axial faces have area ``2 pi r_j hr`` (``pi hr^2/4`` for the axis
    cells), radial faces ``2 pi r_{j+1/2} hz``, volumes ``2 pi r_j hr hz``
    (``pi hr^2 hz / 4`` on the axis).  The axis itself needs no condition:
    the inner radial face has zero area.  The resulting system is symmetric
    positive definite; a sparse LU factorization is computed once per grid
    and reused.
    """

    def __init__(self, domain: BallDomain, nz: int = 513, nr: int = 257):
        if domain.N != 3:
            raise ParameterError(
                "the half-section reduction is specific to N=3; "
                f"got domain with N={domain.N}")
        if nz < 5 or nr < 5:
            raise ParameterError(f"grid too small: nz={nz}, nr={nr}")
        self.domain = domain
        self.nz = int(nz)
        self.nr = int(nr)
        R = domain.radius
        zc = float(domain.center[0])
        self.hz = 2.0 * R / (self.nz - 1)
        self.hr = R / (self.nr - 1)
        self.zs = zc - R + self.hz * np.arange(self.nz)
        self.rs = self.hr * np.arange(self.nr)

        Z, Rr = np.meshgrid(self.zs, self.rs, indexing="ij")
        self.z_nodes = Z
        self.r_nodes = Rr
        self.interior = (Z - zc) ** 2 + Rr ** 2 < R * R

        nb = np.zeros_like(self.interior)
        nb[1:, :] |= self.interior[:-1, :]
        nb[:-1, :] |= self.interior[1:, :]
        nb[:, 1:] |= self.interior[:, :-1]
        nb[:, :-1] |= self.interior[:, 1:]
        self.boundary = (~self.interior) & nb

        self.n_interior = int(np.count_nonzero(self.interior))
        self.index = -np.ones((self.nz, self.nr), dtype=np.int64)
        self.index[self.interior] = np.arange(self.n_interior)

        j = np.arange(self.nr)
        self.volumes = 2.0 * math.pi * self.rs * self.hr * self.hz
        self.volumes[0] = math.pi * self.hr ** 2 * self.hz / 4.0
        self.coeff_axial = 2.0 * math.pi * self.rs * self.hr / self.hz
        self.coeff_axial[0] = math.pi * self.hr ** 2 / (4.0 * self.hz)
        # radial face between columns j and j+1
        self.coeff_radial = 2.0 * math.pi * (j[:-1] + 0.5) * self.hz

        self._lu = None
        self._bc_rows = None
        self._bc_nodes = None
        self._bc_coeffs = None

    @classmethod
    def for_ball(cls, domain: BallDomain, nz: int = 513,
                 nr: int = 257) -> "AxisymGrid":
        """Standard constructor; defaults give hz = hr = R/256 on a unit ball."""
        return cls(domain, nz=nz, nr=nr)

    @property
    def h_max(self) -> float:
        return max(self.hz, self.hr)

    def _neighbor_coeff(self, di: int, dj: int, jj: np.ndarray) -> np.ndarray:
        if dj == 0:
            return self.coeff_axial[jj]
        if dj == 1:
            return self.coeff_radial[jj]
        return self.coeff_radial[jj - 1]

    def _factor(self):
        """Assemble and factor the SPD operator (lazy, cached)."""
        if self._lu is not None:
            return
        ii, jj = np.nonzero(self.interior)
        p = self.index[ii, jj]
        diag = np.zeros(self.n_interior)
        rows, cols, vals = [], [], []
        bc_rows, bc_nodes, bc_coeffs = [], [], []
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if dj == -1:
                keep = jj > 0          # no inner face on the axis column
            else:
                keep = np.ones_like(jj, dtype=bool)
            i2 = ii[keep] + di
            j2 = jj[keep] + dj
            pk = p[keep]
            c = self._neighbor_coeff(di, dj, jj[keep])
            np.add.at(diag, pk, c)
            is_int = self.interior[i2, j2]
            rows.append(pk[is_int])
            cols.append(self.index[i2[is_int], j2[is_int]])
            vals.append(-c[is_int])
            is_bnd = ~is_int
            bc_rows.append(pk[is_bnd])
            bc_nodes.append(i2[is_bnd] * self.nr + j2[is_bnd])
            bc_coeffs.append(c[is_bnd])
        rows = np.concatenate(rows + [np.arange(self.n_interior)])
        cols = np.concatenate(cols + [np.arange(self.n_interior)])
        vals = np.concatenate(vals + [diag])
        A = sparse.coo_matrix((vals, (rows, cols)),
                              shape=(self.n_interior, self.n_interior)).tocsc()
        self._A = A
        self._lu = splu(A)
        self._bc_rows = np.concatenate(bc_rows)
        self._bc_nodes = np.concatenate(bc_nodes)
        self._bc_coeffs = np.concatenate(bc_coeffs)

    def _solve(self, rhs: np.ndarray) -> np.ndarray:
        self._factor()
        x = self._lu.solve(rhs)
        res = np.linalg.norm(self._A @ x - rhs)
        if not np.isfinite(res) or res > 1e-10 * (np.linalg.norm(rhs) + 1.0):
            raise SolverDivergenceError(
                f"sparse solve residual {res:.3e} exceeds tolerance")
        return x

    def minus_laplacian(self, values: np.ndarray) -> np.ndarray:
        """Discrete ``-Δ`` (flux balance / volume) at interior nodes.

        ``values`` must be the full (nz, nr) array; entries outside
        interior ∪ boundary are treated as written (callers keep them 0).
        Returns a full array, zero outside the interior.
        """
        flux = np.zeros((self.nz, self.nr))
        ca = self.coeff_axial[None, :]
        d = values[1:, :] - values[:-1, :]
        flux[:-1, :] -= ca * d          # face (i, i+1) seen from i
        flux[1:, :] += ca * d           # and from i+1
        cr = self.coeff_radial[None, :]
        d = values[:, 1:] - values[:, :-1]
        flux[:, :-1] -= cr * d
        flux[:, 1:] += cr * d
        out = np.zeros_like(flux)
        out[self.interior] = flux[self.interior] / \
            self.volumes[None, :].repeat(self.nz, axis=0)[self.interior]
        return out


@dataclass
class Field:
    """Node values over an :class:`AxisymGrid` (finite everywhere).

    Dirichlet solutions are zero on boundary nodes and outside the ball;
    general fields may carry data on boundary nodes.
    """

    grid: AxisymGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.nz, self.grid.nr):
            raise ParameterError(
                f"field shape {v.shape} does not match grid "
                f"({self.grid.nz}, {self.grid.nr})")
        if not np.all(np.isfinite(v)):
            raise ParameterError("field contains non-finite values")
        self.values = v

    def to_csv(self, path) -> None:
        """Write rows ``z,r,value`` for every node (header included)."""
        g = self.grid
        flat = np.column_stack([g.z_nodes.ravel(), g.r_nodes.ravel(),
                                self.values.ravel()])
        np.savetxt(path, flat, delimiter=",", header="z,r,value", comments="")

    def to_binary(self, path) -> None:
        """Header nz, nr (int32 LE), hz, hr (float64 LE); row-major float64."""
        with open(path, "wb") as fh:
            np.array([self.grid.nz, self.grid.nr], dtype="<i4").tofile(fh)
            np.array([self.grid.hz, self.grid.hr], dtype="<f8").tofile(fh)
            np.ascontiguousarray(self.values, dtype="<f8").tofile(fh)

    @staticmethod
    def read_binary(path) -> tuple[dict, np.ndarray]:
        """Read a dump; returns (header dict, (nz, nr) value array)."""
        with open(path, "rb") as fh:
            nz, nr = np.fromfile(fh, dtype="<i4", count=2)
            hz, hr = np.fromfile(fh, dtype="<f8", count=2)
            vals = np.fromfile(fh, dtype="<f8", count=int(nz) * int(nr))
        return ({"nz": int(nz), "nr": int(nr), "hz": float(hz),
                 "hr": float(hr)}, vals.reshape(int(nz), int(nr)))

    @classmethod
    def from_binary(cls, path, grid: AxisymGrid) -> "Field":
        header, vals = cls.read_binary(path)
        if (header["nz"], header["nr"]) != (grid.nz, grid.nr):
            raise ParameterError(
                f"binary dump is {header['nz']}x{header['nr']}, "
                f"grid is {grid.nz}x{grid.nr}")
        return cls(grid, vals)


def solve_dirichlet_laplace(grid: AxisymGrid, boundary_data: Field) -> Field:
    """Harmonic extension of Dirichlet data into the ball.

    Only the boundary-node entries of ``boundary_data`` are read.  The
    result carries the solution at interior nodes, the data at boundary
    nodes, and zeros outside; the post-solve algebraic residual is checked
    against 1e-10 (relative).
    """
    grid._factor()
    g = np.asarray(boundary_data.values, dtype=float).ravel()
    rhs = np.zeros(grid.n_interior)
    np.add.at(rhs, grid._bc_rows, grid._bc_coeffs * g[grid._bc_nodes])
    x = grid._solve(rhs)
    out = np.zeros((grid.nz, grid.nr))
    out[grid.interior] = x
    out[grid.boundary] = boundary_data.values[grid.boundary]
    return Field(grid, out)


def solve_poisson(grid: AxisymGrid, source: Field,
                  boundary_data: Field | None = None) -> Field:
    """Solve ``-Δu = source`` with Dirichlet data (default zero)."""
    grid._factor()
    rhs = source.values[grid.interior] * \
        grid.volumes[None, :].repeat(grid.nz, axis=0)[grid.interior]
    if boundary_data is not None:
        g = np.asarray(boundary_data.values, dtype=float).ravel()
        bump = np.zeros(grid.n_interior)
        np.add.at(bump, grid._bc_rows, grid._bc_coeffs * g[grid._bc_nodes])
        rhs = rhs + bump
    x = grid._solve(rhs)
    out = np.zeros((grid.nz, grid.nr))
    out[grid.interior] = x
    if boundary_data is not None:
        out[grid.boundary] = boundary_data.values[grid.boundary]
    return Field(grid, out)


def _require_axis_center(p: BubbleParams, grid: AxisymGrid) -> float:
    xi = np.asarray(p.xi, dtype=float)
    if xi.size != 3:
        raise ParameterError("grid projection requires N=3 bubble parameters")
    if np.max(np.abs(xi[1:])) > 1e-12 * max(grid.domain.radius, 1.0):
        raise ParameterError(
            "bubble center must lie on the symmetry axis for the "
            f"half-section grid; got transverse offset {xi[1:]}")
    return float(xi[0])


def _check_boundary_margin(grid: AxisymGrid, t_abs: float) -> None:
    dist = grid.domain.radius - abs(t_abs - float(grid.domain.center[0]))
    need = 4.0 * grid.h_max
    if dist < need:
        R = grid.domain.radius
        raise ResolutionError(
            f"bubble center within {dist:.3e} of the boundary; needs 4 cells "
            f"({need:.3e})",
            required_nz=int(math.ceil(8.0 * R / max(dist, 1e-300))) + 1,
            required_nr=int(math.ceil(4.0 * R / max(dist, 1e-300))) + 1)


def project_bubble(domain: BallDomain, p: BubbleParams,
                   grid: AxisymGrid) -> Field:
    """Grid projection ``P U = U - (harmonic extension of U's trace)``.

    Exactly zero on boundary nodes by construction.  The bubble center must
    lie on the symmetry axis, at least 4 cells from the boundary.
    """
    if domain is not grid.domain and (domain.N != grid.domain.N
                                      or domain.radius != grid.domain.radius):
        raise ParameterError("domain does not match the grid's domain")
    t_abs = _require_axis_center(p, grid)
    _check_boundary_margin(grid, t_abs)
    m = p.core_width
    d2 = (grid.z_nodes - t_abs) ** 2 + grid.r_nodes ** 2
    U = alpha_N(3) * (m / (m * m + d2)) ** 0.5
    w = solve_dirichlet_laplace(grid, Field(grid, U))
    vals = np.where(grid.interior, U - w.values, 0.0)
    return Field(grid, vals)


def assemble_V(cfg: Configuration, eps: float, table: ConstantsTable,
               grid: AxisymGrid) -> Field:
    """Signed sum of grid-projected bubbles for a configuration.

    Scales follow the quadratic map ``lam_i = (c_N Lambda_i^2)^{1/(N-2)}``
    (the map under which the energy expansion holds; see module docstring).
    All harmonic corrections are obtained in a single combined solve.
    Raises :class:`ResolutionError` naming the required resolution when any
    core width spans fewer than 6 cells.
    """
    if not (eps > 0):
        raise ParameterError(f"eps must be positive, got {eps}")
    R = grid.domain.radius
    zc = float(grid.domain.center[0])
    ms, t_abs = [], []
    for Lam, t in zip(cfg.Lambda, cfg.t):
        lam = lambda_of_Lambda_quadratic(float(Lam), table, N=3)
        ms.append(lam * eps)
        t_abs.append(float(t))
    m_min = min(ms)
    if m_min < 6.0 * grid.h_max:
        need_nz = int(math.ceil(12.0 * R / m_min)) + 1
        need_nr = int(math.ceil(6.0 * R / m_min)) + 1
        raise ResolutionError(
            f"smallest core width {m_min:.3e} spans fewer than 6 cells "
            f"(h={grid.h_max:.3e}); need at least a {need_nz}x{need_nr} grid",
            required_nz=need_nz, required_nr=need_nr)
    for t in t_abs:
        _check_boundary_margin(grid, t)

    trace = np.zeros((grid.nz, grid.nr))
    for s, m, t in zip(cfg.signs, ms, t_abs):
        d2 = (grid.z_nodes - t) ** 2 + grid.r_nodes ** 2
        trace += s * alpha_N(3) * (m / (m * m + d2)) ** 0.5
    w = solve_dirichlet_laplace(grid, Field(grid, trace))
    vals = np.where(grid.interior, trace - w.values, 0.0)
    return Field(grid, vals)


def residual_norm(V: Field, eps: float, *, relative: bool = False) -> float:
    """Discrete L^2 norm of ``-Δ_num V - |V|^{2*-2-eps} V`` over the interior.

    Axisymmetric volume weights; with ``relative=True`` the norm is divided
    by the same norm of the nonlinear term alone, making values comparable
    across eps (the absolute norm scales like an inverse core width).
    """
    if not (eps > 0):
        raise ParameterError(f"eps must be positive, got {eps}")
    grid = V.grid
    u = V.values
    lap = grid.minus_laplacian(u)
    nl = np.abs(u) ** (4.0 - eps) * u
    vol = grid.volumes[None, :].repeat(grid.nz, axis=0)
    mask = grid.interior
    num = math.sqrt(float(np.sum(vol[mask] * (lap[mask] - nl[mask]) ** 2)))
    if not relative:
        return num
    den = math.sqrt(float(np.sum(vol[mask] * nl[mask] ** 2)))
    return num / max(den, 1e-300)


def energy_I(u: Field, eps: float) -> float:
    """Discrete energy ``(1/2)Σ faces - (1/(2*-eps))Σ volumes`` of a field.

    The gradient part sums ``coeff * (Δu across face)^2`` over all grid
    faces (fields vanish outside interior ∪ boundary, so faces beyond the
    ball contribute nothing); the nonlinear part uses the axisymmetric cell
    volumes over interior nodes.  Callers supply fields that vanish on
    boundary nodes.
    """
    if not (eps > 0):
        raise ParameterError(f"eps must be positive, got {eps}")
    grid = u.grid
    v = u.values
    d_ax = v[1:, :] - v[:-1, :]
    grad = float(np.sum(grid.coeff_axial[None, :] * d_ax ** 2))
    d_rad = v[:, 1:] - v[:, :-1]
    grad += float(np.sum(grid.coeff_radial[None, :] * d_rad ** 2))
    vol = grid.volumes[None, :].repeat(grid.nz, axis=0)
    mask = grid.interior
    p = two_star(3) - eps
    nonlin = float(np.sum(vol[mask] * np.abs(v[mask]) ** p))
    return 0.5 * grad - nonlin / p
