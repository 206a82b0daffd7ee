"""Command-line front end: constants, assumption checks, saddle search, verify.

Four subcommands orchestrate the library with machine-readable outputs:

``constants``
    Dimension-dependent energy constants by radial quadrature
    -> ``constants.json``.
``assumptions``
    Kernel hypothesis checks on the ball (axis convexity of the diagonal,
    boundary behaviour, directional monotonicity) -> ``assumptions.json``;
    exit 3 if any check fails.
``saddle``
    Full reduced-energy pipeline: spacing search, a-priori bounds, damped
    Newton from the scaling-family start, bracket verification and
    stationarity identities -> ``saddle.json`` (optional per-iteration
    ``trace.csv``).
``verify``
    Grid and quadrature verification at a saddle configuration (reused from
    ``saddle.json`` when present): projection rate check, residual
    comparisons, and the energy-expansion gap over the eps list
    -> ``verify.json``.

Configuration comes from defaults, then an optional JSON file (``--config``),
then explicit flags; every run writes ``{"meta": ..., "report": ...}`` under
``--out`` with a stable filename.  Reruns with identical configuration and
seed produce byte-identical reports except for the timestamp line in the
metadata.  Exit codes: 0 success, 1 configuration error, 2 quadrature
failure, 3 assumption failure, 4 solver failure, 5 resolution guard.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bubble_core import BubbleParams, compute_constants, lambda_of_Lambda_quadratic
from .errors import (
    ConfigurationError,
    NodalBubblesError,
    ParameterError,
    QuadratureError,
    ResolutionError,
    SearchError,
    SolverDivergenceError,
)
from .green_domain import (
    AxisSection,
    BallDomain,
    check_boundary_expansion,
    check_directional_monotonicity,
    validate_A3,
)
from .pde_harness import (
    AxisymGrid,
    energy_quadrature,
    expansion_gap,
    project_bubble,
    residual_norm,
    residual_quadrature,
)
from .reduced_energy import (
    AxisKernels,
    Configuration,
    base_spacing_points,
    bounds_report,
    find_t0_r0,
    mu_embed,
)
from .saddle_solver import (
    solve_saddle,
    stationarity_identities,
    verify_bounds,
    write_trace_csv,
)

__all__ = ["RunConfig", "main", "cmd_constants", "cmd_assumptions",
           "cmd_saddle", "cmd_verify"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_QUADRATURE = 2
EXIT_ASSUMPTION = 3
EXIT_SOLVER = 4
EXIT_RESOLUTION = 5


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters shared by all subcommands."""

    dim: int = 3
    radius: float = 1.0
    center: tuple | None = None   # None = origin of the configured dimension
    eps: tuple = (0.1, 0.05, 0.025)
    penalty_M: float = 100.0
    tol: float = 1.0e-8
    max_iter: int = 50
    grid_nz: int = 513
    grid_nr: int = 257
    seed: int = 0
    out: str = "."
    format: str = "json"
    trace: bool = False
    configuration: dict | None = None

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 3:
            raise ConfigurationError(
                f"N >= 3 required, got dim={self.dim!r}")
        if not (isinstance(self.radius, (int, float)) and self.radius > 0
                and math.isfinite(self.radius)):
            raise ConfigurationError(f"radius must be positive, got {self.radius!r}")
        center = ((0.0,) * self.dim if self.center is None
                  else tuple(float(c) for c in self.center))
        if len(center) != self.dim:
            raise ConfigurationError(
                f"center must have dim={self.dim} entries, got {len(center)}")
        object.__setattr__(self, "center", center)
        eps = tuple(float(e) for e in self.eps)
        if not eps or any(not (0.0 < e < 1.0) for e in eps):
            raise ConfigurationError(
                f"eps values must lie in (0, 1), got {self.eps!r}")
        eps = tuple(sorted(set(eps), reverse=True))
        object.__setattr__(self, "eps", eps)
        if not (self.penalty_M > 0 and math.isfinite(self.penalty_M)):
            raise ConfigurationError(
                f"penalty_M must be positive, got {self.penalty_M!r}")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ConfigurationError(f"tol must be positive, got {self.tol!r}")
        if not isinstance(self.max_iter, int) or self.max_iter < 1:
            raise ConfigurationError(
                f"max_iter must be a positive integer, got {self.max_iter!r}")
        for name, v in (("grid_nz", self.grid_nz), ("grid_nr", self.grid_nr)):
            if not isinstance(v, int) or v < 5:
                raise ConfigurationError(
                    f"{name} must be an integer >= 5, got {v!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigurationError(
                f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.format not in ("json", "csv"):
            raise ConfigurationError(
                f"format must be 'json' or 'csv', got {self.format!r}")
        if self.configuration is not None and not isinstance(self.configuration, dict):
            raise ConfigurationError("configuration must be a JSON object")

    def domain(self) -> BallDomain:
        return BallDomain(N=self.dim, center=np.array(self.center),
                          radius=self.radius)

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "radius": self.radius,
            "center": list(self.center),
            "eps": list(self.eps),
            "penalty_M": self.penalty_M,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "grid_nz": self.grid_nz,
            "grid_nr": self.grid_nr,
            "seed": self.seed,
            "out": self.out,
            "format": self.format,
            "trace": self.trace,
            "configuration": self.configuration,
        }


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def load_run_config(path: str | None, overrides: dict) -> RunConfig:
    """Defaults, then JSON file values, then explicit flag overrides."""
    data: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as e:
            raise ConfigurationError(f"cannot read config file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"config file {path} must hold a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ConfigurationError(
                f"unknown config keys {sorted(unknown)}; "
                f"known keys: {sorted(_CONFIG_KEYS)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    if "eps" in data and not isinstance(data["eps"], (list, tuple)):
        raise ConfigurationError(f"eps must be a list, got {data['eps']!r}")
    if "center" in data and not isinstance(data["center"], (list, tuple)):
        raise ConfigurationError(f"center must be a list, got {data['center']!r}")
    try:
        return RunConfig(**{k: (tuple(v) if isinstance(v, list) else v)
                            for k, v in data.items()})
    except TypeError as e:
        raise ConfigurationError(str(e)) from e


# ---------------------------------------------------------------------------
# Report plumbing
# ---------------------------------------------------------------------------

def _flatten(prefix: str, obj, rows: list) -> None:
    if isinstance(obj, dict):
        for k in obj:
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], rows)
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, obj))


def write_report(name: str, report: dict, config: RunConfig,
                 command: str) -> Path:
    """Write ``{"meta", "report"}`` JSON (and a CSV twin when asked)."""
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "meta": {
            "command": command,
            "package": "nodalbubbles",
            "version": __version__,
            "seed": config.seed,
            "timestamp_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "effective_config": config.to_json_dict(),
        },
        "report": report,
    }
    path = out_dir / f"{name}.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    if config.format == "csv":
        rows: list = []
        _flatten("", report, rows)
        with open(out_dir / f"{name}.csv", "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["key", "value"])
            for key, value in rows:
                writer.writerow([key, "" if value is None else repr(value)])
    return path


def _json_safe(x):
    """Recursively convert numpy scalars/arrays for json.dump."""
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_json_safe(v) for v in x.tolist()]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_constants(config: RunConfig) -> int:
    """Energy constants for the configured dimension -> constants.json."""
    table = compute_constants(config.dim)
    write_report("constants", table.to_json_dict(), config, "constants")
    return EXIT_OK


def cmd_assumptions(config: RunConfig) -> int:
    """Kernel hypothesis checks on the ball -> assumptions.json; 3 on failure."""
    domain = config.domain()
    checks = list(validate_A3(domain, AxisSection.of_ball(domain)))
    checks.extend(check_boundary_expansion(domain))
    checks.append(check_directional_monotonicity(domain, seed=config.seed))
    report = {
        "checks": [c.to_json_dict() for c in checks],
        "all_passed": all(c.passed for c in checks),
    }
    write_report("assumptions", _json_safe(report), config, "assumptions")
    return EXIT_OK if report["all_passed"] else EXIT_ASSUMPTION


def cmd_saddle(config: RunConfig) -> int:
    """Spacing search, bounds, Newton saddle, bracket + identity checks."""
    domain = config.domain()
    kern = AxisKernels.for_ball(domain)
    t0, r0 = find_t0_r0(domain)
    bounds = bounds_report(domain, None, t0, r0)
    init = mu_embed(1.0, 1.0, 1.0, base_spacing_points(t0, r0))
    report = solve_saddle(domain, None, init, tol=config.tol,
                          max_iter=config.max_iter)
    verify_bounds(report, bounds)
    ids = stationarity_identities(report.config, kern)
    payload = {
        "t0": t0,
        "r0": r0,
        "bounds": bounds.to_json_dict(),
        "saddle": report.to_json_dict(),
        "stationarity_identities": list(ids),
        "identities_max_deviation": float(np.max(np.abs(ids - 1.0))),
    }
    write_report("saddle", _json_safe(payload), config, "saddle")
    if config.trace:
        out_dir = Path(config.out)
        write_trace_csv(report, out_dir / "trace.csv")
    return EXIT_OK


def _verify_configuration(config: RunConfig) -> Configuration:
    """The configuration under test: saddle.json output, else inline."""
    saddle_path = Path(config.out) / "saddle.json"
    if config.configuration is not None:
        return Configuration.from_json_dict(config.configuration)
    if saddle_path.exists():
        with open(saddle_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        try:
            return Configuration.from_json_dict(
                data["report"]["saddle"]["config"])
        except (KeyError, TypeError) as e:
            raise ConfigurationError(
                f"{saddle_path} does not hold a saddle report") from e
    raise ConfigurationError(
        "verify needs a configuration: run the saddle command first "
        "(saddle.json in the output directory) or supply 'configuration' "
        "in the config file")


def _check_core_resolution(grid: AxisymGrid, m: float) -> None:
    if m < 6.0 * grid.h_max:
        R = grid.domain.radius
        raise ResolutionError(
            f"core width {m:.3e} spans fewer than 6 grid cells "
            f"(h={grid.h_max:.3e})",
            required_nz=int(math.ceil(12.0 * R / m)) + 1,
            required_nr=int(math.ceil(6.0 * R / m)) + 1)


def cmd_verify(config: RunConfig) -> int:
    """Projection rate, residual comparisons, expansion gap -> verify.json."""
    domain = config.domain()
    if domain.N != 3:
        raise ConfigurationError(
            "verify requires dim=3 (the grid instrument is axisymmetric)")
    table = compute_constants(domain.N)
    cfg = _verify_configuration(config)
    grid = AxisymGrid.for_ball(domain, nz=config.grid_nz, nr=config.grid_nr)

    # Projection rate check: ||PU - U||_inf / sqrt(eps) across the eps list.
    rate_rows = []
    for eps in config.eps:
        p = BubbleParams(N=3, eps=eps, lam=1.0, xi=np.array(domain.center))
        _check_core_resolution(grid, p.core_width)
        PU = project_bubble(domain, p, grid)
        d2 = ((grid.z_nodes - domain.center[0]) ** 2 + grid.r_nodes ** 2)
        m = p.core_width
        U = table.alphaN * (m / (m * m + d2)) ** 0.5
        active = grid.interior | grid.boundary
        diff = float(np.max(np.abs(np.where(active, PU.values - U, 0.0))))
        rate_rows.append({"eps": eps, "sup_diff": diff,
                          "rate_constant": diff / math.sqrt(eps)})
    consts = [r["rate_constant"] for r in rate_rows]
    rate_stable = max(consts) / min(consts) <= 2.0

    # Residual comparisons: grid residual trend for the lam=1 bubble and the
    # quadrature relative residual of the configuration under test.
    residual_rows = []
    for eps in config.eps:
        p = BubbleParams(N=3, eps=eps, lam=1.0, xi=np.array(domain.center))
        PU = project_bubble(domain, p, grid)
        residual_rows.append({
            "eps": eps,
            "grid_relative": residual_norm(PU, eps, relative=True),
            "config_quadrature_relative": residual_quadrature(
                domain, cfg, table, eps),
        })

    gap = expansion_gap(cfg, list(config.eps), table, domain=domain)

    report = {
        "configuration": cfg.to_json_dict(),
        "projection_rate": {"rows": rate_rows,
                            "constant_stable_within_factor_2": rate_stable},
        "residuals": residual_rows,
        "expansion_gap": gap,
    }
    write_report("verify", _json_safe(report), config, "verify")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nodalbubbles",
        description=("Finite-dimensional reduction toolkit for slightly "
                     "subcritical multi-bubble problems on balls"))
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
            ("constants", "dimension-dependent energy constants"),
            ("assumptions", "kernel hypothesis checks on the ball"),
            ("saddle", "reduced-energy saddle pipeline"),
            ("verify", "grid/quadrature verification at a configuration")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--dim", type=int, default=None,
                       help="ambient dimension N (default 3)")
        p.add_argument("--radius", type=float, default=None,
                       help="ball radius (default 1)")
        p.add_argument("--eps", type=float, action="append", default=None,
                       help="subcriticality value; repeatable "
                            "(default 0.1 0.05 0.025)")
        p.add_argument("--penalty-M", dest="penalty_M", type=float,
                       default=None, help="penalty level M (default 100)")
        p.add_argument("--tol", type=float, default=None,
                       help="solver gradient tolerance (default 1e-8)")
        p.add_argument("--grid-nz", dest="grid_nz", type=int, default=None,
                       help="axial grid nodes (default 513)")
        p.add_argument("--grid-nr", dest="grid_nr", type=int, default=None,
                       help="radial grid nodes (default 257)")
        p.add_argument("--seed", type=int, default=None,
                       help="random seed for sampled checks (default 0)")
        p.add_argument("--out", type=str, default=None,
                       help="output directory (default current directory)")
        p.add_argument("--format", choices=("json", "csv"), default=None,
                       help="also write flattened CSV twins of the reports")
        p.add_argument("--trace", action="store_const", const=True,
                       default=None, help="write per-iteration trace.csv "
                                          "(saddle command)")
        p.add_argument("--config", type=str, default=None,
                       help="JSON file with run configuration")
    return parser


_COMMANDS = {
    "constants": cmd_constants,
    "assumptions": cmd_assumptions,
    "saddle": cmd_saddle,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "dim": args.dim,
        "radius": args.radius,
        "eps": args.eps,
        "penalty_M": args.penalty_M,
        "tol": args.tol,
        "grid_nz": args.grid_nz,
        "grid_nr": args.grid_nr,
        "seed": args.seed,
        "out": args.out,
        "format": args.format,
        "trace": args.trace,
    }
    try:
        config = load_run_config(args.config, overrides)
        return _COMMANDS[args.command](config)
    except (ConfigurationError, ParameterError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as e:
        print(f"quadrature error: {e}", file=sys.stderr)
        return EXIT_QUADRATURE
    except ResolutionError as e:
        detail = ""
        if e.required_nz is not None:
            detail = (f" (requires at least grid {e.required_nz}"
                      f"x{e.required_nr})")
        print(f"resolution error: {e}{detail}", file=sys.stderr)
        return EXIT_RESOLUTION
    except (SolverDivergenceError, SearchError) as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except NodalBubblesError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
