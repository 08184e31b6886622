"""Command-line front end: solve, scan, table, verify, mesh and period.

Exit codes: 0 success, 1 invalid input or internal error, 2 no root found.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import geometry, solver
from .curve import make_params
from .errors import CMCError, NoSignChangeError, ParameterError, SpuriousRootError
from .monodromy import DS, H3, closing_pair, symmetry_report
from .transport import PathSpec, half_ellipse, homotopy_check, make_path_c1, make_path_c2, transport

EXIT_OK, EXIT_ERROR, EXIT_NO_ROOT = 0, 1, 2
JSON_DIGITS, CSV_DIGITS = 12, 6

# integration rtol, root xtol
TOL_PROFILES = {
    "fast": (1e-9, 1e-10),
    "default": (1e-12, 1e-13),
    "paranoid": (1e-14, 1e-15),
}
TARGET_TAGS = {
    "h3": solver.H3,
    "ds-elliptic": solver.DS_ELLIPTIC,
    "ds-hyperbolic": solver.DS_HYPERBOLIC,
}
SPACE_TAGS = {"h3": H3, "ds": DS}

# verify thresholds; "closing" asks for a root within ROOT_WINDOW of the input c,
# which is usually rounded to a few digits
VERIFY_TOLS = {
    "det_drift": 1e-9,
    "symmetry": 1e-8,
    "homotopy": 1e-8,
    "monodromy_form": 1e-8,
    "closing": 2e-4,
    "membership": 1e-6,
}
ROOT_WINDOW = 2e-4
K_CAP = 20


@dataclass
class RunConfig:
    """Validated parameters of one CLI invocation."""

    command: str
    k: int | None = None
    lam: float = 2.0
    c: float | None = None
    target: str | None = None
    bracket: tuple[float, float] | None = None
    c_min: float = -1.0
    c_max: float = 1.0
    steps: int = solver.SCAN_STEPS
    k_max: int | None = None
    k_cap: int = K_CAP
    space: str = "h3"
    resolution: tuple[int, int] = geometry.MESH_RESOLUTION
    r_range: tuple[float, float] = geometry.MESH_R_RANGE
    loop: str = "gamma1"
    variant: str = "minimal"
    out: str | None = None
    format: str | None = None
    force: bool = False
    tol_profile: str = "default"
    integration_tol: float | None = None
    root_tol: float | None = None
    workers: int | None = None

    @classmethod
    def from_mapping(cls, command: str, values: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)} - {"command"}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ParameterError(f"unknown configuration keys: {', '.join(unknown)}")
        cfg = cls(command, **{key: v for key, v in values.items() if v is not None})
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.tol_profile not in TOL_PROFILES:
            raise ParameterError(f"unknown tolerance profile {self.tol_profile!r}")
        for name in ("integration_tol", "root_tol"):
            val = getattr(self, name)
            if val is not None and not 1e-16 <= val <= 1e-3:
                raise ParameterError(f"{name} must lie in [1e-16, 1e-3] (got {val})")
        if self.k is not None:
            make_params(self.k, self.lam, 1.0 if self.c is None else self.c)
        if self.target is not None and self.target not in TARGET_TAGS:
            raise ParameterError(f"unknown target {self.target!r}")
        if self.space not in SPACE_TAGS:
            raise ParameterError(f"unknown space {self.space!r}")
        if self.steps < 2:
            raise ParameterError("steps must be at least 2")
        if not 1 <= self.k_cap <= 200:
            raise ParameterError("k_cap must lie in [1, 200]")
        if self.k_max is not None and not 1 <= self.k_max <= self.k_cap:
            raise ParameterError(f"k_max must lie in [1, {self.k_cap}] (got {self.k_max})")
        if self.workers is not None and self.workers < 1:
            raise ParameterError("workers must be positive")
        if self.format is not None and self.format not in ("json", "csv", "obj", "ply"):
            raise ParameterError(f"unknown format {self.format!r}")

    @property
    def tolerances(self) -> tuple[float, float]:
        itol, rtol = TOL_PROFILES[self.tol_profile]
        return (self.integration_tol or itol, self.root_tol or rtol)


def _round(x, digits=JSON_DIGITS):
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(f"{x:.{digits}g}") if math.isfinite(x) else None
    if isinstance(x, complex):
        return [_round(x.real, digits), _round(x.imag, digits)]
    if isinstance(x, dict):
        return {str(key): _round(v, digits) for key, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_round(v, digits) for v in x]
    return x


def dump_json(obj, stream=None) -> None:
    stream = stream or sys.stdout
    json.dump(_round(obj), stream, indent=2, sort_keys=True, allow_nan=False)
    stream.write("\n")


def _csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.{CSV_DIGITS}g}" if math.isfinite(x) else ""
    return str(x)


def write_csv(header, rows, stream=None) -> None:
    writer = csv.writer(stream or sys.stdout, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(x) for x in row])


def _result_json(result: solver.SolveResult) -> dict:
    return {
        "k": result.k,
        "lambda": result.lam,
        "c_star": result.c_star,
        "h": result.h,
        "h1": result.h1,
        "h2": result.h2,
        "ambient": result.ambient,
        "discriminant": result.discriminant,
        "alpha": result.alpha,
        "beta": result.beta,
        "residuals": {
            "closing_gap": result.gap_residual,
            "membership": result.membership_residual,
        },
        "bracket": list(result.bracket),
        "iterations": result.iterations,
    }


def cmd_solve(cfg: RunConfig) -> int:
    itol, rtol = cfg.tolerances
    result = solver.solve_target(cfg.k, cfg.lam, TARGET_TAGS[cfg.target], cfg.bracket,
                                 tol=rtol, integration_tol=itol)
    dump_json(_result_json(result))
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    itol, _ = cfg.tolerances
    samples = solver.scan(cfg.k, cfg.lam, cfg.c_min, cfg.c_max, cfg.steps, tol=itol,
                          workers=cfg.workers)
    write_csv(("c", "h1", "h2", "gap", "status"),
              [(s.c, s.h1, s.h2, s.gap, s.status) for s in samples])
    return EXIT_OK


def cmd_table(cfg: RunConfig) -> int:
    itol, rtol = cfg.tolerances
    rows = solver.table(range(1, cfg.k_max + 1), cfg.lam, workers=cfg.workers,
                        tol=rtol, integration_tol=itol)
    out = []
    for row in rows:
        cells = [row.k]
        for target in solver.TARGETS:
            r = row.results.get(target)
            cells += [r.c_star, r.h] if r else [None, None]
        cells.append("; ".join(row.diagnostics))
        out.append(cells)
    write_csv(("k", "c_h3", "h_h3", "c_ell", "h_ell", "c_hyp", "h_hyp", "diagnostics"), out)
    return EXIT_OK


def _relative_gap(cd) -> float:
    return abs(cd.gap) / max(1.0, abs(cd.h))


def polish_root(k: int, lam: float, c: float, itol: float, rtol: float,
                window: float = ROOT_WINDOW) -> solver.SolveResult:
    """The root in [c - window, c + window] (narrowed to keep c = 0 out)."""
    half = min(window, 0.5 * abs(c))
    return solver.find_root(k, lam, (c - half, c + half), rtol, itol)


def verify_report(k: int, lam: float, c: float, itol: float = 1e-12,
                  rtol: float = solver.ROOT_TOL) -> dict:
    """Named residuals with pass/fail flags for the parameter set (k, lam, c)."""
    params = make_params(k, lam, c)
    checks: dict[str, dict] = {}

    def record(name, value, note=None):
        entry = {"value": value, "tol": VERIFY_TOLS[name],
                 "pass": value is not None and value <= VERIFY_TOLS[name]}
        if note:
            entry["note"] = note
        checks[name] = entry

    runs = [transport(params, p, tol=itol) for p in (make_path_c1(params), make_path_c2(params))]
    record("det_drift", max(r.det_drift for r in runs))
    record("symmetry", symmetry_report(params, itol).worst)
    c1 = make_path_c1(params)
    deeper = PathSpec((half_ellipse(c1.start, c1.end, 0.5 * min(0.3, params.inv_lam / 2)),), "c1'")
    record("homotopy", homotopy_check(params, c1, deeper, itol))

    cd = closing_pair(params, itol, form_tol=math.inf)
    record("monodromy_form", cd.form_residual)

    try:
        polished = polish_root(k, lam, c, itol, rtol)
    except CMCError as exc:
        polished = None
        record("closing", None, f"no root within {ROOT_WINDOW} of c: {exc}")
        record("membership", None, "no root to check")
    else:
        record("closing", abs(polished.c_star - c))
        record("membership", polished.membership_residual)

    return {
        "k": k,
        "lambda": lam,
        "c": c,
        "h1": cd.h1,
        "h2": cd.h2,
        "relative_gap": _relative_gap(cd),
        "polished_c": polished.c_star if polished else None,
        "ambient": polished.ambient if polished else None,
        "checks": checks,
        "pass": all(v["pass"] for v in checks.values()),
    }


def cmd_verify(cfg: RunConfig) -> int:
    itol, rtol = cfg.tolerances
    report = verify_report(cfg.k, cfg.lam, cfg.c, itol, rtol)
    dump_json(report)
    return EXIT_OK if report["pass"] else EXIT_ERROR


def mesh_result(cfg: RunConfig) -> tuple[solver.SolveResult, list[str]]:
    """The root to mesh and any warnings; refuses non-roots unless forced."""
    itol, rtol = cfg.tolerances
    space = SPACE_TAGS[cfg.space]
    params = make_params(cfg.k, cfg.lam, cfg.c)
    warnings = []
    try:
        result = polish_root(cfg.k, cfg.lam, cfg.c, itol, rtol)
    except CMCError as exc:
        if not cfg.force:
            raise ParameterError(
                f"c = {cfg.c} is not within {ROOT_WINDOW} of a root ({exc}); "
                "pass --force to mesh it anyway"
            ) from exc
        cd = closing_pair(params, itol)
        warnings.append(f"c = {cfg.c} does not close (relative gap {_relative_gap(cd):.3g}); "
                        "the mesh will not fit together")
        result = solver.describe_root(params, cd, target=space)
    wanted_ds = space == DS
    if (result.ambient != H3) != wanted_ds:
        raise ParameterError(f"root c = {result.c_star:.9g} lives in {result.ambient}, not {space}")
    return result, warnings


def cmd_mesh(cfg: RunConfig) -> int:
    geometry.mesh_format(cfg.out)
    result, warnings = mesh_result(cfg)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    itol, _ = cfg.tolerances
    mesh = geometry.build_mesh(result.params, result, tuple(cfg.resolution),
                               tuple(cfg.r_range), itol)
    mesh.metadata["warnings"] = warnings
    mesh.metadata["gap_residual"] = result.gap_residual
    mesh.metadata["membership_residual"] = result.membership_residual
    sidecar = geometry.export_mesh(mesh, cfg.out)
    dump_json({"out": cfg.out, "metadata": sidecar, **mesh.metadata})
    return EXIT_OK


def cmd_period(cfg: RunConfig) -> int:
    itol, _ = cfg.tolerances
    vec = geometry.euclidean_period(make_params(cfg.k, cfg.lam, cfg.c), cfg.loop, cfg.variant, itol)
    dump_json({"k": cfg.k, "lambda": cfg.lam, "c": cfg.c, "loop": cfg.loop,
               "variant": cfg.variant, "period": vec, "norm": float(np.linalg.norm(vec))})
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "scan": cmd_scan,
    "table": cmd_table,
    "verify": cmd_verify,
    "mesh": cmd_mesh,
    "period": cmd_period,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmc1", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="branch parameter lambda > 1 (default 2)")
    common.add_argument("--tol-profile", choices=sorted(TOL_PROFILES), default=None)
    common.add_argument("--integration-tol", type=float, default=None)
    common.add_argument("--root-tol", type=float, default=None)
    common.add_argument("--workers", type=int, default=None,
                        help="thread count (default: $CMC1_THREADS or 1)")
    common.add_argument("--config", default=None,
                        help="JSON file of option overrides; unknown keys are rejected")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="find one closing root")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--target", choices=sorted(TARGET_TAGS), required=True)
    p.add_argument("--bracket", type=float, nargs=2, metavar=("C_LO", "C_HI"))

    p = sub.add_parser("scan", parents=[common], help="h1, h2 and their gap on a grid of c (CSV)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--c-min", type=float, default=None)
    p.add_argument("--c-max", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)

    p = sub.add_parser("table", parents=[common], help="all three root types for k = 1..k_max (CSV)")
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--k-cap", type=int, default=None)

    p = sub.add_parser("verify", parents=[common], help="consistency report for (k, lambda, c)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--c", type=float, required=True)

    p = sub.add_parser("mesh", parents=[common], help="export a surface mesh (.obj or .ply)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--space", choices=sorted(SPACE_TAGS), default=None)
    p.add_argument("--resolution", type=int, nargs=2, metavar=("N_RADIAL", "N_ANGULAR"))
    p.add_argument("--r-range", type=float, nargs=2, metavar=("R_MIN", "R_MAX"))
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true", default=None)

    p = sub.add_parser("period", parents=[common], help="Euclidean counterpart period (JSON)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--loop", choices=("gamma1", "gamma2"), default=None)
    p.add_argument("--variant", choices=("minimal", "maximal"), default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {key: v for key, v in vars(args).items() if key not in ("command", "config")}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            overrides = json.load(fh)
        if not isinstance(overrides, dict):
            raise ParameterError("configuration file must hold a JSON object")
        values.update({key: v for key, v in overrides.items() if values.get(key) is None})
    for key in ("bracket", "resolution", "r_range"):
        if values.get(key) is not None:
            values[key] = tuple(values[key])
    return RunConfig.from_mapping(args.command, values)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except (NoSignChangeError, SpuriousRootError) as exc:
        print(f"no root: {exc}", file=sys.stderr)
        return EXIT_NO_ROOT
    except (CMCError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
