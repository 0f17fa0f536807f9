"""Command-line runner: parse a config, orchestrate a run, write reports.

Subcommands:
  solve         assemble and solve, write solution and manifest files
  field         solve, then sample the displacement on a grid (CSV)
  oracle-check  also solve with the reference method and compare
  self-test     run built-in consistency checks on disk/ellipse fixtures

The config file is JSON with a ``schema_version`` field; every complex
number is a two-element ``[re, im]`` list. The file is the source of
truth, command-line flags override single fields. Exit codes: 0 success,
2 config error, 3 assembly error, 4 solve failure, 5 reference-solution
disagreement beyond tolerance.
"""

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .field import (
    DEFAULT_BOUNDARY_BAND,
    FieldError,
    FieldSample,
    GridSpec,
    boundary_traction_spread,
    grid_field,
    transmission_residual,
)
from .geometry import ConformalMap, GeometryError, build_geometry, eval_map
from .loading import LoadingError, LoadingSpec, boundary_series, eval_loading, rhs_vectors
from .materials import MaterialError, MaterialPair
from .oracle import OracleError, compare, solve_oracle
from .system import AssemblyError, DensitySolution, assemble_system, solve

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSEMBLY = 3
EXIT_SOLVE = 4
EXIT_MISMATCH = 5
DEFAULT_TRUNCATION = 16
DEFAULT_ORACLE_NODES = 256
DEFAULT_ORACLE_TOLERANCE = 1e-3
RESIDUAL_ANGLES = 64
RESIDUAL_STEP = 1e-4

SOLUTION_FILE = "solution.json"
FIELD_FILE = "field.csv"
ORACLE_FILE = "oracle_report.json"
MANIFEST_FILE = "manifest.json"
SUMMARY_FILE = "summary.txt"

CSV_HEADER = ("re(w)", "im(w)", "re(z)", "im(z)", "region", "re(u)", "im(u)")


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


# -- config parsing -----------------------------------------------------------


def _as_complex(item, where: str) -> complex:
    """Read one [re, im] pair; plain numbers are rejected on purpose."""
    if (
        not isinstance(item, (list, tuple))
        or len(item) != 2
        or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in item)
    ):
        raise ConfigError(f"{where}: complex values must be [re, im] number pairs, got {item!r}")
    return complex(float(item[0]), float(item[1]))


def _complex_list(items, where: str) -> list[complex]:
    if not isinstance(items, list):
        raise ConfigError(f"{where}: expected a list of [re, im] pairs")
    return [_as_complex(v, f"{where}[{i}]") for i, v in enumerate(items)]


def _get(mapping: dict, key: str, where: str):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return mapping[key]


def _real(value, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _integer(value, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class RunConfig:
    """Validated run inputs; construction performs all cross-module checks."""

    cmap: ConformalMap
    material: MaterialPair
    loading: LoadingSpec
    truncation: int
    grid: GridSpec | None
    oracle_enabled: bool
    oracle_nodes: int
    oracle_tolerance: float
    out_dir: Path

    def echo(self) -> dict:
        """Effective settings after overrides, in config-file form."""
        material: dict = {"lambda": self.material.lam_ext, "mu": self.material.mu_ext}
        if self.material.cavity:
            material["cavity"] = True
        else:
            material["lambda_t"] = self.material.lam_int
            material["mu_t"] = self.material.mu_int
        grid = None
        if self.grid is not None:
            grid = {
                "x0": self.grid.xmin,
                "x1": self.grid.xmax,
                "y0": self.grid.ymin,
                "y1": self.grid.ymax,
                "nx": self.grid.nx,
                "ny": self.grid.ny,
            }
        return {
            "schema_version": SCHEMA_VERSION,
            "map": {"gamma": self.cmap.gamma, "a": [_pair(v) for v in self.cmap.a]},
            "material": material,
            "loading": {
                "A": [_pair(v) for v in self.loading.A],
                "B": [_pair(v) for v in self.loading.B],
            },
            "truncation": self.truncation,
            "grid": grid,
            "oracle": {
                "enabled": self.oracle_enabled,
                "q": self.oracle_nodes,
                "tolerance": self.oracle_tolerance,
            },
            "out_dir": str(self.out_dir),
        }


def parse_grid_text(text: str) -> GridSpec:
    """Parse the --grid override "x0,x1,y0,y1,nx,ny"."""
    parts = text.split(",")
    if len(parts) != 6:
        raise ConfigError(f"--grid needs 6 comma-separated values, got {len(parts)}")
    try:
        x0, x1, y0, y1 = (float(p) for p in parts[:4])
        nx, ny = (int(p) for p in parts[4:])
    except ValueError as exc:
        raise ConfigError(f"--grid: {exc}") from exc
    return _make_grid(x0, x1, y0, y1, nx, ny, "--grid")


def _make_grid(x0, x1, y0, y1, nx, ny, where: str) -> GridSpec:
    if nx < 0 or ny < 0:
        raise ConfigError(f"{where}: grid counts must be nonnegative")
    if x1 < x0 or y1 < y0:
        raise ConfigError(f"{where}: grid bounds must be ordered")
    return GridSpec(x0, x1, y0, y1, nx, ny, band=DEFAULT_BOUNDARY_BAND)


def _parse_grid_block(block, where: str) -> GridSpec:
    return _make_grid(
        _real(_get(block, "x0", where), f"{where}.x0"),
        _real(_get(block, "x1", where), f"{where}.x1"),
        _real(_get(block, "y0", where), f"{where}.y0"),
        _real(_get(block, "y1", where), f"{where}.y1"),
        _integer(_get(block, "nx", where), f"{where}.nx"),
        _integer(_get(block, "ny", where), f"{where}.ny"),
        where,
    )


def load_config(
    path,
    truncation: int | None = None,
    grid_text: str | None = None,
    force_oracle: bool = False,
    out_dir: str | None = None,
    tolerance: float | None = None,
) -> RunConfig:
    """Read, validate and normalize a config file, applying flag overrides.

    Every domain object is constructed here, so a config that would fail
    any module-level invariant (non-injective map, non-elliptic material,
    constant loading term, loading above the truncation) is rejected
    before a run produces any output.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    version = _get(raw, "schema_version", "config")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config schema_version {version!r} is not supported (expected {SCHEMA_VERSION})")

    map_block = _get(raw, "map", "config")
    material_block = _get(raw, "material", "config")
    loading_block = _get(raw, "loading", "config")

    try:
        cmap = ConformalMap(
            _real(_get(map_block, "gamma", "map"), "map.gamma"),
            _complex_list(_get(map_block, "a", "map"), "map.a"),
        )
        lam = _real(_get(material_block, "lambda", "material"), "material.lambda")
        mu = _real(_get(material_block, "mu", "material"), "material.mu")
        if material_block.get("cavity", False):
            material = MaterialPair(lam, mu, cavity=True)
        else:
            material = MaterialPair(
                lam,
                mu,
                _real(_get(material_block, "lambda_t", "material"), "material.lambda_t"),
                _real(_get(material_block, "mu_t", "material"), "material.mu_t"),
            )
        loading = LoadingSpec(
            A=_complex_list(_get(loading_block, "A", "loading"), "loading.A") or [0.0],
            B=_complex_list(_get(loading_block, "B", "loading"), "loading.B") or [0.0],
        )
    except (GeometryError, MaterialError, LoadingError) as exc:
        raise ConfigError(str(exc)) from exc

    n = truncation if truncation is not None else raw.get("truncation", DEFAULT_TRUNCATION)
    n = _integer(n, "truncation")
    if n < 1:
        raise ConfigError(f"truncation must be at least 1, got {n}")
    if loading.order > n:
        raise ConfigError(f"loading mode {loading.order} exceeds truncation order {n}")

    if grid_text is not None:
        grid = parse_grid_text(grid_text)
    elif "grid" in raw and raw["grid"] is not None:
        grid = _parse_grid_block(raw["grid"], "grid")
    else:
        grid = None

    oracle_block = raw.get("oracle", {})
    if not isinstance(oracle_block, dict):
        raise ConfigError("oracle: expected an object")
    enabled = force_oracle or bool(oracle_block.get("enabled", False))
    q = _integer(oracle_block.get("q", DEFAULT_ORACLE_NODES), "oracle.q")
    tol_block = raw.get("tolerances", {})
    if not isinstance(tol_block, dict):
        raise ConfigError("tolerances: expected an object")
    if tolerance is not None:
        oracle_tol = float(tolerance)
    else:
        oracle_tol = _real(tol_block.get("oracle", DEFAULT_ORACLE_TOLERANCE), "tolerances.oracle")
    if oracle_tol <= 0.0:
        raise ConfigError("oracle tolerance must be positive")

    if out_dir is not None:
        out = Path(out_dir)
    else:
        output_block = raw.get("output", {})
        if not isinstance(output_block, dict):
            raise ConfigError("output: expected an object")
        out = Path(output_block.get("dir", "."))

    return RunConfig(
        cmap=cmap,
        material=material,
        loading=loading,
        truncation=n,
        grid=grid,
        oracle_enabled=enabled,
        oracle_nodes=q,
        oracle_tolerance=oracle_tol,
        out_dir=out,
    )


# -- orchestration ------------------------------------------------------------


@dataclass
class RunResults:
    """Everything a run produced, ready for serialization."""

    config: RunConfig
    command: str
    solution: DensitySolution
    samples: list[FieldSample] | None
    oracle_report: object | None
    interface_residuals: tuple[float, float] | None


class SolveFailure(RuntimeError):
    """The truncated solve did not meet its convergence contract."""


def orchestrate(config: RunConfig, command: str) -> RunResults:
    """Assemble, solve, and evaluate whatever the subcommand asks for."""
    bundle = build_geometry(config.cmap, config.truncation)
    system = assemble_system(config.material, bundle, config.loading)
    solution = solve(system)
    if not solution.converged:
        raise SolveFailure(
            f"solve did not converge: residual {solution.residual:.3e} at n={config.truncation}"
        )

    samples = None
    if command == "field":
        if config.grid is None:
            raise ConfigError("a field run needs a grid (config key or --grid)")
        samples = grid_field(solution, config.loading, config.cmap, config.material, config.grid)

    report = None
    if command == "oracle-check" or config.oracle_enabled:
        oracle_sol = solve_oracle(config.cmap, config.material, config.loading, config.oracle_nodes)
        report = compare(oracle_sol, solution, config.cmap, config.material, config.loading)

    if config.material.cavity:
        spread = boundary_traction_spread(
            solution, config.loading, config.cmap, config.material,
            RESIDUAL_ANGLES, step=RESIDUAL_STEP,
        )
        residuals = (float("nan"), spread)
    else:
        residuals = transmission_residual(
            solution, config.loading, config.cmap, config.material,
            RESIDUAL_ANGLES, step=RESIDUAL_STEP,
        )

    return RunResults(
        config=config,
        command=command,
        solution=solution,
        samples=samples,
        oracle_report=report,
        interface_residuals=residuals,
    )


# -- serialization ------------------------------------------------------------


def _pair(c: complex) -> list[float]:
    return [float(np.real(c)), float(np.imag(c))]


def _pair_list(arr) -> list[list[float]] | None:
    if arr is None:
        return None
    return [_pair(v) for v in np.asarray(arr)]


def solution_payload(solution: DensitySolution) -> dict:
    return {
        "mode": solution.mode,
        "truncation": solution.n,
        "coefficients": {
            "xe_plus": _pair_list(solution.xe_plus),
            "xe_minus": _pair_list(solution.xe_minus),
            "xi_plus": _pair_list(solution.xi_plus),
            "xi_minus": _pair_list(solution.xi_minus),
        },
        "residual": solution.residual,
        "rank": solution.rank,
        "null_dim": solution.null_dim,
        "sv_smallest_kept": solution.sv_smallest_kept,
        "sv_largest_dropped": solution.sv_largest_dropped,
        "rotation_projection": solution.rotation_projection,
        "converged": solution.converged,
    }


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _write_json(path: Path, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_field_csv(path: Path, samples: list[FieldSample]) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for s in samples:
                writer.writerow(
                    [
                        repr(float(np.real(s.w))),
                        repr(float(np.imag(s.w))),
                        repr(float(np.real(s.z))),
                        repr(float(np.imag(s.z))),
                        s.region,
                        repr(float(np.real(s.u))),
                        repr(float(np.imag(s.u))),
                    ]
                )
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _summary_text(results: RunResults) -> str:
    sol = results.solution
    lines = [
        f"command: {results.command}",
        f"mode: {sol.mode}",
        f"truncation: {sol.n}",
        f"solve residual: {sol.residual:.6e}",
        f"rank: {sol.rank} (null dim {sol.null_dim}, converged {sol.converged})",
        f"rotation projection: {sol.rotation_projection:.6e}",
    ]
    r_disp, r_trac = results.interface_residuals
    if sol.mode == "cavity":
        lines.append(f"boundary traction spread: {r_trac:.6e}")
    else:
        lines.append(f"interface displacement gap: {r_disp:.6e}")
        lines.append(f"interface traction spread: {r_trac:.6e}")
    if results.samples is not None:
        lines.append(f"field samples: {len(results.samples)}")
    if results.oracle_report is not None:
        for name, value in results.oracle_report.rows():
            lines.append(f"oracle {name}: {value:.6e}")
        lines.append(f"oracle tolerance: {results.config.oracle_tolerance:.6e}")
    return "\n".join(lines) + "\n"


def emit_reports(results: RunResults, out_dir) -> list[Path]:
    """Write every report for a finished run; returns the paths written.

    The manifest echoes the effective config so a run can be reproduced
    from its own output directory; apart from the manifest timestamp the
    outputs are deterministic functions of the config.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc

    written: list[Path] = []
    sol_path = out / SOLUTION_FILE
    _write_json(sol_path, solution_payload(results.solution))
    written.append(sol_path)

    if results.samples is not None:
        csv_path = out / FIELD_FILE
        _write_field_csv(csv_path, results.samples)
        written.append(csv_path)

    if results.oracle_report is not None:
        rep = results.oracle_report
        rep_path = out / ORACLE_FILE
        _write_json(
            rep_path,
            {
                "boundary_max": rep.boundary_max,
                "boundary_rms": rep.boundary_rms,
                "exterior_max": rep.exterior_max,
                "exterior_rms": rep.exterior_rms,
                "q": rep.q,
                "n_points": rep.n_points,
                "condition_estimate": rep.condition_estimate,
                "tolerance": results.config.oracle_tolerance,
                "within_tolerance": oracle_within_tolerance(results),
            },
        )
        written.append(rep_path)

    summary_path = out / SUMMARY_FILE
    _write_text(summary_path, _summary_text(results))
    written.append(summary_path)

    manifest_path = out / MANIFEST_FILE
    _write_json(
        manifest_path,
        {
            "schema_version": SCHEMA_VERSION,
            "command": results.command,
            "config": results.config.echo(),
            "versions": {"elastinc": __version__, "numpy": np.__version__},
            "files": [p.name for p in written],
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        },
    )
    written.append(manifest_path)
    return written


def oracle_within_tolerance(results: RunResults) -> bool:
    rep = results.oracle_report
    tol = results.config.oracle_tolerance
    return bool(rep.boundary_max <= tol and rep.exterior_max <= tol)


# -- entry point --------------------------------------------------------------


def run(
    config_path,
    command: str = "solve",
    truncation: int | None = None,
    grid_text: str | None = None,
    force_oracle: bool = False,
    out_dir: str | None = None,
    tolerance: float | None = None,
    stream=None,
) -> int:
    """Full run for one subcommand; returns the process exit code."""
    stream = stream if stream is not None else sys.stderr
    try:
        config = load_config(
            config_path,
            truncation=truncation,
            grid_text=grid_text,
            force_oracle=force_oracle,
            out_dir=out_dir,
            tolerance=tolerance,
        )
        if command == "field" and config.grid is None:
            raise ConfigError("a field run needs a grid (config key or --grid)")
    except ConfigError as exc:
        print(f"config error: {exc}", file=stream)
        return EXIT_CONFIG

    try:
        results = orchestrate(config, command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stream)
        return EXIT_CONFIG
    except (GeometryError, MaterialError, LoadingError, AssemblyError) as exc:
        print(f"assembly error: {exc}", file=stream)
        return EXIT_ASSEMBLY
    except (SolveFailure, FieldError, OracleError, np.linalg.LinAlgError) as exc:
        print(f"solve error: {exc}", file=stream)
        return EXIT_SOLVE

    try:
        written = emit_reports(results, config.out_dir)
    except OSError as exc:
        print(str(exc), file=stream)
        return 1

    for path in written:
        print(f"wrote {path}", file=stream)
    if results.oracle_report is not None and not oracle_within_tolerance(results):
        rep = results.oracle_report
        print(
            "oracle disagreement beyond tolerance: "
            f"boundary {rep.boundary_max:.3e}, exterior {rep.exterior_max:.3e} "
            f"(tolerance {results.config.oracle_tolerance:.3e})",
            file=stream,
        )
        return EXIT_MISMATCH
    return EXIT_OK


# -- built-in self test -------------------------------------------------------


def _check_disk_closed_form() -> float:
    cmap = ConformalMap(1.0, [0.5])
    material = MaterialPair(2.0, 1.0, cavity=True)
    bundle = build_geometry(cmap, 12)
    worst = 0.0
    for m in (1, 2, 3):
        B = np.zeros(m + 1, complex)
        B[m] = 0.8 - 0.3j
        sol = solve(assemble_system(material, bundle, LoadingSpec(A=np.zeros(2), B=B)))
        want = -2.0 * np.conj(B[m]) * m / material.beta
        worst = max(worst, abs(sol.xe_plus[m]))
        worst = max(worst, abs(sol.xe_minus[m] - want) / abs(want))
    return worst


def _check_loading_series() -> float:
    cmap = ConformalMap(1.0, [0.5, 0.3])
    material = MaterialPair(2.0, 1.0, lam_int=4.0, mu_int=3.0)
    bundle = build_geometry(cmap, 16)
    loading = LoadingSpec(A=[0.0, 0.3 - 0.1j], B=[0.0, 1.0, 0.25j])
    rv = rhs_vectors(material, bundle, loading)
    theta = np.linspace(0.0, 2.0 * np.pi, 32, endpoint=False)
    w = cmap.gamma * np.exp(1j * theta)
    series = boundary_series(rv.disp_pos, rv.disp_neg, w)
    direct = eval_loading(loading, cmap, material, eval_map(cmap, w))
    return float(np.max(np.abs(series - direct)))


def _check_transmission_residual() -> float:
    cmap = ConformalMap(1.0, [0.5, 0.3])
    material = MaterialPair(2.0, 1.0, lam_int=4.0, mu_int=3.0)
    bundle = build_geometry(cmap, 16)
    loading = LoadingSpec(A=np.zeros(2), B=[0.0, 1.0])
    sol = solve(assemble_system(material, bundle, loading))
    r_disp, r_trac = transmission_residual(
        sol, loading, cmap, material, RESIDUAL_ANGLES, step=RESIDUAL_STEP
    )
    return max(r_disp, r_trac)


def _check_oracle_agreement() -> float:
    cmap = ConformalMap(1.0, [0.5])
    material = MaterialPair(2.0, 1.0, cavity=True)
    loading = LoadingSpec(A=np.zeros(2), B=[0.0, 1.0])
    sol = solve(assemble_system(material, build_geometry(cmap, 12), loading))
    oracle_sol = solve_oracle(cmap, material, loading, 64)
    report = compare(oracle_sol, sol, cmap, material, loading, n_points=16)
    return max(report.boundary_max, report.exterior_max)


SELF_TESTS = (
    ("disk cavity closed form", _check_disk_closed_form, 1e-10),
    ("loading boundary series", _check_loading_series, 1e-8),
    ("ellipse transmission residuals", _check_transmission_residual, 1e-5),
    ("reference-method agreement", _check_oracle_agreement, 1e-3),
)


def self_test(stream=None) -> int:
    """Run the built-in fixture checks; returns 0 when all pass."""
    stream = stream if stream is not None else sys.stdout
    failures = 0
    for name, fn, tol in SELF_TESTS:
        value = fn()
        ok = value <= tol
        failures += 0 if ok else 1
        verdict = "pass" if ok else "FAIL"
        print(f"{verdict}  {name}: {value:.3e} (tolerance {tol:.1e})", file=stream)
    print(f"self-test: {len(SELF_TESTS) - failures}/{len(SELF_TESTS)} passed", file=stream)
    return EXIT_OK if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elastinc",
        description="Solve the plane elastic inclusion problem from a JSON config.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("solve", "assemble and solve, write solution and manifest"),
        ("field", "solve and sample the displacement field on a grid"),
        ("oracle-check", "solve and cross-check against the reference method"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--truncation", type=int, default=None, help="override truncation order")
        p.add_argument("--grid", default=None, metavar="X0,X1,Y0,Y1,NX,NY",
                       help="override the evaluation grid")
        p.add_argument("--oracle", action="store_true",
                       help="force the reference comparison on")
        p.add_argument("--out-dir", default=None, help="override the output directory")
        p.add_argument("--tolerance", type=float, default=None,
                       help="override the reference-comparison tolerance")
    sub.add_parser("self-test", help="run built-in consistency checks")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "self-test":
        return self_test()
    return run(
        args.config,
        command=args.command,
        truncation=args.truncation,
        grid_text=args.grid,
        force_oracle=args.oracle,
        out_dir=args.out_dir,
        tolerance=args.tolerance,
    )


if __name__ == "__main__":
    sys.exit(main())
