"""Batch front end: ``branevortex check | solve | sweep``.

Problems are described by a single TOML document; results are written as
raw field dumps plus JSON/CSV artifacts.  Exit codes are part of the
contract so harnesses can assert on them:

    0   success (and, for solve, all enabled checks passed)
    1   check reported an inadmissible configuration, or a solve finished
        but an enabled diagnostic missed its tolerance
    2   solve refused to start because the existence gate fails
        (override with --force to observe the divergence)
    3   the iteration did not converge within its cap
    64  configuration or command-line parse error
"""

import argparse
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy import fft as sfft

try:
    import tomllib
except ModuleNotFoundError:                       # Python 3.10
    import tomli as tomllib

from . import diagnostics as diag
from .background import make_vortex_spec
from .errors import (BraneVortexError, ExistenceGateError,
                     NonConvergenceError)
from .grids import PlanarGrid, TorusGrid
from .io import write_decay_csv, write_field, write_history_csv, write_json
from .periodic import existence_condition, make_periodic_problem, minimize
from .planar import (decay_rate, decay_samples, make_planar_problem,
                     planar_minimize)

EXIT_OK = 0
EXIT_CHECK_NEGATIVE = 1
EXIT_GATE_REFUSAL = 2
EXIT_NON_CONVERGENCE = 3
EXIT_PARSE = 64

SWEEP_HEADER = "value,residual,flux_err_max,K_err_max,decay_rate"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    mode: str
    points: list
    seed: int = 0
    domain: dict = dc_field(default_factory=dict)
    solver: dict = dc_field(default_factory=dict)
    diagnostics: dict = dc_field(default_factory=dict)
    tolerances: dict = dc_field(default_factory=dict)

    def grid(self):
        d = self.domain
        if self.mode == "torus":
            return TorusGrid(d["Lx"], d["Ly"], d["nx"], d.get("ny", d["nx"]))
        return PlanarGrid(d["R"], d["nx"], d.get("ny", d["nx"]))


def _require(table: dict, key: str, context: str):
    if key not in table:
        raise ConfigError(f"missing key '{key}' in [{context}]")
    return table[key]


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error in {path}: {exc}") from exc

    mode = doc.get("mode")
    if mode not in ("torus", "plane"):
        raise ConfigError("key 'mode' must be 'torus' or 'plane'")
    domain = _require(doc, "domain", "config")
    for key in (("Lx", "Ly", "nx") if mode == "torus" else ("R", "nx")):
        _require(domain, key, "domain")
    comps = doc.get("components")
    if not isinstance(comps, list) or len(comps) < 2:
        raise ConfigError(
            "need at least two [[components]] tables with 'points' arrays")
    points = []
    for j, comp in enumerate(comps):
        pts = comp.get("points", [])
        try:
            arr = np.asarray(pts, dtype=float).reshape(-1, 2) if len(pts) \
                else np.zeros((0, 2))
        except (TypeError, ValueError) as exc:
            raise ConfigError(
                f"components[{j}].points must be an array of [x, y] pairs") \
                from exc
        points.append(arr)
    return RunConfig(mode=mode, points=points, seed=int(doc.get("seed", 0)),
                     domain=domain, solver=doc.get("solver", {}),
                     diagnostics=doc.get("diagnostics", {}),
                     tolerances=doc.get("tolerances", {}))


def _build_problem(cfg: RunConfig):
    spec = make_vortex_spec(cfg.points, cfg.grid())
    if cfg.mode == "torus":
        return make_periodic_problem(spec,
                                     core_scale=cfg.solver.get("core_scale"))
    return make_planar_problem(spec, mu=cfg.domain.get("mu", 1.0),
                               blend=cfg.solver.get("blend"))


def _solve_problem(problem, cfg: RunConfig, force: bool):
    kwargs = dict(tol=cfg.solver.get("tol", 1e-10),
                  residual_tol=cfg.solver.get("residual_tol", 1e-8),
                  max_outer=cfg.solver.get("max_outer", 200))
    if cfg.mode == "torus":
        return minimize(problem, force=force, **kwargs)
    return planar_minimize(problem, **kwargs)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check(cfg: RunConfig) -> int:
    if cfg.mode != "torus":
        print("check: the existence gate applies to torus mode only",
              file=sys.stderr)
        return EXIT_PARSE
    spec = make_vortex_spec(cfg.points, cfg.grid())
    gate = existence_condition(spec)
    print(f"threshold (l+1)|cell|/(4 pi) = {gate.threshold:.10g}")
    print("component  N      margin          K")
    for j, n in enumerate(spec.counts):
        print(f"{j + 1:9d}  {n:5d}  {gate.margins[j]: .6e}  "
              f"{gate.K[j]: .6e}")
    print(f"admissible: {gate.admissible}")
    return EXIT_OK if gate.admissible else EXIT_CHECK_NEGATIVE


def _write_artifacts(out: Path, result, report=None):
    grid = result.problem.grid
    for j in range(result.w.shape[0]):
        write_field(out, "w", j + 1, result.w[j], grid)
        write_field(out, "exp_u", j + 1, result.exp_u[j], grid)
    if result.converged:
        _, F = diag.reconstruct_fields(result)
        for j in range(F.shape[0]):
            write_field(out, "F", j + 1, F[j], grid)
    write_history_csv(out / "history.csv", result.history)
    if report is not None:
        write_json(out / "diagnostics.json", report.to_dict())


def cmd_solve(cfg: RunConfig, out: Path, force: bool = False) -> int:
    out.mkdir(parents=True, exist_ok=True)
    try:
        problem = _build_problem(cfg)
        result = _solve_problem(problem, cfg, force)
    except ExistenceGateError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_GATE_REFUSAL
    except NonConvergenceError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        if exc.history is not None:
            write_history_csv(out / "history.csv", exc.history)
        return EXIT_NON_CONVERGENCE

    dcfg = cfg.diagnostics
    window = dcfg.get("decay_window")
    if cfg.mode == "torus" or window is None:
        window = None
    else:
        window = tuple(window)
    report = diag.build_report(
        result,
        flux=dcfg.get("flux", True),
        K=dcfg.get("K", True),
        uniqueness_trials=int(dcfg.get("uniqueness_trials", 0)),
        decay_window=window,
        symmetric=bool(dcfg.get("symmetric", False)),
        seed=cfg.seed, tolerances=cfg.tolerances,
        tol=cfg.solver.get("tol", 1e-10),
        max_outer=cfg.solver.get("max_outer", 200))
    _write_artifacts(out, result, report)
    if window is not None:
        r, log_usq, log_gradsq = decay_samples(result, window)
        write_decay_csv(out / "decay.csv", r, log_usq, log_gradsq)
    if not report.all_passed:
        failed = [k for k, ok in report.passed.items() if not ok]
        print(f"checks failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK_NEGATIVE
    print(f"converged in {result.iterations} iterations; "
          f"artifacts in {out}")
    return EXIT_OK


def _sweep_metrics(cfg: RunConfig, result) -> dict:
    expected = diag.flux_expected(result)
    if cfg.mode == "torus":
        flux_err = float(np.max(np.abs(
            diag.check_flux_refined(result) - expected)))
        k_err = float(np.max(np.abs(diag.check_K_identity_refined(result))))
        rate = float("nan")
    else:
        flux_err = float(np.max(np.abs(diag.check_flux(result) - expected)))
        k_err = float("nan")
        window = cfg.diagnostics.get("decay_window")
        rate = float("nan")
        if window is not None:
            rate = decay_rate(result, tuple(window)).rate
    return {"residual": result.residual, "flux_err_max": flux_err,
            "K_err_max": k_err, "decay_rate": rate}


def cmd_sweep(cfg: RunConfig, parameter: str, values, out: Path) -> int:
    if parameter not in ("nx", "R", "mu"):
        print(f"sweep: unsupported parameter {parameter!r} "
              f"(choose nx, R or mu)", file=sys.stderr)
        return EXIT_PARSE
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for value in values:
        sub = RunConfig(mode=cfg.mode, points=[p.copy() for p in cfg.points],
                        seed=cfg.seed, domain=dict(cfg.domain),
                        solver=dict(cfg.solver),
                        diagnostics=dict(cfg.diagnostics),
                        tolerances=dict(cfg.tolerances))
        if parameter == "nx":
            sub.domain["nx"] = int(value)
            sub.domain["ny"] = int(value)
        else:
            if cfg.mode != "plane":
                print(f"sweep: parameter {parameter!r} applies to plane mode",
                      file=sys.stderr)
                return EXIT_PARSE
            sub.domain[parameter] = float(value)
        try:
            problem = _build_problem(sub)
            result = _solve_problem(problem, sub, force=False)
            metrics = _sweep_metrics(sub, result)
        except BraneVortexError as exc:
            print(f"sweep value {value}: {exc}", file=sys.stderr)
            metrics = {"residual": float("nan"),
                       "flux_err_max": float("nan"),
                       "K_err_max": float("nan"), "decay_rate": float("nan")}
        rows.append((value, metrics))
    lines = [SWEEP_HEADER]
    for value, m in rows:
        lines.append(f"{value},{m['residual']!r},{m['flux_err_max']!r},"
                     f"{m['K_err_max']!r},{m['decay_rate']!r}")
    csv_path = out / "sweep.csv"
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {csv_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_PARSE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="branevortex",
                     description="Multi-component BPS vortex solver")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (("check", "evaluate the existence gate"),
                       ("solve", "solve and write artifacts"),
                       ("sweep", "solve over a parameter sweep")):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="TOML problem file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--threads", type=int, default=1,
                       help="FFT worker threads")
        if name != "check":
            p.add_argument("--out", required=True, help="output directory")
        if name == "solve":
            p.add_argument("--force", action="store_true",
                           help="run despite a failing existence gate")
        if name == "sweep":
            p.add_argument("--param", required=True,
                           help="parameter to sweep: nx, R or mu")
            p.add_argument("--values", required=True,
                           help="comma-separated values")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.seed is not None:
        cfg.seed = args.seed
    try:
        with sfft.set_workers(max(1, args.threads)):
            if args.command == "check":
                return cmd_check(cfg)
            if args.command == "solve":
                return cmd_solve(cfg, Path(args.out), force=args.force)
            values = [v for v in args.values.split(",") if v]
            return cmd_sweep(cfg, args.param, values, Path(args.out))
    except (BraneVortexError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
