"""Command-line driver: ``run``, ``orders`` and ``suite``.

Exit codes: 0 success, 1 solver failure (or failed criterion), 2 bad input.
"""

import argparse
import sys
from dataclasses import dataclass, fields

import numpy as np

from .grids import ConfigurationError
from .integrator import SolverError
from .swe_model import DryStateError


@dataclass
class RunConfig:
    command: str
    scenario: str = None
    nx: int = None
    ny: int = None
    cfl: float = None
    t_final: float = None
    limiter: str = None
    well_balanced: bool = None
    detector_threshold: object = None
    remainder_correction: bool = None
    manning: float = None
    output: str = None
    report: str = None
    levels: int = 3
    only: tuple = ()

    def overrides(self):
        """Scenario/scheme/model overrides that were actually given."""
        out = {}
        for key in ("cfl", "limiter", "well_balanced", "remainder_correction", "manning"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.detector_threshold is not None:
            out["detector_threshold"] = None if self.detector_threshold == "none" else self.detector_threshold
        return out


def _on_off(text):
    value = str(text).strip().lower()
    if value in ("on", "true", "yes", "1"):
        return True
    if value in ("off", "false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def _threshold(text):
    if str(text).strip().lower() == "none":
        return "none"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'none', got {text!r}") from None


def _int_list(text):
    try:
        return tuple(int(p) for p in str(text).split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


_CONFIG_TYPES = {"nx": int, "ny": int, "cfl": float, "t_final": float, "limiter": str, "well_balanced": _on_off,
                 "detector_threshold": _threshold, "remainder_correction": _on_off, "manning": float,
                 "output": str, "report": str, "scenario": str, "levels": int, "only": _int_list}


def read_config(path):
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{number}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise ConfigurationError(f"{path}:{number}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_TYPES[key](value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigurationError(f"{path}:{number}: {exc}") from None
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="wbcsoc", description="Well-balanced shallow-water solver on overlapping cells")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file; command-line flags take precedence")
        p.add_argument("--cfl", type=float)
        p.add_argument("--t-final", type=float, dest="t_final")
        p.add_argument("--limiter", choices=("hr", "none"))
        p.add_argument("--well-balanced", type=_on_off, dest="well_balanced", metavar="on|off")
        p.add_argument("--detector-threshold", type=_threshold, dest="detector_threshold", metavar="C|none")
        p.add_argument("--remainder-correction", type=_on_off, dest="remainder_correction", metavar="on|off")
        p.add_argument("--manning", type=float)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--scenario")
    run.add_argument("--nx", type=int)
    run.add_argument("--ny", type=int)
    run.add_argument("--output", help="CSV file for the final primal averages")
    run.add_argument("--report", help="text file for the error table, when a reference exists")
    common(run)

    orders = sub.add_parser("orders", help="grid-refinement order study")
    orders.add_argument("--scenario")
    orders.add_argument("--nx", type=int)
    orders.add_argument("--levels", type=int)
    orders.add_argument("--report")
    common(orders)

    suite = sub.add_parser("suite", help="run the acceptance criteria")
    suite.add_argument("--only", type=_int_list, help="comma-separated criterion numbers")
    suite.add_argument("--config")
    return parser


def parse_cli(argv):
    args = build_parser().parse_args(argv)
    values = read_config(args.config) if getattr(args, "config", None) else {}
    for key, value in vars(args).items():
        if key not in ("command", "config") and value is not None:
            values[key] = value
    known = {f.name for f in fields(RunConfig)}
    cfg = RunConfig(args.command, **{k: v for k, v in values.items() if k in known})
    if cfg.command == "run" and not cfg.scenario:
        raise ConfigurationError("run needs --scenario (or scenario = ... in --config)")
    if cfg.command == "orders" and not cfg.scenario:
        cfg.scenario = "accuracy-1d"
    return cfg


def _cells(cfg, scenario):
    if cfg.nx is None and cfg.ny is None:
        return None
    if scenario.dim == 1:
        if cfg.ny is not None:
            raise ConfigurationError(f"{scenario.name} is one-dimensional; --ny does not apply")
        return cfg.nx
    nx, ny = scenario.n_cells
    return (cfg.nx or nx, cfg.ny or ny)


def _cell_label(grid):
    return str(grid.n_cells) if grid.dim == 1 else f"{grid.nx}x{grid.ny}"


def _reference(run):
    """Exact reference on the primal grid for scenarios that have one."""
    from .bench.scenarios import tidal_exact

    name = run.scenario.name
    grid = run.grid
    ref = np.zeros_like(run.final.primal)
    if name.startswith("wb-"):
        ref[..., 0] = run.initial.primal[..., 0]
        return ref
    if name == "tidal":
        w, hu = tidal_exact(grid.primal_centers(), max(run.snapshots))
        ref[:, 0], ref[:, 1] = w, hu
        return ref
    return None


def cmd_run(cfg, out):
    from .bench.metrics import error_norms
    from .bench.scenarios import get_scenario, run_scenario
    from .io import format_error_report, write_report, write_solution

    scenario = get_scenario(cfg.scenario)
    run = run_scenario(scenario, _cells(cfg, scenario), t_final=cfg.t_final, **cfg.overrides())
    log = run.log
    t_end = max(run.snapshots)
    out.write(f"{scenario.name}: {len(log)} steps to t={t_end:g} on {_cell_label(run.grid)} cells\n")
    if log:
        out.write(f"final dt={log[-1].dt:.6g}, max wave speed={log[-1].a:.6g}, total w mass={log[-1].total_w_mass:.12g}\n")
    ref = _reference(run) if cfg.t_final is None or scenario.name.startswith("wb-") else None
    if ref is not None:
        report = error_norms(run.final, ref, run.grid)
        out.write(format_error_report(report))
        if cfg.report:
            write_report(report, cfg.report)
    if cfg.output:
        write_solution(run.final, run.grid, run.solver.btilde, cfg.output)
        out.write(f"wrote {cfg.output}\n")
    return 0


def cmd_orders(cfg, out):
    from .bench.acceptance import order_study
    from .bench.metrics import component_names
    from .bench.scenarios import get_scenario
    from .io import format_order_table, order_rows, write_report

    scenario = get_scenario(cfg.scenario)
    if scenario.dim != 1:
        raise ConfigurationError("order studies are available for 1-D scenarios")
    if cfg.levels < 3:
        raise ConfigurationError("an order estimate needs at least 3 levels")
    n0 = cfg.nx or scenario.n_cells
    sols = order_study(cfg.scenario, n0, cfg.levels, **cfg.overrides())
    arrays = [s for _, s in sols]
    names = component_names(arrays[0].shape[-1])
    rows = order_rows(arrays, names)
    out.write(format_order_table(rows, names))
    if cfg.report:
        write_report(rows, cfg.report, names)
    return 0


def cmd_suite(cfg, out):
    from .bench.acceptance import CRITERIA, run_all

    selected = cfg.only or tuple(CRITERIA)
    unknown = [n for n in selected if n not in CRITERIA]
    if unknown:
        raise ConfigurationError(f"unknown criteria {unknown}")
    results = run_all(selected, echo=lambda line: (out.write(line + "\n"), out.flush()))
    return 0 if all(r.passed for r in results) else 1


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        cfg = parse_cli(sys.argv[1:] if argv is None else argv)
        handler = {"run": cmd_run, "orders": cmd_orders, "suite": cmd_suite}[cfg.command]
        return handler(cfg, out)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigurationError as exc:
        sys.stderr.write(f"wbcsoc: error: {exc}\n")
        return 2
    except (DryStateError, SolverError) as exc:
        sys.stderr.write(f"wbcsoc: solver failure: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
