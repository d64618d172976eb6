"""Experiment drivers behind the CLI subcommands.

Each driver writes CSV files into an output directory and returns the rows it
summarized. Floats are written with ``repr`` so that values read back are
bit-identical to the ones computed.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, profile_label, resolve_profile
from .errors import FormatError, NonConvergenceError
from .evolution import Dynamics, make_dynamics, solve_forward, solve_xi
from .lowregret import LowRegretSetup, cost_J_gamma, evaluate_control, solve_low_regret
from .optimal import ControlSetup, cost_J, solve_optimal_control

log = logging.getLogger(__name__)

# (beta, gamma) cells of the low-regret sweep; gamma = 0.01 is not run at beta = 100
TABLE1_CELLS = [(1.0, 10.0), (1.0, 1.0), (1.0, 0.1), (1.0, 0.01),
                (10.0, 10.0), (10.0, 1.0), (10.0, 0.1), (10.0, 0.01),
                (100.0, 10.0), (100.0, 1.0), (100.0, 0.1)]
TABLE2_BETA, TABLE2_GAMMA, TABLE3_GAMMA = 100.0, 1.0, 10.0


# -- CSV -------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def write_field(path, coords, coord_name, x, values) -> None:
    """Space-time field: one row per time level, first column the time."""
    header = [coord_name] + [_fmt(xi) for xi in x]
    write_csv(path, header, ([t, *row] for t, row in zip(coords, values)))


def read_control(path, grid) -> np.ndarray:
    header, rows = read_csv(path)
    expected = grid.shape
    widths = {len(row) for row in rows} | {len(header)}
    if len(rows) != expected[0] or widths != {expected[1] + 1}:
        found_cols = max(widths) - 1
        raise FormatError(
            f"{path}: control shape mismatch, expected {expected[0]} time rows x "
            f"{expected[1]} nodes, found {len(rows)} x {found_cols}")
    try:
        return np.array([[float(c) for c in row[1:]] for row in rows])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed number ({exc})") from None


# -- shared setup ------------------------------------------------------------

def build_dynamics(cfg: ExperimentConfig) -> Dynamics:
    grid = cfg.build_grid()
    return make_dynamics(grid, cfg.build_kernel(grid), cfg.control_region, dense=cfg.solver.dense)


def _tag(value: float) -> str:
    return f"{value:g}"


@dataclass
class RunResult:
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _map(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*tasks)))


# -- uncontrolled ------------------------------------------------------------

def cmd_uncontrolled(cfg: ExperimentConfig, out) -> RunResult:
    out = Path(out)
    dyn = build_dynamics(cfg)
    grid = dyn.grid
    traj = solve_forward(dyn, None, cfg.y0_array(grid))
    write_field(out / "uncontrolled_state.csv", grid.t, "t", grid.x, traj)
    return RunResult(rows=[traj])


# -- optimal control -----------------------------------------------------------

def _optimal_cell(cfg: ExperimentConfig, beta: float, out: str):
    out = Path(out)
    dyn = build_dynamics(cfg)
    grid = dyn.grid
    setup = ControlSetup(dyn, beta, cfg.target_array(grid), cfg.y0_array(grid), cfg.mu)
    tag = _tag(beta)
    try:
        v, report = solve_optimal_control(setup, cfg.solver_config())
        status = "converged"
    except NonConvergenceError as exc:
        v = exc.iterate
        _, report = cost_J(setup, v)
        report.residual_history = list(exc.history)
        report.iterations = len(exc.history) - 1
        status = "nonconverged"
    y = solve_forward(dyn, v, setup.y0)
    write_field(out / f"optimal_beta{tag}_state.csv", grid.t, "t", grid.x, y)
    write_field(out / f"optimal_beta{tag}_control.csv", grid.t[1:], "t", grid.x, v)
    write_csv(out / f"optimal_beta{tag}_convergence.csv", ["iteration", "relative_residual"],
              enumerate(report.residual_history))
    return [beta, report.control_norm, report.distance, report.cost_total,
            report.iterations, status]


OPTIMAL_HEADER = ["beta", "control_norm", "distance", "J", "iterations", "status"]


def cmd_optimal(cfg: ExperimentConfig, out) -> RunResult:
    tasks = [(cfg, b, str(out)) for b in cfg.beta]
    rows = _map(_optimal_cell, tasks, cfg.workers)
    write_csv(Path(out) / "optimal_summary.csv", OPTIMAL_HEADER, rows)
    failures = [r for r in rows if r[-1] != "converged"]
    for r in failures:
        log.warning("beta=%g did not converge", r[0])
    return RunResult(rows, failures)


# -- low regret --------------------------------------------------------------

def _low_regret_cell(cfg: ExperimentConfig, beta: float, gamma: float, out: str):
    out = Path(out)
    dyn = build_dynamics(cfg)
    grid = dyn.grid
    setup = LowRegretSetup.create(dyn, beta, gamma, cfg.target_array(grid), cfg.mu)
    tag = f"beta{_tag(beta)}_gamma{_tag(gamma)}"
    try:
        v, report = solve_low_regret(setup, cfg.solver_config())
        status = "converged"
    except NonConvergenceError as exc:
        v = exc.iterate
        _, report = cost_J_gamma(setup, v)
        report.iterations = len(exc.history) - 1
        status = "nonconverged"
    y = solve_forward(dyn, v)
    _, xi = solve_xi(dyn, y[1:])
    write_field(out / f"low_regret_{tag}_control.csv", grid.t[1:], "t", grid.x, v)
    write_field(out / f"low_regret_{tag}_state.csv", grid.t, "t", grid.x, y)
    write_field(out / f"low_regret_{tag}_xi.csv", grid.t[1:], "t", grid.x, xi)
    return [beta, gamma, report.cost_total, report.control_norm, report.distance,
            report.iterations, status]


LOW_REGRET_HEADER = ["beta", "gamma", "J_gamma", "control_norm", "distance", "iterations", "status"]


def run_low_regret_cells(cfg, cells, cell_dir, table_path) -> RunResult:
    tasks = [(cfg, b, g, str(cell_dir)) for b, g in cells]
    rows = _map(_low_regret_cell, tasks, cfg.workers)
    write_csv(table_path, LOW_REGRET_HEADER, rows)
    return RunResult(rows, [r for r in rows if r[-1] != "converged"])


def cmd_low_regret(cfg: ExperimentConfig, out) -> RunResult:
    cells = [(b, g) for b in cfg.beta for g in cfg.gamma]
    return run_low_regret_cells(cfg, cells, out, Path(out) / "low_regret_table.csv")


# -- evaluation across initial data --------------------------------------------

EVALUATE_HEADER = ["initial_datum", "J_uncontrolled", "distance_uncontrolled",
                   "J_optimal", "distance_optimal", "J_control", "distance_control"]


def _evaluate_row(cfg: ExperimentConfig, datum, beta: float, v: np.ndarray):
    dyn = build_dynamics(cfg)
    grid = dyn.grid
    target = cfg.target_array(grid)
    y0 = resolve_profile(datum, grid)
    zero = np.zeros(grid.shape)
    j0, d0 = evaluate_control(dyn, zero, y0, beta, target)
    v_opt, _ = solve_optimal_control(ControlSetup(dyn, beta, target, y0, cfg.mu),
                                     cfg.solver_config())
    jo, do = evaluate_control(dyn, v_opt, y0, beta, target)
    jv, dv = evaluate_control(dyn, v, y0, beta, target)
    return [profile_label(datum), j0, d0, jo, do, jv, dv]


def evaluate_table(cfg: ExperimentConfig, v: np.ndarray, beta: float, path) -> RunResult:
    tasks = [(cfg, d, beta, v) for d in cfg.initial_data]
    rows = _map(_evaluate_row, tasks, cfg.workers)
    write_csv(path, EVALUATE_HEADER, rows)
    return RunResult(rows)


def cmd_evaluate(cfg: ExperimentConfig, control_file, out) -> RunResult:
    grid = cfg.build_grid()
    v = read_control(control_file, grid)
    return evaluate_table(cfg, v, cfg.beta[0], Path(out) / "evaluate.csv")


# -- full table reproduction ---------------------------------------------------

def cmd_tables(cfg: ExperimentConfig, out) -> RunResult:
    """Low-regret sweep plus the two cross-datum comparison tables."""
    out = Path(out)
    t1 = run_low_regret_cells(cfg, TABLE1_CELLS, out / "table1_cells", out / "table1.csv")
    results = [t1]
    dyn = build_dynamics(cfg)
    target = cfg.target_array(dyn.grid)
    for gamma, name in ((TABLE2_GAMMA, "table2"), (TABLE3_GAMMA, "table3")):
        setup = LowRegretSetup.create(dyn, TABLE2_BETA, gamma, target, cfg.mu)
        v, _ = solve_low_regret(setup, cfg.solver_config())
        write_field(out / f"{name}_control.csv", dyn.grid.t[1:], "t", dyn.grid.x, v)
        results.append(evaluate_table(cfg, v, TABLE2_BETA, out / f"{name}.csv"))
    rows = [r.rows for r in results]
    failures = [f for r in results for f in r.failures]
    return RunResult(rows, failures)

