# core/loop.py

import time
from datetime import datetime
from typing import Dict, List, Optional, Tuple

import numpy as np
from rich.table import Table
from tqdm import tqdm

from core.context import RunContext
from core.errors import ScenarioError, SolverError, StagnationError
from core.log import console, is_quiet, log
from core.mesh import CartesianGrid
from core.state import ConservedState, PrimitiveState, zero_dry_cells
from models import ErrorReport, RunConfig, RunManifest
from modules.boundary import fill_ghosts
from modules.records import RecordWriter, snapshot_from_state
from modules.scenarios import (eoc, error_norms, initial_state, steady_state_errors,
                               velocity_error_norms)
from modules.solver import FVEGSolver


class RunResult:
    """Final state of one run plus what was recorded on the way."""

    def __init__(self, state: ConservedState, prim: PrimitiveState, grid: CartesianGrid,
                 manifest: RunManifest, solver: FVEGSolver):
        self.state = state
        self.prim = prim
        self.grid = grid
        self.manifest = manifest
        self.solver = solver


class SimulationLoop:
    def __init__(self, context: RunContext, write: bool = True):
        self.context = context
        self.write = write

    def _targets(self, end_time: float, snapshots: List[float]) -> List[float]:
        return sorted({t for t in snapshots if t > 0.0} | {end_time})

    def run(self, grid: Optional[CartesianGrid] = None, end_time: Optional[float] = None,
            output_dir: Optional[str] = None) -> RunResult:
        ctx, cfg = self.context, self.context.config
        scenario = ctx.scenario
        grid = grid or ctx.grid
        end_time = ctx.end_time if end_time is None else end_time
        snapshots = [t for t in ctx.snapshot_times if t <= end_time]

        u, bathymetry = initial_state(scenario, grid)
        u = zero_dry_cells(u, cfg.eps_h)
        solver = FVEGSolver(grid, bathymetry, scenario.boundary, ctx.solver_profile)
        u = fill_ghosts(u, grid, bathymetry.b_cell, scenario.boundary, 0.0, scenario.g)
        reference = solver.primitives(u) if scenario.steady else None

        writer = RecordWriter(output_dir or cfg.output_dir, cfg.formats, cfg.snapshot_digits) if self.write else None
        gage_cells = {name: grid.locate(*xy) for name, xy in scenario.gages.items()}
        gage_series: Dict[str, List[Tuple[float, float]]] = {name: [] for name in gage_cells}
        snapshot_files: List[str] = []
        mass_history = [(0.0, u.volume(grid))]
        started_at = datetime.now().isoformat(timespec="seconds")
        clock = time.perf_counter()
        steps, merged, min_h = 0, 0, float(np.min(u.h[grid.interior]))
        warned_overrun = False

        def record_gages(state: ConservedState):
            prim = solver.primitives(state)
            gl = grid.ghost_layers
            for name, (i, j) in gage_cells.items():
                gage_series[name].append((state.t, float(prim.H[j + gl, i + gl]) - scenario.still_level))

        def record_snapshot(state: ConservedState, index: int):
            if writer is not None:
                snap = snapshot_from_state(solver.primitives(state), grid, state.t, scenario.g)
                snapshot_files.extend(writer.write_snapshot(snap, index))

        log("loop", f"start {scenario.name} on {grid.nx}x{grid.ny}, t_end={end_time:.6g}")
        record_gages(u)
        snap_index = 0
        if snapshots and snapshots[0] == 0.0:
            record_snapshot(u, snap_index)
            snap_index += 1

        bar = tqdm(total=end_time, unit="s", disable=is_quiet(), leave=False,
                   bar_format="{l_bar}{bar}| {n:.4g}/{total:.4g} [{elapsed}]")
        try:
            for target in self._targets(end_time, snapshots):
                while u.t < target:
                    dt = solver.cfl_time_step(u)
                    if dt < cfg.dt_min:
                        raise StagnationError(dt, cfg.dt_min, u.t)
                    landing = dt >= target - u.t
                    if landing:
                        dt = target - u.t
                    previous = u.t
                    u, report = solver.step(u, dt)
                    if landing:
                        u.t = target
                    steps += 1
                    merged += report.merged
                    min_h = min(min_h, report.min_h)
                    if report.overrun and not warned_overrun:
                        log("solver", f"merged cone reaches past the ghost layers at t={u.t:.6g}")
                        warned_overrun = True
                    mass_history.append((u.t, u.volume(grid)))
                    record_gages(u)
                    bar.update(u.t - previous)
                if target in snapshots:
                    record_snapshot(u, snap_index)
                    snap_index += 1
        except SolverError as e:
            log("loop", f"stopped at t={u.t:.6g} after {steps} steps: {e}")
            raise
        finally:
            bar.close()

        wall_time = time.perf_counter() - clock
        prim = solver.primitives(u)
        manifest = RunManifest(
            scenario=scenario.name, config=cfg, g=scenario.g, nx=grid.nx, ny=grid.ny, dx=grid.dx,
            order=ctx.order, end_time=end_time, started_at=started_at, wall_time=wall_time,
            steps=steps, min_h=min_h, merged_cone_evaluations=merged,
            mass_history=mass_history, snapshots=snapshot_files,
        )
        if scenario.exact is not None:
            t = u.t
            manifest.errors = error_norms(prim.h[grid.interior],
                                          lambda x, y: scenario.exact(x, y, t)[0], grid)
            manifest.velocity_errors = velocity_error_norms(prim, scenario.exact, grid, t)
        if reference is not None:
            manifest.steady_errors = steady_state_errors(prim, reference, grid)

        if writer is not None:
            manifest.gages = [writer.write_gage(name, series) for name, series in gage_series.items()]
            writer.write_manifest(manifest)

        drift = (mass_history[-1][1] - mass_history[0][1]) / max(abs(mass_history[0][1]), np.finfo(float).tiny)
        log("loop", f"done: {steps} steps in {wall_time:.2f}s, min h={min_h:.3e}, volume drift={drift:.3e}")
        if manifest.errors is not None:
            e = manifest.errors
            log("loop", f"h error: Linf={e.linf:.4e} L1={e.l1:.4e} L2={e.l2:.4e}")
        for name, triple in manifest.steady_errors.items():
            log("loop", f"{name} deviation: Linf={triple.linf:.4e} L1={triple.l1:.4e} L2={triple.l2:.4e}")
        return RunResult(u, prim, grid, manifest, solver)


def run_convergence(context: RunContext, write: bool = True) -> List[ErrorReport]:
    """Run every grid of ``config.grids`` and tabulate the h errors with EOC."""
    cfg: RunConfig = context.config
    scenario = context.scenario
    if scenario.exact is None:
        raise ScenarioError(f"{scenario.name} has no analytic solution; convergence needs one")
    grids = sorted(cfg.grids) or [context.grid.nx]
    if scenario.period is not None and cfg.end_time is None:
        end_time = cfg.periods * scenario.period
    else:
        end_time = context.end_time

    loop = SimulationLoop(context, write=write)
    reports = []
    for nx in grids:
        grid = context.grid_for(nx)
        log("convergence", f"grid {grid.nx}x{grid.ny}")
        sub_dir = f"{cfg.output_dir}/{scenario.name}_{grid.nx}x{grid.ny}"
        result = loop.run(grid=grid, end_time=end_time, output_dir=sub_dir)
        reports.append(result.manifest.errors)
    rows = eoc(reports)

    table = Table(title=f"{scenario.name}: error in h at t={end_time:.4g}")
    for col in ("grid", "Linf", "EOC", "L1", "EOC", "L2", "EOC"):
        table.add_column(col, justify="right")

    def order(v):
        return "" if v is None else f"{v:.2f}"

    for r in rows:
        table.add_row(f"{r.nx}x{r.nx}", f"{r.linf:.4e}", order(r.eoc_linf), f"{r.l1:.4e}",
                      order(r.eoc_l1), f"{r.l2:.4e}", order(r.eoc_l2))
    if not is_quiet():
        console.print(table)
    if write:
        path = RecordWriter(cfg.output_dir, cfg.formats, cfg.snapshot_digits).write_convergence(scenario.name, rows)
        log("convergence", f"table -> {path}")
    return rows
