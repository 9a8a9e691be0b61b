"""Fluxes, sources, the draining-time limiter and whole time steps."""

import numpy as np
import pytest

from conftest import make_context, smooth_periodic_scenario
from core.context import RunContext
from core.errors import PositivityError
from core.loop import SimulationLoop
from core.mesh import build_grid
from core.state import ConservedState, PrimitiveState
from models import RunConfig, SolverProfile
from modules.boundary import BoundaryConditions, fill_ghosts
from modules.scenarios import initial_state, ritter_exact
from modules.solver import (EdgeFlux, EvolvedGrid, FVEGSolver, PointField, advective_flux,
                            cell_source, cfl_time_step, draining_time, edge_time_step, fv_update,
                            limit_fluxes, unsplit_update)


def _unit_grid(width=1.0):
    return build_grid((0.0, width, 0.0, width), 1, 1)


def _point_field(H, h):
    H = np.asarray(H, dtype=float)
    h = np.asarray(h, dtype=float)
    zeros = np.zeros_like(H)
    return PointField(H=H, h=h, v1=zeros, v2=zeros.copy(), b=H - h)


def _prepared(scenario, profile=None):
    grid = build_grid(scenario.extent, scenario.nx, scenario.ny)
    u, bathymetry = initial_state(scenario, grid)
    solver = FVEGSolver(grid, bathymetry, scenario.boundary, profile or SolverProfile())
    u = fill_ghosts(u, grid, bathymetry.b_cell, scenario.boundary, 0.0, scenario.g)
    return grid, u, solver


# --- pointwise pieces ---

def test_advective_flux_has_no_pressure():
    flux = advective_flux(np.array(2.0), np.array(1.0), np.array(0.0), (1.0, 0.0))
    assert list(flux) == [2.0, 2.0, 0.0]
    still = advective_flux(np.array(2.0), np.array(0.0), np.array(0.0), (0.0, 1.0))
    assert np.all(still == 0.0)


def test_draining_time_counts_outflow_only():
    h = np.array([[1.0]])
    out_all = draining_time(h, np.array([[-1.0, 1.0]]), np.array([[-1.0], [1.0]]), dx=0.5)
    assert out_all[0, 0] == pytest.approx(0.125)
    inflow_only = draining_time(h, np.array([[1.0, -1.0]]), np.array([[1.0], [-1.0]]), dx=0.5)
    assert inflow_only[0, 0] == np.inf
    dry = draining_time(np.array([[0.0]]), np.array([[0.0, 1.0]]), np.array([[0.0], [0.0]]), dx=0.5)
    assert dry[0, 0] == 0.0


def test_edge_time_step_uses_the_upwind_cell():
    mass = np.array([2.0, -2.0, 0.0])
    low = np.array([0.1, 0.1, 0.001])
    high = np.array([0.3, 0.03, 0.001])
    assert list(edge_time_step(mass, low, high, dt=0.05)) == [0.05, 0.03, 0.05]


def test_cfl_time_step_uses_max_directional_speed():
    grid = _unit_grid()
    shape = grid.shape
    prim = PrimitiveState(h=np.ones(shape), v1=np.full(shape, 3.0), v2=np.full(shape, -1.0),
                          H=np.ones(shape), b=np.zeros(shape))
    assert cfl_time_step(prim, grid, g=1.0, mu=0.5, dt_fallback=0.01) == pytest.approx(0.125)


def test_cfl_time_step_falls_back_when_dry():
    grid = _unit_grid()
    zeros = np.zeros(grid.shape)
    prim = PrimitiveState(h=zeros, v1=zeros, v2=zeros, H=zeros, b=zeros)
    assert cfl_time_step(prim, grid, g=9.81, mu=0.5, dt_fallback=0.02) == 0.02


def test_cell_source_from_surface_differences():
    c = _point_field([[1.0, 1.5], [1.0, 1.5]], np.full((2, 2), 2.0))
    vm = _point_field([[1.0, 1.5]], np.full((1, 2), 2.0))
    hm = _point_field([[1.25], [1.25]], np.full((2, 1), 2.0))
    source = cell_source(EvolvedGrid(corner=c, vertical=vm, horizontal=hm, merged=0), g=9.81)
    assert source.shape == (1, 1, 3)
    assert source[0, 0, 0] == 0.0
    assert source[0, 0, 1] == pytest.approx(9.81)
    assert source[0, 0, 2] == 0.0


# --- finite volume update ---

def _flux(vertical_mass):
    vertical = np.zeros((1, 2, 3))
    vertical[0, :, 0] = vertical_mass
    horizontal = np.zeros((2, 1, 3))
    return vertical, horizontal


def test_fv_update_without_flux_keeps_the_state():
    grid = _unit_grid()
    u = ConservedState(h=np.full(grid.shape, 0.7), hv1=np.full(grid.shape, 0.1),
                       hv2=np.zeros(grid.shape), t=1.0)
    vertical, horizontal = _flux([0.0, 0.0])
    flux = limit_fluxes(vertical, horizontal, u.h[grid.interior], 0.1, grid,
                        BoundaryConditions.uniform("open"))
    new = fv_update(u, flux, np.zeros((1, 1, 3)), 0.1, grid, eps_h=1e-8)
    assert np.array_equal(new.h, u.h) and np.array_equal(new.hv1, u.hv1)
    assert new.t == pytest.approx(1.1)


def test_draining_limiter_empties_the_cell_exactly():
    grid = _unit_grid()
    u = ConservedState(h=np.full(grid.shape, 0.5), hv1=np.zeros(grid.shape), hv2=np.zeros(grid.shape))
    vertical, horizontal = _flux([0.0, 1.0])
    flux = limit_fluxes(vertical, horizontal, u.h[grid.interior], 1.0, grid,
                        BoundaryConditions.uniform("open"))
    assert flux.dt_vertical[0, 1] == pytest.approx(0.5)
    assert flux.dt_vertical[0, 0] == 1.0
    new = fv_update(u, flux, np.zeros((1, 1, 3)), 1.0, grid, eps_h=1e-8)
    assert new.h[grid.interior][0, 0] == 0.0


def test_unlimited_outflow_raises_positivity_error():
    grid = _unit_grid()
    u = ConservedState(h=np.full(grid.shape, 0.5), hv1=np.zeros(grid.shape), hv2=np.zeros(grid.shape))
    vertical, horizontal = _flux([0.0, 1.0])
    flux = EdgeFlux(vertical=vertical, horizontal=horizontal,
                    dt_vertical=np.ones((1, 2)), dt_horizontal=np.ones((2, 1)))
    with pytest.raises(PositivityError) as exc:
        fv_update(u, flux, np.zeros((1, 1, 3)), 1.0, grid, eps_h=1e-8)
    assert exc.value.cell == (0, 0)
    assert exc.value.depth == pytest.approx(-0.5)


# --- whole steps ---

def test_split_update_matches_unsplit_reference_without_draining():
    scenario = smooth_periodic_scenario()
    grid, u, solver = _prepared(scenario)
    dt = solver.cfl_time_step(u)
    new, report = solver.step(u, dt)
    assert report.drained_edges == 0
    _, ev = solver.predict(u, dt)
    reference = unsplit_update(u, ev, dt, grid, scenario.g)
    sl = grid.interior
    for name in ("h", "hv1", "hv2"):
        assert np.allclose(getattr(new, name)[sl], getattr(reference, name)[sl], rtol=0.0, atol=1e-12)


def test_worker_batches_are_bitwise_identical():
    scenario = smooth_periodic_scenario()
    _, u, serial = _prepared(scenario)
    _, _, threaded = _prepared(scenario, SolverProfile(workers=3, chunk_size=97))
    dt = serial.cfl_time_step(u)
    a, _ = serial.step(u, dt)
    b, _ = threaded.step(u, dt)
    assert np.array_equal(a.h, b.h)
    assert np.array_equal(a.hv1, b.hv1)
    assert np.array_equal(a.hv2, b.hv2)


def _assert_steady(result):
    assert result.manifest.steps > 0
    grid = result.grid
    area = grid.nx * grid.ny * grid.dx * grid.dx
    for name, triple in result.manifest.steady_errors.items():
        assert triple.linf <= 1e-12, name
        assert triple.l1 / area <= 1e-12, name
        assert triple.l2 / np.sqrt(area) <= 1e-12, name


def test_lake_at_rest_around_a_dry_island():
    ctx = make_context("conical-island", nx=25, end_time=5.0, options={"wave": False})
    assert ctx.grid.ny == 30
    _assert_steady(SimulationLoop(ctx, write=False).run())


@pytest.mark.slow
def test_lake_at_rest_on_the_fine_island_grid():
    ctx = make_context("conical-island", end_time=5.0, options={"wave": False})
    assert ctx.grid.dx == pytest.approx(0.2)
    _assert_steady(SimulationLoop(ctx, write=False).run())


def test_mass_is_conserved_inside_walls():
    ctx = make_context("circular-dam-break", nx=20, end_time=25.0, options={"boundary": "wall"})
    result = SimulationLoop(ctx, write=False).run()
    history = result.manifest.mass_history
    start = history[0][1]
    drift = max(abs(volume - start) for _, volume in history) / start
    assert result.manifest.steps >= 50
    assert drift <= 1e-10
    assert result.manifest.min_h >= 0.0


def _assert_dihedral(u, grid, rel):
    h, hv1, hv2 = u.interior(grid)
    tol = rel * float(np.max(h))
    assert np.allclose(h, h[:, ::-1], atol=tol, rtol=0.0)
    assert np.allclose(h, h[::-1, :], atol=tol, rtol=0.0)
    assert np.allclose(h, h.T, atol=tol, rtol=0.0)
    assert np.allclose(hv1, -hv1[:, ::-1], atol=tol, rtol=0.0)
    assert np.allclose(hv1, hv2.T, atol=tol, rtol=0.0)


def test_circular_dam_break_keeps_dihedral_symmetry():
    ctx = make_context("circular-dam-break", nx=20)
    grid = ctx.grid
    u, bathymetry = initial_state(ctx.scenario, grid)
    solver = FVEGSolver(grid, bathymetry, ctx.scenario.boundary, ctx.solver_profile)
    for _ in range(5):
        u, _ = solver.step(u, solver.cfl_time_step(u))
    _assert_dihedral(u, grid, 1e-12)


def _assert_circular_dam_at_end(result):
    assert result.state.t == pytest.approx(1.75)
    H = result.prim.H[result.grid.interior]
    assert 10.0 - 1e-9 <= float(np.max(H)) <= 10.4
    assert result.manifest.min_h >= 0.0
    assert float(np.min(result.prim.h)) >= 0.0
    _assert_dihedral(result.state, result.grid, 1e-10)


def test_circular_dam_break_runs_to_the_end_time():
    result = SimulationLoop(make_context("circular-dam-break", nx=40), write=False).run()
    _assert_circular_dam_at_end(result)


@pytest.mark.slow
def test_circular_dam_break_reference_run():
    ctx = RunContext(RunConfig(scenario="circular-dam-break"))
    result = SimulationLoop(ctx, write=False).run()
    assert result.grid.nx == 100
    _assert_circular_dam_at_end(result)


def test_pseudo_one_dimensional_run_has_no_transverse_discharge():
    ctx = make_context("dam-break-1d", end_time=0.5, options={"nx": 40})
    result = SimulationLoop(ctx, write=False).run()
    _, _, hv2 = result.state.interior(result.grid)
    assert float(np.max(np.abs(hv2))) <= 1e-12
    assert result.manifest.order == "first"
    assert result.state.t == 0.5


@pytest.mark.parametrize("order, options", [
    ("first", {}),
    ("second", {}),
    ("first", {"h_r": 0.0}),
])
def test_dam_break_follows_the_similarity_solution(order, options):
    ctx = make_context("dam-break-1d", order=order, options=options)
    result = SimulationLoop(ctx, write=False).run()
    assert result.state.t == pytest.approx(1.0)
    assert result.manifest.order == order
    h = result.state.interior(result.grid)[0]
    assert np.all(h >= 0.0)
    assert float(np.max(h)) <= 1.02
    errors = result.manifest.errors
    assert errors.l1 <= 0.05
    assert errors.linf <= 0.3


def _dam_break_profile(entropy_fix: bool):
    ctx = make_context("dam-break-1d", end_time=1.0, entropy_fix=entropy_fix)
    result = SimulationLoop(ctx, write=False).run()
    h = result.state.interior(result.grid)[0][0]
    x = result.grid.cell_centers(with_ghosts=False)[0][0]
    return x, h


def _sonic_drop(x, h):
    """Largest fall of h between neighbouring cells within half a meter of the dam."""
    near = np.abs(x - 5.0) < 0.5
    return float(np.max(-np.diff(h[near])))


def _exact_sonic_drop(x):
    exact, _ = ritter_exact(x, 1.0, h_l=1.0, h_r=0.1, x_dam=5.0, g=9.81)
    return _sonic_drop(x, exact)


def test_entropy_fix_gives_a_smooth_transonic_rarefaction():
    x, h = _dam_break_profile(entropy_fix=True)
    xi = x - 5.0
    fan = (xi > -2.5) & (xi < 0.2)
    assert np.all(np.diff(h[fan]) <= 1e-3)
    sonic = 0.5 * (h[49] + h[50])
    assert sonic == pytest.approx(4.0 / 9.0, abs=0.06)
    assert _sonic_drop(x, h) <= 2.5 * _exact_sonic_drop(x)


def test_without_entropy_fix_the_sonic_point_jumps():
    x, h = _dam_break_profile(entropy_fix=False)
    assert _sonic_drop(x, h) > 2.5 * _exact_sonic_drop(x)
