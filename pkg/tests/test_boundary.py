import numpy as np
import pytest

from core.errors import ConfigError
from core.state import ConservedState
from modules.boundary import BoundaryConditions, BoundarySpec, fill_bottom_ghosts, fill_ghosts


def _ramp_state(grid):
    rows, cols = grid.shape
    jj, ii = np.meshgrid(np.arange(rows, dtype=float), np.arange(cols, dtype=float), indexing="ij")
    return ConservedState(h=1.0 + ii + 10.0 * jj, hv1=0.5 + ii, hv2=0.25 + jj)


def test_open_boundary_copies_the_last_interior_cell(small_grid):
    u = fill_ghosts(_ramp_state(small_grid), small_grid, np.zeros(small_grid.shape),
                    BoundaryConditions.uniform("open"), 0.0, 9.81)
    gl = small_grid.ghost_layers
    assert np.array_equal(u.h[:, 0], u.h[:, gl])
    assert np.array_equal(u.h[:, 1], u.h[:, gl])
    assert np.array_equal(u.h[-1, :], u.h[-1 - gl, :])
    assert np.array_equal(u.hv1[gl:-gl, -1], u.hv1[gl:-gl, -1 - gl])


def test_periodic_boundary_wraps(small_grid):
    u = fill_ghosts(_ramp_state(small_grid), small_grid, np.zeros(small_grid.shape),
                    BoundaryConditions.uniform("periodic"), 0.0, 9.81)
    gl, nx, ny = small_grid.ghost_layers, small_grid.nx, small_grid.ny
    assert np.array_equal(u.h[:, gl - 1], u.h[:, gl + nx - 1])
    assert np.array_equal(u.h[:, gl + nx], u.h[:, gl])
    assert np.array_equal(u.hv2[0, :], u.hv2[ny, :])
    assert np.array_equal(u.hv2[gl + ny + 1, :], u.hv2[gl + 1, :])


def test_wall_mirrors_and_flips_the_normal_discharge(small_grid):
    u = fill_ghosts(_ramp_state(small_grid), small_grid, np.zeros(small_grid.shape),
                    BoundaryConditions.uniform("wall"), 0.0, 9.81)
    gl = small_grid.ghost_layers
    inner = slice(gl, -gl)
    assert np.array_equal(u.h[inner, gl - 1], u.h[inner, gl])
    assert np.array_equal(u.h[inner, gl - 2], u.h[inner, gl + 1])
    assert np.array_equal(u.hv1[inner, gl - 1], -u.hv1[inner, gl])
    assert np.array_equal(u.hv2[inner, gl - 1], u.hv2[inner, gl])
    assert np.array_equal(u.hv2[gl - 1, :], -u.hv2[gl, :])
    assert np.array_equal(u.hv1[gl - 1, :], u.hv1[gl, :])


def test_inflow_prescribes_surface_and_riemann_discharge(small_grid):
    g = 9.81
    inflow = BoundarySpec("inflow", surface=lambda t: 1.0 + t, still_level=1.0)
    bcs = BoundaryConditions(west=inflow)
    b = np.full(small_grid.shape, 0.25)
    u = fill_ghosts(_ramp_state(small_grid), small_grid, b, bcs, 0.5, g)
    gl = small_grid.ghost_layers
    inner = slice(gl, -gl)
    h = 1.5 - 0.25
    assert np.allclose(u.h[inner, :gl], h)
    vn = 2.0 * (np.sqrt(g * 1.5) - np.sqrt(g * 1.0))
    assert np.allclose(u.hv1[inner, :gl], h * vn)
    assert np.all(u.hv2[inner, :gl] == 0.0)


def test_inflow_at_still_level_is_at_rest(small_grid):
    bcs = BoundaryConditions(east=BoundarySpec("inflow", surface=lambda t: 0.32, still_level=0.32))
    u = fill_ghosts(_ramp_state(small_grid), small_grid, np.zeros(small_grid.shape), bcs, 0.0, 9.81)
    assert np.all(u.hv1[2:-2, -2:] == 0.0)


def test_half_periodic_pair_is_rejected():
    with pytest.raises(ConfigError):
        BoundaryConditions(west=BoundarySpec("periodic"))


def test_inflow_without_surface_is_rejected():
    with pytest.raises(ConfigError):
        BoundaryConditions(north=BoundarySpec("inflow"))


def test_bottom_ghosts_keep_analytic_values_on_open_sides(small_grid):
    xc, _ = small_grid.cell_centers()
    b = 0.1 * xc
    kept = fill_bottom_ghosts(b, small_grid, BoundaryConditions.uniform("open"), analytic=True)
    assert np.array_equal(kept, b)
    flat = fill_bottom_ghosts(b, small_grid, BoundaryConditions.uniform("open"))
    gl = small_grid.ghost_layers
    assert np.array_equal(flat[gl:-gl, 0], b[gl:-gl, gl])
    walls = fill_bottom_ghosts(b, small_grid, BoundaryConditions.uniform("wall"), analytic=True)
    assert np.array_equal(walls[gl:-gl, gl - 1], b[gl:-gl, gl])
