"""Grid construction, corner stencils and Simpson quadrature points."""

import numpy as np
import pytest

from core.errors import GridError
from core.mesh import (CORNER, HORIZONTAL_MID, SIMPSON_WEIGHTS, VERTICAL_MID, EdgeIndex,
                       build_grid, corner_stencil, edge_quadrature, quadrature_points)


def test_build_grid_square_cells():
    grid = build_grid((0.0, 100.0, 0.0, 100.0), 100, 100)
    assert grid.dx == 1.0
    assert grid.shape == (104, 104)
    assert grid.extent == (0.0, 100.0, 0.0, 100.0)


def test_build_grid_rejects_rectangular_cells():
    with pytest.raises(GridError) as exc:
        build_grid((0.0, 10.0, 0.0, 1.0), 10, 5)
    assert "dx=1.0" in str(exc.value)
    assert "dx=0.2" in str(exc.value)


def test_build_grid_rejects_empty_extent():
    with pytest.raises(GridError):
        build_grid((1.0, 1.0, 0.0, 1.0), 1, 1)


def test_single_cell_reference_length(small_grid):
    grid = build_grid((0.0, 1.0, 0.0, 1.0), 1, 1)
    assert grid.reference_length == 0.0
    assert small_grid.reference_length == 3.0


def test_corner_stencil_includes_ghost_cells(small_grid):
    assert corner_stencil(small_grid, (0, 0)) == [(-1, -1), (0, -1), (-1, 0), (0, 0)]
    assert corner_stencil(small_grid, (2, 1)) == [(1, 0), (2, 0), (1, 1), (2, 1)]
    with pytest.raises(IndexError):
        corner_stencil(small_grid, (-2, 0))


def test_edge_quadrature_vertical_edge(small_grid):
    points = edge_quadrature(small_grid, EdgeIndex("vertical", 1, 0))
    locations = [p.location for p, _ in points]
    assert locations == [(1.0, 0.0), (1.0, 0.5), (1.0, 1.0)]
    weights = [w for _, w in points]
    assert weights == list(SIMPSON_WEIGHTS)
    assert sum(weights) == pytest.approx(1.0)
    assert points[1][0].stencil == [(0, 0), (1, 0)]
    assert points[0][0].kind == "corner"


def test_boundary_corner_interior_stencil(small_grid):
    first, _ = edge_quadrature(small_grid, EdgeIndex("horizontal", 0, 0))[0]
    assert first.location == (0.0, 0.0)
    assert first.stencil == [(0, 0)]
    assert EdgeIndex("horizontal", 0, 0) in first.owner_edges


def test_edge_quadrature_out_of_range(small_grid):
    with pytest.raises(IndexError):
        edge_quadrature(small_grid, EdgeIndex("horizontal", 4, 0))


def test_quadrature_point_counts(small_grid):
    points = quadrature_points(small_grid)
    assert points.n_corner == 5 * 4
    assert points.n_vertical == 5 * 3
    assert points.n_horizontal == 4 * 4
    assert len(points) == 20 + 15 + 16
    assert np.all(points.kind[points.corner_slice] == CORNER)
    assert np.all(points.kind[points.vertical_slice] == VERTICAL_MID)
    assert np.all(points.kind[points.horizontal_slice] == HORIZONTAL_MID)


def test_quadrature_point_shifts(small_grid):
    points = quadrature_points(small_grid)
    vm = points.vertical_slice
    hm = points.horizontal_slice
    assert np.all(points.shift_u[vm] == 0.0) and np.all(points.shift_v[vm] == 0.5)
    assert np.all(points.shift_u[hm] == 0.5) and np.all(points.shift_v[hm] == 0.0)
    # a midpoint sees its two edge neighbours only
    assert np.all(points.stencil_mask[vm].sum(axis=1) == 2)
    assert np.all(points.stencil_mask[points.corner_slice].sum(axis=1) == 4)


def test_midpoint_stencils_straddle_the_edge(small_grid):
    points = quadrature_points(small_grid)
    k = points.vertical_slice.start + 1 * (small_grid.nx + 1) + 2   # vertical edge (I=2, j=1)
    assert (points.base_i[k], points.base_j[k]) == (2, 1)
    assert list(points.stencil_i[k, :2]) == [1, 2]
    assert list(points.stencil_j[k, :2]) == [1, 1]


def test_locate_clamps_to_domain(small_grid):
    assert small_grid.locate(2.5, 1.5) == (2, 1)
    assert small_grid.locate(-1.0, 10.0) == (0, 2)
