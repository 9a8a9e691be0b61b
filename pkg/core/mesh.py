# core/mesh.py

"""Uniform Cartesian grid with square cells.

Cells are indexed ``(i, j)`` with ``i`` along x1 and ``j`` along x2. Fields are
stored as arrays ``field[j, i]`` on the ghost-extended grid, so the interior cell
``(i, j)`` lives at ``field[j + G, i + G]``. Corners are indexed on the
``(nx + 1) x (ny + 1)`` lattice, edges in two families:

* vertical edges ``(I, j)`` with normal ``(1, 0)`` between cells ``(I-1, j)`` and ``(I, j)``
* horizontal edges ``(i, J)`` with normal ``(0, 1)`` between cells ``(i, J-1)`` and ``(i, J)``
"""

from dataclasses import dataclass
from typing import List, Literal, NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.errors import GridError

SIMPSON_WEIGHTS = (1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0)

Cell = Tuple[int, int]


class EdgeIndex(NamedTuple):
    family: Literal["vertical", "horizontal"]
    i: int
    j: int


class CartesianGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    nx: int = Field(ge=1)
    ny: int = Field(ge=1)
    dx: float = Field(gt=0.0)
    origin: Tuple[float, float] = (0.0, 0.0)
    ghost_layers: int = Field(default=2, ge=2)

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        x0, y0 = self.origin
        return (x0, x0 + self.nx * self.dx, y0, y0 + self.ny * self.dx)

    @property
    def shape(self) -> Tuple[int, int]:
        """Shape of the ghost-extended cell arrays, ``(rows, cols)``."""
        g = self.ghost_layers
        return (self.ny + 2 * g, self.nx + 2 * g)

    @property
    def interior(self) -> Tuple[slice, slice]:
        g = self.ghost_layers
        return (slice(g, g + self.ny), slice(g, g + self.nx))

    @property
    def cell_area(self) -> float:
        return self.dx * self.dx

    @property
    def reference_length(self) -> float:
        """Largest distance between two cell centers in the max-norm."""
        return max(self.nx - 1, self.ny - 1) * self.dx

    def cell_id(self, i: int, j: int) -> int:
        return j * self.nx + i

    def cell_centers(self, with_ghosts: bool = True) -> Tuple[np.ndarray, np.ndarray]:
        g = self.ghost_layers if with_ghosts else 0
        x0, y0 = self.origin
        xs = x0 + (np.arange(-g, self.nx + g) + 0.5) * self.dx
        ys = y0 + (np.arange(-g, self.ny + g) + 0.5) * self.dx
        return np.meshgrid(xs, ys, indexing="xy")

    def corner_location(self, I: int, J: int) -> Tuple[float, float]:
        return (self.origin[0] + I * self.dx, self.origin[1] + J * self.dx)

    def is_interior(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.nx and 0 <= cell[1] < self.ny

    def locate(self, x: float, y: float) -> Cell:
        """Interior cell containing a point, clamped to the domain."""
        i = int(np.floor((x - self.origin[0]) / self.dx))
        j = int(np.floor((y - self.origin[1]) / self.dx))
        return (min(max(i, 0), self.nx - 1), min(max(j, 0), self.ny - 1))


def build_grid(extent: Tuple[float, float, float, float], nx: int, ny: int,
               ghost_layers: int = 2) -> CartesianGrid:
    x_min, x_max, y_min, y_max = extent
    if nx < 1 or ny < 1:
        raise GridError(f"cell counts must be positive, got nx={nx}, ny={ny}")
    if x_max <= x_min or y_max <= y_min:
        raise GridError(f"empty domain extent {extent}")
    dx_x = (x_max - x_min) / nx
    dx_y = (y_max - y_min) / ny
    if abs(dx_x - dx_y) > 1e-12 * max(dx_x, dx_y):
        raise GridError(
            f"cells are not square: dx={dx_x!r} from x1 extent, dx={dx_y!r} from x2 extent"
        )
    return CartesianGrid(nx=nx, ny=ny, dx=dx_x, origin=(x_min, y_min), ghost_layers=ghost_layers)


class QuadPointRef(BaseModel):
    location: Tuple[float, float]
    kind: Literal["corner", "edge-midpoint"]
    owner_edges: List[EdgeIndex]
    stencil: List[Cell]


def corner_stencil(grid: CartesianGrid, corner: Tuple[int, int]) -> List[Cell]:
    """All cells touching corner ``(I, J)``, ghost cells included.

    Slot order is lower-left, lower-right, upper-left, upper-right; slots 0/3
    and 1/2 are the two diagonals.
    """
    I, J = corner
    g = grid.ghost_layers
    if not (-g < I < grid.nx + g and -g < J < grid.ny + g):
        raise IndexError(f"corner {corner} has no complete stencil with {g} ghost layers")
    return [(I - 1, J - 1), (I, J - 1), (I - 1, J), (I, J)]


def _corner_owner_edges(grid: CartesianGrid, I: int, J: int) -> List[EdgeIndex]:
    edges = []
    for j in (J - 1, J):
        if 0 <= j < grid.ny and 0 <= I <= grid.nx:
            edges.append(EdgeIndex("vertical", I, j))
    for i in (I - 1, I):
        if 0 <= i < grid.nx and 0 <= J <= grid.ny:
            edges.append(EdgeIndex("horizontal", i, J))
    return edges


def _corner_ref(grid: CartesianGrid, I: int, J: int) -> QuadPointRef:
    return QuadPointRef(
        location=grid.corner_location(I, J),
        kind="corner",
        owner_edges=_corner_owner_edges(grid, I, J),
        stencil=[c for c in corner_stencil(grid, (I, J)) if grid.is_interior(c)],
    )


def edge_quadrature(grid: CartesianGrid, edge: EdgeIndex) -> List[Tuple[QuadPointRef, float]]:
    """The three Simpson points of an edge: corner, midpoint, corner."""
    w_end, w_mid, _ = SIMPSON_WEIGHTS
    x0, y0 = grid.origin
    if edge.family == "vertical":
        I, j = edge.i, edge.j
        if not (0 <= I <= grid.nx and 0 <= j < grid.ny):
            raise IndexError(f"vertical edge {edge} outside the grid")
        ends = [(I, j), (I, j + 1)]
        neighbours = [(I - 1, j), (I, j)]
        mid_location = (x0 + I * grid.dx, y0 + (j + 0.5) * grid.dx)
    else:
        i, J = edge.i, edge.j
        if not (0 <= i < grid.nx and 0 <= J <= grid.ny):
            raise IndexError(f"horizontal edge {edge} outside the grid")
        ends = [(i, J), (i + 1, J)]
        neighbours = [(i, J - 1), (i, J)]
        mid_location = (x0 + (i + 0.5) * grid.dx, y0 + J * grid.dx)

    midpoint = QuadPointRef(
        location=mid_location,
        kind="edge-midpoint",
        owner_edges=[edge],
        stencil=[c for c in neighbours if grid.is_interior(c)],
    )
    first, last = (_corner_ref(grid, *ends[0]), _corner_ref(grid, *ends[1]))
    return [(first, w_end), (midpoint, w_mid), (last, w_end)]


# Point kinds of the vectorized quadrature point set.
CORNER, VERTICAL_MID, HORIZONTAL_MID = 0, 1, 2


@dataclass(frozen=True)
class QuadPointSet:
    """Every quadrature point of the grid as flat arrays.

    Order: corners (row-major on the corner lattice), vertical-edge midpoints
    ``(j, I)``, horizontal-edge midpoints ``(J, i)``. ``base_i``/``base_j`` and
    ``shift_u``/``shift_v`` place the point in cell-aligned local coordinates:
    grid lines sit at integer offsets from ``base`` and the point itself sits
    at ``(shift_u, shift_v)``.
    """

    kind: np.ndarray
    base_i: np.ndarray
    base_j: np.ndarray
    shift_u: np.ndarray
    shift_v: np.ndarray
    stencil_i: np.ndarray   # (N, 4)
    stencil_j: np.ndarray   # (N, 4)
    stencil_mask: np.ndarray  # (N, 4)
    n_corner: int
    n_vertical: int
    n_horizontal: int

    def __len__(self) -> int:
        return self.kind.shape[0]

    @property
    def corner_slice(self) -> slice:
        return slice(0, self.n_corner)

    @property
    def vertical_slice(self) -> slice:
        return slice(self.n_corner, self.n_corner + self.n_vertical)

    @property
    def horizontal_slice(self) -> slice:
        start = self.n_corner + self.n_vertical
        return slice(start, start + self.n_horizontal)

    def subset(self, sl: slice) -> "QuadPointSet":
        return QuadPointSet(
            kind=self.kind[sl], base_i=self.base_i[sl], base_j=self.base_j[sl],
            shift_u=self.shift_u[sl], shift_v=self.shift_v[sl],
            stencil_i=self.stencil_i[sl], stencil_j=self.stencil_j[sl],
            stencil_mask=self.stencil_mask[sl],
            n_corner=0, n_vertical=0, n_horizontal=0,
        )


def quadrature_points(grid: CartesianGrid) -> QuadPointSet:
    nx, ny = grid.nx, grid.ny

    I, J = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="xy")
    I, J = I.ravel(), J.ravel()
    c_si = np.stack([I - 1, I, I - 1, I], axis=1)
    c_sj = np.stack([J - 1, J - 1, J, J], axis=1)

    vI, vj = np.meshgrid(np.arange(nx + 1), np.arange(ny), indexing="xy")
    vI, vj = vI.ravel(), vj.ravel()
    v_si = np.stack([vI - 1, vI, vI - 1, vI - 1], axis=1)
    v_sj = np.stack([vj, vj, vj, vj], axis=1)

    hi, hJ = np.meshgrid(np.arange(nx), np.arange(ny + 1), indexing="xy")
    hi, hJ = hi.ravel(), hJ.ravel()
    h_si = np.stack([hi, hi, hi, hi], axis=1)
    h_sj = np.stack([hJ - 1, hJ, hJ - 1, hJ - 1], axis=1)

    n_c, n_v, n_h = I.size, vI.size, hi.size
    two_cell = np.array([True, True, False, False])
    mask = np.concatenate([
        np.ones((n_c, 4), dtype=bool),
        np.tile(two_cell, (n_v, 1)),
        np.tile(two_cell, (n_h, 1)),
    ])
    return QuadPointSet(
        kind=np.concatenate([np.full(n_c, CORNER), np.full(n_v, VERTICAL_MID),
                             np.full(n_h, HORIZONTAL_MID)]),
        base_i=np.concatenate([I, vI, hi]),
        base_j=np.concatenate([J, vj, hJ]),
        shift_u=np.concatenate([np.zeros(n_c), np.zeros(n_v), np.full(n_h, 0.5)]),
        shift_v=np.concatenate([np.zeros(n_c), np.full(n_v, 0.5), np.zeros(n_h)]),
        stencil_i=np.concatenate([c_si, v_si, h_si]),
        stencil_j=np.concatenate([c_sj, v_sj, h_sj]),
        stencil_mask=mask,
        n_corner=n_c, n_vertical=n_v, n_horizontal=n_h,
    )
