# modules/boundary.py

"""Ghost-cell filling for the four supported boundary kinds.

Sides are named after the compass: ``west``/``east`` bound x1, ``south``/``north``
bound x2. The x1 sides are filled first on interior rows, then the x2 sides on
full rows, so the ghost corners see already-filled columns.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Literal, Optional

import numpy as np

from core.errors import ConfigError
from core.mesh import CartesianGrid
from core.state import ConservedState

BoundaryKind = Literal["open", "periodic", "wall", "inflow"]
SIDES = ("west", "east", "south", "north")


@dataclass(frozen=True)
class BoundarySpec:
    kind: BoundaryKind = "open"
    # free surface H(t) prescribed on inflow ghosts and the still level it rises from
    surface: Optional[Callable[[float], float]] = None
    still_level: float = 0.0


@dataclass(frozen=True)
class BoundaryConditions:
    west: BoundarySpec = BoundarySpec()
    east: BoundarySpec = BoundarySpec()
    south: BoundarySpec = BoundarySpec()
    north: BoundarySpec = BoundarySpec()

    def __post_init__(self):
        for a, b in (("west", "east"), ("south", "north")):
            kinds = {getattr(self, a).kind, getattr(self, b).kind}
            if "periodic" in kinds and kinds != {"periodic"}:
                raise ConfigError(f"periodic boundary on {a}/{b} must be set on both sides")
        for side in SIDES:
            spec = getattr(self, side)
            if spec.kind == "inflow" and spec.surface is None:
                raise ConfigError(f"inflow boundary on {side} needs a surface function")

    @classmethod
    def uniform(cls, kind: BoundaryKind) -> "BoundaryConditions":
        spec = BoundarySpec(kind)
        return cls(west=spec, east=spec, south=spec, north=spec)

    def sides(self) -> Dict[str, BoundarySpec]:
        return {side: getattr(self, side) for side in SIDES}

    @property
    def periodic_x(self) -> bool:
        return self.west.kind == "periodic"

    @property
    def periodic_y(self) -> bool:
        return self.south.kind == "periodic"


def _copy_columns(field: np.ndarray, grid: CartesianGrid, side: str, kind: str, rows: slice,
                  negate: bool = False):
    g, n = grid.ghost_layers, grid.nx
    for k in range(g):
        if side == "west":
            ghost = g - 1 - k
            source = {"open": g, "periodic": n + g - 1 - k, "wall": g + k}.get(kind, g)
        else:
            ghost = n + g + k
            source = {"open": n + g - 1, "periodic": g + k, "wall": n + g - 1 - k}.get(kind, n + g - 1)
        values = field[rows, source]
        field[rows, ghost] = -values if negate else values


def _copy_rows(field: np.ndarray, grid: CartesianGrid, side: str, kind: str, negate: bool = False):
    g, n = grid.ghost_layers, grid.ny
    for k in range(g):
        if side == "south":
            ghost = g - 1 - k
            source = {"open": g, "periodic": n + g - 1 - k, "wall": g + k}.get(kind, g)
        else:
            ghost = n + g + k
            source = {"open": n + g - 1, "periodic": g + k, "wall": n + g - 1 - k}.get(kind, n + g - 1)
        values = field[source, :]
        field[ghost, :] = -values if negate else values


def _inflow_state(spec: BoundarySpec, b_ghost: np.ndarray, t: float, g: float):
    H = spec.surface(t)
    h = np.maximum(H - b_ghost, 0.0)
    # outgoing Riemann invariant held at its still-water value
    vn = 2.0 * (np.sqrt(g * max(H, 0.0)) - np.sqrt(g * max(spec.still_level, 0.0)))
    return h, h * vn


def fill_ghosts(u: ConservedState, grid: CartesianGrid, b_cell: np.ndarray,
                bcs: BoundaryConditions, t: float, g: float) -> ConservedState:
    """Refresh the ghost layers of ``u`` in place and return it."""
    gl = grid.ghost_layers
    inner_rows = slice(gl, gl + grid.ny)
    for side in ("west", "east"):
        spec = getattr(bcs, side)
        if spec.kind == "inflow":
            cols = slice(0, gl) if side == "west" else slice(gl + grid.nx, None)
            h, qn = _inflow_state(spec, b_cell[inner_rows, cols], t, g)
            u.h[inner_rows, cols] = h
            u.hv1[inner_rows, cols] = qn if side == "west" else -qn
            u.hv2[inner_rows, cols] = 0.0
            continue
        _copy_columns(u.h, grid, side, spec.kind, inner_rows)
        _copy_columns(u.hv1, grid, side, spec.kind, inner_rows, negate=spec.kind == "wall")
        _copy_columns(u.hv2, grid, side, spec.kind, inner_rows)

    for side in ("south", "north"):
        spec = getattr(bcs, side)
        if spec.kind == "inflow":
            rows = slice(0, gl) if side == "south" else slice(gl + grid.ny, None)
            h, qn = _inflow_state(spec, b_cell[rows, :], t, g)
            u.h[rows, :] = h
            u.hv1[rows, :] = 0.0
            u.hv2[rows, :] = qn if side == "south" else -qn
            continue
        _copy_rows(u.h, grid, side, spec.kind)
        _copy_rows(u.hv1, grid, side, spec.kind)
        _copy_rows(u.hv2, grid, side, spec.kind, negate=spec.kind == "wall")
    return u


def fill_bottom_ghosts(b_cell: np.ndarray, grid: CartesianGrid, bcs: BoundaryConditions,
                       analytic: bool = False) -> np.ndarray:
    """Ghost bottoms: wrapped or mirrored for periodic/wall sides, zero-gradient
    copies on open and inflow sides unless the analytic averages are kept."""
    b = b_cell.copy()
    gl = grid.ghost_layers
    inner_rows = slice(gl, gl + grid.ny)
    for side in ("west", "east"):
        kind = getattr(bcs, side).kind
        if kind in ("periodic", "wall") or not analytic:
            _copy_columns(b, grid, side, kind, inner_rows)
    for side in ("south", "north"):
        kind = getattr(bcs, side).kind
        if kind in ("periodic", "wall") or not analytic:
            _copy_rows(b, grid, side, kind)
    return b
