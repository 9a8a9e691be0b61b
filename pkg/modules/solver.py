# modules/solver.py

"""Corrector: split advective fluxes, well-balanced sources, draining-time limiting.

One call of :meth:`FVEGSolver.step` runs the whole time step:

1. ghost cells from the boundary conditions, primitives with dry zeroing and
   velocity desingularization
2. corner averages and bilinear recovery of ``H, v1, v2, b``
3. point values at ``t + dt/2`` on every corner and edge midpoint
4. advective edge fluxes ``F*`` and cell sources ``S*``
5. draining times and the edge time steps ``dt_E``
6. the finite volume update, positivity check and dry zeroing
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.errors import PositivityError
from core.mesh import SIMPSON_WEIGHTS, CartesianGrid, quadrature_points
from core.state import (Bathymetry, ConservedState, PrimitiveState, conserved_to_primitive,
                        dry_params, zero_dry_cells)
from models import SolverProfile
from modules.boundary import BoundaryConditions, fill_ghosts
from modules.evolution import EvolutionInputs, EvolvedValues, combined_evolution
from modules.reconstruction import build_recon, corner_averages, correction_field

W_END, W_MID, _ = SIMPSON_WEIGHTS


@dataclass
class PointField:
    H: np.ndarray
    h: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    b: np.ndarray


@dataclass
class EvolvedGrid:
    """Predicted values arranged on their lattices.

    corner ``(ny+1, nx+1)``, vertical-edge midpoints ``(ny, nx+1)``,
    horizontal-edge midpoints ``(ny+1, nx)``.
    """

    corner: PointField
    vertical: PointField
    horizontal: PointField
    merged: int
    overrun: bool = False

    @classmethod
    def from_values(cls, values: EvolvedValues, points, grid: CartesianGrid) -> "EvolvedGrid":
        nx, ny = grid.nx, grid.ny

        def field(sl, shape):
            part = values.select(sl)
            return PointField(*(getattr(part, k).reshape(shape) for k in ("H", "h", "v1", "v2", "b")))

        return cls(
            corner=field(points.corner_slice, (ny + 1, nx + 1)),
            vertical=field(points.vertical_slice, (ny, nx + 1)),
            horizontal=field(points.horizontal_slice, (ny + 1, nx)),
            merged=int(np.count_nonzero(values.merged)),
            overrun=bool(np.any(values.overrun)),
        )


@dataclass
class EdgeFlux:
    vertical: np.ndarray         # (ny, nx+1, 3), normal (1, 0)
    horizontal: np.ndarray       # (ny+1, nx, 3), normal (0, 1)
    dt_vertical: np.ndarray      # (ny, nx+1)
    dt_horizontal: np.ndarray    # (ny+1, nx)


@dataclass
class StepReport:
    t: float
    dt: float
    merged: int
    drained_edges: int
    min_h: float
    overrun: bool = False


def advective_flux(h, v1, v2, normal: Tuple[float, float]) -> np.ndarray:
    """``F*(u) . n = (h vn, h v1 vn, h v2 vn)``; the pressure lives in the source."""
    vn = v1 * normal[0] + v2 * normal[1]
    return np.stack([h * vn, h * v1 * vn, h * v2 * vn], axis=-1)


def advective_edge_flux(first: PointField, mid: PointField, last: PointField,
                        normal: Tuple[float, float]) -> np.ndarray:
    ends = advective_flux(first.h, first.v1, first.v2, normal) + advective_flux(last.h, last.v1, last.v2, normal)
    return W_END * ends + W_MID * advective_flux(mid.h, mid.v1, mid.v2, normal)


def _rows(p: PointField, sl) -> PointField:
    return PointField(p.H[sl], p.h[sl], p.v1[sl], p.v2[sl], p.b[sl])


def edge_fluxes(ev: EvolvedGrid) -> Tuple[np.ndarray, np.ndarray]:
    c = ev.corner
    vertical = advective_edge_flux(_rows(c, np.s_[:-1, :]), ev.vertical, _rows(c, np.s_[1:, :]), (1.0, 0.0))
    horizontal = advective_edge_flux(_rows(c, np.s_[:, :-1]), ev.horizontal, _rows(c, np.s_[:, 1:]), (0.0, 1.0))
    return vertical, horizontal


def _gravity_term(h_hi, h_lo, H_hi, H_lo):
    return 0.5 * (h_hi + h_lo) * (H_hi - H_lo)


def cell_source(ev: EvolvedGrid, g: float) -> np.ndarray:
    """``S*`` per cell from free-surface differences across the cell, shape ``(ny, nx, 3)``."""
    c, vm, hm = ev.corner, ev.vertical, ev.horizontal
    x_low = _gravity_term(c.h[:-1, 1:], c.h[:-1, :-1], c.H[:-1, 1:], c.H[:-1, :-1])
    x_high = _gravity_term(c.h[1:, 1:], c.h[1:, :-1], c.H[1:, 1:], c.H[1:, :-1])
    x_mid = _gravity_term(vm.h[:, 1:], vm.h[:, :-1], vm.H[:, 1:], vm.H[:, :-1])
    y_left = _gravity_term(c.h[1:, :-1], c.h[:-1, :-1], c.H[1:, :-1], c.H[:-1, :-1])
    y_right = _gravity_term(c.h[1:, 1:], c.h[:-1, 1:], c.H[1:, 1:], c.H[:-1, 1:])
    y_mid = _gravity_term(hm.h[1:, :], hm.h[:-1, :], hm.H[1:, :], hm.H[:-1, :])
    sx = g * (W_END * (x_low + x_high) + W_MID * x_mid)
    sy = g * (W_END * (y_left + y_right) + W_MID * y_mid)
    return np.stack([np.zeros_like(sx), sx, sy], axis=-1)


def draining_time(h: np.ndarray, mass_vertical: np.ndarray, mass_horizontal: np.ndarray,
                  dx: float) -> np.ndarray:
    """``dx h / sum of outflows`` per cell; ``inf`` without outflow."""
    outflow = ((np.maximum(mass_vertical[:, 1:], 0.0) + np.maximum(-mass_vertical[:, :-1], 0.0))
               + (np.maximum(mass_horizontal[1:, :], 0.0) + np.maximum(-mass_horizontal[:-1, :], 0.0)))
    safe = np.where(outflow > 0.0, outflow, 1.0)
    return np.where(outflow > 0.0, dx * h / safe, np.inf)


def edge_time_step(mass: np.ndarray, drain_low: np.ndarray, drain_high: np.ndarray,
                   dt: float) -> np.ndarray:
    """Cut-off time step from the cell the mass flux leaves.

    ``drain_low`` belongs to the cell on the negative side of the edge normal,
    ``drain_high`` to the one on the positive side.
    """
    return np.where(mass > 0.0, np.minimum(dt, drain_low),
                    np.where(mass < 0.0, np.minimum(dt, drain_high), dt))


def _pad_drain(drain: np.ndarray, axis: int, periodic: bool) -> np.ndarray:
    if periodic:
        return np.concatenate([np.take(drain, [-1], axis=axis), drain, np.take(drain, [0], axis=axis)], axis=axis)
    pad = [(0, 0), (0, 0)]
    pad[axis] = (1, 1)
    # ghost cells are never drained
    return np.pad(drain, pad, constant_values=np.inf)


def limit_fluxes(vertical: np.ndarray, horizontal: np.ndarray, h: np.ndarray, dt: float,
                 grid: CartesianGrid, bcs: BoundaryConditions) -> EdgeFlux:
    drain = draining_time(h, vertical[..., 0], horizontal[..., 0], grid.dx)
    dv = _pad_drain(drain, axis=1, periodic=bcs.periodic_x)
    dh = _pad_drain(drain, axis=0, periodic=bcs.periodic_y)
    return EdgeFlux(
        vertical=vertical,
        horizontal=horizontal,
        dt_vertical=edge_time_step(vertical[..., 0], dv[:, :-1], dv[:, 1:], dt),
        dt_horizontal=edge_time_step(horizontal[..., 0], dh[:-1, :], dh[1:, :], dt),
    )


def fv_update(u: ConservedState, flux: EdgeFlux, source: np.ndarray, dt: float,
              grid: CartesianGrid, eps_h: float) -> ConservedState:
    fv = flux.dt_vertical[..., None] * flux.vertical
    fh = flux.dt_horizontal[..., None] * flux.horizontal
    divergence = (fv[:, 1:] - fv[:, :-1]) + (fh[1:, :] - fh[:-1, :])
    change = (divergence + dt * source) / grid.dx

    h, hv1, hv2 = u.interior(grid)
    new = u.copy()
    sl = grid.interior
    new.h[sl] = h - change[..., 0]
    new.hv1[sl] = hv1 - change[..., 1]
    new.hv2[sl] = hv2 - change[..., 2]
    new.t = u.t + dt

    scale = float(np.max(h)) if h.size else 0.0
    tolerance = 1e-12 * max(scale, np.finfo(float).tiny)
    depth = new.h[sl]
    if np.any(depth < -tolerance):
        j, i = np.unravel_index(int(np.argmin(depth)), depth.shape)
        raise PositivityError((int(i), int(j)), float(depth[j, i]), tolerance)
    return zero_dry_cells(new, eps_h)


def cfl_time_step(prim: PrimitiveState, grid: CartesianGrid, g: float, mu: float,
                  dt_fallback: float) -> float:
    sl = grid.interior
    h = prim.h[sl]
    wet = h > 0.0
    if not np.any(wet):
        return dt_fallback
    c = np.sqrt(g * h[wet])
    speed = np.maximum(np.abs(prim.v1[sl][wet]), np.abs(prim.v2[sl][wet])) + c
    fastest = float(np.max(speed))
    if fastest <= 0.0:
        return dt_fallback
    return mu * grid.dx / fastest


def unsplit_update(u: ConservedState, ev: EvolvedGrid, dt: float, grid: CartesianGrid,
                   g: float) -> ConservedState:
    """Reference update with pressure in the flux and bottom differences in the source.

    No draining limiter; equal to the split update whenever no cell drains.
    """
    vertical, horizontal = edge_fluxes(ev)
    c, vm, hm = ev.corner, ev.vertical, ev.horizontal

    def pressure(p):
        return 0.5 * g * p.h * p.h

    vertical = vertical.copy()
    horizontal = horizontal.copy()
    vertical[..., 1] += W_END * (pressure(c)[:-1, :] + pressure(c)[1:, :]) + W_MID * pressure(vm)
    horizontal[..., 2] += W_END * (pressure(c)[:, :-1] + pressure(c)[:, 1:]) + W_MID * pressure(hm)

    x_low = _gravity_term(c.h[:-1, 1:], c.h[:-1, :-1], c.b[:-1, 1:], c.b[:-1, :-1])
    x_high = _gravity_term(c.h[1:, 1:], c.h[1:, :-1], c.b[1:, 1:], c.b[1:, :-1])
    x_mid = _gravity_term(vm.h[:, 1:], vm.h[:, :-1], vm.b[:, 1:], vm.b[:, :-1])
    y_left = _gravity_term(c.h[1:, :-1], c.h[:-1, :-1], c.b[1:, :-1], c.b[:-1, :-1])
    y_right = _gravity_term(c.h[1:, 1:], c.h[:-1, 1:], c.b[1:, 1:], c.b[:-1, 1:])
    y_mid = _gravity_term(hm.h[1:, :], hm.h[:-1, :], hm.b[1:, :], hm.b[:-1, :])
    sx = g * (W_END * (x_low + x_high) + W_MID * x_mid)
    sy = g * (W_END * (y_left + y_right) + W_MID * y_mid)
    source = np.stack([np.zeros_like(sx), sx, sy], axis=-1)

    divergence = (vertical[:, 1:] - vertical[:, :-1]) + (horizontal[1:, :] - horizontal[:-1, :])
    change = dt * (divergence + source) / grid.dx
    new = u.copy()
    sl = grid.interior
    h, hv1, hv2 = u.interior(grid)
    new.h[sl] = h - change[..., 0]
    new.hv1[sl] = hv1 - change[..., 1]
    new.hv2[sl] = hv2 - change[..., 2]
    new.t = u.t + dt
    return new


class FVEGSolver:
    def __init__(self, grid: CartesianGrid, bathymetry: Bathymetry, boundary: BoundaryConditions,
                 profile: SolverProfile):
        self.grid = grid
        self.bathymetry = bathymetry
        self.boundary = boundary
        self.profile = profile
        self.g = bathymetry.g
        self.dry = dry_params(grid, profile.eps_h)
        self.points = quadrature_points(grid)

    def primitives(self, u: ConservedState) -> PrimitiveState:
        return conserved_to_primitive(u, self.bathymetry.b_cell, self.dry, self.grid)

    def cfl_time_step(self, u: ConservedState) -> float:
        return cfl_time_step(self.primitives(u), self.grid, self.g, self.profile.mu,
                             self.profile.dt_fallback)

    def _point_bottoms(self, corners) -> np.ndarray:
        gl, nx, ny = self.grid.ghost_layers, self.grid.nx, self.grid.ny
        b = corners.b[gl:gl + ny + 1, gl:gl + nx + 1]
        return np.concatenate([
            b.ravel(),
            (0.5 * (b[:-1, :] + b[1:, :])).ravel(),
            (0.5 * (b[:, :-1] + b[:, 1:])).ravel(),
        ])

    def predict(self, u: ConservedState, dt: float) -> Tuple[PrimitiveState, EvolvedGrid]:
        u = fill_ghosts(u.copy(), self.grid, self.bathymetry.b_cell, self.boundary,
                        u.t + 0.5 * dt, self.g)
        prim = self.primitives(u)
        corners = corner_averages(prim)
        recon = build_recon(corners, prim, self.grid)
        inputs = EvolutionInputs(
            grid=self.grid, prim=prim, recon=recon,
            correction=correction_field(prim, recon),
            b_point=self._point_bottoms(corners), g=self.g,
        )
        values = combined_evolution(
            self.points, inputs, tau=0.5 * dt, order=self.profile.order,
            entropy_fix=self.profile.entropy_fix, chunk_size=self.profile.chunk_size,
            workers=self.profile.workers,
        )
        return prim, EvolvedGrid.from_values(values, self.points, self.grid)

    def _close_walls(self, vertical: np.ndarray, horizontal: np.ndarray):
        if self.boundary.west.kind == "wall":
            vertical[:, 0] = 0.0
        if self.boundary.east.kind == "wall":
            vertical[:, -1] = 0.0
        if self.boundary.south.kind == "wall":
            horizontal[0, :] = 0.0
        if self.boundary.north.kind == "wall":
            horizontal[-1, :] = 0.0

    def step(self, u: ConservedState, dt: float) -> Tuple[ConservedState, StepReport]:
        prim, ev = self.predict(u, dt)
        vertical, horizontal = edge_fluxes(ev)
        self._close_walls(vertical, horizontal)
        source = cell_source(ev, self.g)
        h = prim.h[self.grid.interior]
        flux = limit_fluxes(vertical, horizontal, h, dt, self.grid, self.boundary)
        new = fv_update(u, flux, source, dt, self.grid, self.profile.eps_h)
        drained = int(np.count_nonzero(flux.dt_vertical < dt) + np.count_nonzero(flux.dt_horizontal < dt))
        report = StepReport(
            t=new.t, dt=dt, merged=ev.merged, drained_edges=drained,
            min_h=float(np.min(new.h[self.grid.interior])),
            overrun=ev.overrun,
        )
        return new, report
