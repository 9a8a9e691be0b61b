# core/state.py

"""Cell fields: conserved and primitive variables, bathymetry, dry parameters."""

from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np
from pydantic import BaseModel, Field

from core.mesh import CartesianGrid

PointField = Callable[[np.ndarray, np.ndarray], np.ndarray]

# 3-point Gauss-Legendre rule on [-1, 1], exact for polynomials of degree 5.
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(3)


@dataclass
class ConservedState:
    """``(h, h v1, h v2)`` on the ghost-extended grid at time ``t``."""

    h: np.ndarray
    hv1: np.ndarray
    hv2: np.ndarray
    t: float = 0.0

    def copy(self) -> "ConservedState":
        return ConservedState(self.h.copy(), self.hv1.copy(), self.hv2.copy(), self.t)

    def interior(self, grid: CartesianGrid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        sl = grid.interior
        return self.h[sl], self.hv1[sl], self.hv2[sl]

    def volume(self, grid: CartesianGrid) -> float:
        return float(np.sum(self.h[grid.interior]) * grid.cell_area)


@dataclass
class PrimitiveState:
    """``(h, v1, v2)`` plus free surface ``H = h + b`` and the bottom ``b``."""

    h: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    H: np.ndarray
    b: np.ndarray

    @property
    def wet(self) -> np.ndarray:
        return self.h > 0.0


@dataclass
class Bathymetry:
    b_cell: np.ndarray        # ghost-extended cell averages
    b_corner: np.ndarray      # (ny + 1, nx + 1) interior corner lattice
    b_vertical_mid: np.ndarray    # (ny, nx + 1)
    b_horizontal_mid: np.ndarray  # (ny + 1, nx)
    g: float = 9.81


class DryParams(BaseModel):
    eps_h: float = Field(default=1e-8, gt=0.0)
    eps_v: float = Field(gt=0.0)
    L_ref: float = Field(gt=0.0)


def dry_params(grid: CartesianGrid, eps_h: float = 1e-8) -> DryParams:
    # a single-cell grid has no pair of centers; fall back to one cell width
    L_ref = grid.reference_length or grid.dx
    return DryParams(eps_h=eps_h, eps_v=grid.dx / L_ref, L_ref=L_ref)


def cell_average_init(field: PointField, grid: CartesianGrid, with_ghosts: bool = True) -> np.ndarray:
    """3x3 tensor Gauss average of a pointwise field over every cell."""
    xc, yc = grid.cell_centers(with_ghosts)
    half = 0.5 * grid.dx
    total = np.zeros_like(xc)
    for a, wa in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
        for c, wc in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
            values = np.broadcast_to(field(xc + a * half, yc + c * half), xc.shape)
            total += wa * wc * values
    return total / 4.0


def build_bathymetry(grid: CartesianGrid, b_cell: np.ndarray, g: float) -> Bathymetry:
    """Derive corner and edge-midpoint bottoms from ghost-extended cell averages."""
    gl = grid.ghost_layers
    rows = slice(gl - 1, gl + grid.ny + 1)
    cols = slice(gl - 1, gl + grid.nx + 1)
    block = b_cell[rows, cols]
    b_corner = ((block[:-1, :-1] + block[1:, 1:]) + (block[:-1, 1:] + block[1:, :-1])) / 4.0
    return Bathymetry(
        b_cell=b_cell,
        b_corner=b_corner,
        b_vertical_mid=0.5 * (b_corner[:-1, :] + b_corner[1:, :]),
        b_horizontal_mid=0.5 * (b_corner[:, :-1] + b_corner[:, 1:]),
        g=g,
    )


def desingularize_velocity(v1: np.ndarray, v2: np.ndarray, hv1: np.ndarray, hv2: np.ndarray,
                           v_ref: float) -> Tuple[np.ndarray, np.ndarray]:
    """Limit speeds above ``v_ref`` smoothly into ``(v_ref, 2 v_ref)`` along the discharge."""
    speed = np.hypot(v1, v2)
    discharge = np.hypot(hv1, hv2)
    limited = v_ref * (2.0 - v_ref / np.where(speed > 0.0, speed, 1.0))
    scale = np.where(discharge > 0.0, limited / np.where(discharge > 0.0, discharge, 1.0), 0.0)
    return scale * hv1, scale * hv2


def reference_speed(u: ConservedState, dry: DryParams, grid: CartesianGrid) -> float:
    h, hv1, hv2 = u.interior(grid)
    deep = h > dry.eps_v
    if not np.any(deep):
        return 0.0
    return float(np.max(np.hypot(hv1[deep], hv2[deep]) / h[deep]))


def conserved_to_primitive(u: ConservedState, b: np.ndarray, dry: DryParams,
                           grid: CartesianGrid) -> PrimitiveState:
    wet = u.h >= dry.eps_h
    h = np.where(wet, u.h, 0.0)
    safe_h = np.where(wet, u.h, 1.0)
    v1 = np.where(wet, u.hv1 / safe_h, 0.0)
    v2 = np.where(wet, u.hv2 / safe_h, 0.0)

    v_ref = reference_speed(u, dry, grid)
    if v_ref > 0.0:
        fast = wet & (h < dry.eps_v) & (np.hypot(v1, v2) > v_ref)
        if np.any(fast):
            d1, d2 = desingularize_velocity(v1[fast], v2[fast], u.hv1[fast], u.hv2[fast], v_ref)
            v1[fast] = d1
            v2[fast] = d2

    H = np.where(wet, h + b, b)
    return PrimitiveState(h=h, v1=v1, v2=v2, H=H, b=b)


def primitive_to_conserved(w: PrimitiveState, t: float = 0.0) -> ConservedState:
    return ConservedState(h=w.h.copy(), hv1=w.h * w.v1, hv2=w.h * w.v2, t=t)


def eigenvalues(h, v1, v2, xi: Tuple[float, float], g: float):
    """``(v.xi - c, v.xi, v.xi + c)`` with ``c = sqrt(g h)``."""
    c = np.sqrt(g * np.maximum(h, 0.0))
    vn = v1 * xi[0] + v2 * xi[1]
    return vn - c, vn, vn + c


def zero_dry_cells(u: ConservedState, eps_h: float) -> ConservedState:
    dry = u.h < eps_h
    return replace(
        u,
        h=np.where(dry, 0.0, u.h),
        hv1=np.where(dry, 0.0, u.hv1),
        hv2=np.where(dry, 0.0, u.hv2),
    )
