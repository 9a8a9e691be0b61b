# modules/reconstruction.py

"""Continuous piecewise bilinear recovery from corner averages.

Corner values live on the corner lattice of the ghost-extended grid, shape
``(rows + 1, cols + 1)``; corner ``[J, I]`` is the lower-left corner of the
extended cell ``[J, I]``. Only corners with four surrounding cells are
averaged; the outer lattice ring repeats its neighbours and the outermost
ghost ring of cells falls back to constant data.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from core.mesh import CartesianGrid
from core.state import PrimitiveState
from modules.evolution import stencil_sum, dry_stencil_modify

RECON_VARIABLES = ("H", "v1", "v2", "b")


@dataclass
class CornerAverages:
    H: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    b: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return self.H - self.b


def corner_averages(prim: PrimitiveState) -> CornerAverages:
    """Mean of the dry-modified four-cell stencil at every inner lattice corner."""

    def stencil(field):
        # slots: lower-left, lower-right, upper-left, upper-right
        return np.stack([field[:-1, :-1], field[:-1, 1:], field[1:, :-1], field[1:, 1:]], axis=-1)

    H, b, h, v1, v2 = (stencil(f) for f in (prim.H, prim.b, prim.h, prim.v1, prim.v2))
    modified = dry_stencil_modify(H, b, h, v1, v2, np.ones(H.shape, dtype=bool))

    def average(values):
        return np.pad(stencil_sum(values) / 4.0, 1, mode="edge")

    return CornerAverages(
        H=average(modified.H),
        v1=average(modified.v1),
        v2=average(modified.v2),
        b=average(modified.b),
    )


@dataclass
class BilinearRecon:
    """Per cell and variable: ``(w, w_x1, w_x2, w_x1x2)`` around the cell center.

    ``coefficients[name]`` has shape ``(4, rows, cols)`` on the extended grid.
    """

    coefficients: Dict[str, np.ndarray]
    dx: float

    def evaluate(self, name: str, row, col, x_offset, y_offset):
        w, wx, wy, wxy = (c[row, col] for c in self.coefficients[name])
        return w + wx * x_offset + wy * y_offset + wxy * x_offset * y_offset

    def point_value(self, name: str) -> np.ndarray:
        return self.coefficients[name][0]


def build_recon(corners: CornerAverages, prim: PrimitiveState, grid: CartesianGrid) -> BilinearRecon:
    dx = grid.dx
    dry = prim.h <= 0.0
    coefficients: Dict[str, np.ndarray] = {}
    for name in RECON_VARIABLES:
        c = getattr(corners, name)
        ll, lr, ul, ur = c[:-1, :-1], c[:-1, 1:], c[1:, :-1], c[1:, 1:]
        w = ((ll + ur) + (lr + ul)) / 4.0
        wx = ((lr + ur) - (ll + ul)) / (2.0 * dx)
        wy = ((ul + ur) - (ll + lr)) / (2.0 * dx)
        wxy = ((ur + ll) - (lr + ul)) / (dx * dx)
        wx, wy, wxy = (np.where(dry, 0.0, d) for d in (wx, wy, wxy))

        # outermost ghost ring: its corners are padding, use the cell value
        cell = getattr(prim, name)
        ring = np.zeros(w.shape, dtype=bool)
        ring[0, :] = ring[-1, :] = ring[:, 0] = ring[:, -1] = True
        w = np.where(ring, cell, w)
        wx, wy, wxy = (np.where(ring, 0.0, d) for d in (wx, wy, wxy))
        coefficients[name] = np.stack([w, wx, wy, wxy])
    return BilinearRecon(coefficients=coefficients, dx=dx)


def correction_field(prim: PrimitiveState, recon: BilinearRecon) -> Dict[str, np.ndarray]:
    """Piecewise constant ``W - W~`` for ``H``, ``v1`` and ``v2``; the bottom has none."""
    return {name: getattr(prim, name) - recon.point_value(name) for name in ("H", "v1", "v2")}
