# modules/evolution.py

"""Predictor: point values at the half time step from approximate evolution operators.

Every quadrature point gets a footprint circle (the sonic cone at time t^n),
the circle is cut into arcs by the grid lines, and the angular integrals of the
operators are evaluated in closed form per arc. Data restricted to the circle
is a trigonometric polynomial ``A + B cos + C sin + D sin cos``, so all integrals
reduce to moments of ``cos(n theta)`` and ``sin(n theta)`` for ``n <= 4``.

All routines work on batches of points: per-point arrays have shape ``(N,)``,
stencil arrays ``(N, 4)`` and per-arc arrays ``(N, S)``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.mesh import CartesianGrid, QuadPointSet
from core.state import PrimitiveState

TWO_PI = 2.0 * np.pi
_QUADRANT_BREAKS = np.array([0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi])


def stencil_sum(a: np.ndarray) -> np.ndarray:
    # diagonal pairs first, so mirrored stencils round identically
    return (a[..., 0] + a[..., 3]) + (a[..., 1] + a[..., 2])


def _arc_sum(a: np.ndarray) -> np.ndarray:
    """Sum over the arc axis in fixed order (independent of the padding width)."""
    total = np.zeros(a.shape[0])
    for s in range(a.shape[1]):
        total += a[:, s]
    return total


@dataclass
class ModifiedStencil:
    H: np.ndarray
    b: np.ndarray
    h: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    wet: np.ndarray
    replaced: np.ndarray
    H_max: np.ndarray
    any_wet: np.ndarray
    mask: np.ndarray


def dry_stencil_modify(H, b, h, v1, v2, mask) -> ModifiedStencil:
    """Lift dry cells standing above the highest wet free surface of the stencil.

    Dry cells with ``b > H_max`` become ``(H, b, v) = (H_max, H_max, 0)``; other
    dry cells keep ``H = b`` and ``v = 0``. ``any_wet`` is False for all-dry
    stencils, which the caller evaluates as dry points.
    """
    mask = np.asarray(mask, dtype=bool)
    wet = mask & (h > 0.0)
    any_wet = wet.any(axis=-1)
    H_max = np.where(any_wet, np.where(wet, H, -np.inf).max(axis=-1), 0.0)
    lifted = H_max[..., None]
    replaced = mask & ~wet & any_wet[..., None] & (b > lifted)

    def pick(wet_value, dry_value):
        value = np.where(wet, wet_value, dry_value)
        return np.where(mask, value, 0.0)

    return ModifiedStencil(
        H=pick(H, np.where(replaced, lifted, b)),
        b=pick(b, np.where(replaced, lifted, b)),
        h=pick(h, 0.0),
        v1=pick(v1, 0.0),
        v2=pick(v2, 0.0),
        wet=wet,
        replaced=replaced,
        H_max=H_max,
        any_wet=any_wet,
        mask=mask,
    )


def average_state(stencil: ModifiedStencil) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stencil mean of ``(h, v1, v2)``; dry and lifted cells count with ``h = v = 0``."""
    count = stencil.mask.sum(axis=-1)
    count = np.where(count > 0, count, 1)
    return (stencil_sum(stencil.h) / count,
            stencil_sum(stencil.v1) / count,
            stencil_sum(stencil.v2) / count)


@dataclass
class SonicCone:
    """Footprint circle at time t^n of the cone with apex at the point and t^n + tau.

    ``center_x``/``center_y`` are offsets of Q0 from the point in meters. Q0 is
    the foot of the particle path, ``x - tau v``, so supersonic footprints lie
    wholly upstream.
    """

    center_x: np.ndarray
    center_y: np.ndarray
    radius: np.ndarray
    tau: float
    h: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    c: np.ndarray
    merged: np.ndarray


def build_cone(h_bar, v1_bar, v2_bar, tau: float, g: float) -> SonicCone:
    h_bar = np.asarray(h_bar, dtype=float)
    c_bar = np.sqrt(g * h_bar)
    return SonicCone(
        center_x=-tau * np.asarray(v1_bar, dtype=float),
        center_y=-tau * np.asarray(v2_bar, dtype=float),
        radius=tau * c_bar,
        tau=tau,
        h=h_bar,
        v1=np.asarray(v1_bar, dtype=float),
        v2=np.asarray(v2_bar, dtype=float),
        c=c_bar,
        merged=np.zeros(h_bar.shape, dtype=bool),
    )


def transonic_detect(stencil: ModifiedStencil, g: float) -> np.ndarray:
    speed = np.hypot(stencil.v1, stencil.v2)
    c = np.sqrt(g * stencil.h)
    supersonic = (stencil.wet & (speed > c)).any(axis=-1)
    subsonic = (stencil.wet & (speed < c)).any(axis=-1)
    return supersonic & subsonic


def merge_circles(x1, y1, r1, x2, y2, r2):
    """Smallest circle containing both circles; a containing circle is returned as is."""
    x1, y1, r1, x2, y2, r2 = np.broadcast_arrays(*(np.asarray(a, dtype=float)
                                                   for a in (x1, y1, r1, x2, y2, r2)))
    d = np.hypot(x2 - x1, y2 - y1)
    first_holds = d + r2 <= r1
    second_holds = ~first_holds & (d + r1 <= r2)
    safe_d = np.where(d > 0.0, d, 1.0)
    r = 0.5 * (r1 + r2 + d)
    shift = (r - r1) / safe_d
    x = x1 + shift * (x2 - x1)
    y = y1 + shift * (y2 - y1)
    x = np.where(first_holds, x1, np.where(second_holds, x2, x))
    y = np.where(first_holds, y1, np.where(second_holds, y2, y))
    r = np.where(first_holds, r1, np.where(second_holds, r2, r))
    return x, y, r


def _merge_optional(a, b):
    (xa, ya, ra, oka), (xb, yb, rb, okb) = a, b
    x, y, r = merge_circles(xa, ya, ra, xb, yb, rb)
    x = np.where(oka & okb, x, np.where(oka, xa, xb))
    y = np.where(oka & okb, y, np.where(oka, ya, yb))
    r = np.where(oka & okb, r, np.where(oka, ra, rb))
    return x, y, r, oka | okb


def entropy_fix_cone(stencil: ModifiedStencil, cone: SonicCone, transonic: np.ndarray,
                     g: float) -> SonicCone:
    """Replace the footprint at transonic points by a circle holding every wet cell's own circle.

    Diagonal pairs (slots 0/3 and 1/2) are merged first, then the two results.
    The linearization state stays the stencil average.
    """
    tau = cone.tau
    cx = -tau * stencil.v1
    cy = -tau * stencil.v2
    cr = tau * np.sqrt(g * stencil.h)
    ok = stencil.wet

    def circle(s):
        return cx[:, s], cy[:, s], cr[:, s], ok[:, s]

    first = _merge_optional(circle(0), circle(3))
    second = _merge_optional(circle(1), circle(2))
    x, y, r, found = _merge_optional(first, second)
    use = transonic & found
    return SonicCone(
        center_x=np.where(use, x, cone.center_x),
        center_y=np.where(use, y, cone.center_y),
        radius=np.where(use, r, cone.radius),
        tau=tau, h=cone.h, v1=cone.v1, v2=cone.v2, c=cone.c,
        merged=use,
    )


@dataclass
class ArcDecomposition:
    """Arcs of the footprint circles in cell-aligned local coordinates.

    Arc ``s`` of point ``k`` spans ``[theta_a, theta_b]`` and lies in cell
    ``(base_i + col_off, base_j + row_off)``. ``U``, ``V`` and ``R`` are the circle
    center and radius in units of ``dx`` with grid lines at integer values.
    Padding arcs have zero length and sit at the start of each row.
    """

    theta_a: np.ndarray
    theta_b: np.ndarray
    col_off: np.ndarray
    row_off: np.ndarray
    U: np.ndarray
    V: np.ndarray
    R: np.ndarray
    base_i: np.ndarray
    base_j: np.ndarray
    cos_moments: np.ndarray  # (5, N, S): integral of cos(n theta) over each arc
    sin_moments: np.ndarray  # (5, N, S): integral of sin(n theta) over each arc

    @property
    def sign_cos(self) -> np.ndarray:
        return np.sign(np.cos(0.5 * (self.theta_a + self.theta_b)))

    @property
    def sign_sin(self) -> np.ndarray:
        return np.sign(np.sin(0.5 * (self.theta_a + self.theta_b)))

    def arcs(self, k: int) -> List[Tuple[float, float, Tuple[int, int]]]:
        """Maximal arcs of point ``k`` as ``(theta_start, theta_end, cell)``.

        An arc running through theta = 0 is reported with ``theta_end > 2 pi``.
        """
        out: List[Tuple[float, float, Tuple[int, int]]] = []
        for a, b, ci, cj in zip(self.theta_a[k], self.theta_b[k], self.col_off[k], self.row_off[k]):
            if b <= a:
                continue
            cell = (int(self.base_i[k] + ci), int(self.base_j[k] + cj))
            if out and out[-1][2] == cell and out[-1][1] == a:
                out[-1] = (out[-1][0], float(b), cell)
            else:
                out.append((float(a), float(b), cell))
        if len(out) > 1 and out[0][2] == out[-1][2]:
            first = out.pop(0)
            out[-1] = (out[-1][0], first[1] + TWO_PI, first[2])
        return out


def _line_crossings(center: np.ndarray, R: np.ndarray):
    """Integer grid lines strictly inside ``(center - R, center + R)``."""
    lo = np.floor(center - R) + 1.0
    hi = np.ceil(center + R) - 1.0
    count = np.maximum(hi - lo + 1.0, 0.0).astype(int)
    return lo, count


def arc_decompose(cone: SonicCone, points: QuadPointSet, dx: float) -> ArcDecomposition:
    n = cone.radius.shape[0]
    U = points.shift_u + cone.center_x / dx
    V = points.shift_v + cone.center_y / dx
    R = cone.radius / dx
    safe_R = np.where(R > 0.0, R, 1.0)

    breaks = [np.broadcast_to(_QUADRANT_BREAKS, (n, 4))]
    lo, count = _line_crossings(U, R)
    for k in range(int(count.max(initial=0))):
        offset = lo + k - U
        valid = (k < count) & (np.abs(offset) < R)
        alpha = np.arccos(np.clip(offset / safe_R, -1.0, 1.0))
        breaks.append(np.where(valid, alpha, 0.0)[:, None])
        breaks.append(np.where(valid, TWO_PI - alpha, 0.0)[:, None])
    lo, count = _line_crossings(V, R)
    for k in range(int(count.max(initial=0))):
        offset = lo + k - V
        valid = (k < count) & (np.abs(offset) < R)
        beta = np.arcsin(np.clip(offset / safe_R, -1.0, 1.0))
        breaks.append(np.where(valid, np.mod(beta, TWO_PI), 0.0)[:, None])
        breaks.append(np.where(valid, np.pi - beta, 0.0)[:, None])

    theta = np.sort(np.concatenate(breaks, axis=1), axis=1)
    theta = np.concatenate([theta, np.full((n, 1), TWO_PI)], axis=1)
    theta_a, theta_b = theta[:, :-1], theta[:, 1:]

    mid = 0.5 * (theta_a + theta_b)
    col_off = np.floor(U[:, None] + R[:, None] * np.cos(mid)).astype(int)
    row_off = np.floor(V[:, None] + R[:, None] * np.sin(mid)).astype(int)

    cos_m = np.empty((5,) + theta_a.shape)
    sin_m = np.empty((5,) + theta_a.shape)
    cos_m[0] = theta_b - theta_a
    sin_m[0] = 0.0
    full_turn = theta == TWO_PI
    for order in range(1, 5):
        s = np.where(full_turn, 0.0, np.sin(order * theta))
        c = np.where(full_turn, 1.0, np.cos(order * theta))
        cos_m[order] = (s[:, 1:] - s[:, :-1]) / order
        sin_m[order] = (c[:, :-1] - c[:, 1:]) / order

    return ArcDecomposition(
        theta_a=theta_a, theta_b=theta_b, col_off=col_off, row_off=row_off,
        U=U, V=V, R=R, base_i=points.base_i, base_j=points.base_j,
        cos_moments=cos_m, sin_moments=sin_m,
    )


@dataclass
class ArcField:
    """Data on the footprint circle per arc: ``A + B cos + C sin + D sin cos``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @classmethod
    def constant(cls, values: np.ndarray) -> "ArcField":
        zero = np.zeros_like(values)
        return cls(values, zero, zero, zero)

    @classmethod
    def bilinear(cls, coeffs: Tuple[np.ndarray, ...], ac: np.ndarray, bc: np.ndarray,
                 rho: np.ndarray) -> "ArcField":
        """Restrict ``w + wx x + wy y + wxy x y`` (cell-centred) to a circle of radius
        ``rho`` whose center sits at ``(ac, bc)`` from the cell center."""
        w, wx, wy, wxy = coeffs
        return cls(
            A=w + wx * ac + wy * bc + wxy * ac * bc,
            B=rho * (wx + wxy * bc),
            C=rho * (wy + wxy * ac),
            D=wxy * rho * rho,
        )

    def integrals(self, arcs: ArcDecomposition) -> Dict[str, np.ndarray]:
        """Per-arc integrals of ``f``, ``f cos``, ``f sin``, ``f cos 2t``, ``f sin 2t``."""
        M, N = arcs.cos_moments, arcs.sin_moments
        A, B, C, D = self.A, self.B, self.C, self.D
        return {
            "1": A * M[0] + B * M[1] + C * N[1] + 0.5 * D * N[2],
            "cos": A * M[1] + 0.5 * B * (M[0] + M[2]) + 0.5 * C * N[2] + 0.25 * D * (N[1] + N[3]),
            "sin": A * N[1] + 0.5 * B * N[2] + 0.5 * C * (M[0] - M[2]) + 0.25 * D * (M[1] - M[3]),
            "cos2": A * M[2] + 0.5 * B * (M[1] + M[3]) + 0.5 * C * (N[3] - N[1]) + 0.25 * D * N[4],
            "sin2": A * N[2] + 0.5 * B * (N[1] + N[3]) + 0.5 * C * (M[1] - M[3]) + 0.25 * D * (M[0] - M[4]),
        }


def _bottom_term(arcs: ArcDecomposition, cone: SonicCone,
                 slope_x: Optional[ArcField], slope_y: Optional[ArcField]) -> np.ndarray:
    if slope_x is None or slope_y is None:
        return np.zeros(cone.radius.shape)
    ix = _arc_sum(slope_x.integrals(arcs)["1"])
    iy = _arc_sum(slope_y.integrals(arcs)["1"])
    return cone.tau / TWO_PI * (cone.v1 * ix + cone.v2 * iy)


def evolve_const(arcs: ArcDecomposition, cone: SonicCone, H: np.ndarray, v1: np.ndarray,
                 v2: np.ndarray, g: float, slope_x: Optional[ArcField] = None,
                 slope_y: Optional[ArcField] = None):
    """Operator for piecewise constant data (per-arc values ``H``, ``v1``, ``v2``).

    Returns the free surface and velocity at the point; the caller subtracts
    ``b_P`` to obtain the depth.
    """
    c_bar = np.where(cone.c > 0.0, cone.c, 1.0)[:, None]
    M0, M2, N2 = arcs.cos_moments[0], arcs.cos_moments[2], arcs.sin_moments[2]
    sc, ss = arcs.sign_cos, arcs.sign_sin
    cos_sq = 0.5 * (M0 + M2)
    sin_sq = 0.5 * (M0 - M2)
    sin_cos = 0.5 * N2

    H_point = _arc_sum(H * M0 - c_bar / g * (v1 * sc + v2 * ss) * M0) / TWO_PI
    v1_point = _arc_sum(-g / c_bar * H * sc * M0 + v1 * (cos_sq + 0.5 * M0) + v2 * sin_cos) / TWO_PI
    v2_point = _arc_sum(-g / c_bar * H * ss * M0 + v1 * sin_cos + v2 * (sin_sq + 0.5 * M0)) / TWO_PI
    return H_point + _bottom_term(arcs, cone, slope_x, slope_y), v1_point, v2_point


def evolve_bilinear(arcs: ArcDecomposition, cone: SonicCone, H: ArcField, v1: ArcField,
                    v2: ArcField, at_center: Tuple[np.ndarray, np.ndarray, np.ndarray], g: float,
                    slope_x: Optional[ArcField] = None, slope_y: Optional[ArcField] = None):
    """Operator for continuous bilinear data; ``at_center`` holds ``(H, v1, v2)`` at Q0."""
    c_bar = np.where(cone.c > 0.0, cone.c, 1.0)
    IH = {k: _arc_sum(v) for k, v in H.integrals(arcs).items()}
    I1 = {k: _arc_sum(v) for k, v in v1.integrals(arcs).items()}
    I2 = {k: _arc_sum(v) for k, v in v2.integrals(arcs).items()}
    H0, v10, v20 = at_center

    H_point = (H0 * (1.0 - 0.5 * np.pi) + 0.25 * IH["1"]
               - c_bar / (g * np.pi) * (I1["cos"] + I2["sin"]))
    v1_point = (v10 * (1.0 - 0.25 * np.pi) - g / (c_bar * np.pi) * IH["cos"]
                + 0.25 * (0.5 * I1["1"] + 1.5 * I1["cos2"] + 1.5 * I2["sin2"]))
    v2_point = (v20 * (1.0 - 0.25 * np.pi) - g / (c_bar * np.pi) * IH["sin"]
                + 0.25 * (1.5 * I1["sin2"] + 0.5 * I2["1"] - 1.5 * I2["cos2"]))
    return H_point + _bottom_term(arcs, cone, slope_x, slope_y), v1_point, v2_point


@dataclass
class EvolvedValues:
    H: np.ndarray
    h: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    b: np.ndarray
    merged: np.ndarray
    # footprint reached past the ghost layers
    overrun: np.ndarray

    @classmethod
    def concatenate(cls, parts: List["EvolvedValues"]) -> "EvolvedValues":
        return cls(*(np.concatenate([getattr(p, name) for p in parts])
                     for name in ("H", "h", "v1", "v2", "b", "merged", "overrun")))

    def select(self, sl: slice) -> "EvolvedValues":
        return EvolvedValues(self.H[sl], self.h[sl], self.v1[sl], self.v2[sl], self.b[sl],
                             self.merged[sl], self.overrun[sl])


def finalize_point_values(H, v1, v2, b_point, any_wet, merged, overrun=None) -> EvolvedValues:
    """Dry points and points with negative predicted depth become ``h = v = 0, H = b``."""
    h = H - b_point
    keep = any_wet & (h >= 0.0)
    return EvolvedValues(
        H=np.where(keep, H, b_point),
        h=np.where(keep, h, 0.0),
        v1=np.where(keep, v1, 0.0),
        v2=np.where(keep, v2, 0.0),
        b=np.asarray(b_point, dtype=float),
        merged=merged,
        overrun=np.zeros(np.shape(merged), dtype=bool) if overrun is None else overrun,
    )


@dataclass
class EvolutionInputs:
    """Everything the predictor reads for one time step."""

    grid: CartesianGrid
    prim: PrimitiveState
    recon: "object"          # modules.reconstruction.BilinearRecon
    correction: Dict[str, np.ndarray]
    b_point: np.ndarray      # bottom at every quadrature point, QuadPointSet order
    g: float


def _upwind_offsets(center: np.ndarray, velocity: np.ndarray):
    """Cell offsets holding Q0 as a ``(lower, upper)`` pair.

    On a grid line the cell in the direction of ``-v`` is taken twice. When the
    velocity component vanishes this does not break ties toward the lower
    index: both sides are returned and the caller averages them. A dry cell
    next to a wet one is flat while the wet side is bilinear, so a one-sided
    pick at a still front would give mirrored points different values.
    """
    base = np.floor(center)
    on_line = center == base
    lo = np.where(on_line & (velocity >= 0.0), base - 1.0, base)
    hi = np.where(on_line & (velocity > 0.0), base - 1.0, base)
    return lo.astype(int), hi.astype(int)


class _CellReader:
    def __init__(self, inputs: EvolutionInputs, stencil: ModifiedStencil, base_i, base_j):
        grid = inputs.grid
        self.inputs = inputs
        self.gl = grid.ghost_layers
        self.rows, self.cols = grid.shape
        self.base_i = base_i
        self.base_j = base_j
        self.H_max = stencil.H_max
        self.any_wet = stencil.any_wet

    def flat(self, col_off, row_off):
        rows = np.clip(self.base_j[:, None] + row_off + self.gl, 0, self.rows - 1)
        cols = np.clip(self.base_i[:, None] + col_off + self.gl, 0, self.cols - 1)
        return rows * self.cols + cols

    def outside(self, col_off, row_off) -> np.ndarray:
        rows = self.base_j[:, None] + row_off + self.gl
        cols = self.base_i[:, None] + col_off + self.gl
        return np.any((rows < 0) | (rows >= self.rows) | (cols < 0) | (cols >= self.cols), axis=1)

    def lifted(self, flat):
        prim = self.inputs.prim
        h = prim.h.ravel()[flat]
        b = prim.b.ravel()[flat]
        return (h <= 0.0) & self.any_wet[:, None] & (b > self.H_max[:, None])

    def coeffs(self, name, flat, lifted, lifted_value=0.0):
        table = self.inputs.recon.coefficients[name].reshape(4, -1)
        out = [np.where(lifted, lifted_value if k == 0 else 0.0, table[k][flat]) for k in range(4)]
        return tuple(out)

    def value(self, name, flat, lifted, lifted_value=0.0):
        field = getattr(self.inputs.prim, name).ravel()[flat]
        return np.where(lifted, lifted_value, field)


def _evolve_chunk(points: QuadPointSet, inputs: EvolutionInputs, b_point: np.ndarray, tau: float,
                  order: str, entropy_fix: bool) -> EvolvedValues:
    grid, prim, g = inputs.grid, inputs.prim, inputs.g
    gl = grid.ghost_layers
    n_cols = grid.shape[1]
    stencil_flat = (points.stencil_j + gl) * n_cols + (points.stencil_i + gl)
    gather = lambda field: field.ravel()[stencil_flat]
    stencil = dry_stencil_modify(gather(prim.H), gather(prim.b), gather(prim.h),
                                 gather(prim.v1), gather(prim.v2), points.stencil_mask)

    cone = build_cone(*average_state(stencil), tau=tau, g=g)
    if entropy_fix:
        transonic = transonic_detect(stencil, g)
        if transonic.any():
            cone = entropy_fix_cone(stencil, cone, transonic, g)

    arcs = arc_decompose(cone, points, grid.dx)
    reader = _CellReader(inputs, stencil, points.base_i, points.base_j)
    flat = reader.flat(arcs.col_off, arcs.row_off)
    lifted = reader.lifted(flat)
    H_lift = stencil.H_max[:, None]

    dx = grid.dx
    ac = (arcs.U[:, None] - (arcs.col_off + 0.5)) * dx
    bc = (arcs.V[:, None] - (arcs.row_off + 0.5)) * dx
    rho = cone.radius[:, None]
    _, bx, by, bxy = reader.coeffs("b", flat, lifted)
    zero = np.zeros_like(ac)
    slope_x = ArcField(bx + bxy * bc, zero, bxy * rho, zero)
    slope_y = ArcField(by + bxy * ac, bxy * rho, zero, zero)

    if order == "first":
        H, v1, v2 = evolve_const(
            arcs, cone,
            reader.value("H", flat, lifted, H_lift),
            reader.value("v1", flat, lifted),
            reader.value("v2", flat, lifted),
            g, slope_x, slope_y,
        )
    else:
        H_field = ArcField.bilinear(reader.coeffs("H", flat, lifted, H_lift), ac, bc, rho)
        v1_field = ArcField.bilinear(reader.coeffs("v1", flat, lifted), ac, bc, rho)
        v2_field = ArcField.bilinear(reader.coeffs("v2", flat, lifted), ac, bc, rho)
        at_center = _values_at_center(reader, arcs, cone, dx)
        H, v1, v2 = evolve_bilinear(arcs, cone, H_field, v1_field, v2_field, at_center, g,
                                    slope_x, slope_y)
        corr = inputs.correction
        dH, dv1, dv2 = (np.where(lifted, 0.0, corr[name].ravel()[flat]) for name in ("H", "v1", "v2"))
        cH, cv1, cv2 = evolve_const(arcs, cone, dH, dv1, dv2, g)
        H, v1, v2 = H + cH, v1 + cv1, v2 + cv2

    overrun = reader.outside(arcs.col_off, arcs.row_off)
    return finalize_point_values(H, v1, v2, b_point, stencil.any_wet, cone.merged, overrun)


def _values_at_center(reader: _CellReader, arcs: ArcDecomposition, cone: SonicCone, dx: float):
    col_lo, col_hi = _upwind_offsets(arcs.U, cone.v1)
    row_lo, row_hi = _upwind_offsets(arcs.V, cone.v2)
    H_lift = reader.H_max[:, None]

    def evaluate(col, row):
        col, row = col[:, None], row[:, None]
        flat = reader.flat(col, row)
        lifted = reader.lifted(flat)
        ac = (arcs.U[:, None] - (col + 0.5)) * dx
        bc = (arcs.V[:, None] - (row + 0.5)) * dx
        out = []
        for name, lift in (("H", H_lift), ("v1", 0.0), ("v2", 0.0)):
            w, wx, wy, wxy = reader.coeffs(name, flat, lifted, lift)
            out.append((w + wx * ac + wy * bc + wxy * ac * bc)[:, 0])
        return out

    ll, hh = evaluate(col_lo, row_lo), evaluate(col_hi, row_hi)
    lh, hl = evaluate(col_lo, row_hi), evaluate(col_hi, row_lo)
    return tuple(0.25 * ((a + d) + (b + c)) for a, d, b, c in zip(ll, hh, lh, hl))


def combined_evolution(points: QuadPointSet, inputs: EvolutionInputs, tau: float,
                       order: str = "second", entropy_fix: bool = True,
                       chunk_size: int = 40000, workers: int = 1) -> EvolvedValues:
    """Evaluate every quadrature point at ``t + tau``.

    ``order="second"`` applies the bilinear operator to the reconstruction and
    the constant operator to the correction field; ``order="first"`` applies the
    constant operator to the cell values alone.
    """
    n = len(points)
    chunks = [slice(start, min(start + chunk_size, n)) for start in range(0, n, max(chunk_size, 1))]

    def run(sl: slice) -> EvolvedValues:
        return _evolve_chunk(points.subset(sl), inputs, inputs.b_point[sl], tau, order, entropy_fix)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(sl) for sl in chunks]
    if not parts:
        empty = np.zeros(0)
        none = np.zeros(0, dtype=bool)
        return EvolvedValues(empty, empty, empty, empty, empty, none, none)
    return EvolvedValues.concatenate(parts)
