# modules/scenarios.py

"""Benchmark problems, their analytic solutions and the error/EOC bookkeeping.

Every builder returns a :class:`Scenario`; builders take the gravity and
their own keyword options (``--option key=value`` on the command line).
Pointwise fields are functions of ``(x, y)`` arrays; exact solutions are
functions of ``(x, y, t)`` returning ``(h, v1, v2)``.
"""

import inspect
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from core.errors import ScenarioError
from core.log import log
from core.mesh import CartesianGrid
from core.state import (Bathymetry, ConservedState, PrimitiveState, build_bathymetry,
                        cell_average_init)
from models import ErrorReport, NormTriple
from modules.boundary import BoundaryConditions, BoundarySpec, fill_bottom_ghosts

Field2D = Callable[[np.ndarray, np.ndarray], np.ndarray]
VelocityField = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]
ExactSolution = Callable[[np.ndarray, np.ndarray, float], Tuple[np.ndarray, np.ndarray, np.ndarray]]


def _zero_velocity(x, y):
    return np.zeros_like(x), np.zeros_like(x)


@dataclass
class Scenario:
    name: str
    description: str
    extent: Tuple[float, float, float, float]
    nx: int
    ny: int
    g: float
    end_time: float
    bottom: Field2D
    surface: Field2D
    velocity: VelocityField = _zero_velocity
    boundary: BoundaryConditions = field(default_factory=BoundaryConditions)
    snapshot_times: List[float] = field(default_factory=list)
    exact: Optional[ExactSolution] = None
    gages: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    still_level: float = 0.0
    order: Optional[str] = None
    analytic_bottom_ghosts: bool = False
    # oscillation period of periodic exact solutions
    period: Optional[float] = None
    # the initial state is an equilibrium to compare against
    steady: bool = False


# --- Circular dam break ---

def circular_dam_break(g: float = 9.81, boundary: str = "open", radius: float = 60.0,
                       level: float = 10.0) -> Scenario:
    if boundary not in ("open", "wall"):
        raise ScenarioError(f"circular-dam-break boundary must be 'open' or 'wall', got {boundary!r}")

    def surface(x, y):
        return np.where(np.hypot(x - 50.0, y - 50.0) <= radius, level, 0.0)

    return Scenario(
        name="circular-dam-break",
        description="Break of a circular dam over a dry bed",
        extent=(0.0, 100.0, 0.0, 100.0), nx=100, ny=100, g=g,
        end_time=1.75, snapshot_times=[1.75],
        bottom=lambda x, y: np.zeros_like(x),
        surface=surface,
        boundary=BoundaryConditions.uniform(boundary),
    )


# --- Sloping shore ---

def sloping_shore(g: float = 9.81, depth: float = 1.0, amplitude: float = 0.019) -> Scenario:
    gamma = np.sqrt(3.0 * amplitude / (4.0 * depth))
    x_a = np.sqrt(4.0 * depth / (3.0 * amplitude)) * np.arccosh(np.sqrt(20.0))

    def bottom(x, y):
        return np.where(x < 2.0 * x_a, 0.0, (x - 2.0 * x_a) / 19.85)

    def surface(x, y):
        f = depth + amplitude / np.cosh(gamma * (x - x_a)) ** 2
        return np.maximum(f, bottom(x, y))

    def velocity(x, y):
        wet = surface(x, y) > bottom(x, y)
        v1 = np.where(wet, np.sqrt(g / depth) * (surface(x, y) - depth), 0.0)
        return v1, np.zeros_like(x)

    return Scenario(
        name="sloping-shore",
        description="Run-up and reflection of a solitary wave on a plane beach",
        extent=(0.0, 80.0, 0.0, 2.0), nx=2000, ny=50, g=g,
        end_time=80.0, snapshot_times=[9.0, 17.0, 23.0, 28.0, 80.0],
        bottom=bottom, surface=surface, velocity=velocity,
        boundary=BoundaryConditions(
            west=BoundarySpec("open"), east=BoundarySpec("open"),
            south=BoundarySpec("periodic"), north=BoundarySpec("periodic"),
        ),
        still_level=depth,
    )


# --- Double rarefaction over a step ---

def double_rarefaction(g: float = 9.81, level: float = 10.0, discharge: float = 350.0) -> Scenario:
    split = 50.0 / 3.0

    def bottom(x, y):
        return np.where((x > 25.0 / 3.0) & (x < 12.5), 1.0, 0.0)

    def velocity(x, y):
        h = level - bottom(x, y)
        return np.where(x > split, discharge, -discharge) / h, np.zeros_like(x)

    return Scenario(
        name="double-rarefaction",
        description="Two separating waves drying a step",
        extent=(0.0, 25.0, 0.0, 0.5), nx=300, ny=6, g=g,
        end_time=0.65, snapshot_times=[0.05, 0.25, 0.45, 0.65],
        bottom=bottom,
        surface=lambda x, y: np.full_like(x, level),
        velocity=velocity,
        boundary=BoundaryConditions(
            west=BoundarySpec("open"), east=BoundarySpec("open"),
            south=BoundarySpec("periodic"), north=BoundarySpec("periodic"),
        ),
    )


# --- Thacker's parabolic basin ---

THACKER_A = 1.0
THACKER_H0 = 0.1


def _thacker_bottom(x, y, a: float = THACKER_A, H0: float = THACKER_H0):
    return -H0 * (1.0 - (x * x + y * y) / (a * a))


def thacker_exact_curved(x, y, t, g: float = 10.0, a: float = THACKER_A, H0: float = THACKER_H0,
                         r0: float = 0.8):
    """Curved oscillation: depth, radial velocity; zero velocity on dry points.

    The ``r2`` term carries Thacker's original sign, ``-r2 * (... - 1)``. The
    flipped sign seen in some reprints does not solve the equations.
    """
    omega = np.sqrt(8.0 * g * H0 / (a * a))
    A = (a * a - r0 * r0) / (a * a + r0 * r0)
    denom = 1.0 - A * np.cos(omega * t)
    r2 = (x * x + y * y) / (a * a)
    f = H0 * (np.sqrt(1.0 - A * A) / denom - 1.0 - r2 * ((1.0 - A * A) / denom ** 2 - 1.0))
    h = np.maximum(f - _thacker_bottom(x, y, a, H0), 0.0)
    rate = np.where(h > 0.0, omega * A * np.sin(omega * t) / (2.0 * denom), 0.0)
    return h, rate * x, rate * y


def thacker_exact_planar(x, y, t, g: float = 10.0, a: float = THACKER_A, H0: float = THACKER_H0,
                         eta: float = 0.5):
    """Planar surface rotating around the basin center."""
    omega = np.sqrt(2.0 * g * H0 / (a * a))
    f = (eta * H0 / (a * a)) * (-eta + 2.0 * (x * np.cos(omega * t) + y * np.sin(omega * t)))
    h = np.maximum(f - _thacker_bottom(x, y, a, H0), 0.0)
    wet = h > 0.0
    v1 = np.where(wet, -eta * omega * np.sin(omega * t), 0.0)
    v2 = np.where(wet, eta * omega * np.cos(omega * t), 0.0)
    return h, v1, v2


def _thacker(name: str, description: str, exact: ExactSolution, omega: float, g: float) -> Scenario:
    period = 2.0 * np.pi / omega

    def surface(x, y):
        return exact(x, y, 0.0)[0] + _thacker_bottom(x, y)

    def velocity(x, y):
        _, v1, v2 = exact(x, y, 0.0)
        return v1, v2

    return Scenario(
        name=name, description=description,
        extent=(-2.0, 2.0, -2.0, 2.0), nx=50, ny=50, g=g,
        end_time=period, snapshot_times=[period],
        bottom=_thacker_bottom, surface=surface, velocity=velocity,
        boundary=BoundaryConditions.uniform("open"),
        exact=exact, analytic_bottom_ghosts=True, period=period,
    )


def thacker_curved(g: float = 10.0) -> Scenario:
    return _thacker(
        "thacker-curved", "Curved free surface oscillating in a parabolic basin",
        lambda x, y, t: thacker_exact_curved(x, y, t, g=g),
        np.sqrt(8.0 * g * THACKER_H0 / THACKER_A ** 2), g,
    )


def thacker_planar(g: float = 10.0) -> Scenario:
    return _thacker(
        "thacker-planar", "Planar free surface rotating in a parabolic basin",
        lambda x, y, t: thacker_exact_planar(x, y, t, g=g),
        np.sqrt(2.0 * g * THACKER_H0 / THACKER_A ** 2), g,
    )


# --- Conical island ---

ISLAND_CENTER = (12.5, 15.0)
ISLAND_GAGES = {
    "gage03": (6.36, 14.25),
    "gage06": (8.9, 15.0),
    "gage09": (9.9, 15.0),
    "gage16": (12.5, 12.42),
    "gage22": (15.1, 15.0),
}


def island_bottom(x, y):
    r = np.hypot(x - ISLAND_CENTER[0], y - ISLAND_CENTER[1])
    return np.where(r <= 1.1, 0.625, np.where(r <= 3.6, (3.6 - r) / 4.0, 0.0))


def solitary_inflow(H0: float, g: float, alpha: float = 0.1, length: float = 15.0,
                    delay: float = 3.5) -> Callable[[float], float]:
    xi = np.sqrt(3.0 * alpha * (1.0 + alpha) * length ** 2 / (4.0 * H0 ** 2))
    rate = xi * np.sqrt(g * H0 / length)

    def surface(t: float) -> float:
        return H0 + alpha * H0 / np.cosh(rate * (t - delay)) ** 2

    return surface


def conical_island(g: float = 9.81, wave: bool = True, level: float = 0.32) -> Scenario:
    if wave:
        west = BoundarySpec("inflow", surface=solitary_inflow(level, g), still_level=level)
        end, snapshots = 40.0, [7.9, 9.1, 10.7, 12.1, 40.0]
    else:
        west = BoundarySpec("open")
        end, snapshots = 5.0, [5.0]
    return Scenario(
        name="conical-island",
        description="Solitary wave run-up on a conical island (wave=false: lake at rest)",
        extent=(0.0, 25.0, 0.0, 30.0), nx=125, ny=150, g=g,
        end_time=end, snapshot_times=snapshots,
        bottom=island_bottom,
        surface=lambda x, y: np.full_like(x, level),
        boundary=BoundaryConditions(
            west=west, east=BoundarySpec("open"),
            south=BoundarySpec("open"), north=BoundarySpec("open"),
        ),
        gages=dict(ISLAND_GAGES), still_level=level, steady=not wave,
    )


# --- One-dimensional dam break ---

def ritter_exact(x, t: float, h_l: float = 1.0, h_r: float = 0.0, x_dam: float = 0.0,
                 g: float = 9.81) -> Tuple[np.ndarray, np.ndarray]:
    """Similarity solution of the flat-bottom dam break.

    Dry right state gives the rarefaction reaching the front ``2 c_l``; a wet
    right state adds the shock with the middle state from the
    Rankine-Hugoniot and rarefaction relations.
    """
    x = np.asarray(x, dtype=float)
    if t <= 0.0:
        return np.where(x < x_dam, h_l, h_r), np.zeros_like(x)
    xi = (x - x_dam) / t
    c_l = np.sqrt(g * h_l)
    fan_h = (2.0 * c_l - xi) ** 2 / (9.0 * g)
    fan_v = 2.0 * (c_l + xi) / 3.0

    if h_r <= 0.0:
        h = np.where(xi <= -c_l, h_l, np.where(xi < 2.0 * c_l, fan_h, 0.0))
        v = np.where(xi <= -c_l, 0.0, np.where(xi < 2.0 * c_l, fan_v, 0.0))
        return h, v

    def mismatch(h_m):
        shock_v = (h_m - h_r) * np.sqrt(0.5 * g * (h_m + h_r) / (h_m * h_r))
        return shock_v - 2.0 * (c_l - np.sqrt(g * h_m))

    h_m = brentq(mismatch, h_r, h_l, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    v_m = 2.0 * (c_l - np.sqrt(g * h_m))
    c_m = np.sqrt(g * h_m)
    shock = h_m * v_m / (h_m - h_r)
    h = np.select([xi <= -c_l, xi <= v_m - c_m, xi < shock], [h_l, fan_h, h_m], h_r)
    v = np.select([xi <= -c_l, xi <= v_m - c_m, xi < shock], [0.0, fan_v, v_m], 0.0)
    return h, v


def dam_break_1d(g: float = 9.81, h_l: float = 1.0, h_r: float = 0.1, x_dam: float = 5.0,
                 length: float = 10.0, width: float = 0.3, nx: int = 100,
                 end_time: float = 1.0) -> Scenario:
    if h_l <= 0.0 or h_r < 0.0:
        raise ScenarioError(f"dam-break-1d needs h_l > 0 and h_r >= 0, got h_l={h_l}, h_r={h_r}")
    ny = max(1, int(round(width / (length / nx))))

    def exact(x, y, t):
        h, v = ritter_exact(x, t, h_l, h_r, x_dam, g)
        return h, v, np.zeros_like(h)

    return Scenario(
        name="dam-break-1d",
        description="Pseudo one-dimensional dam break for the first-order operator",
        extent=(0.0, length, 0.0, ny * length / nx), nx=nx, ny=ny, g=g,
        end_time=end_time, snapshot_times=[end_time],
        bottom=lambda x, y: np.zeros_like(x),
        surface=lambda x, y: np.where(x < x_dam, h_l, h_r),
        boundary=BoundaryConditions(
            west=BoundarySpec("open"), east=BoundarySpec("open"),
            south=BoundarySpec("periodic"), north=BoundarySpec("periodic"),
        ),
        exact=exact, order="first",
    )


SCENARIOS: Dict[str, Callable[..., Scenario]] = {
    "circular-dam-break": circular_dam_break,
    "sloping-shore": sloping_shore,
    "double-rarefaction": double_rarefaction,
    "thacker-curved": thacker_curved,
    "thacker-planar": thacker_planar,
    "conical-island": conical_island,
    "dam-break-1d": dam_break_1d,
}


def load_scenario(name: str, g: Optional[float] = None, options: Optional[dict] = None) -> Scenario:
    if name not in SCENARIOS:
        raise ScenarioError(f"unknown scenario {name!r}; valid ids: {', '.join(SCENARIOS)}")
    builder = SCENARIOS[name]
    kwargs = dict(options or {})
    accepted = set(inspect.signature(builder).parameters) - {"g"}
    unknown = sorted(set(kwargs) - accepted)
    if unknown:
        raise ScenarioError(
            f"unknown option(s) {', '.join(unknown)} for {name}; accepted: {', '.join(sorted(accepted)) or 'none'}"
        )
    if g is not None:
        kwargs["g"] = g
    scenario = builder(**kwargs)
    log("scenario", f"{scenario.name}: {scenario.description}")
    return scenario


# --- Initial data ---

def initial_state(scenario: Scenario, grid: CartesianGrid) -> Tuple[ConservedState, Bathymetry]:
    """Cell averages: ``h = max(<H0> - <b>, 0)``, discharge ``<h v>``, zero in dry cells."""
    b_avg = cell_average_init(scenario.bottom, grid)
    H_avg = cell_average_init(scenario.surface, grid)
    h = np.maximum(H_avg - b_avg, 0.0)

    def depth(x, y):
        return np.maximum(scenario.surface(x, y) - scenario.bottom(x, y), 0.0)

    def discharge(component):
        return lambda x, y: depth(x, y) * scenario.velocity(x, y)[component]

    wet = h > 0.0
    hv1 = np.where(wet, cell_average_init(discharge(0), grid), 0.0)
    hv2 = np.where(wet, cell_average_init(discharge(1), grid), 0.0)

    b_cell = fill_bottom_ghosts(b_avg, grid, scenario.boundary, scenario.analytic_bottom_ghosts)
    return ConservedState(h=h, hv1=hv1, hv2=hv2, t=0.0), build_bathymetry(grid, b_cell, scenario.g)


# --- Errors ---

def norms(error: np.ndarray, dx: float) -> NormTriple:
    err = np.abs(error)
    return NormTriple(
        linf=float(np.max(err)) if err.size else 0.0,
        l1=float(dx * dx * np.sum(err)),
        l2=float(np.sqrt(dx * dx * np.sum(err * err))),
    )


def error_norms(h: np.ndarray, exact_h: Field2D, grid: CartesianGrid) -> ErrorReport:
    """Norms of ``h`` (interior cells) minus the 3x3 Gauss averages of ``exact_h``."""
    reference = cell_average_init(exact_h, grid, with_ghosts=False)
    triple = norms(h - reference, grid.dx)
    return ErrorReport(nx=grid.nx, dx=grid.dx, **triple.model_dump())


def velocity_error_norms(prim: PrimitiveState, exact: ExactSolution, grid: CartesianGrid,
                         t: float) -> Dict[str, NormTriple]:
    sl = grid.interior
    result = {}
    for k, name in ((1, "v1"), (2, "v2")):
        reference = cell_average_init(lambda x, y, k=k: exact(x, y, t)[k], grid, with_ghosts=False)
        result[name] = norms(getattr(prim, name)[sl] - reference, grid.dx)
    return result


def _order(coarse: float, fine: float, ratio: float) -> Optional[float]:
    if coarse <= 0.0 or fine <= 0.0:
        return None
    return float(np.log(coarse / fine) / np.log(ratio))


def eoc(reports: List[ErrorReport]) -> List[ErrorReport]:
    """Fill the EOC columns of each refinement row from the previous row."""
    rows = sorted(reports, key=lambda r: r.dx, reverse=True)
    out = rows[:1]
    for coarse, fine in zip(rows, rows[1:]):
        ratio = coarse.dx / fine.dx
        out.append(fine.model_copy(update={
            "eoc_linf": _order(coarse.linf, fine.linf, ratio),
            "eoc_l1": _order(coarse.l1, fine.l1, ratio),
            "eoc_l2": _order(coarse.l2, fine.l2, ratio),
        }))
    return out


def steady_state_errors(prim: PrimitiveState, reference: PrimitiveState,
                        grid: CartesianGrid) -> Dict[str, NormTriple]:
    """Deviation of ``H, v1, v2`` from an equilibrium, interior cells only."""
    sl = grid.interior
    return {name: norms(getattr(prim, name)[sl] - getattr(reference, name)[sl], grid.dx)
            for name in ("H", "v1", "v2")}
