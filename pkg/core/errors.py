# core/errors.py

"""Exception hierarchy shared by the solver stages and the command line.

Each family maps to one process exit code in ``simulate.py``.
"""


class FvegError(Exception):
    exit_code = 1


class ConfigError(FvegError):
    """Invalid or unreadable run configuration."""

    exit_code = 2


class GridError(ConfigError):
    """Domain extent and cell counts do not give square cells."""


class ScenarioError(ConfigError):
    """Unknown scenario id, bad scenario option or missing analytic solution."""


class SolverError(FvegError):
    exit_code = 3


class PositivityError(SolverError):
    def __init__(self, cell: tuple[int, int], depth: float, tolerance: float):
        self.cell = cell
        self.depth = depth
        super().__init__(
            f"negative water depth {depth:.3e} in cell (i={cell[0]}, j={cell[1]}) "
            f"below tolerance -{tolerance:.3e}"
        )


class StagnationError(SolverError):
    def __init__(self, dt: float, dt_min: float, t: float):
        super().__init__(f"time step {dt:.3e} fell below dt_min={dt_min:.3e} at t={t:.6g}")


class OutputError(FvegError):
    """Writing or reading a record file failed."""

    exit_code = 4
