# core/context.py

from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError

from core.errors import ConfigError
from core.log import log
from core.mesh import CartesianGrid, build_grid
from models import Profile, RunConfig, SolverProfile
from modules.scenarios import Scenario, load_scenario

DEFAULT_PROFILE = "config/profiles.yaml"


def load_profile(path: Optional[str] = None) -> Profile:
    """Read the YAML profile; a missing default file yields built-in defaults."""
    file = Path(path or DEFAULT_PROFILE)
    if not file.exists():
        if path is not None:
            raise ConfigError(f"config file not found: {file}")
        return Profile()
    try:
        with open(file, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ConfigError(f"cannot parse {file}{where}: {getattr(e, 'problem', e)}") from e
    except OSError as e:
        raise ConfigError(f"cannot read {file}: {e}") from e
    try:
        return Profile(**raw)
    except (ValidationError, TypeError) as e:
        raise ConfigError(f"invalid profile {file}: {e}") from e


def build_run_config(scenario: str, profile: Profile, overrides: Dict[str, Any]) -> RunConfig:
    """Merge profile sections and command-line overrides (``None`` means unset)."""
    merged: Dict[str, Any] = {"scenario": scenario}
    # unset solver keys leave room for the scenario defaults (order)
    merged.update(profile.solver.model_dump(exclude_unset=True))
    merged.update(
        output_dir=profile.output.directory,
        formats=profile.output.formats,
        snapshot_digits=profile.output.snapshot_digits,
    )
    section = profile.scenarios.get(scenario)
    if section is not None:
        options = dict(section.options)
        merged.update({k: v for k, v in section.model_dump(exclude={"options"}).items() if v is not None})
        merged["options"] = options
    cli = {k: v for k, v in overrides.items() if v is not None}
    if "options" in cli:
        cli["options"] = {**merged.get("options", {}), **cli["options"]}
    merged.update(cli)
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration: {e}") from e


class RunContext:
    """Resolved scenario, grid and solver parameters of one run."""

    def __init__(self, config: RunConfig, scenario: Optional[Scenario] = None):
        self.config = config
        self.scenario = scenario or load_scenario(config.scenario, config.g, config.options)
        self.order = config.order or self.scenario.order or "second"
        self.end_time = config.end_time if config.end_time is not None else self.scenario.end_time
        if config.snapshot_times is not None:
            self.snapshot_times = list(config.snapshot_times)
        else:
            self.snapshot_times = [t for t in self.scenario.snapshot_times if t <= self.end_time]
        if self.snapshot_times and self.snapshot_times[-1] > self.end_time:
            raise ConfigError(
                f"snapshot time {self.snapshot_times[-1]} lies beyond end time {self.end_time}"
            )
        self.grid = self.grid_for(config.nx, config.ny)
        self.solver_profile: SolverProfile = config.solver_profile(self.order)
        log("config", f"{self.scenario.name}: {self.grid.nx}x{self.grid.ny} cells, dx={self.grid.dx:.6g}, "
                      f"order={self.order}, end={self.end_time:.6g}")

    def grid_for(self, nx: Optional[int], ny: Optional[int] = None) -> CartesianGrid:
        """Grid on the scenario extent; a lone ``nx`` scales ``ny`` to keep cells square."""
        s = self.scenario
        if nx is not None and ny is None:
            ny = max(1, round(nx * s.ny / s.nx))
        return build_grid(s.extent, nx or s.nx, ny or s.ny)

    def __repr__(self):
        return f"<RunContext {self.scenario.name} {self.grid.nx}x{self.grid.ny}>"
