"""Profile loading, override precedence and the time loop."""

import numpy as np
import pytest

from conftest import make_context
from core.context import build_run_config, load_profile
from core.errors import ConfigError, StagnationError
from core.loop import SimulationLoop
from models import Profile, RunConfig


def test_missing_default_profile_gives_defaults(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    profile = load_profile()
    assert profile.solver.mu == 0.5
    assert profile.output.formats == ["txt"]


def test_profile_type_errors(tmp_path):
    path = tmp_path / "p.yaml"
    path.write_text("solver:\n  mu: fast\n")
    with pytest.raises(ConfigError, match="invalid profile"):
        load_profile(str(path))


def test_yaml_errors_carry_the_position(tmp_path):
    path = tmp_path / "p.yaml"
    path.write_text("solver:\n  mu: [0.5\n")
    with pytest.raises(ConfigError, match="line"):
        load_profile(str(path))


def test_override_precedence(tmp_path):
    path = tmp_path / "p.yaml"
    path.write_text(
        "solver:\n  mu: 0.4\n  order: second\n"
        "scenarios:\n  circular-dam-break:\n    nx: 40\n    options: {boundary: wall, radius: 30}\n"
    )
    profile = load_profile(str(path))
    config = build_run_config("circular-dam-break", profile,
                              {"mu": None, "nx": 20, "options": {"radius": 25}})
    assert config.mu == 0.4
    assert config.nx == 20
    assert config.options == {"boundary": "wall", "radius": 25}


def test_invalid_override_is_a_config_error():
    with pytest.raises(ConfigError):
        build_run_config("dam-break-1d", Profile(), {"mu": 0.0})


def test_lone_nx_keeps_square_cells():
    ctx = make_context("conical-island", nx=50)
    assert (ctx.grid.nx, ctx.grid.ny) == (50, 60)
    assert ctx.grid.dx == 0.5


def test_order_falls_back_to_the_scenario():
    assert make_context("dam-break-1d").order == "first"
    assert make_context("dam-break-1d", order="second").order == "second"
    assert make_context("thacker-planar", nx=10).order == "second"


def test_snapshot_beyond_end_time_is_rejected():
    with pytest.raises(ConfigError):
        make_context("dam-break-1d", snapshot_times=[0.5, 2.0])


def test_loop_lands_on_snapshot_and_end_times(tmp_path):
    ctx = make_context("dam-break-1d", end_time=0.1, snapshot_times=[0.0, 0.037, 0.1],
                       options={"nx": 20}, output_dir=str(tmp_path))
    result = SimulationLoop(ctx).run()
    times = [t for t, _ in result.manifest.mass_history]
    assert 0.037 in times and times[-1] == 0.1
    assert np.all(np.diff(times) > 0.0)
    assert len(result.manifest.snapshots) == 3
    assert result.state.t == 0.1


def test_loop_records_gages_relative_to_still_level(tmp_path):
    ctx = make_context("conical-island", nx=25, end_time=0.3, snapshot_times=[],
                       options={"wave": False}, output_dir=str(tmp_path))
    result = SimulationLoop(ctx).run()
    assert len(result.manifest.gages) == 5
    data = np.loadtxt(result.manifest.gages[0])
    assert data.shape[1] == 2
    assert np.allclose(data[:, 1], 0.0, atol=1e-12)


def test_stagnating_time_step_raises():
    ctx = make_context("dam-break-1d", end_time=0.1, dt_min=1.0)
    with pytest.raises(StagnationError):
        SimulationLoop(ctx, write=False).run()


def test_zero_end_time_takes_no_step():
    ctx = make_context("dam-break-1d", end_time=0.0)
    result = SimulationLoop(ctx, write=False).run()
    assert result.manifest.steps == 0
    assert result.manifest.errors.linf == pytest.approx(0.0, abs=1e-12)


def test_run_config_rejects_unsorted_snapshots():
    with pytest.raises(ValueError):
        RunConfig(scenario="dam-break-1d", snapshot_times=[0.5, 0.1])
