from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Any, Dict, List, Literal, Optional, Tuple

# --- Profile (config/profiles.yaml) ---

class SolverProfile(BaseModel):
    mu: float = Field(default=0.5, gt=0.0, lt=1.0)
    eps_h: float = Field(default=1e-8, gt=0.0)
    entropy_fix: bool = True
    order: Literal["first", "second"] = "second"
    dt_min: float = Field(default=1e-12, gt=0.0)
    dt_fallback: float = Field(default=0.01, gt=0.0)
    workers: int = Field(default=1, ge=1)
    chunk_size: int = Field(default=40000, ge=1)


class OutputProfile(BaseModel):
    directory: str = "output"
    formats: List[Literal["txt", "npz"]] = ["txt"]
    snapshot_digits: int = Field(default=17, ge=1, le=17)


class ScenarioOverride(BaseModel):
    nx: Optional[int] = Field(default=None, ge=1)
    ny: Optional[int] = Field(default=None, ge=1)
    g: Optional[float] = Field(default=None, gt=0.0)
    end_time: Optional[float] = Field(default=None, ge=0.0)
    snapshot_times: Optional[List[float]] = None
    order: Optional[Literal["first", "second"]] = None
    options: Dict[str, Any] = {}


class Profile(BaseModel):
    solver: SolverProfile = SolverProfile()
    output: OutputProfile = OutputProfile()
    scenarios: Dict[str, ScenarioOverride] = {}


# --- Run configuration ---

class RunConfig(BaseModel):
    scenario: str
    nx: Optional[int] = Field(default=None, ge=1)
    ny: Optional[int] = Field(default=None, ge=1)
    g: Optional[float] = Field(default=None, gt=0.0)
    mu: float = Field(default=0.5, gt=0.0, lt=1.0)
    end_time: Optional[float] = Field(default=None, ge=0.0)
    snapshot_times: Optional[List[float]] = None
    output_dir: str = "output"
    formats: List[Literal["txt", "npz"]] = ["txt"]
    snapshot_digits: int = 17
    eps_h: float = Field(default=1e-8, gt=0.0)
    entropy_fix: bool = True
    order: Optional[Literal["first", "second"]] = None
    grids: List[int] = []
    periods: float = Field(default=1.0, gt=0.0)
    options: Dict[str, Any] = {}
    dt_min: float = 1e-12
    dt_fallback: float = 0.01
    workers: int = Field(default=1, ge=1)
    chunk_size: int = Field(default=40000, ge=1)

    @field_validator("snapshot_times")
    @classmethod
    def snapshots_sorted(cls, v):
        if v is not None:
            if any(t < 0.0 for t in v):
                raise ValueError("snapshot times must be non-negative")
            if list(v) != sorted(v):
                raise ValueError("snapshot times must be sorted")
        return v

    @model_validator(mode="after")
    def snapshots_before_end(self):
        if self.end_time is not None and self.snapshot_times:
            if self.snapshot_times[-1] > self.end_time:
                raise ValueError(
                    f"snapshot time {self.snapshot_times[-1]} lies beyond end time {self.end_time}"
                )
        return self

    def solver_profile(self, order: str) -> SolverProfile:
        return SolverProfile(
            mu=self.mu, eps_h=self.eps_h, entropy_fix=self.entropy_fix, order=order,
            dt_min=self.dt_min, dt_fallback=self.dt_fallback,
            workers=self.workers, chunk_size=self.chunk_size,
        )


# --- Reports ---

class NormTriple(BaseModel):
    linf: float
    l1: float
    l2: float


class ErrorReport(BaseModel):
    nx: int
    dx: float
    linf: float
    l1: float
    l2: float
    eoc_linf: Optional[float] = None
    eoc_l1: Optional[float] = None
    eoc_l2: Optional[float] = None


class RunManifest(BaseModel):
    scenario: str
    config: RunConfig
    g: float
    nx: int
    ny: int
    dx: float
    order: str
    end_time: float
    started_at: str
    wall_time: float
    steps: int
    min_h: float
    merged_cone_evaluations: int = 0
    mass_history: List[Tuple[float, float]] = []
    snapshots: List[str] = []
    gages: List[str] = []
    errors: Optional[ErrorReport] = None
    velocity_errors: Dict[str, NormTriple] = {}
    steady_errors: Dict[str, NormTriple] = {}
