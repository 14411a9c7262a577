from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

SimulationTarget = Literal["original", "reverse", "both"]


class SimulationRequest(BaseModel):
    text: str = Field(..., min_length=1, description="Reaction network in .crn format")
    x0: Optional[List[float]] = Field(None, description="Initial state; defaults to the file's @x0")
    t_end: Optional[float] = Field(None, gt=0)
    dt: Optional[float] = Field(None, gt=0)
    adaptive: bool = False
    target: SimulationTarget = "original"
    epsilon: Optional[float] = Field(None, gt=0, lt=1)
    radius: Optional[int] = Field(None, ge=1)
    q_target: Optional[int] = Field(None, ge=0)

    @field_validator("x0")
    @classmethod
    def validate_x0(cls, x0: Optional[List[float]]) -> Optional[List[float]]:
        if x0 is not None and any(v < 0 for v in x0):
            raise ValueError("x0 must be nonnegative")
        return x0


class TrajectoryRead(BaseModel):
    label: str
    species: List[str]
    times: List[float]
    states: List[List[float]]
    lyapunov: Optional[List[Optional[float]]] = None
    conservation_residual: List[float]
    aborted: bool = False


class DescentRead(BaseModel):
    max_increase: float
    max_derivative: float
    terminal_distance: float
    passes: bool


class SimulationRead(BaseModel):
    name: Optional[str] = None
    equilibrium: List[float]
    basin_hint: bool = Field(..., description="G(x0) < sum(x*) for the classic pseudo-Helmholtz function")
    trajectories: List[TrajectoryRead]
    descent: Optional[DescentRead] = None
    class_equilibrium: Optional[List[float]] = None
    equivalence_gap: Optional[float] = Field(None, description="Sup-norm gap between the projected original and the reverse reconstruction")
