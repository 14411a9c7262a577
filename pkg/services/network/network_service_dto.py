from typing import List, Optional

from pydantic import BaseModel, Field, field_validator


class NetworkRequest(BaseModel):
    text: str = Field(..., min_length=1, description="Reaction network in .crn format")


class ConservedRequest(NetworkRequest):
    q_target: Optional[int] = Field(None, ge=0, description="Number of conservation laws to use")
    nonfree: Optional[List[str]] = Field(None, description="Species to eliminate, overrides the automatic choice")


class EquilibriumRequest(NetworkRequest):
    x0: Optional[List[float]] = Field(None, description="Positive starting point; fixes the stoichiometric class")

    @field_validator("x0")
    @classmethod
    def validate_x0(cls, x0: Optional[List[float]]) -> Optional[List[float]]:
        if x0 is not None and any(v <= 0 for v in x0):
            raise ValueError("x0 must be strictly positive")
        return x0


class StructureRead(BaseModel):
    name: Optional[str] = None
    species: List[str]
    complexes: List[str]
    n_species: int
    n_reactions: int
    n_complexes: int
    linkage_classes: int
    weakly_reversible: bool
    rank: int
    deficiency: int
    equilibrium: Optional[List[float]] = None
    complex_balance_residual: Optional[float] = None
    complex_balanced: Optional[bool] = None


class ConservedRead(BaseModel):
    species: List[str]
    q: int
    conserved_matrix: List[List[float]] = Field(..., description="One row per species, one column per law")
    permutation: List[str]
    free: List[str]
    nonfree: List[str]
    C_l: List[List[float]]
    C_r: List[List[float]]
    kernel_residual: float
    elimination_norm: float
    neighbourhood_constant: float


class EquilibriumRead(BaseModel):
    species: List[str]
    equilibrium: List[float]
    residual: float
    totals: List[float]
