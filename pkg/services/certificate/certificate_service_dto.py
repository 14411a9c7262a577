from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class ReactionRead(BaseModel):
    reactant: str = Field(..., description="Reactant complex, e.g. '2 Xhat1' or '0'")
    product: str
    rate: float = Field(..., gt=0)


class ReconstructionRead(BaseModel):
    species: List[str]
    complexes: List[str] = Field(default_factory=list, description="Candidate complexes Z_C")
    kirchhoff: List[List[float]] = Field(default_factory=list, description="Kirchhoff matrix over the candidates")
    reactions: List[ReactionRead]
    d: List[float] = Field(..., description="Diagonal of D1")

    @field_validator("d")
    @classmethod
    def validate_d(cls, d: List[float]) -> List[float]:
        if not d or any(v <= 0 for v in d):
            raise ValueError("D1 entries must be positive")
        return d


class ReverseReconstructionRead(BaseModel):
    text: str = Field(..., description="The reverse reconstruction in .crn format")
    reactions: List[ReactionRead]
    stoichiometry_residual: float


class ResidualsRead(BaseModel):
    dyn_equiv: float
    complex_balance: float
    lower_rows: float
    equilibrium: float
    reverse_field: Optional[float] = None


class MismatchRead(BaseModel):
    species: str
    monomial: str
    expected: float
    actual: float
    difference: float


class FlagsRead(BaseModel):
    detailed_balanced: bool
    concentration_robust: bool
    weakly_reversible: bool


class BoundRead(BaseModel):
    elimination_norm: float = Field(..., description="2-norm of C_r^-T C_l^T")
    constant: float = Field(..., description="sqrt(1 + elimination_norm^2)")


class Certificate(BaseModel):
    """
    Standalone stability certificate. ``verify`` only needs ``network``,
    ``equilibrium``, ``conserved_matrix``, ``nonfree`` and ``reconstruction``;
    everything else is recomputed and compared.
    """
    network: str = Field(..., description="The original network in .crn format")
    name: Optional[str] = None
    equilibrium: List[float]
    conserved_matrix: List[List[float]] = Field(..., description="One row per species, one column per law")
    permutation: List[str] = Field(default_factory=list)
    nonfree: List[str] = Field(default_factory=list)
    D: Optional[List[List[float]]] = None
    reconstruction: Optional[ReconstructionRead] = None
    reverse_reconstruction: Optional[ReverseReconstructionRead] = None
    residuals: Optional[ResidualsRead] = None
    flags: Optional[FlagsRead] = None
    bound: Optional[BoundRead] = None
    objective: Optional[float] = None
    verdict: str = "unverified"
    hint: Optional[str] = None

    @model_validator(mode="after")
    def validate_shapes(self) -> "Certificate":
        n = len(self.equilibrium)
        if len(self.conserved_matrix) != n:
            raise ValueError(f"conserved_matrix needs {n} rows, one per species")
        widths = {len(row) for row in self.conserved_matrix}
        if len(widths) > 1:
            raise ValueError("conserved_matrix rows have different lengths")
        q = widths.pop() if widths else 0
        if len(self.nonfree) != q:
            raise ValueError(f"{q} conservation laws need {q} non-free species")
        if self.reconstruction is not None and len(self.reconstruction.d) != n - q:
            raise ValueError(f"D1 needs {n - q} entries")
        return self


class CertifyRequest(BaseModel):
    text: str = Field(..., min_length=1, description="Reaction network in .crn format")
    epsilon: Optional[float] = Field(None, gt=0, lt=1)
    radius: Optional[int] = Field(None, ge=1)
    q_target: Optional[int] = Field(None, ge=0)
    nonfree: Optional[List[str]] = None
    extra_complexes: List[str] = Field(default_factory=list, description="Additional candidate complexes")


class VerifyRequest(BaseModel):
    certificate: Certificate
    text: Optional[str] = Field(None, description="Network to check against; defaults to the embedded one")


class VerificationRead(BaseModel):
    name: Optional[str] = None
    residuals: ResidualsRead
    mismatches: List[MismatchRead] = Field(default_factory=list)
    D: List[List[float]]
    D_mismatch: Optional[float] = Field(None, description="Largest gap to the certificate's own D")
    kernel_residual: float = Field(..., description="max |S^T C| over the conserved matrix")
    flags: FlagsRead
    verdict: str
