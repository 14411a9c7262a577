# settings.py
from typing import List, Optional
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="CRN_",
        extra="ignore",
    )

    # Reproducibility of randomized checks (CRN_SEED)
    seed: int = 0

    # Reconstruction search
    epsilon: float = 1e-3
    radius: int = 1
    q_target: Optional[int] = None

    # Integration
    dt: float = 1e-3
    t_end: float = 10.0
    adaptive_rtol: float = 1e-8

    # Numerical thresholds
    rank_tol: float = 1e-9
    prune_tol: float = 1e-9
    residual_tol: float = 1e-8

    # Files
    network_dir: str = "networks"
    output_dir: str = "out"

    log_level: str = "INFO"

    environment: str = "development"
    allowed_origins: Optional[List[str]] = None


settings = Settings()
