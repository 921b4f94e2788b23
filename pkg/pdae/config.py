from pydantic import BaseSettings


class Settings(BaseSettings):
    """
    Defaults for the CLI. Every value can be overridden with a PDAE_ env var,
    e.g. PDAE_RANK_TOL=1e-10.
    """
    rank_tol: float = 1e-8
    cluster_tol: float = 1e-6
    pivot_tol: float = 1e-12
    corner_tol: float = 1e-9
    tolerance_factor: float = 3.0
    samples: int = 25
    workers: int = 1
    log_level: str = "WARNING"

    class Config:
        env_prefix = "PDAE_"


# lazy-load settings on first use
_SETTINGS = None


def get_settings() -> Settings:
    global _SETTINGS
    if _SETTINGS is None:
        _SETTINGS = Settings()
    return _SETTINGS
