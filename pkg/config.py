import os

from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from utils.exceptions import ConfigurationError

load_dotenv(override=True)


class MyConfig:
    """Base configuration class"""

    # Logging Configuration
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    # Algebra Defaults
    HOLONOMY_N = int(os.getenv("HOLONOMY_N", 3))
    HOLONOMY_MAX_LETTERS = int(os.getenv("HOLONOMY_MAX_LETTERS", 4))
    HOLONOMY_DEGREE = int(os.getenv("HOLONOMY_DEGREE", 4))

    # Resource Guards
    MAX_N = int(os.getenv("MAX_N", 6))
    MAX_LETTERS = int(os.getenv("MAX_LETTERS", 8))
    MAX_DEGREE = int(os.getenv("MAX_DEGREE", 6))
    MAX_BASIS_SIZE = int(os.getenv("MAX_BASIS_SIZE", 200000))

    # Numerics Configuration
    HOLONOMY_TOL = float(os.getenv("HOLONOMY_TOL", 1e-5))
    HOLONOMY_P_TOL = float(os.getenv("HOLONOMY_P_TOL", 1e-4))
    SIGNATURE_TOL = float(os.getenv("SIGNATURE_TOL", 1e-8))
    GLOBE_TOL = float(os.getenv("GLOBE_TOL", 1e-9))
    HOLONOMY_GRID = int(os.getenv("HOLONOMY_GRID", 200))

    # Verification Configuration
    VERIFY_SEED = int(os.getenv("VERIFY_SEED", 20240229))
    VERIFY_SAMPLES = int(os.getenv("VERIFY_SAMPLES", 100))
    SHOW_PROGRESS = os.getenv("SHOW_PROGRESS") == "True"


def estimate_basis_size(n: int, max_letters: int) -> int:
    """Number of words with at most max_letters letters over the 2^n - 1 generators."""
    alphabet = 2**n - 1
    return sum(alphabet**length for length in range(1, max_letters + 1))


class RunConfig(BaseModel):
    """Per-invocation settings of the command line surface.

    Resource guards are checked eagerly so that oversized requests fail before any
    slice is enumerated.
    """

    n: int = MyConfig.HOLONOMY_N
    max_letters: int = MyConfig.HOLONOMY_MAX_LETTERS
    degree: int = MyConfig.HOLONOMY_DEGREE
    tol: float = MyConfig.HOLONOMY_TOL
    p_tol: float = MyConfig.HOLONOMY_P_TOL
    signature_tol: float = MyConfig.SIGNATURE_TOL
    globe_tol: float = MyConfig.GLOBE_TOL
    grid: int = MyConfig.HOLONOMY_GRID
    seed: int = MyConfig.VERIFY_SEED
    samples: int = MyConfig.VERIFY_SAMPLES
    output_format: str = "json"
    numeric: bool = False
    show_progress: bool = MyConfig.SHOW_PROGRESS

    @field_validator("n")
    @classmethod
    def _check_n(cls, value: int) -> int:
        if not 1 <= value <= MyConfig.MAX_N:
            raise ConfigurationError(
                f"n must lie in [1, {MyConfig.MAX_N}], got {value}"
            )
        return value

    @field_validator("max_letters")
    @classmethod
    def _check_letters(cls, value: int) -> int:
        if not 1 <= value <= MyConfig.MAX_LETTERS:
            raise ConfigurationError(
                f"max_letters must lie in [1, {MyConfig.MAX_LETTERS}], got {value}"
            )
        return value

    @field_validator("degree")
    @classmethod
    def _check_degree(cls, value: int) -> int:
        if not 1 <= value <= MyConfig.MAX_DEGREE:
            raise ConfigurationError(
                f"degree must lie in [1, {MyConfig.MAX_DEGREE}], got {value}"
            )
        return value

    @field_validator("output_format")
    @classmethod
    def _check_format(cls, value: str) -> str:
        if value not in ("json", "csv", "pretty"):
            raise ConfigurationError(f"Unknown output format: {value}")
        return value

    @model_validator(mode="after")
    def _check_basis_size(self) -> "RunConfig":
        words = estimate_basis_size(self.n, max(self.max_letters, self.degree))
        if words > MyConfig.MAX_BASIS_SIZE:
            raise ConfigurationError(
                f"Requested truncation needs about {words} basis words "
                f"(limit {MyConfig.MAX_BASIS_SIZE}); lower n, --max-letters or --degree"
            )
        return self

    @classmethod
    def build(cls, **overrides) -> "RunConfig":
        """Validate overrides, surfacing failures as ConfigurationError."""
        try:
            return cls(**{k: v for k, v in overrides.items() if v is not None})
        except ValidationError as e:
            messages = "; ".join(str(error["msg"]) for error in e.errors())
            raise ConfigurationError(messages) from e
