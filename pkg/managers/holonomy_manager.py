import logging
import orjson

from pathlib import Path
from typing import Optional, Union

from config import MyConfig, RunConfig
from services import tensor_core
from services.branes import PLPath, SampledBrane
from services.holonomy import SCHEMES, HolonomyEngine, log_signature
from utils.app_utils import read_json
from utils.exceptions import AlgebraError, ConfigurationError

logger = logging.getLogger(__name__)


class HolonomyManager:
    """Signature and holonomy evaluation on paths and branes read from JSON files.

    Engines are cached per (n, d) so repeated calls in one process reuse the
    structure constants.
    """

    def __init__(self, config: MyConfig):
        """Initialize the HolonomyManager.

        Args:
            config: Application configuration object
        """
        self.config = config
        self._engines = {}

    def _engine(self, n: int, degree: int) -> HolonomyEngine:
        key = (n, degree)
        if key not in self._engines:
            self._engines[key] = HolonomyEngine.build(n, degree)
        return self._engines[key]

    @staticmethod
    def _load(path: Union[str, Path]) -> dict:
        try:
            return read_json(path)
        except (OSError, orjson.JSONDecodeError) as e:
            raise ConfigurationError(f"Cannot read {path}: {str(e)}") from e

    @staticmethod
    def _run_config(n: int, overrides: dict) -> RunConfig:
        requested: Optional[int] = overrides.get("n")
        if requested is not None and requested != n:
            raise ConfigurationError(f"--n {requested} does not match the input, which lives in R^{n}")
        return RunConfig.build(**{**overrides, "n": n})

    def signature(self, path_file: Union[str, Path], overrides: dict) -> tuple:
        """Exact signature of the PL path stored in ``path_file``.

        Args:
            path_file: JSON file {"n": int, "points": [[...], ...]}
            overrides: RunConfig fields; ``degree`` is the truncation

        Returns:
            tuple: (result dict, exit code)
                  On success: {"success": True, "data": {"signature", "logSignature", "logCoords",
                  "logLabels", "groupLike"}}, 0
                  On error: {"success": False, "error": str}, 2
        """
        try:
            path = PLPath.from_dict(self._load(path_file))
            run = self._run_config(path.n, overrides)
            engine = self._engine(path.n, run.degree)
            signature, coords = engine.path_signature(path)
            group_like, residual = tensor_core.is_group_like(signature)
        except AlgebraError as e:
            logger.error(f"Error computing signature: {str(e)}")
            return {"success": False, "error": str(e)}, 2

        logger.info(f"Signature of {path!r} at depth {run.degree}")
        data = {
            "signature": signature.to_dict(),
            "logSignature": log_signature(signature).to_dict(),
            "logCoords": coords.to_dict(),
            "logLabels": list(engine.cc.labels[0]),
            "groupLike": group_like,
            "groupLikeResidual": float(residual),
        }
        return {"success": True, "data": data}, 0

    def holonomy(
        self, brane_file: Union[str, Path], overrides: dict, p: int = 2, scheme: str = "midpoint"
    ) -> tuple:
        """2-holonomy (p = 2) or p-holonomy (p ≥ 3) of the brane stored in ``brane_file``.

        Args:
            brane_file: surface JSON {"n", "p": 2, "grid"} or brane JSON {"n", "p", "shape", "points"}
            overrides: RunConfig fields; ``degree`` is the nilpotency class
            p: expected brane dimension
            scheme: strip quadrature for 2-holonomy, one of SCHEMES

        Returns:
            tuple: (result dict, exit code)
                  On success: {"success": True, "data": HolonomyResult JSON}, 0
                  On error: {"success": False, "error": str}, 2
        """
        try:
            if scheme not in SCHEMES:
                raise ConfigurationError(f"Unknown scheme {scheme}; expected one of {SCHEMES}")
            payload = self._load(brane_file)
            run = self._run_config(int(payload.get("n", 0)), overrides)
            brane = SampledBrane.from_dict(payload, globe_tol=run.globe_tol)
            if brane.p != p:
                raise ConfigurationError(f"Expected a {p}-brane, got p={brane.p}")
            engine = self._engine(brane.n, run.degree)
            if p == 2:
                result = engine.holonomy2(brane, scheme=scheme)
                tolerance = run.tol
            else:
                result = engine.holonomy_p(brane, face_scheme=scheme)
                tolerance = run.p_tol
        except (AlgebraError, TypeError, ValueError) as e:
            logger.error(f"Error computing {p}-holonomy: {str(e)}")
            return {"success": False, "error": str(e)}, 2

        residual = result.diagnostics["boundaryResidual"]
        result.diagnostics["withinTolerance"] = residual <= tolerance
        if residual > tolerance:
            logger.warning(f"Boundary residual {residual:.3e} exceeds {tolerance:.1e}; refine the grid")
        logger.info(f"{p}-holonomy on {brane!r}")
        return {"success": True, "data": result.to_dict()}, 0
