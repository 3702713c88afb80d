import logging
import orjson

from pathlib import Path
from typing import Union

from config import MyConfig, RunConfig
from services.quotients import NilpotentCrossedComplex, extract_structure_constants
from utils.app_utils import read_json
from utils.exceptions import AxiomViolation, ConfigurationError

logger = logging.getLogger(__name__)


class ExportManager:
    """Structure-constant export of 𝔤•_{n,d} and validated re-import."""

    def __init__(self, config: MyConfig):
        """Initialize the ExportManager.

        Args:
            config: Application configuration object
        """
        self.config = config

    def export_cc(self, overrides: dict) -> tuple:
        """Extract and validate the structure constants of 𝔤•_{n,d}.

        Args:
            overrides: RunConfig fields; ``n`` and ``degree`` select the complex

        Returns:
            tuple: (result dict, exit code)
                  On success: {"success": True, "data": NilpotentCrossedComplex JSON}, 0
                  On failed axioms: {"success": False, "error": str}, 1
                  On bad config: {"success": False, "error": str}, 2
        """
        try:
            run = RunConfig.build(**overrides)
            complex_ = extract_structure_constants(run.n, run.degree)
        except AxiomViolation as e:
            logger.error(f"Error validating extracted structure constants: {str(e)}")
            return {"success": False, "error": str(e)}, 1
        except ConfigurationError as e:
            logger.error(f"Error exporting crossed complex: {str(e)}")
            return {"success": False, "error": str(e)}, 2

        logger.info(f"Exported {complex_!r}")
        return {"success": True, "data": complex_.to_dict()}, 0

    def import_cc(self, cc_file: Union[str, Path]) -> tuple:
        """Re-import an exported complex, checking every crossed-complex axiom.

        Args:
            cc_file: JSON file written by ``export_cc``

        Returns:
            tuple: (result dict, exit code)
                  On success: {"success": True, "data": {"n", "class", "dims", "roundTrip"}}, 0
                  On failed axioms: {"success": False, "error": str}, 1
                  On unreadable input: {"success": False, "error": str}, 2
        """
        try:
            payload = read_json(cc_file)
            complex_ = NilpotentCrossedComplex.from_dict(payload)
        except AxiomViolation as e:
            logger.error(f"Error validating imported crossed complex: {str(e)}")
            return {"success": False, "error": str(e)}, 1
        except (OSError, orjson.JSONDecodeError, ConfigurationError) as e:
            logger.error(f"Error importing crossed complex: {str(e)}")
            return {"success": False, "error": str(e)}, 2

        data = {
            "n": complex_.n,
            "class": complex_.nilpotency_class,
            "dims": complex_.dims,
            "roundTrip": complex_.to_dict() == payload,
        }
        return {"success": True, "data": data}, 0
