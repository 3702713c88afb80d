import logging

from typing import List, Optional

from config import MyConfig, RunConfig
from services import quotients
from services.forms_currents import gamma_closed_dimension, gamma_dimension, schur_dimension
from utils.exceptions import AlgebraError, ConfigurationError

logger = logging.getLogger(__name__)

DIMS_COLUMNS = [
    "i",
    "letters",
    "dim",
    "ker_d",
    "im_d",
    "H",
    "dim_sab",
    "H_sab",
    "dim_ab",
    "gamma",
    "gamma_cl",
    "schur",
]


class DimsManager:
    """Dimension reports pairing each computed slice with its predicted value."""

    def __init__(self, config: MyConfig):
        """Initialize the DimsManager.

        Args:
            config: Application configuration object
        """
        self.config = config

    def dims(self, overrides: dict) -> tuple:
        """Build the bigraded dimension table of 𝔣•, 𝔣•_sab and 𝔣̃•_ab.

        Args:
            overrides: RunConfig fields given on the command line

        Returns:
            tuple: (result dict, exit code)
                  On success: {"success": True, "data": {"columns": [...], "rows": [...]}}, 0
                  On error: {"success": False, "error": str}, 2
        """
        try:
            run = RunConfig.build(**overrides)
            table = quotients.cohomology_table(run.n, run.max_letters)
            rows = [self._with_predictions(run.n, row) for row in table]
        except (ConfigurationError, AlgebraError) as e:
            logger.error(f"Error computing dimension table: {str(e)}")
            return {"success": False, "error": str(e)}, 2

        logger.info(f"Dimension table for n={run.n}, L={run.max_letters}: {len(rows)} slices")
        return {"success": True, "data": {"n": run.n, "columns": DIMS_COLUMNS, "rows": rows}}, 0

    @staticmethod
    def _with_predictions(n: int, row: dict) -> dict:
        i, letters = row["i"], row["letters"]
        gamma: Optional[int] = None
        gamma_cl: Optional[int] = None
        schur: Optional[int] = None
        if letters >= 2 or i < 0:
            # 𝔣̃_ab^{-i} at ℓ letters pairs with Γ_{i+1} at ℓ − 1 derivatives
            gamma = gamma_dimension(1 - i, letters - 1, n)
            gamma_cl = gamma_closed_dimension(1 - i, letters - 1, n)
        if i == 0 and letters >= 2:
            schur = schur_dimension((letters - 1, 1), n)
        return {
            **row,
            "dim_ab": quotients.abelian_dimension(n, i, letters),
            "gamma": gamma,
            "gamma_cl": gamma_cl,
            "schur": schur,
        }


def table_rows(payload: dict) -> List[List]:
    return [[row.get(column) for column in payload["columns"]] for row in payload["rows"]]
