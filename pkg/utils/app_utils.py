import logging
import orjson

from pathlib import Path
from config import MyConfig
from fractions import Fraction
from typing import Any, Union


def setup_logging(config: MyConfig):
    """Setup application logging"""

    # Configure root logger
    logging.basicConfig(
        level=getattr(logging, str(config.LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    logger = logging.getLogger(__name__)
    logger.info("Logging configured successfully")


def format_rational(value: Fraction) -> str:
    """Render an exact rational as "num" or "num/den"."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    return Fraction(text)


def dump_json(payload: Any) -> bytes:
    return orjson.dumps(
        payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY
    )


def write_json(payload: Any, path: Union[str, Path]):
    Path(path).write_bytes(dump_json(payload))


def read_json(path: Union[str, Path]) -> Any:
    return orjson.loads(Path(path).read_bytes())
