import click
import logging

from pathlib import Path

from commands.common import emit, overrides_from, run_options
from services.holonomy import SCHEMES

logger = logging.getLogger(__name__)

INPUT = click.Path(exists=True, dir_okay=False, path_type=Path)


def _coefficient_rows(result: dict):
    data = result["data"]
    return ["label", "value"], [[label, value] for label, value in zip(data["labels"], data["value"])]


@click.command()
@click.argument("path_file", type=INPUT)
@run_options
@click.pass_context
def sig(ctx: click.Context, path_file: Path, out, **params):
    """Exact truncated signature of the PL path in PATH_FILE."""
    output_format = "json" if params.get("as_json") else params.get("output_format")
    try:
        result, code = ctx.obj.holonomy_manager.signature(path_file, overrides_from(params))
    except Exception as e:
        logger.error(f"Error computing signature: {str(e)}")
        result, code = {"success": False, "error": "Error computing signature"}, 1

    if result["success"] and output_format in ("csv", "pretty"):
        terms = result["data"]["signature"]["terms"]
        rows = [[entry["word"], f"{entry['num']}/{entry['den']}"] for entry in terms]
        emit(result, output_format, out, ["word", "coefficient"], rows, title=str(path_file))
    else:
        emit(result, output_format, out)
    ctx.exit(code)


@click.command()
@click.argument("surface_file", type=INPUT)
@run_options
@click.option("--scheme", type=click.Choice(SCHEMES), default="midpoint", show_default=True)
@click.pass_context
def hol2(ctx: click.Context, surface_file: Path, out, scheme: str, **params):
    """2-holonomy M(Σ) ∈ G^{-1} of the sampled surface in SURFACE_FILE."""
    output_format = "json" if params.get("as_json") else params.get("output_format")
    try:
        result, code = ctx.obj.holonomy_manager.holonomy(
            surface_file, overrides_from(params), p=2, scheme=scheme
        )
    except Exception as e:
        logger.error(f"Error computing 2-holonomy: {str(e)}")
        result, code = {"success": False, "error": "Error computing 2-holonomy"}, 1

    if result["success"]:
        emit(result, output_format, out, *_coefficient_rows(result), title=str(surface_file))
    else:
        emit(result, output_format, out)
    ctx.exit(code)


@click.command()
@click.argument("brane_file", type=INPUT)
@run_options
@click.option("--p", "p", type=int, required=True, help="Brane dimension, at least 3.")
@click.option("--p-tol", type=float, default=None, help="p-holonomy tolerance.")
@click.option("--scheme", type=click.Choice(SCHEMES), default="gauss", show_default=True)
@click.pass_context
def holp(ctx: click.Context, brane_file: Path, out, p: int, scheme: str, **params):
    """p-holonomy M(Σ) ∈ G^{-p+1} of the sampled brane in BRANE_FILE."""
    output_format = "json" if params.get("as_json") else params.get("output_format")
    try:
        result, code = ctx.obj.holonomy_manager.holonomy(
            brane_file, overrides_from(params), p=p, scheme=scheme
        )
    except Exception as e:
        logger.error(f"Error computing {p}-holonomy: {str(e)}")
        result, code = {"success": False, "error": f"Error computing {p}-holonomy"}, 1

    if result["success"]:
        emit(result, output_format, out, *_coefficient_rows(result), title=str(brane_file))
    else:
        emit(result, output_format, out)
    ctx.exit(code)
