import click
import logging

from commands.common import emit, overrides_from, run_options
from managers.dims_manager import table_rows

logger = logging.getLogger(__name__)

CHECK_COLUMNS = ["suite", "name", "passed", "value", "tolerance"]


@click.command()
@run_options
@click.option("--numeric", is_flag=True, default=None, help="Also run the holonomy suite.")
@click.option("--grid", type=int, default=None, help="Grid size of the 2-holonomy checks.")
@click.option("--samples", type=int, default=None, help="Random samples for the law checks.")
@click.option("--p-tol", type=float, default=None, help="p-holonomy tolerance.")
@click.option("--progress/--no-progress", "show_progress", default=None)
@click.pass_context
def verify(ctx: click.Context, out, **params):
    """Run the exact algebraic suite, plus the numeric suite with --numeric.

    Exit code 0 means every check passed, 1 that some check failed and 2 that the
    configuration was rejected.
    """
    output_format = "json" if params.get("as_json") else params.get("output_format")
    try:
        result, code = ctx.obj.verify_manager.verify(overrides_from(params))
    except Exception as e:
        logger.error(f"Error running verification: {str(e)}")
        result, code = {"success": False, "error": "Error running verification"}, 1

    rows = None
    if "data" in result:
        rows = [[check[column] for column in CHECK_COLUMNS] for check in result["data"]["checks"]]
    emit(result, output_format, out, CHECK_COLUMNS if rows else None, rows, title="verify")
    ctx.exit(code)


@click.command()
@run_options
@click.pass_context
def dims(ctx: click.Context, out, **params):
    """Bigraded dimensions of 𝔣•, 𝔣•_sab and 𝔣̃•_ab next to their Γ and Schur predictions."""
    output_format = "json" if params.get("as_json") else params.get("output_format")
    try:
        result, code = ctx.obj.dims_manager.dims(overrides_from(params))
    except Exception as e:
        logger.error(f"Error computing dimensions: {str(e)}")
        result, code = {"success": False, "error": "Error computing dimensions"}, 1

    if result["success"]:
        data = result["data"]
        emit(result, output_format, out, data["columns"], table_rows(data), title=f"n = {data['n']}")
    else:
        emit(result, output_format, out)
    ctx.exit(code)
