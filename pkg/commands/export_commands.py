import click
import logging

from pathlib import Path

from commands.common import emit, overrides_from, run_options

logger = logging.getLogger(__name__)


@click.command("export-cc")
@run_options
@click.pass_context
def export_cc(ctx: click.Context, out, **params):
    """Structure constants of 𝔤•_{n,d} as JSON, validated before writing."""
    try:
        result, code = ctx.obj.export_manager.export_cc(overrides_from(params))
    except Exception as e:
        logger.error(f"Error exporting crossed complex: {str(e)}")
        result, code = {"success": False, "error": "Error exporting crossed complex"}, 1

    # the bare complex, so that import-cc reads the file back
    emit(result["data"] if result["success"] else result, "json", out)
    ctx.exit(code)


@click.command("import-cc")
@click.argument("cc_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
def import_cc(ctx: click.Context, cc_file: Path, out):
    """Re-import an exported complex and check every crossed-complex axiom."""
    try:
        result, code = ctx.obj.export_manager.import_cc(cc_file)
    except Exception as e:
        logger.error(f"Error importing crossed complex: {str(e)}")
        result, code = {"success": False, "error": "Error importing crossed complex"}, 1

    emit(result, "json", out)
    ctx.exit(code)
