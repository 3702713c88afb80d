import io
import csv
import click
import logging

from pathlib import Path
from rich.table import Table
from rich.console import Console
from typing import Callable, List, Optional, Sequence

from utils.app_utils import dump_json

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "pretty")


def run_options(function: Callable) -> Callable:
    """The RunConfig flags shared by every command; unset flags fall back to MyConfig."""
    options = [
        click.option("--n", "n", type=int, default=None, help="Dimension of R^n."),
        click.option("--max-letters", type=int, default=None, help="Letter truncation L."),
        click.option("--degree", type=int, default=None, help="Truncation / nilpotency class d."),
        click.option("--tol", type=float, default=None, help="2-holonomy tolerance."),
        click.option("--seed", type=int, default=None, help="Seed for randomized checks."),
        click.option("--format", "output_format", type=click.Choice(FORMATS), default=None),
        click.option("--json", "as_json", is_flag=True, help="Shorthand for --format json."),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def overrides_from(params: dict) -> dict:
    """RunConfig overrides from the click parameters of a command."""
    params = dict(params)
    params.pop("out", None)
    if params.pop("as_json", False):
        params["output_format"] = "json"
    return params


def _render_table(columns: Sequence[str], rows: List[List], title: Optional[str]) -> str:
    table = Table(title=title)
    for column in columns:
        table.add_column(column)
    for row in rows:
        table.add_row(*("" if value is None else str(value) for value in row))
    buffer = io.StringIO()
    Console(file=buffer, width=160).print(table)
    return buffer.getvalue()


def _render_csv(columns: Sequence[str], rows: List[List]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def emit(
    result: dict,
    output_format: Optional[str],
    out: Optional[Path] = None,
    columns: Optional[Sequence[str]] = None,
    rows: Optional[List[List]] = None,
    title: Optional[str] = None,
):
    """Write a manager result as JSON, CSV or a rich table, to ``out`` or stdout.

    CSV and pretty output need a table; results without one are written as JSON.
    """
    output_format = output_format or "json"
    if output_format != "json" and columns is None:
        if "data" in result:
            logger.warning(f"No table for --format {output_format}; writing JSON")
        output_format = "json"

    if output_format == "csv":
        text = _render_csv(columns, rows)
    elif output_format == "pretty":
        text = _render_table(columns, rows, title)
    else:
        text = dump_json(result).decode() + "\n"

    if out is not None:
        out.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {output_format} output to {out}")
    else:
        click.echo(text, nl=False)
