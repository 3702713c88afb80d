import click
import logging

from types import SimpleNamespace

from config import MyConfig
from utils.app_utils import setup_logging
from commands.export_commands import export_cc, import_cc
from commands.holonomy_commands import hol2, holp, sig
from commands.verify_commands import dims, verify
from managers.dims_manager import DimsManager
from managers.export_manager import ExportManager
from managers.verify_manager import VerifyManager
from managers.holonomy_manager import HolonomyManager


def create_app() -> click.Group:
    """Application factory pattern"""

    # Configuration
    app_config = MyConfig()

    # Setup logging
    setup_logging(app_config)
    logger = logging.getLogger(__name__)

    # Initialize managers
    managers = SimpleNamespace(
        config=app_config,
        verify_manager=VerifyManager(app_config),
        dims_manager=DimsManager(app_config),
        holonomy_manager=HolonomyManager(app_config),
        export_manager=ExportManager(app_config),
    )

    @click.group()
    @click.pass_context
    def cli(ctx: click.Context):
        """Free dg-Lie algebras, their crossed-complex quotients and higher holonomy on R^n."""
        # Store managers in the click context
        ctx.obj = managers

    # Register commands
    for command in (verify, dims, sig, hol2, holp, export_cc, import_cc):
        cli.add_command(command)

    logger.info("Holonomy toolkit initialized successfully")
    return cli


app = create_app()

if __name__ == "__main__":
    app()
