#   _                   _
#  | |_ _ __ ___  _ __ | | __
#  | __| '__/ _ \| '_ \| |/ /
#  | |_| | | (_) | |_) |   <
#   \__|_|  \___/| .__/|_|\_\
#                |_|
#     tropk: tropical K-groups and toric Gersten complexes
#     Version: 0.1.0
# /app.py

from typing import Tuple

import click

from models.base_models import JobSpec
from routers.fan_router import router as fan_router
from routers.gersten_router import router as gersten_router
from routers.ktheory_router import router as ktheory_router
from routers.valuation_router import router as valuation_router
from utils.config import configure_logging
from utils.jobs import run_handler


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--log-level", default=None, help="Overrides TROPK_LOG_LEVEL.")
@click.version_option("0.1.0", prog_name="tropk")
def tropk(log_level):
    """Exact tropical geometry: fans, higher-rank tropicalization, tropical K-theory."""
    configure_logging(log_level)


def include_router(group: click.Group, router: click.Group):
    for name, command in router.commands.items():
        group.add_command(command, name)


include_router(tropk, fan_router)
include_router(tropk, ktheory_router)
include_router(tropk, gersten_router)
include_router(tropk, valuation_router)


def run(job: JobSpec) -> Tuple[dict, int]:
    """Execute a job programmatically: returns the output document and the exit code."""
    return run_handler(job)


if __name__ == "__main__":
    tropk()
