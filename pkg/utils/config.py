# config.py
import logging
import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

INTERVAL_DEPTH = int(os.getenv("TROPK_INTERVAL_DEPTH", "64"))
LOG_LEVEL = os.getenv("TROPK_LOG_LEVEL", "WARNING")
DEFAULT_SEED = int(os.getenv("TROPK_SEED", "0"))


def get_interval_depth() -> int:
    """Maximum number of enclosure bisections before a sign is declared indeterminate."""
    return int(os.getenv("TROPK_INTERVAL_DEPTH", str(INTERVAL_DEPTH)))


def configure_logging(level: str = None):
    logging.basicConfig(
        level=(level or os.getenv("TROPK_LOG_LEVEL", LOG_LEVEL)).upper(),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
