"""
Runtime configuration for tamemod.

Every limit is read from the environment (optionally via a ``.env`` file) with a
safe default, so nothing has to be set for the library or the CLI to work.
"""

import logging
import os
from pathlib import Path

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = PROJECT_ROOT / "data"

DEFAULT_TRUNCATION = int(os.getenv("TAMEMOD_TRUNCATION", "4"))
DEFAULT_PMAX = int(os.getenv("TAMEMOD_PMAX", "2"))

# Resource guards
MAX_CHAINS = int(os.getenv("TAMEMOD_MAX_CHAINS", "250000"))
DENSE_LIMIT = int(os.getenv("TAMEMOD_DENSE_LIMIT", "4000000"))
GROUP_HOMOLOGY_MAX_N = 4
GROUP_HOMOLOGY_MAX_P = 4

STEMS_FILE = os.getenv("TAMEMOD_STEMS_FILE", str(DATA_DIR / "stems.json"))
LOG_LEVEL = os.getenv("TAMEMOD_LOG_LEVEL", "WARNING")

_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = None) -> None:
    """Install a single stderr handler on the root logger.

    Args:
        level: logging level name; defaults to TAMEMOD_LOG_LEVEL.
    """
    name = (level or LOG_LEVEL).upper()
    numeric = getattr(logging, name, logging.WARNING)
    root = logging.getLogger()
    if not any(getattr(h, "_tamemod", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        handler._tamemod = True
        root.addHandler(handler)
    root.setLevel(numeric)
