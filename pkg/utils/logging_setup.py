import logging
from typing import Optional

from utils.env import get_env


LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """Install the project log format on the root logger.

    Only entry points call this; library modules just use named loggers.
    """
    level_name = (level or get_env("NSDDE_LOG_LEVEL", "INFO") or "INFO").upper()
    numeric = getattr(logging, level_name, None)
    if not isinstance(numeric, int):
        raise RuntimeError(f"Unknown log level '{level_name}'")
    logging.basicConfig(level=numeric, format=LOG_FORMAT)
    logging.getLogger().setLevel(numeric)
