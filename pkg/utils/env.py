import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv


ROOT = Path(__file__).resolve().parents[1]

_env_loaded = False


def load_env() -> None:
    """Load `<project root>/.env` once; variables already set in the process win."""
    global _env_loaded
    if not _env_loaded:
        load_dotenv(dotenv_path=str(ROOT / ".env"))
        _env_loaded = True


def get_env(key: str, default: Optional[str] = None) -> Optional[str]:
    load_env()
    value = os.environ.get(key)
    if value is None or value.strip() == "":
        return default
    return value.strip()


def get_int_env(key: str, default: int) -> int:
    value = get_env(key)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError as e:
        raise RuntimeError(f"Environment variable '{key}' must be an integer, got '{value}'") from e


def worker_count() -> int:
    """Resolve NSDDE_THREADS (0 or unset = one worker per CPU)."""
    requested = get_int_env("NSDDE_THREADS", 0)
    if requested < 0:
        raise RuntimeError(f"NSDDE_THREADS must be >= 0, got {requested}")
    if requested == 0:
        return os.cpu_count() or 1
    return requested


def chunk_paths() -> int:
    """Number of paths simulated together in one vectorised batch."""
    size = get_int_env("NSDDE_CHUNK_PATHS", 250)
    if size < 1:
        raise RuntimeError(f"NSDDE_CHUNK_PATHS must be >= 1, got {size}")
    return size


def default_output_dir() -> Path:
    return Path(get_env("NSDDE_OUTPUT_DIR", "results"))
