from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import yaml

from nsdde.errors import InvalidParameterError
from nsdde.experiment.config import StudyConfig


PRESET_DIR = Path(__file__).resolve().parent


def list_presets() -> List[str]:
    return sorted(p.stem for p in PRESET_DIR.glob("*.yaml"))


@lru_cache(maxsize=16)
def load(name: str) -> Dict[str, Any]:
    """Load nsdde/experiment/presets/<name>.yaml."""
    path = PRESET_DIR / f"{name}.yaml"
    if not path.exists():
        raise InvalidParameterError(f"unknown preset '{name}' (available: {', '.join(list_presets())})")
    return yaml.safe_load(path.read_text(encoding="utf-8")) or {}


def preset_config(name: str, overrides: Optional[Mapping[str, Any]] = None) -> StudyConfig:
    """Build a StudyConfig from a preset; explicit overrides win over preset fields."""
    fields = dict(load(name).get("study") or {})
    fields.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return StudyConfig(**fields)
