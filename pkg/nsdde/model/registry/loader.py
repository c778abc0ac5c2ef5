from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import yaml

from nsdde.errors import InvalidParameterError, UnknownModelError
from nsdde.model.coefficients import AssumptionParams, CoefficientSet
from nsdde.model.examples import (
    local_lipschitz_A,
    local_lipschitz_B,
    local_lipschitz_jump,
    make_example_A,
    make_example_B,
    make_example_jump,
)


_BUILDERS: Dict[str, Tuple[Callable[..., CoefficientSet], Callable[..., Callable[[float], float]]]] = {
    "example-a": (make_example_A, local_lipschitz_A),
    "example-b": (make_example_B, local_lipschitz_B),
    "example-jump": (make_example_jump, local_lipschitz_jump),
}


@dataclass(frozen=True)
class RegisteredModel:
    model_id: str
    description: str
    driver: str
    coefficients: CoefficientSet
    assumptions: AssumptionParams


@lru_cache(maxsize=4)
def load(version: str = "v1") -> Dict[str, Any]:
    """Load the model registry from nsdde/model/registry/<version>.yaml."""
    path = Path(__file__).resolve().parent / f"{version}.yaml"
    if not path.exists():
        raise FileNotFoundError(f"Model registry not found for version '{version}' in {path.parent}")
    return yaml.safe_load(path.read_text(encoding="utf-8")) or {}


def list_models(version: str = "v1") -> List[str]:
    return sorted(load(version).get("models", {}))


def describe_model(model_id: str, version: str = "v1") -> Dict[str, Any]:
    models = load(version).get("models", {})
    if model_id not in models:
        raise UnknownModelError(f"unknown model '{model_id}' (known: {', '.join(sorted(models))})")
    return models[model_id]


def _resolve_params(model_id: str, declared: Mapping[str, Any], overrides: Mapping[str, float]) -> Dict[str, float]:
    unknown = set(overrides) - set(declared)
    if unknown:
        raise InvalidParameterError(
            f"model '{model_id}' has no parameter(s) {', '.join(sorted(unknown))}"
            f" (accepts: {', '.join(sorted(declared)) or 'none'})"
        )
    resolved = {}
    for name, entry in declared.items():
        value = float(overrides.get(name, entry["default"]))
        lower, upper = entry.get("lower"), entry.get("upper")
        if (lower is not None and value <= lower) or (upper is not None and value >= upper):
            raise InvalidParameterError(
                f"parameter {name}={value} of model '{model_id}' outside the open range ({lower}, {upper})"
            )
        resolved[name] = value
    return resolved


def build_model(
    model_id: str,
    overrides: Optional[Mapping[str, float]] = None,
    assumption_overrides: Optional[Mapping[str, float]] = None,
    version: str = "v1",
) -> RegisteredModel:
    """Instantiate a registry model with its declared assumption constants."""
    entry = describe_model(model_id, version)
    if model_id not in _BUILDERS:
        raise UnknownModelError(f"model '{model_id}' is declared in the registry but has no builder")
    factory, lipschitz = _BUILDERS[model_id]
    params = _resolve_params(model_id, entry.get("params") or {}, overrides or {})

    constants = dict(entry.get("assumptions") or {})
    constants.update(assumption_overrides or {})
    try:
        assumptions = AssumptionParams(**constants, local_lipschitz=lipschitz(**params))
    except TypeError as e:
        raise InvalidParameterError(f"invalid assumption constants for '{model_id}': {e}") from e

    return RegisteredModel(
        model_id=model_id,
        description=entry.get("description", ""),
        driver=entry.get("driver", "brownian"),
        coefficients=factory(**params),
        assumptions=assumptions,
    )
