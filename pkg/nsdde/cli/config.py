from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from nsdde.experiment.config import StudyConfig
from nsdde.experiment.presets import preset_config
from nsdde.noise.jumps import MarkDistribution
from nsdde.noise.streams import SEED_LIMIT


DEFAULT_JUMP_MODEL = "example-jump"

# simulate / check-assumptions fall back to these when a flag is omitted
SIMULATE_DEFAULTS: Dict[str, Any] = {
    "model": "example-b",
    "tau": 1.0,
    "T": 2.0,
    "m": 64,
    "epsilon": 0.05,
    "regime": "baseline",
    "paths": 10,
    "seed": 0,
    "intensity": 1.0,
    "mark_dist": "gauss:1",
    "xi": 1.0,
    "box": (-5.0, 5.0),
    "samples": 2048,
}

# RunConfig field -> StudyConfig field
STUDY_FIELDS = {
    "model": "model",
    "params": "model_params",
    "tau": "tau",
    "T": "T",
    "levels": "levels",
    "ref": "m_ref",
    "epsilon": "epsilon",
    "regime": "regime",
    "q": "q",
    "paths": "n_paths",
    "mode": "mode",
    "seed": "seed",
    "intensity": "intensity",
    "mark_dist": "mark_dist",
    "p": "p",
    "xi": "xi",
    "moment_p": "moment_p",
    "bootstrap": "bootstrap",
}


class RunConfig(BaseModel):
    """Validated command line. Unset flags stay None so presets and defaults can fill them."""

    model_config = ConfigDict(frozen=True, extra="forbid", protected_namespaces=())

    command: Literal["simulate", "converge", "check-assumptions", "list-models"]
    model: Optional[str] = None
    params: Dict[str, float] = Field(default_factory=dict)
    tau: Optional[float] = Field(None, gt=0)
    T: Optional[float] = Field(None, gt=0)
    m: Optional[int] = Field(None, ge=1)
    levels: Optional[List[int]] = None
    ref: Optional[int] = Field(None, ge=1)
    epsilon: Optional[float] = Field(None, gt=0)
    regime: Optional[Literal["baseline", "improved"]] = None
    gauge_mode: Optional[Literal["brownian", "jump"]] = None
    q: Optional[float] = Field(None, ge=2)
    p: Optional[float] = Field(None, gt=2)
    paths: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = Field(None, ge=0, lt=SEED_LIMIT)
    mode: Optional[Literal["at-T", "uniform"]] = None
    driver: Optional[Literal["brownian", "jump"]] = None
    intensity: Optional[float] = Field(None, ge=0)
    mark_dist: Optional[str] = None
    xi: Optional[float] = None
    moment_p: Optional[float] = Field(None, gt=0)
    bootstrap: Optional[int] = Field(None, ge=1)
    preset: Optional[str] = None
    out: Optional[Path] = None
    assumptions: List[str] = Field(default_factory=list)
    all_assumptions: bool = False
    box: Optional[Tuple[float, float]] = None
    samples: Optional[int] = Field(None, ge=1)
    delta: Optional[float] = Field(None, gt=0, le=1)
    log_level: Optional[str] = None

    @field_validator("tau", "T", "epsilon", "intensity", "xi", "q", "p")
    @classmethod
    def _finite(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @field_validator("mark_dist")
    @classmethod
    def _mark_dist_parses(cls, text: Optional[str]) -> Optional[str]:
        if text is not None:
            MarkDistribution.parse(text)
        return text

    @field_validator("box")
    @classmethod
    def _box_ordered(cls, box: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
        if box is not None and not (math.isfinite(box[0]) and math.isfinite(box[1]) and box[0] < box[1]):
            raise ValueError(f"box must be LO,HI with finite LO < HI, got {box}")
        return box

    @model_validator(mode="after")
    def _consistent(self) -> "RunConfig":
        if self.driver and self.gauge_mode and self.driver != self.gauge_mode:
            raise ValueError(f"--gauge-mode {self.gauge_mode} does not match --driver {self.driver}")
        if self.command == "check-assumptions" and not (self.assumptions or self.all_assumptions):
            raise ValueError("check-assumptions needs --assumption ID (repeatable) or --all")
        if self.assumptions and self.all_assumptions:
            raise ValueError("--assumption and --all are mutually exclusive")
        return self

    @property
    def resolved_driver(self) -> Optional[str]:
        return self.driver or self.gauge_mode

    def setting(self, name: str) -> Any:
        """Flag value, or its simulate/check-assumptions default."""
        value = getattr(self, name)
        if name == "model" and value is None and self.resolved_driver == "jump":
            return DEFAULT_JUMP_MODEL
        return SIMULATE_DEFAULTS.get(name) if value is None else value

    def study_config(self) -> StudyConfig:
        """StudyConfig for `converge`; explicit flags override the preset, the preset overrides defaults."""
        overrides = {STUDY_FIELDS[name]: getattr(self, name) for name in STUDY_FIELDS}
        if not self.params:
            overrides["model_params"] = None
        overrides["driver"] = self.resolved_driver
        if self.model is None and self.resolved_driver == "jump":
            overrides["model"] = DEFAULT_JUMP_MODEL
        if self.preset:
            return preset_config(self.preset, overrides)
        return StudyConfig(**{k: v for k, v in overrides.items() if v is not None})
