from __future__ import annotations

import math
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from nsdde.noise.brownian import COMMENSURABILITY_TOLERANCE
from nsdde.noise.jumps import MarkDistribution
from nsdde.noise.streams import SEED_LIMIT


class StudyConfig(BaseModel):
    """One coupled strong-error study. Every m_j must divide m_ref."""

    model_config = ConfigDict(frozen=True, extra="forbid", protected_namespaces=())

    model: str = "example-b"
    model_params: Dict[str, float] = Field(default_factory=dict)
    tau: float = Field(1.0, gt=0)
    T: float = Field(2.0, gt=0)
    levels: List[int] = Field(default_factory=lambda: [8, 16, 32, 64])
    m_ref: int = Field(512, ge=1)
    epsilon: float = Field(0.05, gt=0)
    regime: Literal["baseline", "improved"] = "baseline"
    q: float = Field(2.0, ge=2)
    n_paths: int = Field(1000, ge=1)
    mode: Literal["at-T", "uniform"] = "at-T"
    seed: int = Field(0, ge=0, lt=SEED_LIMIT)
    driver: Optional[Literal["brownian", "jump"]] = None
    intensity: float = Field(1.0, ge=0)
    mark_dist: str = "gauss:1"
    p: Optional[float] = Field(None, gt=2)
    xi: float = 1.0
    moment_p: float = Field(3.0, gt=0)
    bootstrap: int = Field(1000, ge=1)

    @field_validator("levels")
    @classmethod
    def _levels_positive_unique(cls, levels: List[int]) -> List[int]:
        if not levels:
            raise ValueError("at least one level is required")
        if any(m < 1 for m in levels):
            raise ValueError(f"levels must be positive integers, got {levels}")
        if len(set(levels)) != len(levels):
            raise ValueError(f"levels must be distinct, got {levels}")
        return levels

    @field_validator("mark_dist")
    @classmethod
    def _mark_dist_parses(cls, text: str) -> str:
        MarkDistribution.parse(text)
        return text

    @field_validator("xi", "tau", "T")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @model_validator(mode="after")
    def _nested_and_commensurable(self) -> "StudyConfig":
        for m in self.levels:
            if self.m_ref % m != 0:
                raise ValueError(f"level m={m} does not divide m_ref={self.m_ref}; noise coarsening needs nesting")
        for m in [*self.levels, self.m_ref]:
            delta = self.tau / m
            steps = round(self.T / delta)
            if steps < 1 or abs(steps * delta - self.T) > COMMENSURABILITY_TOLERANCE * self.T:
                raise ValueError(f"T={self.T} is not an integer multiple of Δ=τ/{m}={delta}")
            if delta > 1.0:
                raise ValueError(f"step Δ=τ/{m}={delta} exceeds 1")
        return self

    @property
    def sorted_levels(self) -> List[int]:
        return sorted(self.levels)
