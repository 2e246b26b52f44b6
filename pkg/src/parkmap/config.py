"""Run specification: defaults, key=value file parsing, and manifest hashing.

A run spec carries every knob needed to reproduce an experiment. The file
format is one `key = value` pair per line with `#` comments; unset keys fall
back to the defaults below, and command-line flags override file values.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .environment import RoadConfig
from .selection import STRATEGIES
from .sensing import MODES, NoiseConfig


class SpecError(ValueError):
    """A run-spec file could not be parsed."""


class RunSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    road_length_m: float = Field(default=10_000.0, gt=0)
    slot_length_m: float = Field(default=5.0, gt=0)
    window_m: float = Field(default=100.0, gt=0)
    sample_period_s: float = Field(default=10.0, gt=0)
    segment_length_m: float = Field(default=1_000.0, gt=0)
    p_change: float = Field(default=0.2, ge=0.0, le=1.0)
    noise_sigma: float = Field(default=3e-2, ge=0.0)
    noise_mode: str = Field(default="gaussian")
    max_sources: int = Field(default=10, ge=0)
    n_tests: int = Field(default=10, ge=1)
    strategies: tuple[str, ...] = ("uncertainty", "random", "platform_only", "take_all")
    time_varying: bool = False
    base_seed: int = Field(default=0, ge=0)
    grid_step_m: float = Field(default=10.0, gt=0)

    @field_validator("strategies", mode="before")
    @classmethod
    def _split_strategies(cls, v):
        if isinstance(v, str):
            v = tuple(part.strip() for part in v.split(",") if part.strip())
        return tuple(v)

    @field_validator("strategies")
    @classmethod
    def _check_strategies(cls, v: tuple[str, ...]):
        if not v:
            raise ValueError("strategies must list at least one strategy")
        unknown = [s for s in v if s not in STRATEGIES]
        if unknown:
            raise ValueError(f"unknown strategies {unknown}; expected from {STRATEGIES}")
        if len(set(v)) != len(v):
            raise ValueError("strategies must be unique")
        return v

    @field_validator("noise_mode")
    @classmethod
    def _check_mode(cls, v: str):
        if v not in MODES:
            raise ValueError(f"noise_mode must be one of {MODES}")
        return v

    @model_validator(mode="after")
    def _check_geometry(self):
        # RoadConfig owns the cross-field constraints; surface its message.
        try:
            self.to_road_config()
        except ValueError as exc:
            raise ValueError(str(exc)) from None
        return self

    def to_road_config(self) -> RoadConfig:
        return RoadConfig(
            length_m=self.road_length_m,
            slot_length_m=self.slot_length_m,
            window_m=self.window_m,
            sample_period_s=self.sample_period_s,
            segment_length_m=self.segment_length_m,
            p_change=self.p_change,
        )

    def to_noise_config(self) -> NoiseConfig:
        return NoiseConfig(sigma=self.noise_sigma, mode=self.noise_mode)

    def config_hash(self) -> str:
        # The seed travels separately in the manifest; runs that differ only
        # by seed share a hash so their tests can be pooled.
        fields = self.model_dump()
        fields.pop("base_seed")
        canonical = json.dumps(fields, sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def parse_spec_text(text: str) -> RunSpec:
    """Build a RunSpec from key = value lines; unknown keys are an error."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise SpecError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    unknown = set(raw) - set(RunSpec.model_fields)
    if unknown:
        raise SpecError(f"unknown keys: {sorted(unknown)}")
    return RunSpec(**raw)


def load_spec_file(path: str | Path) -> RunSpec:
    p = Path(path)
    if not p.is_file():
        raise SpecError(f"spec file not found: {p}")
    return parse_spec_text(p.read_text(encoding="utf-8"))


def spec_to_text(spec: RunSpec) -> str:
    """Resolved spec as a re-parseable key = value file."""
    lines = []
    for key, value in spec.model_dump().items():
        if key == "strategies":
            value = ",".join(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def apply_overrides(spec: RunSpec, **overrides) -> RunSpec:
    """New RunSpec with the given fields replaced, re-running validation."""
    merged = spec.model_dump()
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return RunSpec(**merged)
