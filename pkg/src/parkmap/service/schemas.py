"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from ..config import RunSpec


class HealthResponse(BaseModel):
    status: str
    version: str


class RunRequest(BaseModel):
    spec: RunSpec = Field(default_factory=RunSpec)
    out_dir: str


class RunResponse(BaseModel):
    out_dir: str
    files: list[str]
    config_hash: str
    summary: dict[str, Any]


class CompareRequest(BaseModel):
    run_dirs: list[str] = Field(min_length=1)
    out_dir: str


class CompareResponse(BaseModel):
    out_dir: str
    files: list[str]
    report: dict[str, Any]


class SnapshotRequest(BaseModel):
    spec: RunSpec = Field(default_factory=RunSpec)
    at_position_m: float = Field(ge=0)
    out_dir: str


class SnapshotResponse(BaseModel):
    out_dir: str
    files: list[str]
    iterations: dict[str, int]
