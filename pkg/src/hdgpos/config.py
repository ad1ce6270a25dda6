"""Experiment configuration (one JSON document, unknown keys rejected)."""
from __future__ import annotations

import json
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from .errors import InputError
from .spaces import SpaceCombo

SCENARIOS = ("unit_hypercube", "sheared_simplex", "sheared_quads", "two_squares",
             "three_squares", "custom_mesh_file", "graph_file")

_DEFAULT_COMBO = {
    "unit_hypercube": "P0/P0d/P0",
    "sheared_simplex": "P0/RT0/P0",
    "sheared_quads": "P0/P0d/P0",
    "two_squares": "Q1/Q1d/P1",
    "three_squares": "Q1/Q1d/P1",
    "custom_mesh_file": "P0/P0d/P0",
    "graph_file": "P0/P0d/P0",
}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Sweep(_Strict):
    parameter: Literal["tau", "theta"] = "tau"
    lo: float = 1e-2
    hi: float = 1e2
    count: int = 200
    spacing: Literal["linear", "log"] = "log"

    @model_validator(mode="after")
    def _check(self):
        if not self.lo < self.hi:
            raise ValueError("sweep needs lo < hi")
        if self.count < 2:
            raise ValueError("sweep needs count >= 2")
        if self.spacing == "log" and self.lo <= 0:
            raise ValueError("log spacing needs lo > 0")
        return self

    def samples(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(np.log10(self.lo), np.log10(self.hi), self.count)
        return np.linspace(self.lo, self.hi, self.count)


class NodeProbe(_Strict):
    """A single node, by id or by barycenter in reference (unsheared) coordinates."""

    node_id: Optional[int] = None
    point: Optional[list[float]] = None

    @model_validator(mode="after")
    def _one(self):
        if (self.node_id is None) == (self.point is None):
            raise ValueError("probe needs exactly one of node_id or point")
        return self


Probe = Union[Literal["global_min", "neumann_mean", "default"], NodeProbe]


class ExperimentConfig(_Strict):
    scenario: Literal[SCENARIOS]
    combo: Optional[str] = None
    dim: int = 2
    tau: Optional[float] = None
    theta: Optional[float] = None
    n: int = 10
    mesh_file: Optional[str] = None
    sweep: Sweep = Sweep()
    probe: Probe = "default"
    out: Optional[str] = None

    @field_validator("combo")
    @classmethod
    def _combo(cls, v):
        if v is not None:
            SpaceCombo.parse(v)
        return v

    @model_validator(mode="after")
    def _check(self):
        if self.scenario in ("custom_mesh_file", "graph_file") and not self.mesh_file:
            raise ValueError(f"scenario {self.scenario} needs mesh_file")
        if self.scenario == "sheared_simplex" and self.dim not in (2, 3):
            raise ValueError("sheared_simplex needs dim 2 or 3")
        if self.scenario == "unit_hypercube" and self.dim not in (1, 2, 3):
            raise ValueError("unit_hypercube needs dim 1, 2 or 3")
        if self.n < 1:
            raise ValueError("n must be positive")
        return self

    @property
    def space_combo(self) -> SpaceCombo:
        return SpaceCombo.parse(self.combo or _DEFAULT_COMBO[self.scenario])


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: line {exc.lineno}: {exc.msg}") from None
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise InputError(f"invalid config: {exc}") from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
