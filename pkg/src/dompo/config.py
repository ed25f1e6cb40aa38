"""JSON configuration for parameter files and grid scans."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .params import MODEL_KEYS, ModelParams, params_from_dict

AXIS_NAMES = MODEL_KEYS + ("I_s",)
SYSTEMS = ("dompo", "sideband")
OUTPUT_NAMES = ("stability", "n_eff", "squeeze", "theta", "sigma")
SPACINGS = ("linear", "log")


@dataclass(frozen=True)
class AxisSpec:
    """One scan axis: a parameter name plus the sampled range."""

    name: str
    min: float
    max: float
    n_points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValidationError(f"axis name must be one of {AXIS_NAMES}")
        if self.n_points < 2:
            raise ValidationError("axis needs n_points >= 2")
        if self.spacing not in SPACINGS:
            raise ValidationError(f"axis spacing must be one of {SPACINGS}")
        if not self.max > self.min:
            raise ValidationError("axis needs max > min")
        if self.spacing == "log" and self.min <= 0:
            raise ValidationError("log spacing needs min > 0")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.n_points)
        return np.linspace(self.min, self.max, self.n_points)


@dataclass(frozen=True)
class ScanConfig:
    """A two-axis grid scan over the model parameters.

    axis2 must be the signal intensity I_s: every cell is the nontrivial
    state at that intensity (trivial when I_s = 0), with axis1 varying any
    other parameter.
    """

    base: ModelParams
    axis1: AxisSpec
    axis2: AxisSpec
    system: str = "dompo"
    outputs: tuple = OUTPUT_NAMES
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValidationError(f"system must be one of {SYSTEMS}")
        if self.axis2.name != "I_s":
            raise ValidationError("axis2 must scan I_s")
        if self.axis1.name == "I_s":
            raise ValidationError("axis1 must be a model parameter, not I_s")
        unknown = set(self.outputs) - set(OUTPUT_NAMES)
        if unknown:
            raise ValidationError(f"unknown outputs: {sorted(unknown)}")
        if self.threads < 1:
            raise ValidationError("threads must be >= 1")


def _axis_from_dict(data, which: str) -> AxisSpec:
    if not isinstance(data, dict):
        raise ValidationError(f"{which} must be an object")
    allowed = {"name", "min", "max", "n_points", "spacing"}
    unknown = set(data) - allowed
    if unknown:
        raise ValidationError(f"{which}: unknown keys {sorted(unknown)}")
    missing = {"name", "min", "max", "n_points"} - set(data)
    if missing:
        raise ValidationError(f"{which}: missing keys {sorted(missing)}")
    return AxisSpec(name=str(data["name"]), min=float(data["min"]),
                    max=float(data["max"]), n_points=int(data["n_points"]),
                    spacing=str(data.get("spacing", "linear")))


def scan_config_from_dict(data: dict) -> ScanConfig:
    allowed = {"base", "axis1", "axis2", "system", "outputs", "seed", "threads"}
    unknown = set(data) - allowed
    if unknown:
        raise ValidationError(f"unknown scan keys: {sorted(unknown)}")
    for key in ("base", "axis1", "axis2"):
        if key not in data:
            raise ValidationError(f"scan config needs '{key}'")
    outputs = data.get("outputs", list(OUTPUT_NAMES))
    if not isinstance(outputs, (list, tuple)):
        raise ValidationError("outputs must be a list")
    return ScanConfig(
        base=params_from_dict(data["base"]),
        axis1=_axis_from_dict(data["axis1"], "axis1"),
        axis2=_axis_from_dict(data["axis2"], "axis2"),
        system=str(data.get("system", "dompo")),
        outputs=tuple(outputs),
        seed=int(data.get("seed", 0)),
        threads=int(data.get("threads", 1)),
    )


def load_scan_config(path) -> ScanConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    return scan_config_from_dict(data)


def load_any_config(path):
    """Read either a flat parameter file or a scan config; return the object."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    if "base" in data:
        return scan_config_from_dict(data)
    return params_from_dict(data)
