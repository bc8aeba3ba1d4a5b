"""Run configuration: TOML text validated against a strict schema.

Every physical value carries a unit tag next to it (``E0`` with
``E0_unit``) and is converted to natural units once, here. Unknown keys are
rejected so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path
from typing import Literal, Optional

import tomli
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from unruhsim.units import UNITS, UnitError, to_natural

__all__ = ["ConfigError", "RunConfig", "bundled_configs", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid configuration; ``diagnostics`` holds one line-tagged message per problem."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("\n".join(diagnostics))
        self.diagnostics = diagnostics


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)


def _check_unit(unit: str, kinds: tuple[str, ...]) -> str:
    kind = UNITS.get(unit, (None,))[0]
    if kind is None:
        raise ValueError(f"unknown unit tag {unit!r}")
    if kind not in kinds and kind != "any":
        raise ValueError(f"unit {unit!r} is a {kind} unit, expected {'/'.join(kinds)}")
    return unit


class PulseSection(_Section):
    shape: Literal["gaussian", "rectangular", "smooth_front"] = "gaussian"
    E0: float = Field(ge=0.0)
    E0_unit: str = "E_S"
    width: float = Field(gt=0.0)
    width_unit: str = "as"
    rise: float = Field(0.0, ge=0.0)
    center: float = 0.0

    @field_validator("E0_unit")
    @classmethod
    def _field_unit(cls, v):
        return _check_unit(v, ("field", "intensity"))

    @field_validator("width_unit")
    @classmethod
    def _time_unit(cls, v):
        return _check_unit(v, ("time",))

    def natural(self) -> dict:
        return {
            "shape": self.shape,
            "E0": to_natural(self.E0, self.E0_unit),
            "delta_t_pulse": to_natural(self.width, self.width_unit),
            "delta_t_rise": to_natural(self.rise, self.width_unit),
            "t_center": to_natural(self.center, self.width_unit),
        }


class ElectronSection(_Section):
    u0: float = 0.0


class _KRange(_Section):
    k_unit: str = "keV"

    @field_validator("k_unit")
    @classmethod
    def _energy_unit(cls, v):
        return _check_unit(v, ("energy",))


class MapSection(_KRange):
    k_min: float = Field(gt=0.0)
    k_max: float = Field(gt=0.0)
    n_k: int = Field(ge=1)
    k_spacing: Literal["linear", "log"] = "linear"
    theta_min_deg: float = Field(0.0, ge=0.0, le=180.0)
    theta_max_deg: float = Field(180.0, ge=0.0, le=180.0)
    n_theta: int = Field(ge=1)
    theta_spacing: Literal["linear", "polar"] = "linear"
    phi_deg: float = 0.0
    pairing: Literal["parallel", "back_to_back"] = "parallel"
    polarization: Literal["theta", "phi"] = "theta"

    @model_validator(mode="after")
    def _increasing(self):
        if self.n_k > 1 and not self.k_max > self.k_min:
            raise ValueError("k_max must exceed k_min")
        if self.n_theta > 1 and not self.theta_max_deg > self.theta_min_deg:
            raise ValueError("theta_max_deg must exceed theta_min_deg")
        if self.theta_spacing == "polar" and self.n_theta < 2:
            raise ValueError("polar theta spacing needs n_theta >= 2")
        return self


class FixtureSection(_KRange):
    """Static scatterer with a Gaussian coupling window (analytic oracle)."""

    window_sigma: float = Field(gt=0.0)
    window_unit: str = "as"
    k_min: float = Field(gt=0.0)
    k_max: float = Field(gt=0.0)
    n_k: int = Field(ge=1)
    theta_deg: float = Field(0.0, ge=0.0, le=180.0)

    @field_validator("window_unit")
    @classmethod
    def _time_unit(cls, v):
        return _check_unit(v, ("time",))


class ConeSection(_KRange):
    k_ref: list[float] = Field(min_length=1)
    direction: Literal["forward", "backward", "both"] = "both"

    @field_validator("k_ref")
    @classmethod
    def _positive(cls, v):
        if any(x <= 0 for x in v):
            raise ValueError("k_ref values must be positive")
        return v


class ProbabilitySection(_Section):
    theta_max_deg: Optional[float] = Field(None, gt=0.0, le=90.0)
    k_max_over_cut: float = Field(3.0, gt=0.0)
    cones: Literal["forward", "backward", "both"] = "forward"
    single_photon: bool = True
    rel_tol: float = Field(1e-2, gt=0.0)


class SweepSection(_Section):
    parameter: Literal["E0", "width"]
    values: list[float] = Field(min_length=1)
    observable: Literal["probability", "single_photon", "cone", "cutoff"] = "probability"

    @field_validator("values")
    @classmethod
    def _positive(cls, v):
        if any(x <= 0 for x in v):
            raise ValueError("sweep values must be positive")
        return v


class SlopesSection(_Section):
    theta_gamma: float = Field(0.1, gt=0.0)
    lo_over_cut: float = Field(0.02, gt=0.0)
    hi_over_cut: float = Field(0.2, gt=0.0)
    n: int = Field(10, ge=3)
    tail_over_cut: list[float] = Field(default_factory=lambda: [2.0, 3.0])


class VacuumSection(_Section):
    E0_vec: list[float] = Field(min_length=3, max_length=3)
    B0_vec: list[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0], min_length=3, max_length=3)
    field_unit: str = "E_S"
    khat: list[float] = Field(default_factory=lambda: [0.0, 0.0, 1.0], min_length=3, max_length=3)
    k: float = Field(1.0, gt=0.0)
    k_unit: str = "keV"

    @field_validator("field_unit")
    @classmethod
    def _field_unit(cls, v):
        return _check_unit(v, ("field",))

    @field_validator("k_unit")
    @classmethod
    def _energy_unit(cls, v):
        return _check_unit(v, ("energy",))


class OutputSection(_Section):
    directory: str = "unruhsim-out"
    formats: list[Literal["csv", "pgm"]] = Field(default_factory=lambda: ["csv", "pgm"], min_length=1)


class ToleranceSection(_Section):
    abs_tol: float = Field(1e-12, gt=0.0)
    rel_tol: float = Field(1e-9, gt=0.0)


class RunConfig(_Section):
    pulse: Optional[PulseSection] = None
    electron: ElectronSection = Field(default_factory=ElectronSection)
    map: Optional[MapSection] = None
    fixture: Optional[FixtureSection] = None
    cone: Optional[ConeSection] = None
    probability: Optional[ProbabilitySection] = None
    sweep: Optional[SweepSection] = None
    slopes: Optional[SlopesSection] = None
    vacuum: Optional[VacuumSection] = None
    output: OutputSection = Field(default_factory=OutputSection)
    tolerance: ToleranceSection = Field(default_factory=ToleranceSection)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form; identical configs hash identically."""
        text = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _line_of(text: str, loc: tuple) -> Optional[int]:
    """Best-effort source line for a validation error location."""
    lines = text.splitlines()
    keys = [str(p) for p in loc if isinstance(p, str)]
    if not keys:
        return None
    section, key = keys[0], keys[1] if len(keys) > 1 else None
    header = re.compile(r"^\s*\[\s*" + re.escape(section) + r"\s*\]")
    start = None
    for i, line in enumerate(lines):
        if header.match(line):
            start = i
            break
    if start is None:
        # a top-level key (or a section given inline)
        pat = re.compile(r"^\s*" + re.escape(section) + r"\s*=")
        return next((i + 1 for i, line in enumerate(lines) if pat.match(line)), None)
    if key is None:
        return start + 1
    pat = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
    for i in range(start + 1, len(lines)):
        if re.match(r"^\s*\[", lines[i]):
            break
        if pat.match(lines[i]):
            return i + 1
    return start + 1


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError([f"{source}: {exc}"]) from None
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        diags = []
        for err in exc.errors():
            loc = tuple(err["loc"])
            where = ".".join(str(p) for p in loc) or "<root>"
            line = _line_of(text, loc)
            prefix = f"{source}:{line}" if line else source
            diags.append(f"{prefix}: {where}: {err['msg']}")
        raise ConfigError(diags) from None
    # units are checked by the schema; this catches unconvertible values
    try:
        if cfg.pulse is not None:
            cfg.pulse.natural()
    except (UnitError, ValueError) as exc:
        raise ConfigError([f"{source}: pulse: {exc}"]) from None
    return cfg


def bundled_configs() -> dict[str, Path]:
    """Configurations shipped with the package, by name (file stem)."""
    root = Path(__file__).with_name("configs")
    return {p.stem: p for p in sorted(root.glob("*.toml"))}


def load_config(path) -> RunConfig:
    """Load a TOML file; a bare name such as ``dominance-map`` selects a bundled config."""
    p = Path(path)
    if not p.exists() and str(path) in bundled_configs():
        p = bundled_configs()[str(path)]
    return parse_config(p.read_text(), str(p))
