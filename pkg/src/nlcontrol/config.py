"""Experiment configuration: strict JSON loading, defaults, named profiles.

Every key has a default reproducing the reference experiment, so ``{}`` is a
valid configuration. Unknown keys are rejected.

Named spatial profiles (evaluated at the interior nodes):

    initial data: "paper" = 2 sin(pi x), "sin10" = sin(pi x)^10, "const(c)",
                  "step" = 1_(0.5,0.8) - 1_(0.2,0.5),
                  "mixed" = sin(pi x / 3) + 0.3 cos(15 pi x / 4), "zero"
    targets:      "paper" = sin(2 pi x), "const(c)", "zero"

Inline sample lists of length N are accepted wherever a profile is expected.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError, InvalidArgumentError
from .grid import Grid, SeparatedKernel, build_grid, kernel_from_samples, named_kernel
from .iterative import METHODS, SolverConfig

_CONST = re.compile(r"^const\(\s*([^)]+?)\s*\)$")
_KERNEL_CONST = re.compile(r"^constant\(\s*([^)]+?)\s*\)$")

INITIAL_DATA = {
    "paper": lambda x: 2.0 * np.sin(np.pi * x),
    "sin10": lambda x: np.sin(np.pi * x) ** 10,
    "step": lambda x: ((x > 0.5) & (x < 0.8)) * 1.0 - ((x > 0.2) & (x < 0.5)) * 1.0,
    "mixed": lambda x: np.sin(np.pi * x / 3.0) + 0.3 * np.cos(15.0 / 4.0 * np.pi * x),
    "zero": lambda x: np.zeros_like(x),
}

TARGETS = {
    "paper": lambda x: np.sin(2.0 * np.pi * x),
    "zero": lambda x: np.zeros_like(x),
}

TABLE2_DATA = ["sin10", "const(3)", "step", "mixed"]


def _const_value(name: str) -> Optional[float]:
    m = _CONST.match(name)
    if not m:
        return None
    try:
        return float(m.group(1))
    except ValueError:
        return None


def _check_profile_name(name: str, table: dict, what: str) -> str:
    if name in table or _const_value(name) is not None:
        return name
    raise ValueError(f"unknown {what} {name!r}; expected one of {sorted(table)} or const(c)")


def resolve_profile(profile, grid: Grid, table: dict = INITIAL_DATA) -> np.ndarray:
    """Evaluate a named or inline profile at the interior nodes."""
    x = grid.x
    if isinstance(profile, str):
        if profile in table:
            return np.asarray(table[profile](x), dtype=float)
        c = _const_value(profile)
        if c is None:
            raise InvalidArgumentError(f"unknown profile {profile!r}")
        return np.full(grid.n_interior, c)
    arr = np.asarray(profile, dtype=float)
    if arr.shape != (grid.n_interior,):
        raise InvalidArgumentError(
            f"inline profile must have {grid.n_interior} samples, got {arr.shape}")
    return arr


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridConfig(_Strict):
    n_interior: int = Field(60, ge=1)
    n_steps: int = Field(100, ge=1)
    horizon: float = Field(1.0, gt=0)
    nu: float = Field(0.1, ge=0)


class InlineKernel(_Strict):
    k1: list[float]
    k2: list[float]


class SolverSettings(_Strict):
    method: str = "cg"
    tol: float = Field(1e-8, gt=0)
    max_iter: int = Field(500, ge=1)
    step: Optional[float] = Field(None, gt=0)
    dense: bool = False
    mask_control: bool = False

    @field_validator("method")
    @classmethod
    def _method(cls, v):
        if v not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        return v

    def to_solver_config(self) -> SolverConfig:
        return SolverConfig(self.method, self.tol, self.max_iter, self.step, self.dense,
                            self.mask_control)


Profile = Union[str, list[float]]


class ExperimentConfig(_Strict):
    grid: GridConfig = GridConfig()
    kernel: Union[str, InlineKernel] = "paper"
    control_region: tuple[float, float] = (0.2, 0.8)
    target: Profile = "paper"
    initial_datum: Profile = "paper"
    initial_data: list[Profile] = Field(default_factory=lambda: list(TABLE2_DATA), min_length=1)
    beta: list[float] = Field(default_factory=lambda: [100.0], min_length=1)
    gamma: list[float] = Field(default_factory=lambda: [1.0], min_length=1)
    mu: float = Field(1.0, gt=0)
    solver: SolverSettings = SolverSettings()
    output_dir: str = "out"
    workers: int = Field(1, ge=1)

    @field_validator("kernel")
    @classmethod
    def _kernel(cls, v):
        if isinstance(v, str) and v not in ("paper", "zero") and not _KERNEL_CONST.match(v):
            raise ValueError(f"unknown kernel {v!r}; expected 'paper', 'zero' or 'constant(c)'")
        return v

    @field_validator("target")
    @classmethod
    def _target(cls, v):
        return _check_profile_name(v, TARGETS, "target") if isinstance(v, str) else v

    @field_validator("initial_datum")
    @classmethod
    def _datum(cls, v):
        return _check_profile_name(v, INITIAL_DATA, "initial datum") if isinstance(v, str) else v

    @field_validator("initial_data")
    @classmethod
    def _data(cls, v):
        return [_check_profile_name(d, INITIAL_DATA, "initial datum") if isinstance(d, str) else d
                for d in v]

    @field_validator("beta", "gamma")
    @classmethod
    def _positive(cls, v):
        for item in v:
            if not item > 0:
                raise ValueError(f"all entries must be positive, got {item!r}")
        return v

    @field_validator("control_region")
    @classmethod
    def _region(cls, v):
        a, b = v
        if not 0.0 <= a < b <= 1.0:
            raise ValueError("control region must satisfy 0 <= a < b <= 1")
        return v

    @model_validator(mode="after")
    def _inline_lengths(self):
        n = self.grid.n_interior
        checks = [("target", self.target), ("initial_datum", self.initial_datum)]
        checks += [(f"initial_data.{i}", d) for i, d in enumerate(self.initial_data)]
        if isinstance(self.kernel, InlineKernel):
            checks += [("kernel.k1", self.kernel.k1), ("kernel.k2", self.kernel.k2)]
        for key, value in checks:
            if isinstance(value, list) and len(value) != n:
                raise ValueError(f"{key}: expected {n} samples, got {len(value)}")
        return self

    # -- resolved objects ------------------------------------------------

    def build_grid(self) -> Grid:
        g = self.grid
        return build_grid(g.n_interior, g.n_steps, g.horizon, g.nu)

    def build_kernel(self, grid: Grid) -> SeparatedKernel:
        if isinstance(self.kernel, str):
            return named_kernel(self.kernel, grid)
        return kernel_from_samples(self.kernel.k1, self.kernel.k2, grid)

    def target_array(self, grid: Grid) -> np.ndarray:
        """Time-independent target repeated over the ``M`` time levels."""
        return np.tile(resolve_profile(self.target, grid, TARGETS), (grid.n_steps, 1))

    def y0_array(self, grid: Grid) -> np.ndarray:
        return resolve_profile(self.initial_datum, grid)

    def solver_config(self) -> SolverConfig:
        return self.solver.to_solver_config()

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        """Copy with top-level or ``solver.*`` overrides, revalidated."""
        data = self.model_dump(mode="json")
        for key, value in overrides.items():
            if value is None:
                continue
            if key.startswith("solver."):
                data["solver"][key.split(".", 1)[1]] = value
            else:
                data[key] = value
        return parse_config(data)


def profile_label(profile) -> str:
    return profile if isinstance(profile, str) else "inline"


def _format_loc(loc) -> str:
    return ".".join(str(p) for p in loc) or "<root>"


def parse_config(data) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigError(err["msg"], key=_format_loc(err["loc"])) from None


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                          key=f"line {exc.lineno}") from None
    return parse_config(data)


def save_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.model_dump(mode="json"), indent=2) + "\n")
