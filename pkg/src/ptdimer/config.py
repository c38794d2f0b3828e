"""Experiment configuration: flat ``key = value`` documents plus overrides."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Optional

from .errors import ConfigError, DomainError, ExistenceError, InputValidationError
from .fock import SectorState, SystemParams, build_product_state
from .meanfield import MeanFieldState, stationary_states

MODES = ("trajectories", "exact", "meanfield", "compare")
NAMED_INITIAL = ("ground", "excited")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "trajectories"
    J: float = 1.0
    g: float = 0.5
    N0: int = 100
    gamma_loss: float = 0.0
    initial: str = "product"
    c1_re: float = 0.5
    c1_im: float = 0.5
    c2_re: float = 0.5
    c2_im: float = -0.5
    t_final: float = 15.0
    sample_interval: float = 0.01
    rk_step: float = 0.001
    n_trajectories: int = 500
    master_seed: int = 1
    n_max: Optional[int] = None
    output_path: str = "simulation.csv"

    @property
    def params(self) -> SystemParams:
        return SystemParams(J=self.J, g=self.g, N0=self.N0, gamma_loss=self.gamma_loss)

    @property
    def meanfield_initial(self) -> MeanFieldState:
        if self.initial in NAMED_INITIAL:
            return stationary_states(self.params)[self.initial]
        return MeanFieldState(complex(self.c1_re, self.c1_im), complex(self.c2_re, self.c2_im))

    @property
    def many_body_initial(self) -> SectorState:
        c = self.meanfield_initial
        return build_product_state(c.c1, c.c2, self.N0)

    def validate(self) -> "ExperimentConfig":
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.initial not in ("product",) + NAMED_INITIAL:
            raise ConfigError(f"initial must be product, ground or excited, got {self.initial!r}")
        if not self.t_final > 0:
            raise ConfigError("t_final must be positive")
        if not self.rk_step > 0:
            raise ConfigError("rk_step must be positive")
        if self.sample_interval < self.rk_step:
            raise ConfigError("sample_interval must be >= rk_step")
        if self.n_trajectories < 1:
            raise ConfigError("n_trajectories must be >= 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("master_seed must fit in 64 unsigned bits")
        if self.n_max is not None and self.n_max < self.N0:
            raise ConfigError("n_max must be >= N0")
        try:
            self.params
            self.many_body_initial
        except ExistenceError:
            raise
        except (DomainError, InputValidationError) as exc:
            raise ConfigError(str(exc)) from exc
        return self


_ALIASES = {"gamma": "gamma_loss", "n0": "N0", "trajectories": "n_trajectories",
            "seed": "master_seed", "out": "output_path"}
_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, raw):
    kind = _TYPES[key]
    if not isinstance(raw, str):
        return raw
    value = raw.strip()
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "Optional[int]":
            return None if value.lower() in ("", "none", "auto") else int(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {kind}") from None
    return value


def _canonical(key: str) -> str:
    key = key.strip()
    key = _ALIASES.get(key, key)
    if key not in _TYPES:
        raise ConfigError(f"unknown key {key!r}")
    return key


def parse_config(text: str = "", overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment); ``overrides`` win over the file."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = line.split("=", 1)
        key = _canonical(key)
        values[key] = _coerce(key, raw)
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        key = _canonical(key)
        values[key] = _coerce(key, raw)
    return replace(ExperimentConfig(), **values).validate()
