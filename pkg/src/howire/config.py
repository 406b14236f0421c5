"""Tool configuration with flags > environment > config file > defaults."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

DATA_ROOT_ENV = "HOWIRE_DATA_ROOT"
DEFAULT_ROSTER = ("alice", "bob", "carol")


class ConfigError(ValueError):
    pass


@dataclass
class ToolConfig:
    data_root: Path = Path("dataset")
    seed: int = 42
    n_solids: int = 100
    views_per_solid: int = 24
    grid_limits: tuple = (4, 4, 4)
    split_ratio: float = 0.9
    bind: str = "127.0.0.1:8600"
    voter_roster: tuple = DEFAULT_ROSTER
    allow_partial: bool = False

    def __post_init__(self):
        self.data_root = Path(self.data_root)
        self.voter_roster = tuple(self.voter_roster)
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.n_solids < 1 or self.views_per_solid < 1:
            raise ConfigError("dataset scale knobs must be positive")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError("split ratio must be in (0,1)")
        if len(self.voter_roster) != 3:
            raise ConfigError(f"voter roster must have exactly 3 ids, got {len(self.voter_roster)}")


def load_config(config_file=None, env=None, **flag_overrides) -> ToolConfig:
    """Merge config sources; later sources win: defaults < file < env < flags."""
    env = os.environ if env is None else env
    values = {}
    if config_file:
        path = Path(config_file)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        loaded = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        values.update(loaded)
    if env.get(DATA_ROOT_ENV):
        values["data_root"] = env[DATA_ROOT_ENV]
    for key, val in flag_overrides.items():
        if val is not None:
            values[key] = val
    known = set(ToolConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "grid_limits" in values:
        values["grid_limits"] = tuple(values["grid_limits"])
    return ToolConfig(**values)
