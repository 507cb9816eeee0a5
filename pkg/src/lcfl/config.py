"""Experiment configuration (a single JSON document)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .environment import InstanceError, InstanceSpec
from .feasible_sets import FamilyError, FamilyTooLarge
from .policies import PolicyConfig, PolicyConfigError
from .simulation import Diagnostics

DEFAULT_CONFIG_NAME = "default_config.json"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    instance: InstanceSpec
    horizon: int
    replications: int
    master_seed: int
    sweep: list[PolicyConfig]
    diagnostics: Diagnostics = Diagnostics()
    output_dir: str = "results"
    subsample: int = 100
    oracle_delta: float = 0.0
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        known = {"instance", "horizon", "replications", "master_seed", "sweep", "diagnostics",
                 "output_dir", "subsample", "oracle_delta", "description"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config fields {sorted(extra)}")
        for key in ("instance", "horizon", "replications", "master_seed", "sweep"):
            if key not in data:
                raise ConfigError(f"config is missing '{key}'")
        try:
            instance = InstanceSpec.from_config(data["instance"])
        except (InstanceError, FamilyError, FamilyTooLarge) as exc:
            raise ConfigError(f"instance: {exc}") from exc

        horizon = _int(data, "horizon", 1)
        replications = _int(data, "replications", 1)
        subsample = _int(data, "subsample", 1, default=100)
        seed = data["master_seed"]
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
            raise ConfigError("master_seed must be an integer in [0, 2^64)")
        oracle_delta = float(data.get("oracle_delta", 0.0))
        if oracle_delta < 0:
            raise ConfigError("oracle_delta must be nonnegative")

        if not isinstance(data["sweep"], list) or not data["sweep"]:
            raise ConfigError("sweep must be a nonempty list of policy entries")
        sweep = []
        for i, entry in enumerate(data["sweep"]):
            try:
                cfg = PolicyConfig.from_dict(dict(entry))
                cfg.picks(instance.family.size)
            except (PolicyConfigError, TypeError, ValueError) as exc:
                raise ConfigError(f"sweep[{i}]: {exc}") from exc
            sweep.append(cfg)

        diag = data.get("diagnostics", {})
        unknown = set(diag) - {"shadow_argmax", "lemma2_assert"}
        if unknown:
            raise ConfigError(f"unknown diagnostics flags {sorted(unknown)}")
        diagnostics = Diagnostics(bool(diag.get("shadow_argmax", False)), bool(diag.get("lemma2_assert", False)))

        return cls(instance=instance, horizon=horizon, replications=replications, master_seed=seed,
                   sweep=sweep, diagnostics=diagnostics, output_dir=str(data.get("output_dir", "results")),
                   subsample=subsample, oracle_delta=oracle_delta, raw=data)


def _int(data: dict, key: str, minimum: int, default: int | None = None) -> int:
    value = data.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}, got {value!r}")
    return value


def default_config_dict() -> dict:
    text = resources.files("lcfl").joinpath("data", DEFAULT_CONFIG_NAME).read_text()
    return json.loads(text)


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Load a config file; ``None`` or ``"default"`` selects the bundled one."""
    if path is None or str(path) == "default":
        return ExperimentConfig.from_dict(default_config_dict())
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.from_dict(data)
