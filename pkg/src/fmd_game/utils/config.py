"""
Experiment configuration.

One JSON document describes a batch: dataset, game parameters, altruism,
initializations, objectives and output location. It is validated with
pydantic (v2) and converted to the library's domain types.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..dynamics.initialization import InitSpec
from ..exceptions import ConfigError
from ..types import StrategyLadder, ladder_from_rates

CACHE_DIR_ENV = "FMD_GAME_CACHE_DIR"
OFFLINE_ENV = "FMD_GAME_OFFLINE"


def default_cache_dir() -> Path:
    """Dataset cache directory: $FMD_GAME_CACHE_DIR or ~/.cache/fmd_game."""
    override = os.getenv(CACHE_DIR_ENV)
    return Path(override).expanduser() if override else Path.home() / ".cache" / "fmd_game"


def offline_mode() -> bool:
    return os.getenv(OFFLINE_ENV, "").strip().lower() in ("1", "true", "yes")


class GameConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    L: Union[float, Literal["derive"]] = "derive"
    f: float = Field(default=1.0, gt=0)

    @field_validator("L")
    @classmethod
    def _positive_L(cls, value):
        if value != "derive" and not value > 0:
            raise ValueError("L must be positive or 'derive'")
        return value


class AltruismConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: Literal["selfish", "local", "global"] = "selfish"
    a: float = Field(default=0.0, ge=0)
    rule: Literal["all", "random_k", "top_k"] = "all"
    k: Optional[int] = Field(default=None, ge=0)
    seed: Optional[int] = None
    metric: Literal["bc", "degree"] = "bc"

    @model_validator(mode="after")
    def _rule_needs_k(self):
        if self.rule != "all" and self.k is None:
            raise ValueError(f"altruism rule {self.rule!r} needs k")
        return self

    @property
    def label(self) -> str:
        return "selfish" if self.model == "selfish" else f"{self.model}-{self.a:g}"


class InitConfig(BaseModel):
    """
    One initialization entry.

    `level` is a rate exponent label ("-10", "-1", "zero"). Random entries
    without a seed are expanded once per experiment seed.
    """
    model_config = ConfigDict(extra="forbid")

    kind: Literal["threshold", "sorted", "random", "uniform", "explicit"]
    property: Literal["bc", "degree"] = "bc"
    cutoff: Optional[float] = Field(default=None, ge=0)
    level: Optional[str] = None
    interp: Literal["linear", "exponential"] = "linear"
    seed: Optional[int] = None
    profile: Optional[List[int]] = None

    def to_specs(self, ladder: StrategyLadder, seeds: List[int]) -> List[InitSpec]:
        level_idx = ladder.index_from_label(self.level) if self.level is not None else None
        if self.kind == "random":
            run_seeds = [self.seed] if self.seed is not None else seeds
            return [InitSpec(kind="random", seed=s) for s in run_seeds]
        return [InitSpec(
            kind=self.kind,
            property=self.property,
            cutoff=self.cutoff,
            level_idx=level_idx,
            interp=self.interp,
            profile=tuple(self.profile) if self.profile is not None else None,
        )]


Objective = Literal["nash", "social", "uniform_sweep"]


class ExperimentConfig(BaseModel):
    """Validated experiment description."""
    model_config = ConfigDict(extra="forbid")

    dataset: str
    label: Optional[str] = None
    halve: bool = True
    game: GameConfig = Field(default_factory=GameConfig)
    altruism: AltruismConfig = Field(default_factory=AltruismConfig)
    epsilon: float = Field(default=1e-5, gt=0)
    relative_epsilon: bool = False
    max_iters: int = Field(default=200_000, gt=0)
    ladder: Optional[List[float]] = None
    inits: List[InitConfig] = Field(default_factory=list)
    objectives: List[Objective] = Field(default_factory=lambda: ["nash"])
    seeds: List[int] = Field(default_factory=lambda: [0])
    output: str = "results"
    trace_thinning: int = Field(default=1, ge=1)
    bc_directed: bool = False
    workers: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _inits_for_dynamics(self):
        if not self.objectives:
            raise ValueError("at least one objective is required")
        if any(o in ("nash", "social") for o in self.objectives) and not self.inits:
            raise ValueError("objectives 'nash' and 'social' need at least one init")
        try:
            ladder = ladder_from_rates(self.ladder)
        except ValueError as e:
            raise ValueError(f"invalid ladder: {e}") from None
        for init in self.inits:
            if init.kind in ("threshold", "uniform") and init.level is None:
                raise ValueError(f"init kind {init.kind!r} needs a level")
            if init.level is not None:
                ladder.index_from_label(init.level)
        return self

    def build_ladder(self) -> StrategyLadder:
        return ladder_from_rates(self.ladder)

    def init_specs(self) -> List[InitSpec]:
        ladder = self.build_ladder()
        specs: List[InitSpec] = []
        for init in self.inits:
            specs.extend(init.to_specs(ladder, self.seeds))
        return specs

    @property
    def bundle_label(self) -> str:
        return self.label or f"{Path(self.dataset).stem}-{self.altruism.label}"

    def echo(self) -> Dict[str, Any]:
        """JSON-safe copy of the configuration, stored in result bundles."""
        return self.model_dump(mode="json")


def _format_errors(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(p) for p in e['loc']) or '<root>'}: {e['msg']}" for e in error.errors()
    )


def parse_config(data: Union[Dict[str, Any], str]) -> ExperimentConfig:
    """
    Validate a configuration given as a dict or a JSON string.

    Raises:
        ConfigError: with pydantic's messages when validation fails
    """
    try:
        if isinstance(data, str):
            return ExperimentConfig.model_validate_json(data)
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment config: {_format_errors(e)}") from e
    except ValueError as e:
        raise ConfigError(f"Invalid experiment config: {e}") from e


def load_config(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Read and validate a JSON config file; `overrides` replace top-level fields.

    Raises:
        ConfigError: if the file is missing, is not JSON or fails validation
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(data)
