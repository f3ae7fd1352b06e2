"""Run configuration: one TOML file, validated, with dotted overrides."""

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from koopman_mpc.config import BANK_FILE, OUTPUT_DIR
from koopman_mpc.control.foc import FocConfig
from koopman_mpc.control.mpc import HorizonConfig
from koopman_mpc.drive.params import MotorParams
from koopman_mpc.errors import ConfigError
from koopman_mpc.koopman.dictionary import Dictionary
from koopman_mpc.koopman.rom import DEFAULT_MIN_PAIRS, DEFAULT_TOL
from koopman_mpc.sim.engine import ScenarioConfig, SimTiming
from koopman_mpc.sim.training import TrainingConfig, default_scenarios

logger = logging.getLogger(__name__)


class KoopmanSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    dictionary: Dictionary = Dictionary()
    tol: float = Field(DEFAULT_TOL, gt=0, lt=1)
    min_pairs: int = Field(DEFAULT_MIN_PAIRS, ge=1)
    method: Literal["svd", "normal"] = "svd"
    holdout_fraction: float = Field(0.8, gt=0, lt=1)


class OutputSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    dir: str = OUTPUT_DIR
    bank_file: str = BANK_FILE


class RunConfig(BaseModel):
    """Everything one experiment needs; every field defaults to the test-bench setup."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = 0
    motor: MotorParams = MotorParams()
    mpc: HorizonConfig = HorizonConfig()
    timing: SimTiming = SimTiming()
    koopman: KoopmanSection = KoopmanSection()
    foc: FocConfig = FocConfig()
    training: TrainingConfig = TrainingConfig()
    scenarios: list[ScenarioConfig] = Field(default_factory=default_scenarios)
    output: OutputSection = OutputSection()

    @property
    def output_dir(self) -> Path:
        return Path(self.output.dir)

    @property
    def bank_path(self) -> Path:
        return self.output_dir / self.output.bank_file

    def training_config(self) -> TrainingConfig:
        return self.training.model_copy(update={"seed": self.seed})

    def scenario(self, name: str) -> ScenarioConfig:
        for scenario in self.scenarios:
            if scenario.name == name:
                return scenario
        names = ", ".join(s.name for s in self.scenarios)
        raise ConfigError(f"Unknown scenario {name!r}; configured: {names}")

    def foc_for(self, scenario: ScenarioConfig) -> FocConfig:
        update = {}
        if scenario.foc_a is not None:
            update["a"] = scenario.foc_a
        if scenario.foc_oversampling is not None:
            update["oversampling"] = scenario.foc_oversampling
        return self.foc.model_copy(update=update)


def parse_override(text: str) -> tuple[list[str], Any]:
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"Override {text!r} is not of the form section.key=value")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    for text in overrides:
        path, value = parse_override(text)
        node = raw
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"Override {text!r}: {part!r} is not a section")
            node = child
        node[path[-1]] = value
    return raw


def load_run_config(
    path: Path | None = None,
    overrides: list[str] | None = None,
    seed: int | None = None,
    out: str | None = None,
) -> RunConfig:
    raw: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError as e:
            raise ConfigError(f"Config file {path} not found") from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"Config file {path}: {e}") from e
    raw = apply_overrides(raw, overrides or [])
    if seed is not None:
        raw["seed"] = seed
    if out is not None:
        raw.setdefault("output", {})["dir"] = out
    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e
    logger.info(f"Loaded configuration ({path or 'defaults'}), output to {config.output_dir}")
    return config
