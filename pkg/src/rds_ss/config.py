"""Schemas for the YAML/JSON run configs used by ``simulate``, ``study`` and ``curves``."""

from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from rds_ss.domain import DegreeDistribution, SimConfig
from rds_ss.errors import ParseError, RdsIOError
from rds_ss.harness import Scenario
from rds_ss.netgen import MixingProbs, NetParams
from rds_ss.rds_sim import RdsDesign


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NetSpec(_Strict):
    N: int = Field(ge=4)
    prevalence: float = Field(0.2, gt=0, lt=1)
    mean_degree: float = Field(7.0, gt=0)
    w: float = Field(1.0, gt=0)
    R: float = Field(5.0, gt=0)
    probs: Optional[tuple[float, float, float]] = None  # (p_II, p_IU, p_UU) override

    def params(self) -> NetParams:
        return NetParams(self.N, self.prevalence, self.mean_degree, self.w, self.R)

    def mixing(self) -> Optional[MixingProbs]:
        return MixingProbs(*self.probs) if self.probs else None


class ConfigurationSpec(_Strict):
    degree_counts: dict[int, int]
    prevalence: float = Field(0.0, ge=0, lt=1)

    def dist(self) -> DegreeDistribution:
        return DegreeDistribution(self.degree_counts, sum(self.degree_counts.values()))


class DesignSpec(_Strict):
    target_n: int = Field(ge=1)
    seed_count: int = Field(10, ge=1)
    coupons: int = Field(2, ge=1)
    seed_regime: Literal["RANDOM", "ALL_INFECTED", "ALL_UNINFECTED"] = "RANDOM"
    reseed: bool = False

    def design(self) -> RdsDesign:
        return RdsDesign(self.target_n, self.seed_count, self.coupons, self.seed_regime, self.reseed)


class SimSpec(_Strict):
    trials: int = Field(500, ge=1)
    iterations: int = Field(3, ge=1)
    isotonic: bool = True

    def config(self) -> SimConfig:
        return SimConfig(self.trials, self.iterations, isotonic=self.isotonic)


class SimulateConfig(_Strict):
    net: Optional[NetSpec] = None
    configuration: Optional[ConfigurationSpec] = None
    design: Optional[DesignSpec] = None
    graphs: int = Field(1, ge=1)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _one_population(self):
        if (self.net is None) == (self.configuration is None):
            raise ValueError("give exactly one of 'net' or 'configuration'")
        return self


class ScenarioSpec(_Strict):
    name: str
    net: NetSpec
    design: DesignSpec
    replicates: int = Field(200, ge=1)
    estimators: list[Literal["SS", "VH", "MEAN"]] = ["SS", "VH"]
    assumed_N: list[Union[Literal["TRUE", "NHAT_S", "NHAT_L"], int]] = ["TRUE"]
    sim: SimSpec = SimSpec()

    def scenario(self) -> Scenario:
        return Scenario(
            self.name,
            self.net.params(),
            self.design.design(),
            self.replicates,
            tuple(self.estimators),
            tuple(self.assumed_N),
            self.sim.config(),
            self.net.mixing(),
        )


class StudyConfig(_Strict):
    scenarios: list[ScenarioSpec] = []
    preset: Optional[str] = None
    replicates: Optional[int] = Field(None, ge=1)
    trials: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _something(self):
        if not self.scenarios and not self.preset:
            raise ValueError("give 'scenarios' or 'preset'")
        return self


class CurvesConfig(_Strict):
    degree_counts: Optional[dict[int, int]] = None
    net: Optional[NetSpec] = None
    fractions: Optional[list[float]] = None
    n_list: Optional[list[int]] = None
    trials: int = Field(2000, ge=1)
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check(self):
        if (self.degree_counts is None) == (self.net is None):
            raise ValueError("give exactly one of 'degree_counts' or 'net'")
        if (self.fractions is None) == (self.n_list is None):
            raise ValueError("give exactly one of 'fractions' or 'n_list'")
        return self


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise RdsIOError(f"cannot read {path}: {e}") from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ParseError(f"invalid config: {e}", mark.line + 1 if mark else None) from e
    if not isinstance(data, dict):
        raise ParseError("config must be a mapping")
    return data
