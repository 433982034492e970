import os
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

import yaml
from pydantic import (
    AfterValidator,
    BaseModel,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from . import __version__
from .core import validate_prob
from .errors import ConfigurationError, IntersubError

THREADS_ENV = "INTERSUB_THREADS"


def _check_prob(values: Optional[List[float]]) -> Optional[List[float]]:
    if values is None:
        return values
    try:
        validate_prob(values)
    except IntersubError as e:
        raise ValueError(str(e)) from e
    return values


ProbList = Annotated[List[float], AfterValidator(_check_prob)]


class BoundsParams(BaseModel):
    a: ProbList
    n: int = Field(ge=1)
    p: ProbList

    @model_validator(mode="after")
    def _same_length(self) -> "BoundsParams":
        if len(self.a) != len(self.p):
            raise ValueError(f"--a has {len(self.a)} entries but --p has {len(self.p)}")
        return self


class PartitionParams(BaseModel):
    energies: Optional[List[float]] = None
    energies_file: Optional[Path] = None
    beta: float = Field(ge=0, allow_inf_nan=False)
    dims: List[int]
    renormalize: bool = False

    @field_validator("dims")
    @classmethod
    def _positive_dims(cls, v: List[int]) -> List[int]:
        if not v or any(d < 1 for d in v):
            raise ValueError("subspace dims must be positive integers")
        return v

    @model_validator(mode="after")
    def _one_source(self) -> "PartitionParams":
        if (self.energies is None) == (self.energies_file is None):
            raise ValueError("give exactly one of --energies or --energies-file")
        return self


class CoarseGrainParams(BaseModel):
    a: ProbList
    lcg: List[int]
    n: int = Field(default=2, ge=1)
    p: Optional[ProbList] = None
    method: Literal["multinomial", "enumerate", "hypergeometric"] = "multinomial"

    @field_validator("lcg")
    @classmethod
    def _positive_l(cls, v: List[int]) -> List[int]:
        if not v or any(l < 1 for l in v):
            raise ValueError("l_cg values must be positive integers")
        return v

    @model_validator(mode="after")
    def _consistent(self) -> "CoarseGrainParams":
        if self.p is not None and len(self.p) != len(self.a):
            raise ValueError(f"--p has {len(self.p)} entries but --a has {len(self.a)}")
        if self.method == "hypergeometric":
            if len(self.a) != 2:
                raise ValueError("--method hypergeometric needs two outcomes")
            if any(l % 2 == 0 for l in self.lcg):
                raise ValueError("--method hypergeometric needs odd --lcg values")
        return self

    @property
    def system_probs(self) -> List[float]:
        return self.p if self.p is not None else [1.0 / len(self.a)] * len(self.a)


class FitParams(BaseModel):
    input: Path
    skip_first: int = Field(default=0, ge=0)
    y_column: Optional[str] = None


class OracleParams(BaseModel):
    p: ProbList
    dims: List[int]
    n: int = Field(ge=1)
    beta: float = Field(ge=0, allow_inf_nan=False)
    energies: Optional[List[float]] = None

    @model_validator(mode="after")
    def _consistent(self) -> "OracleParams":
        if len(self.dims) != len(self.p):
            raise ValueError(f"--dims has {len(self.dims)} entries but --p has {len(self.p)}")
        if self.energies is not None and len(self.energies) != sum(self.dims):
            raise ValueError(f"--energies needs {sum(self.dims)} levels")
        return self


class SweepSettings(BaseModel):
    beta: float = Field(default=1.0, ge=0, allow_inf_nan=False)
    p0: float = Field(default=0.2, ge=0, le=1)
    g: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    t_max: float = Field(default=6.0, ge=0, allow_inf_nan=False)
    t_steps: int = Field(default=240, ge=1)
    pointer_h: Literal["half", "unit"] = "half"


class SpinstarParams(SweepSettings):
    n_total: int = Field(default=1024, ge=1)
    lcg: Optional[int] = Field(default=None, ge=1)
    lcg_list: Optional[List[int]] = None

    @model_validator(mode="after")
    def _divides(self) -> "SpinstarParams":
        if (self.lcg is None) == (self.lcg_list is None):
            raise ValueError("give exactly one of --lcg or --lcg-list")
        for l in self.lcg_values:
            if l < 1 or self.n_total % l:
                raise ValueError(f"l_cg={l} does not divide --n-total {self.n_total}")
        return self

    @property
    def lcg_values(self) -> List[int]:
        return [self.lcg] if self.lcg is not None else list(self.lcg_list)


class ReproDecayParams(BaseModel):
    dims: List[int] = Field(default_factory=lambda: [2, 3, 4, 5])
    skip_first: int = Field(default=1, ge=0)
    l_max_binary: int = Field(default=121, ge=5)
    l_max: int = Field(default=100, ge=4)

    @field_validator("dims")
    @classmethod
    def _at_least_two(cls, v: List[int]) -> List[int]:
        if not v or any(d < 2 for d in v):
            raise ValueError("outcome counts must be >= 2")
        return v


class ReproSweepParams(SweepSettings):
    n_total: int = Field(default=1024, ge=1)
    lcg_list: List[int] = Field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64])

    @model_validator(mode="after")
    def _divides(self) -> "ReproSweepParams":
        for l in self.lcg_list:
            if l < 1 or self.n_total % l:
                raise ValueError(f"l_cg={l} does not divide --n-total {self.n_total}")
        return self


SubcommandParams = Union[
    BoundsParams,
    PartitionParams,
    CoarseGrainParams,
    FitParams,
    OracleParams,
    SpinstarParams,
    ReproDecayParams,
    ReproSweepParams,
]

PARAMS_BY_COMMAND = {
    "bounds": BoundsParams,
    "partition": PartitionParams,
    "coarsegrain": CoarseGrainParams,
    "fit": FitParams,
    "oracle": OracleParams,
    "spinstar": SpinstarParams,
    "repro-decay": ReproDecayParams,
    "repro-sweep": ReproSweepParams,
}


def _flag(loc) -> str:
    names = [str(part) for part in loc if isinstance(part, str)]
    return "--" + names[0].replace("_", "-") if names else "(options)"


def build_params(subcommand: str, values: dict) -> SubcommandParams:
    """Validate raw option values into the subcommand's model.

    Failures become ConfigurationError naming the first offending flag.
    """
    model = PARAMS_BY_COMMAND[subcommand]
    try:
        return model.model_validate(values)
    except ValidationError as e:
        first = e.errors()[0]
        msg = first["msg"].removeprefix("Value error, ")
        raise ConfigurationError(f"{subcommand} {_flag(first['loc'])}: {msg}") from e


class RunConfig(BaseModel):
    subcommand: str
    params: SubcommandParams
    out: Optional[Path] = None
    fmt: Literal["csv", "json"] = "csv"
    log_level: str = "WARNING"

    def save(self, path: Path) -> None:
        """Write the run's provenance next to its output."""
        data = {
            "intersub_run": {
                "version": __version__,
                "subcommand": self.subcommand,
                "params": self.params.model_dump(mode="json"),
                "format": self.fmt,
                "workers": worker_count(),
            }
        }
        with open(path, "w") as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)


def worker_count() -> int:
    """Worker cap from INTERSUB_THREADS, else the available CPUs."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be >= 1, got {value}")
    return value
