from __future__ import annotations

import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, field_validator, model_validator

from .exceptions import InvalidSelectionError


def round_sig(value: float, digits: int = 12) -> float:
    return float(f"{value:.{digits}g}")


class ModeSelection(BaseModel):
    model_config = ConfigDict(frozen=True)

    labels: Tuple[str, ...]

    @field_validator("labels", mode="before")
    @classmethod
    def _unique_labels(cls, v):
        labels = (v,) if isinstance(v, str) else tuple(v)
        if not labels:
            raise InvalidSelectionError("Mode selection must not be empty")
        if len(set(labels)) != len(labels):
            raise InvalidSelectionError(f"Mode selection has duplicate labels: {labels}")
        return labels

    def __len__(self) -> int:
        return len(self.labels)


class Partition(BaseModel):
    model_config = ConfigDict(frozen=True)

    side_a: ModeSelection
    side_b: ModeSelection

    @model_validator(mode="after")
    def _disjoint(self):
        overlap = set(self.side_a.labels) & set(self.side_b.labels)
        if overlap:
            raise InvalidSelectionError(f"Partition sides overlap on {sorted(overlap)}")
        return self

    @classmethod
    def of(cls, side_a, side_b) -> "Partition":
        return cls(side_a=ModeSelection(labels=side_a), side_b=ModeSelection(labels=side_b))

    @classmethod
    def one_vs_rest(cls, label: str, modes) -> "Partition":
        return cls.of((label,), [m for m in modes if m != label])

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.side_a.labels + self.side_b.labels


class TripartiteClass(str, Enum):
    BISEPARABLE = "biseparable"
    ONE_PAIR = "one_pair"
    TWO_WAY = "two_way"
    GHZ = "ghz"
    FULL_WITH_PAIRS = "full_with_pairs"


class EntanglementReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    modes: Tuple[str, str, str]
    # keys are "x|y" for pairs and the single mode label for 1-vs-2 splits
    pair_margins: Dict[str, float]
    bipartition_margins: Dict[str, float]
    tripartite_class: TripartiteClass
    entangled_pairs: List[Tuple[str, str]] = []
    shared_mode: Optional[str] = None

    def pair_margin(self, x: str, y: str) -> float:
        key = f"{x}|{y}"
        if key not in self.pair_margins:
            key = f"{y}|{x}"
        return self.pair_margins[key]


class ScenarioParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    s: float = Field(allow_inf_nan=False)
    n_bar: float = Field(ge=0, allow_inf_nan=False)
    t_sq: float = Field(ge=0, le=1)

    @property
    def n_tilde(self) -> float:
        return 2 * self.n_bar + 1

    @property
    def t(self) -> float:
        return math.sqrt(self.t_sq)

    @property
    def r(self) -> float:
        return math.sqrt(1 - self.t_sq)

    @property
    def tau(self) -> float:
        """Interaction time in units of 1/gamma, from t^2 = exp(-tau)."""
        return math.inf if self.t_sq == 0 else -math.log(self.t_sq)

    @property
    def env_squeezing(self) -> float:
        """Squeezing s_e of the purification, cosh(2 s_e) = n_tilde."""
        return 0.5 * math.acosh(self.n_tilde)


class ChainParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: ScenarioParams
    n_splitters: int = Field(ge=1)

    @property
    def splitter_t(self) -> float:
        """Amplitude transmittivity of each splitter; N of them multiply to t."""
        return self.scenario.t_sq ** (1 / (2 * self.n_splitters))

    @property
    def splitter_r(self) -> float:
        return math.sqrt(1 - self.splitter_t ** 2)


class ModelKind(str, Enum):
    COLLECTIVE = "collective"
    CHAIN = "chain"
    CLOSED_FORM = "closed_form"


class SweepGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_bar_values: List[float] = Field(min_length=1)
    t_sq_values: List[float] = Field(min_length=1)
    s: float = Field(default=1.0, allow_inf_nan=False)
    model: ModelKind = ModelKind.COLLECTIVE
    n_splitters: int = Field(default=100, ge=1)

    @field_validator("n_bar_values")
    @classmethod
    def _n_bar_axis(cls, v: List[float]) -> List[float]:
        if any(x < 0 or not math.isfinite(x) for x in v):
            raise ValueError("n_bar values must be finite and >= 0")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("n_bar values must be strictly ascending")
        return v

    @field_validator("t_sq_values")
    @classmethod
    def _t_sq_axis(cls, v: List[float]) -> List[float]:
        if any(not 0 <= x <= 1 for x in v):
            raise ValueError("t_sq values must lie in [0, 1]")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("t_sq values must be strictly ascending")
        return v

    @classmethod
    def linspace(cls, n_bar: Tuple[float, float, int], t_sq: Tuple[float, float, int], **kwargs) -> "SweepGrid":
        def axis(lo: float, hi: float, count: int) -> List[float]:
            if count < 1:
                raise ValueError("axis needs at least one point")
            if count == 1:
                return [float(lo)]
            return [lo + (hi - lo) * k / (count - 1) for k in range(count)]

        return cls(n_bar_values=axis(*n_bar), t_sq_values=axis(*t_sq), **kwargs)

    @property
    def points(self) -> List[Tuple[float, float]]:
        return [(n, t) for n in self.n_bar_values for t in self.t_sq_values]


CSV_HEADER = (
    "n_bar", "t_sq", "s",
    "margin_a1a2", "margin_a1c0", "margin_a2c0",
    "bip_a1", "bip_a2", "bip_c0",
    "class",
)


class SweepRecord(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    n_bar: float
    t_sq: float
    s: float
    margin_a1a2: float
    margin_a1c0: float
    margin_a2c0: float
    bip_a1: float
    bip_a2: float
    bip_c0: float
    tripartite_class: TripartiteClass = Field(
        validation_alias=AliasChoices("class", "tripartite_class"),
        serialization_alias="class",
    )

    @field_validator(
        "margin_a1a2", "margin_a1c0", "margin_a2c0", "bip_a1", "bip_a2", "bip_c0",
    )
    @classmethod
    def _twelve_digits(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("margins must be finite")
        return round_sig(v)

    def as_row(self) -> Dict[str, object]:
        return self.model_dump(mode="json", by_alias=True)


class Command(str, Enum):
    CLASSIFY = "classify"
    SWEEP = "sweep"
    THRESHOLDS = "thresholds"
    CROSSCHECK = "crosscheck"
    PURIFY = "purify"
    TRAJECTORY = "trajectory"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: Command
    s: float = Field(default=1.0, allow_inf_nan=False)
    n_bar: Optional[float] = Field(default=None, ge=0)
    t_sq: Optional[float] = Field(default=None, ge=0, le=1)
    nbar_range: Optional[Tuple[float, float, int]] = None
    tsq_range: Optional[Tuple[float, float, int]] = None
    model: ModelKind = ModelKind.COLLECTIVE
    n_splitters: int = Field(default=100, ge=1)
    steps: int = Field(default=1000, ge=1)
    samples: int = Field(default=0, ge=0)
    fmt: OutputFormat = OutputFormat.JSON
    output: Optional[str] = None
    seed: int = 0
    backend_url: Optional[str] = None

    @model_validator(mode="after")
    def _command_inputs(self):
        needs_point = {Command.CLASSIFY, Command.CROSSCHECK, Command.PURIFY, Command.TRAJECTORY}
        if self.command in needs_point and (self.n_bar is None or self.t_sq is None):
            raise ValueError(f"'{self.command.value}' needs --nbar and --tsq")
        if self.command == Command.THRESHOLDS and self.n_bar is None:
            raise ValueError(f"'{self.command.value}' needs --nbar")
        if self.command == Command.SWEEP and (self.nbar_range is None or self.tsq_range is None):
            raise ValueError("'sweep' needs --nbar-range and --tsq-range")
        if self.command == Command.TRAJECTORY and self.samples < 2:
            raise ValueError("'trajectory' needs --samples >= 2")
        return self

    def scenario(self) -> ScenarioParams:
        return ScenarioParams(s=self.s, n_bar=self.n_bar, t_sq=self.t_sq)

    def grid(self) -> SweepGrid:
        return SweepGrid.linspace(
            self.nbar_range, self.tsq_range, s=self.s, model=self.model, n_splitters=self.n_splitters,
        )
