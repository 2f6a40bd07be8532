from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional
import logging

from pydantic import BaseModel, field_validator, model_validator

from ..core.errors import (
    EPS_OUT_OF_RANGE,
    MISSING_PARAMETER,
    NOT_PRIME,
    NOT_PRIMITIVE_ROOT,
)
from ..core.models import DPolicy, ExperimentKind
from ..core.numtheory import is_primitive_root, PrimeModulus
from ..core.sequences import LogBase
from ..core.settings import DEFAULT_MASTER_SEED
from ..core.simulator import Completion

logger = logging.getLogger(__name__)

CommandName = ExperimentKind


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    MARKDOWN = "markdown"


class Precision(str, Enum):
    SHORT = "short"
    FULL = "full"


# Parameters each command cannot run without.
REQUIRED: Dict[CommandName, tuple] = {
    CommandName.EPSILON: ("p", "g"),
    CommandName.SIMULATE: ("p", "j"),
    CommandName.TABLE1: ("eps",),
    CommandName.TABLE2: ("p", "eps"),
    CommandName.MIN_GEN: ("p",),
    CommandName.HYPOTHESIS: ("p_max",),
    CommandName.RANDOM_RATE: ("p", "eps"),
    CommandName.RANDOM_VS_CYCLIC: (),
    CommandName.AZUMA_TAIL: ("p",),
    CommandName.AIKPS_BOUND: (),
    CommandName.INSTANCE: ("p", "eps", "g"),
    CommandName.STATES: ("eps",),
}

# Fields that steer presentation or scheduling, never report contents.
_PRESENTATION_FIELDS = {"command", "threads", "output", "format", "precision", "timing", "log_level"}


def _split(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class RunConfig(BaseModel):
    command: CommandName
    p: Optional[int] = None
    p_list: List[int] = []
    p_min: int = 2
    p_max: Optional[int] = None
    eps: Optional[float] = None
    eps_list: List[float] = []
    d: Optional[int] = None
    g: Optional[int] = None
    g_list: List[int] = []
    j: Optional[int] = None
    ks: List[int] = []
    trials: Optional[int] = None
    n_random: int = 9
    generators_per_p: int = 3
    lambdas: List[float] = []
    eps_a: float = 1.0
    log_base: LogBase = LogBase.NATURAL
    completion: Completion = Completion.HOUSEHOLDER
    all_d: bool = False
    grid: Optional[Path] = None
    master_seed: int = DEFAULT_MASTER_SEED
    exclude_zero_k: bool = False
    unrounded_threshold: bool = False
    fast_power_oracle: bool = False
    threads: int = 1
    format: OutputFormat = OutputFormat.CSV
    output: Optional[Path] = None
    precision: Precision = Precision.SHORT
    timing: bool = False

    @field_validator("p_list", "eps_list", "g_list", "ks", "lambdas", mode="before")
    @classmethod
    def _split_lists(cls, value: Any) -> Any:
        return _split(value)

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        for name in REQUIRED[self.command]:
            if getattr(self, name) is None:
                raise ValueError(f"{MISSING_PARAMETER}: --{name.replace('_', '-')}")

        for p in self.primes:
            try:
                PrimeModulus.of(p)
            except ValueError:
                raise ValueError(f"{NOT_PRIME}: {p}") from None

        for eps in ([self.eps] if self.eps is not None else []) + self.eps_list:
            if not 0 < eps < 1:
                raise ValueError(f"{EPS_OUT_OF_RANGE}: {eps}")

        if self.command in (CommandName.EPSILON, CommandName.MIN_GEN) and self.eps is None and self.d is None:
            raise ValueError(f"{MISSING_PARAMETER}: --eps or --d")
        if self.command is CommandName.AZUMA_TAIL and self.eps is None and self.d is None:
            raise ValueError(f"{MISSING_PARAMETER}: --eps or --d")
        if self.command is CommandName.HYPOTHESIS and not self.all_d and self.eps is None:
            raise ValueError(f"{MISSING_PARAMETER}: --eps (or --all-d)")

        if self.command is CommandName.TABLE1 and self.g_list and len(self.g_list) != len(self.p_list):
            raise ValueError("--g-list needs exactly one generator per prime in --p-list")
        if self.command in (CommandName.EPSILON, CommandName.INSTANCE, CommandName.TABLE2, CommandName.TABLE1):
            self._check_generators()

        if self.eps is not None and self.d is not None:
            logger.warning(f"--d {self.d} overrides the length required by --eps {self.eps}")
        return self

    def _check_generators(self) -> None:
        if self.p is not None:
            pairs = [(g, self.p) for g in ([self.g] if self.g is not None else []) + self.g_list]
        else:
            pairs = list(zip(self.g_list, self.p_list))
        for g, p in pairs:
            if not is_primitive_root(g, p):
                raise ValueError(f"{NOT_PRIMITIVE_ROOT}: g={g}, p={p}")

    @property
    def primes(self) -> List[int]:
        return ([self.p] if self.p is not None else []) + list(self.p_list)

    @property
    def d_policy(self) -> DPolicy:
        return DPolicy.ALL_BELOW_P if self.all_d else DPolicy.FROM_EPS

    @property
    def overrides(self) -> List[str]:
        return ["d"] if self.eps is not None and self.d is not None else []

    def report_parameters(self) -> Dict[str, Any]:
        """The parameters given on the command line, plus the master seed, embedded in every report."""
        values = self.model_dump(mode="json", exclude=_PRESENTATION_FIELDS, exclude_unset=True)
        values["master_seed"] = self.master_seed
        return values
