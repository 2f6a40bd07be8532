from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .. import __version__
from .sequences import required_length


class ExperimentKind(str, Enum):
    EPSILON = "epsilon"
    SIMULATE = "simulate"
    TABLE1 = "table1"
    TABLE2 = "table2"
    MIN_GEN = "mingen"
    HYPOTHESIS = "hypothesis"
    RANDOM_RATE = "random-rate"
    RANDOM_VS_CYCLIC = "compare"
    AZUMA_TAIL = "azuma"
    AIKPS_BOUND = "aikps"
    INSTANCE = "instance"
    STATES = "states"


class DPolicy(str, Enum):
    FROM_EPS = "from-eps"
    ALL_BELOW_P = "all-below-p"


class ReportMetadata(BaseModel):
    command: ExperimentKind
    seed: Optional[int] = None
    version: str = __version__
    # Random streams come from numpy.random.Generator, whose output is only fixed per numpy release.
    numpy_version: str = np.__version__
    elapsed_ms: Optional[float] = None
    trials: Optional[int] = None
    parameters: Dict[str, Any] = Field(default_factory=dict)
    overrides: List[str] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)


class ExperimentReport(BaseModel):
    kind: ExperimentKind
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    metadata: ReportMetadata

    @model_validator(mode="after")
    def _check_lengths(self) -> "ExperimentReport":
        if "d" in self.metadata.overrides:
            return self
        for row in self.rows:
            if {"p", "eps", "d"} <= row.keys() and row["eps"] is not None:
                expected = required_length(row["p"], row["eps"])
                if row["d"] != expected:
                    raise ValueError(f"row d={row['d']} differs from required length {expected} for p={row['p']}")
        return self
