"""Loader for the published reference tables in config/reference_tables.yaml."""
from functools import lru_cache
from pathlib import Path
from typing import List, Optional
import logging

import yaml
from pydantic import BaseModel

from .settings import reference_tables_path

logger = logging.getLogger(__name__)


class SequenceExample(BaseModel):
    p: int
    eps: float
    d: int
    g: int
    eps_rand: float
    eps_g: float


class GeneratorValue(BaseModel):
    g: int
    eps_g: float


class DifferentGenerators(BaseModel):
    p: int
    eps: float
    d: int
    threshold: float
    rows: List[GeneratorValue]


class MinGenerator(BaseModel):
    p: int
    eps: float
    d: int
    g_min: int
    eps_g_min: float


class LosingInstance(BaseModel):
    p: int
    eps: float
    g: int
    n_random: int


class ReferenceTables(BaseModel):
    sequence_examples: List[SequenceExample]
    different_generators: DifferentGenerators
    min_generators: List[MinGenerator]
    cyclic_loses_instance: LosingInstance

    def generator_for(self, p: int) -> Optional[int]:
        return next((row.g for row in self.sequence_examples if row.p == p), None)


@lru_cache(maxsize=4)
def _load(path: Path) -> ReferenceTables:
    try:
        with open(path) as f:
            return ReferenceTables(**yaml.safe_load(f))
    except Exception as e:
        logger.error(f"Error loading reference tables from {path}: {e}")
        raise


def load_reference_tables(path: Optional[Path] = None) -> ReferenceTables:
    return _load(Path(path) if path else reference_tables_path())
