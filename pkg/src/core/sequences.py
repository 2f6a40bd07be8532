"""Parameter sequences k_1..k_d: random, cyclic (powers of a generator) and AIKPS."""
from enum import Enum
from typing import Annotated, Iterable, Literal, Optional, Tuple, Union
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import kernels
from .errors import (
    AIKPS_DEGENERATE,
    CYCLIC_MISMATCH,
    CYCLIC_TOO_LONG,
    EMPTY_PRIME_INTERVAL,
    EMPTY_SEQUENCE,
    EMPTY_T,
    EPS_OUT_OF_RANGE,
    NOT_PRIMITIVE_ROOT,
    RESIDUE_OUT_OF_RANGE,
)
from .numtheory import PrimeModulus, as_modulus, is_primitive_root, primes_in_range
from .rng import trial_generator

logger = logging.getLogger(__name__)


class LogBase(str, Enum):
    NATURAL = "e"
    TWO = "2"
    TEN = "10"

    def log(self, x: float) -> float:
        if self is LogBase.TWO:
            return math.log2(x)
        if self is LogBase.TEN:
            return math.log10(x)
        return math.log(x)


class RandomProvenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["random"] = "random"
    master_seed: int
    trial_index: int
    exclude_zero: bool = False


class CyclicProvenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["cyclic"] = "cyclic"
    g: int
    # False when the generator check was overridden for exploratory use.
    generator_checked: bool = True


class AikpsProvenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["aikps"] = "aikps"
    eps_a: float
    log_base: LogBase = LogBase.NATURAL


class ExplicitProvenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["explicit"] = "explicit"


Provenance = Annotated[
    Union[RandomProvenance, CyclicProvenance, AikpsProvenance, ExplicitProvenance],
    Field(discriminator="kind"),
]


class ParameterSequence(BaseModel):
    """The residues k_1..k_d hardwired into the automaton, with their origin."""

    model_config = ConfigDict(frozen=True)

    p: int
    ks: Tuple[int, ...]
    provenance: Provenance

    @model_validator(mode="after")
    def _check_elements(self) -> "ParameterSequence":
        if not self.ks:
            raise ValueError(EMPTY_SEQUENCE)
        if any(not 0 <= k < self.p for k in self.ks):
            raise ValueError(f"{RESIDUE_OUT_OF_RANGE} (p={self.p})")
        if isinstance(self.provenance, CyclicProvenance):
            g = self.provenance.g
            expected = g % self.p
            for k in self.ks:
                if k != expected:
                    raise ValueError(CYCLIC_MISMATCH)
                expected = expected * g % self.p
        return self

    @property
    def d(self) -> int:
        return len(self.ks)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.ks, dtype=np.uint64)


def unrounded_length(p: Union[int, PrimeModulus], eps: float) -> float:
    if not 0 < eps < 1:
        raise ValueError(f"{EPS_OUT_OF_RANGE}: {eps}")
    return 2.0 * math.log(2 * as_modulus(p).p) / eps


def union_bound(p: int, eps: float, d: int) -> float:
    """Probability bound 2(p-1)e^(-eps*d/2) that a random sequence misses eps."""
    return 2.0 * (p - 1) * math.exp(-eps * d / 2.0)


def required_length(p: Union[int, PrimeModulus], eps: float) -> int:
    """Smallest integer d >= 2 ln(2p)/eps; always satisfies 2(p-1)e^(-eps*d/2) < 1."""
    modulus = as_modulus(p)
    d = math.ceil(unrounded_length(modulus, eps))
    while union_bound(modulus.p, eps, d) >= 1.0:
        d += 1
    return d


def state_count(d: int) -> int:
    return 2 * d


def classical_state_count(p: int) -> int:
    """States any deterministic 1-way automaton for L_p needs."""
    return p


def random_sequence(
    p: Union[int, PrimeModulus],
    d: int,
    master_seed: int,
    trial_index: int,
    exclude_zero: bool = False,
) -> ParameterSequence:
    """d independent uniform residues, determined by (master_seed, p, trial_index)."""
    modulus = as_modulus(p)
    if d < 1:
        raise ValueError(EMPTY_SEQUENCE)
    rng = trial_generator(master_seed, modulus.p, trial_index)
    low = 1 if exclude_zero else 0
    ks = rng.integers(low, modulus.p, size=d, dtype=np.int64)
    return ParameterSequence(
        p=modulus.p,
        ks=tuple(int(k) for k in ks),
        provenance=RandomProvenance(
            master_seed=master_seed, trial_index=trial_index, exclude_zero=exclude_zero
        ),
    )


def cyclic_sequence(
    g: int,
    p: Union[int, PrimeModulus],
    d: int,
    allow_non_primitive: bool = False,
) -> ParameterSequence:
    """k_i = g^i mod p for i = 1..d."""
    modulus = as_modulus(p)
    if not 1 <= d < modulus.p:
        raise ValueError(f"{CYCLIC_TOO_LONG}: d={d}, p={modulus.p}")
    checked = not allow_non_primitive
    if checked and not is_primitive_root(g, modulus):
        raise ValueError(f"{NOT_PRIMITIVE_ROOT}: g={g}, p={modulus.p}")

    ks = []
    k = g % modulus.p
    for _ in range(d):
        ks.append(k)
        k = k * g % modulus.p
    return ParameterSequence(
        p=modulus.p,
        ks=tuple(ks),
        provenance=CyclicProvenance(g=g, generator_checked=checked),
    )


def explicit_sequence(p: Union[int, PrimeModulus], ks: Iterable[int]) -> ParameterSequence:
    return ParameterSequence(
        p=as_modulus(p).p,
        ks=tuple(int(k) for k in ks),
        provenance=ExplicitProvenance(),
    )


class AikpsSets(BaseModel):
    """Primes R in the window (L/2, L], offsets S = 1..s_max and T = {s * r^-1 mod p}."""

    model_config = ConfigDict(frozen=True)

    p: int
    eps_a: float
    log_base: LogBase = LogBase.NATURAL
    window: float
    primes_r: Tuple[int, ...]
    offsets_max: int
    set_t: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_sets(self) -> "AikpsSets":
        for r in self.primes_r:
            if not (self.window / 2 < r <= self.window) or primes_in_range(r, r) != [r]:
                raise ValueError(f"{r} is not a prime in the window ({self.window / 2}, {self.window}]")
        if any(not 0 <= t < self.p for t in self.set_t):
            raise ValueError(RESIDUE_OUT_OF_RANGE)
        if any(a >= b for a, b in zip(self.set_t, self.set_t[1:])):
            raise ValueError("set T must be sorted without duplicates")
        return self

    @property
    def offsets_s(self) -> range:
        return range(1, self.offsets_max + 1)


def build_aikps_sets(
    p: Union[int, PrimeModulus],
    eps_a: float,
    log_base: LogBase = LogBase.NATURAL,
) -> AikpsSets:
    modulus = as_modulus(p)
    log_p = log_base.log(modulus.p)
    window = log_p ** (1.0 + eps_a)
    candidates = primes_in_range(math.floor(window / 2) + 1, math.floor(window))
    primes_r = [r for r in candidates if window / 2 < r <= window and r % modulus.p != 0]
    if not primes_r:
        raise ValueError(f"{EMPTY_PRIME_INTERVAL}: p={modulus.p}, window=({window / 2:.4f}, {window:.4f}]")

    offsets_max = math.ceil(log_p ** (1.0 + 2.0 * eps_a))
    inverses = np.array([pow(r, -1, modulus.p) for r in primes_r], dtype=np.uint64)
    offsets = np.arange(1, offsets_max + 1, dtype=np.uint64)
    set_t = np.unique(np.multiply.outer(offsets, inverses) % np.uint64(modulus.p))
    logger.debug(
        f"AIKPS p={modulus.p} eps_a={eps_a}: |R|={len(primes_r)}, |S|={offsets_max}, |T|={len(set_t)}"
    )
    return AikpsSets(
        p=modulus.p,
        eps_a=eps_a,
        log_base=log_base,
        window=window,
        primes_r=tuple(primes_r),
        offsets_max=offsets_max,
        set_t=tuple(int(t) for t in set_t),
    )


def is_degenerate(sets: AikpsSets) -> bool:
    """S wraps around Z_p or T already covers every unit."""
    return sets.offsets_max >= sets.p or len(sets.set_t) >= sets.p - 1


def aikps_sequence(
    p: Union[int, PrimeModulus],
    eps_a: float,
    log_base: LogBase = LogBase.NATURAL,
) -> Tuple[AikpsSets, ParameterSequence]:
    modulus = as_modulus(p)
    sets = build_aikps_sets(modulus, eps_a, log_base)
    if is_degenerate(sets):
        raise ValueError(f"{AIKPS_DEGENERATE}: p={modulus.p}, |T|={len(sets.set_t)}")
    sequence = ParameterSequence(
        p=modulus.p,
        ks=sets.set_t,
        provenance=AikpsProvenance(eps_a=eps_a, log_base=log_base),
    )
    return sets, sequence


class Theorem4Report(BaseModel):
    """Exponential-sum bound check over T; reported, never asserted."""

    model_config = ConfigDict(frozen=True)

    p: int
    eps_a: float
    primes_r: int
    offsets_max: int
    t_size: int
    max_abs_exponential_sum: float
    argmax_k: int
    ratio: float
    bound_ratio: float
    bound: float
    within_bound: bool
    max_abs_cosine_sum: float
    real_part_max_deviation: float


def theorem4_bound_report(
    sets: AikpsSets,
    p: Optional[Union[int, PrimeModulus]] = None,
    threads: int = 1,
) -> Theorem4Report:
    modulus = as_modulus(p if p is not None else sets.p)
    if not sets.set_t:
        raise ValueError(EMPTY_T)
    t_size = len(sets.set_t)
    ts = np.asarray(sets.set_t, dtype=np.uint64)

    # |S(k)| = |S(p-k)| since S(p-k) is the conjugate, so half the range suffices.
    ks = np.arange(1, modulus.p // 2 + 1, dtype=np.uint64)
    sums = kernels.exponential_sums(ts, ks, modulus.p, threads=threads)
    magnitudes = np.abs(sums)
    best = int(np.argmax(magnitudes))

    cosine_sums = kernels.cosine_sums(ts, ks, modulus.p, threads=threads)
    deviation = float(np.max(np.abs(sums.real - cosine_sums)))

    bound_ratio = sets.log_base.log(modulus.p) ** (-sets.eps_a)
    max_abs = float(magnitudes[best])
    report = Theorem4Report(
        p=modulus.p,
        eps_a=sets.eps_a,
        primes_r=len(sets.primes_r),
        offsets_max=sets.offsets_max,
        t_size=t_size,
        max_abs_exponential_sum=max_abs,
        argmax_k=best + 1,
        ratio=max_abs / t_size,
        bound_ratio=bound_ratio,
        bound=bound_ratio * t_size,
        within_bound=max_abs <= bound_ratio * t_size,
        max_abs_cosine_sum=float(np.max(np.abs(cosine_sums))),
        real_part_max_deviation=deviation,
    )
    logger.info(
        f"AIKPS p={modulus.p}: max|sum|/|T| = {report.ratio:.5f} vs (log p)^-eps = {bound_ratio:.5f}"
    )
    return report
