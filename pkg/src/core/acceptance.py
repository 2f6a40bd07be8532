"""Closed-form acceptance probability of the automaton and worst-case scans.

For a word a^j the automaton built from k_1..k_d accepts with probability
(f(j)/d)^2, where f(j) = sum_i cos(2*pi*k_i*j/p).
"""
from typing import Optional, Tuple
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from . import kernels
from .errors import EPS_OUT_OF_RANGE, OUT_OF_RANGE
from .sequences import ParameterSequence

logger = logging.getLogger(__name__)

_PROFILE_TOLERANCE = 1e-12


class AcceptanceProfile(BaseModel):
    """Worst acceptance probability over the non-members a^1..a^(p-1)."""

    model_config = ConfigDict(frozen=True)

    p: int
    d: int
    worst_eps: float
    worst_j: int
    max_abs_cosine_sum: float
    # f(j) for j = 1..p-1, kept only on request.
    cosine_sums: Optional[Tuple[float, ...]] = None

    @model_validator(mode="after")
    def _check_profile(self) -> "AcceptanceProfile":
        if not 0.0 <= self.worst_eps <= 1.0:
            raise ValueError(f"worst_eps {self.worst_eps} is not a probability")
        if not 1 <= self.worst_j <= max(1, self.p - 1):
            raise ValueError(f"worst_j {self.worst_j} outside 1..p-1")
        if abs(self.worst_eps - (self.max_abs_cosine_sum / self.d) ** 2) > _PROFILE_TOLERANCE:
            raise ValueError("worst_eps disagrees with max_abs_cosine_sum")
        return self


def bound(eps: float, d: float) -> float:
    """The threshold sqrt(eps)*d every |f(j)| must stay strictly below."""
    return math.sqrt(eps) * d


def cosine_sum(seq: ParameterSequence, j: int) -> float:
    if not 0 <= j < seq.p:
        raise ValueError(f"{OUT_OF_RANGE}: j={j}, p={seq.p}")
    js = np.array([j], dtype=np.uint64)
    return float(kernels.cosine_sums(seq.as_array(), js, seq.p)[0])


def accept_prob(seq: ParameterSequence, j: int) -> float:
    """Probability that the automaton accepts a^j."""
    if j < 0:
        raise ValueError(f"{OUT_OF_RANGE}: j={j}")
    return (cosine_sum(seq, j % seq.p) / seq.d) ** 2


def worst_case_epsilon(
    seq: ParameterSequence,
    threads: int = 1,
    keep_profile: bool = False,
) -> AcceptanceProfile:
    """Exact scan over j = 1..p-1, using f(j) = f(p-j) to visit only j <= p/2."""
    p, d = seq.p, seq.d
    js = np.arange(1, p // 2 + 1, dtype=np.uint64)
    sums = kernels.cosine_sums(seq.as_array(), js, p, threads=threads)
    magnitudes = np.abs(sums)

    # argmax keeps the first maximum, so ties go to the smallest j.
    best = int(np.argmax(magnitudes))
    max_abs = float(magnitudes[best])

    profile = None
    if keep_profile:
        mirrored = sums[: p - p // 2 - 1][::-1]
        profile = tuple(float(x) for x in np.concatenate([sums, mirrored]))

    return AcceptanceProfile(
        p=p,
        d=d,
        worst_eps=min(1.0, (max_abs / d) ** 2),
        worst_j=best + 1,
        max_abs_cosine_sum=max_abs,
        cosine_sums=profile,
    )


def cosine_profile(seq: ParameterSequence) -> np.ndarray:
    """f(j) for j = 1..p-1."""
    return np.asarray(worst_case_epsilon(seq, keep_profile=True).cosine_sums)


def meets_bound(
    seq: ParameterSequence,
    eps: float,
    profile: Optional[AcceptanceProfile] = None,
) -> bool:
    """Strict check max_j |f(j)| < sqrt(eps)*d; a tie at the boundary fails."""
    if not 0 < eps < 1:
        raise ValueError(f"{EPS_OUT_OF_RANGE}: {eps}")
    profile = profile or worst_case_epsilon(seq)
    return profile.max_abs_cosine_sum < bound(eps, seq.d)
