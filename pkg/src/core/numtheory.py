"""Exact modular arithmetic over 64-bit integers.

Python integers never overflow, so every intermediate product is exact; the
32-bit bound on moduli only keeps numpy kernels inside uint64.
"""
from functools import lru_cache
from typing import List, Tuple, Union
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .errors import (
    FACTORIZE_TOO_SMALL,
    NOT_PRIME,
    OUT_OF_RANGE,
    ZERO_HAS_NO_INVERSE,
)

logger = logging.getLogger(__name__)

# Deterministic for every n < 2^64.
_MILLER_RABIN_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_PRIMALITY_LIMIT = 1 << 64
MAX_MODULUS = 1 << 32


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test for 0 <= n < 2^64."""
    if n < 0 or n >= _PRIMALITY_LIMIT:
        raise ValueError(f"{OUT_OF_RANGE}: {n}")
    if n < 2:
        return False
    for base in _MILLER_RABIN_BASES:
        if n % base == 0:
            return n == base

    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1

    for base in _MILLER_RABIN_BASES:
        x = pow(base, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> List[Tuple[int, int]]:
    """Factor n by trial division over a 2-3 wheel; returns sorted (prime, exponent) pairs."""
    if n < 2:
        raise ValueError(f"{FACTORIZE_TOO_SMALL}: {n}")

    factors: List[Tuple[int, int]] = []

    def strip(q: int) -> None:
        nonlocal n
        exponent = 0
        while n % q == 0:
            n //= q
            exponent += 1
        if exponent:
            factors.append((q, exponent))

    strip(2)
    strip(3)
    q, step = 5, 2
    while q * q <= n:
        strip(q)
        q += step
        step = 6 - step
    if n > 1:
        factors.append((n, 1))
    return factors


def totient(n: int) -> int:
    if n == 1:
        return 1
    result = n
    for q, _ in factorize(n):
        result = result // q * (q - 1)
    return result


def mod_pow(base: int, exp: int, p: int) -> int:
    if not 0 <= base < p or exp < 0:
        raise ValueError(f"{OUT_OF_RANGE}: base={base}, exp={exp}, p={p}")
    return pow(base, exp, p)


def mod_inverse(r: int, p: int) -> int:
    """Inverse of r modulo the prime p, in 1..p-1."""
    if r % p == 0:
        raise ValueError(ZERO_HAS_NO_INVERSE)
    if not 1 <= r < p:
        raise ValueError(f"{OUT_OF_RANGE}: r={r}, p={p}")
    return pow(r, -1, p)


class PrimeModulus(BaseModel):
    """A verified prime p with the factorization of p-1 cached."""

    model_config = ConfigDict(frozen=True)

    p: int
    factors_p_minus_1: Tuple[Tuple[int, int], ...]

    @model_validator(mode="after")
    def _check_prime(self) -> "PrimeModulus":
        if not 2 <= self.p < MAX_MODULUS or not is_prime(self.p):
            raise ValueError(f"{NOT_PRIME}: {self.p}")
        product = 1
        for q, exponent in self.factors_p_minus_1:
            product *= q**exponent
        if product != self.p - 1:
            raise ValueError(f"factorization of p-1 does not multiply back to {self.p - 1}")
        return self

    @classmethod
    def of(cls, p: int) -> "PrimeModulus":
        return _cached_modulus(p)

    @property
    def group_order(self) -> int:
        return self.p - 1


@lru_cache(maxsize=4096)
def _cached_modulus(p: int) -> PrimeModulus:
    if p < 2 or p >= MAX_MODULUS or not is_prime(p):
        raise ValueError(f"{NOT_PRIME}: {p}")
    factors = tuple(factorize(p - 1)) if p > 2 else ()
    return PrimeModulus(p=p, factors_p_minus_1=factors)


def as_modulus(p: Union[int, PrimeModulus]) -> PrimeModulus:
    return p if isinstance(p, PrimeModulus) else PrimeModulus.of(p)


def is_primitive_root(g: int, modulus: Union[int, PrimeModulus]) -> bool:
    """True iff g has multiplicative order p-1 modulo p."""
    modulus = as_modulus(modulus)
    p = modulus.p
    if not 1 <= g < p:
        return False
    return all(pow(g, (p - 1) // q, p) != 1 for q, _ in modulus.factors_p_minus_1)


def power_table(g: int, modulus: Union[int, PrimeModulus]) -> np.ndarray:
    """g^n mod p for n = 0..p-2, built by block doubling."""
    modulus = as_modulus(modulus)
    p = modulus.p
    size = p - 1
    table = np.ones(size, dtype=np.uint64)
    filled, step = 1, g % p  # step == g^filled
    while filled < size:
        take = min(filled, size - filled)
        table[filled:filled + take] = table[:take] * np.uint64(step) % np.uint64(p)
        step = step * step % p
        filled += take
    return table.astype(np.int64)


@lru_cache(maxsize=256)
def _primitive_roots(p: int) -> Tuple[int, ...]:
    modulus = PrimeModulus.of(p)
    if p == 2:
        return (1,)
    smallest = next(g for g in range(2, p) if is_primitive_root(g, modulus))
    powers = power_table(smallest, modulus)
    exponents = np.arange(p - 1, dtype=np.int64)
    coprime = np.gcd(exponents, p - 1) == 1
    roots = tuple(sorted(int(x) for x in powers[coprime]))
    logger.debug(f"p={p}: {len(roots)} primitive roots, smallest {smallest}")
    return roots


def primitive_roots(modulus: Union[int, PrimeModulus]) -> List[int]:
    """All primitive roots modulo p in increasing order."""
    return list(_primitive_roots(as_modulus(modulus).p))


def primes_in_range(lo: int, hi: int) -> List[int]:
    """Primes in the closed interval [lo, hi] via a numpy sieve."""
    lo = max(lo, 2)
    if hi < lo:
        return []
    sieve = np.ones(hi + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, math.isqrt(hi) + 1):
        if sieve[q]:
            sieve[q * q::q] = False
    return [int(x) for x in np.flatnonzero(sieve[lo:]) + lo]
