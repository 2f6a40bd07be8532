"""Seed derivation for reproducible, order-independent trial streams.

Trial t of an experiment at prime p draws from a generator seeded with
``derive_seed(master_seed, p, t)``; no generator state is shared between trials,
so trials may run in any order or on any thread.
"""
import numpy as np

MASK64 = (1 << 64) - 1

# Stream tags separate independent uses of one master seed.
SEQUENCE_STREAM = 0
GENERATOR_SAMPLING_STREAM = 1


def splitmix64(x: int) -> int:
    """One SplitMix64 output step for state x."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, p: int, trial_index: int, stream: int = SEQUENCE_STREAM) -> int:
    h = splitmix64(master_seed & MASK64)
    h = splitmix64(h ^ (p & MASK64))
    h = splitmix64(h ^ (trial_index & MASK64))
    return splitmix64(h ^ (stream & MASK64))


def trial_generator(master_seed: int, p: int, trial_index: int, stream: int = SEQUENCE_STREAM) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64DXSM(derive_seed(master_seed, p, trial_index, stream)))
