from typing import Tuple
import math

Z_95 = 1.959963984540054


def wilson_interval(successes: int, n: int, z: float = Z_95) -> Tuple[float, float]:
    """Wilson score interval as (center, half_width)."""
    if n <= 0:
        raise ValueError("n must be positive")
    f = successes / n
    denominator = 1.0 + z * z / n
    center = (f + z * z / (2 * n)) / denominator
    half_width = z / denominator * math.sqrt(f * (1 - f) / n + z * z / (4 * n * n))
    return center, half_width


def proportion_sigma(q: float, n: int) -> float:
    """Standard deviation of an empirical frequency of an event with probability q."""
    q = min(max(q, 0.0), 1.0)
    return math.sqrt(q * (1.0 - q) / n)
