"""Vectorized cosine and exponential sums modulo p.

Angles are always formed as 2*pi*((k*j) mod p)/p with the reduction done in
exact integer arithmetic. Rows are chunked by a size that depends only on d,
so a row's sum never depends on how many threads ran the scan.
"""
from functools import lru_cache
from typing import List
import math

import numpy as np

from .parallel import ordered_map

TWO_PI = 2.0 * math.pi
_TABLE_LIMIT = 1 << 22
_CHUNK_ELEMENTS = 1 << 20
KAHAN_THRESHOLD = 10_000


@lru_cache(maxsize=16)
def _trig_tables(p: int):
    angles = TWO_PI * np.arange(p, dtype=np.float64) / p
    cos_table, sin_table = np.cos(angles), np.sin(angles)
    cos_table.setflags(write=False)
    sin_table.setflags(write=False)
    return cos_table, sin_table


def cosines(residues: np.ndarray, p: int) -> np.ndarray:
    """cos(2*pi*r/p) for residues already reduced into 0..p-1."""
    if p <= _TABLE_LIMIT:
        return _trig_tables(p)[0][residues]
    return np.cos(TWO_PI * residues.astype(np.float64) / p)


def sines(residues: np.ndarray, p: int) -> np.ndarray:
    if p <= _TABLE_LIMIT:
        return _trig_tables(p)[1][residues]
    return np.sin(TWO_PI * residues.astype(np.float64) / p)


def reduced_products(ks: np.ndarray, js: np.ndarray, p: int) -> np.ndarray:
    """(j*k) mod p for every j (rows) and k (columns); exact for p < 2^32."""
    return np.multiply.outer(js.astype(np.uint64), ks.astype(np.uint64)) % np.uint64(p)


def row_sums(values: np.ndarray) -> np.ndarray:
    if values.shape[1] > KAHAN_THRESHOLD:
        return _compensated_row_sums(values)
    return values.sum(axis=1)


def _compensated_row_sums(values: np.ndarray) -> np.ndarray:
    total = np.zeros(values.shape[0])
    compensation = np.zeros(values.shape[0])
    for column in values.T:
        y = column - compensation
        t = total + y
        compensation = (t - total) - y
        total = t
    return total


def _chunks(js: np.ndarray, d: int) -> List[np.ndarray]:
    rows = max(1, _CHUNK_ELEMENTS // max(d, 1))
    return [js[start:start + rows] for start in range(0, len(js), rows)]


def cosine_sums(ks: np.ndarray, js: np.ndarray, p: int, threads: int = 1) -> np.ndarray:
    """sum_i cos(2*pi*k_i*j/p) for each j in js."""
    ks = np.asarray(ks, dtype=np.uint64)
    js = np.asarray(js, dtype=np.uint64)
    if len(js) == 0:
        return np.zeros(0)
    parts = ordered_map(
        lambda chunk: row_sums(cosines(reduced_products(ks, chunk, p), p)),
        _chunks(js, len(ks)),
        threads,
    )
    return np.concatenate(parts)


def exponential_sums(ts: np.ndarray, ks: np.ndarray, p: int, threads: int = 1) -> np.ndarray:
    """sum_t exp(2*pi*i*t*k/p) for each k in ks; the real part is cosine_sums(ts, ks, p)."""
    ts = np.asarray(ts, dtype=np.uint64)
    ks = np.asarray(ks, dtype=np.uint64)
    if len(ks) == 0:
        return np.zeros(0, dtype=complex)

    def chunk_sums(chunk: np.ndarray) -> np.ndarray:
        residues = reduced_products(ts, chunk, p)
        return row_sums(cosines(residues, p)) + 1j * row_sums(sines(residues, p))

    return np.concatenate(ordered_map(chunk_sums, _chunks(ks, len(ts)), threads))
