import numpy as np
import pytest

from src.core.numtheory import (
    PrimeModulus,
    factorize,
    is_prime,
    is_primitive_root,
    mod_inverse,
    mod_pow,
    power_table,
    primes_in_range,
    primitive_roots,
    totient,
)
from src.core.reference import load_reference_tables


@pytest.mark.parametrize(
    "n,expected",
    [
        (0, False),
        (1, False),
        (2, True),
        (3, True),
        (561, False),  # Carmichael
        (1523, True),
        (1524, False),
        (9973, True),
        (3215031751, False),  # strong pseudoprime to bases 2, 3, 5, 7
        ((1 << 61) - 1, True),
        (18446744073709551557, True),  # largest prime below 2^64
        (18446744073709551555, False),
    ],
)
def test_is_prime(n, expected):
    assert is_prime(n) is expected


@pytest.mark.parametrize("n", [-1, 1 << 64])
def test_is_prime_rejects_out_of_range(n):
    with pytest.raises(ValueError):
        is_prime(n)


def test_is_prime_matches_sieve():
    sieve = set(primes_in_range(0, 5000))
    assert [n for n in range(5001) if is_prime(n)] == sorted(sieve)


@pytest.mark.parametrize(
    "n,factors",
    [
        (2, [(2, 1)]),
        (360, [(2, 3), (3, 2), (5, 1)]),
        (1522, [(2, 1), (761, 1)]),
        (9058, [(2, 1), (7, 1), (647, 1)]),
        (2688, [(2, 7), (3, 1), (7, 1)]),
    ],
)
def test_factorize(n, factors):
    assert factorize(n) == factors


def test_factorize_rejects_small():
    with pytest.raises(ValueError):
        factorize(1)


@pytest.mark.parametrize("n,phi", [(1, 1), (12, 4), (1522, 760), (2688, 768), (4092, 1200)])
def test_totient(n, phi):
    assert totient(n) == phi


def test_mod_pow_and_inverse():
    assert mod_pow(3, 6, 7) == 1
    assert mod_inverse(3, 7) == 5
    assert all(r * mod_inverse(r, 1523) % 1523 == 1 for r in range(1, 1523, 37))


@pytest.mark.parametrize("p", primes_in_range(2, 101))
def test_mod_inverse_round_trip(p):
    for r in range(1, p):
        inverse = mod_inverse(r, p)
        assert 1 <= inverse < p
        assert r * inverse % p == 1
        assert mod_inverse(inverse, p) == r


@pytest.mark.parametrize("p", [2, 5, 31, 101, 1523])
def test_multiplication_by_a_unit_permutes_residues(p):
    residues = np.arange(p, dtype=np.int64)
    for j in range(1, p, max(1, p // 50)):
        assert sorted((residues * j % p).tolist()) == residues.tolist()


def test_mod_inverse_of_zero():
    with pytest.raises(ValueError, match="0 has no inverse"):
        mod_inverse(0, 7)


def test_prime_modulus_rejects_composite():
    with pytest.raises(ValueError, match="p is not prime"):
        PrimeModulus.of(1524)


def test_prime_modulus_caches_factorization():
    modulus = PrimeModulus.of(9059)
    assert modulus.factors_p_minus_1 == ((2, 1), (7, 1), (647, 1))
    assert modulus.group_order == 9058
    assert PrimeModulus.of(9059) is modulus


@pytest.mark.parametrize(
    "g,p,expected",
    [(2, 5, True), (4, 5, False), (3, 7, True), (2, 7, False), (0, 7, False), (7, 7, False)],
)
def test_is_primitive_root(g, p, expected):
    assert is_primitive_root(g, p) is expected


@pytest.mark.parametrize(
    "p,roots",
    [(2, [1]), (3, [2]), (5, [2, 3]), (7, [3, 5]), (11, [2, 6, 7, 8])],
)
def test_primitive_roots_small(p, roots):
    assert primitive_roots(p) == roots


@pytest.mark.parametrize("p", [101, 1523, 9059])
def test_primitive_root_count_is_totient(p):
    roots = primitive_roots(p)
    assert len(roots) == totient(p - 1)
    assert roots == sorted(roots)
    assert all(is_primitive_root(g, p) for g in roots[:25])


def test_reference_generators_are_primitive_roots():
    tables = load_reference_tables()
    for row in tables.sequence_examples:
        assert is_primitive_root(row.g, row.p)
    for row in tables.min_generators:
        assert is_primitive_root(row.g_min, row.p)
    for row in tables.different_generators.rows:
        assert is_primitive_root(row.g, tables.different_generators.p)


def test_power_table():
    assert power_table(3, 7).tolist() == [1, 3, 2, 6, 4, 5]
    table = power_table(948, 1523)
    assert sorted(table.tolist()) == list(range(1, 1523))
    assert int(table[161]) == pow(948, 161, 1523)


def test_primes_in_range():
    assert primes_in_range(10, 30) == [11, 13, 17, 19, 23, 29]
    assert primes_in_range(2, 2) == [2]
    assert primes_in_range(24, 28) == []
    assert primes_in_range(30, 10) == []
    assert len(primes_in_range(2, 101)) == 26
    assert np.all(np.diff(primes_in_range(2, 10_000)) > 0)
