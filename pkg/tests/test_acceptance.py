import math

import numpy as np
import pytest

from src.core.acceptance import (
    accept_prob,
    bound,
    cosine_profile,
    cosine_sum,
    meets_bound,
    worst_case_epsilon,
)
from src.core.kernels import KAHAN_THRESHOLD, cosine_sums, exponential_sums
from src.core.reference import load_reference_tables
from src.core.sequences import cyclic_sequence, explicit_sequence, random_sequence, required_length

SEED = 12345
TABLES = load_reference_tables()


def test_accept_prob_example():
    seq = explicit_sequence(5, [1, 2])
    assert cosine_sum(seq, 1) == pytest.approx(-0.5, abs=1e-12)
    assert accept_prob(seq, 1) == pytest.approx(0.0625, abs=1e-12)


@pytest.mark.parametrize("j", [0, 1523, 3046])
def test_members_are_always_accepted(j):
    seq = random_sequence(1523, 161, SEED, 0)
    assert accept_prob(seq, j) == pytest.approx(1.0, abs=1e-12)


def test_accept_prob_is_periodic():
    seq = cyclic_sequence(948, 1523, 161)
    for j in (1, 17, 760):
        assert accept_prob(seq, j) == accept_prob(seq, j + 2 * 1523)


def test_accept_prob_rejects_negative_word():
    with pytest.raises(ValueError):
        accept_prob(explicit_sequence(5, [1]), -1)


def test_all_zero_sequence_always_accepts():
    profile = worst_case_epsilon(explicit_sequence(7, [0, 0, 0]))
    assert profile.worst_eps == 1.0
    assert profile.worst_j == 1
    assert profile.max_abs_cosine_sum == pytest.approx(3.0)


def test_smallest_prime():
    profile = worst_case_epsilon(explicit_sequence(2, [1]))
    assert profile.worst_j == 1
    assert profile.worst_eps == pytest.approx(1.0)


def test_full_cycle_has_flat_profile():
    # k_i runs over every unit, so f(j) = -1 for all j != 0.
    seq = cyclic_sequence(2, 5, 4)
    assert cosine_profile(seq) == pytest.approx([-1.0, -1.0, -1.0, -1.0])
    profile = worst_case_epsilon(seq)
    assert profile.worst_eps == pytest.approx(1 / 16)


@pytest.mark.parametrize("row", TABLES.sequence_examples, ids=lambda row: str(row.p))
def test_cyclic_epsilon_matches_published_values(row):
    seq = cyclic_sequence(row.g, row.p, required_length(row.p, row.eps))
    assert worst_case_epsilon(seq).worst_eps == pytest.approx(row.eps_g, abs=1e-4)


@pytest.mark.parametrize("row", TABLES.different_generators.rows, ids=lambda row: str(row.g))
def test_generator_dependence_matches_published_values(row):
    reference = TABLES.different_generators
    seq = cyclic_sequence(row.g, reference.p, reference.d)
    assert worst_case_epsilon(seq).worst_eps == pytest.approx(row.eps_g, abs=1e-4)


def test_profile_matches_direct_sums():
    seq = random_sequence(101, 40, SEED, 0)
    profile = cosine_profile(seq)
    assert len(profile) == 100
    for j in range(1, 101):
        direct = math.fsum(math.cos(2 * math.pi * (k * j % 101) / 101) for k in seq.ks)
        assert profile[j - 1] == pytest.approx(direct, abs=1e-9)


def test_worst_case_agrees_with_profile():
    seq = random_sequence(211, 30, SEED, 5)
    profile = worst_case_epsilon(seq, keep_profile=True)
    sums = np.abs(np.asarray(profile.cosine_sums))
    assert profile.max_abs_cosine_sum == float(sums.max())
    assert profile.worst_j == int(np.argmax(sums)) + 1
    assert profile.worst_eps == pytest.approx((profile.max_abs_cosine_sum / 30) ** 2, abs=1e-15)


def test_worst_case_is_independent_of_threads():
    seq = random_sequence(9883, 2000, SEED, 0)
    single = worst_case_epsilon(seq, threads=1, keep_profile=True)
    pooled = worst_case_epsilon(seq, threads=8, keep_profile=True)
    assert single == pooled


def test_compensated_sum_for_long_sequences():
    seq = random_sequence(101, KAHAN_THRESHOLD * 2, SEED, 0)
    direct = math.fsum(math.cos(2 * math.pi * (k * 3 % 101) / 101) for k in seq.ks)
    assert cosine_sum(seq, 3) == pytest.approx(direct, abs=1e-9)


def test_exponential_sums_real_part_is_cosine_sum():
    ts = np.array([1, 5, 9, 33, 77], dtype=np.uint64)
    ks = np.arange(1, 101, dtype=np.uint64)
    complex_sums = exponential_sums(ts, ks, 101)
    assert np.array_equal(complex_sums.real, cosine_sums(ts, ks, 101))
    assert np.all(np.abs(cosine_sums(ts, ks, 101)) <= np.abs(complex_sums) + 1e-12)


def test_meets_bound():
    seq = cyclic_sequence(948, 1523, 161)
    assert meets_bound(seq, 0.1)
    assert not meets_bound(explicit_sequence(7, [0, 0]), 0.5)
    profile = worst_case_epsilon(seq)
    assert meets_bound(seq, 0.1, profile) is (profile.max_abs_cosine_sum < bound(0.1, 161))


@pytest.mark.parametrize("eps", [0.0, 1.0])
def test_meets_bound_rejects_eps(eps):
    with pytest.raises(ValueError):
        meets_bound(explicit_sequence(5, [1]), eps)


def test_cosine_sum_range():
    with pytest.raises(ValueError):
        cosine_sum(explicit_sequence(5, [1]), 5)
