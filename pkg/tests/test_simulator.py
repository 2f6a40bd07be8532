import math

import numpy as np
import pytest

from src.core.acceptance import accept_prob
from src.core.numtheory import primes_in_range, primitive_roots
from src.core.sequences import cyclic_sequence, explicit_sequence, random_sequence
from src.core.simulator import (
    Completion,
    QfaMachine,
    StateVector,
    UnitaryMatrix,
    build_qfa,
    letter_matrix,
    run,
    single_rotation_run,
    single_rotation_state,
    trajectory,
    unitarity_defect,
    unitary_with_first_column,
    unitary_with_first_row,
)

SEED = 12345
SMALL_PRIMES = primes_in_range(2, 31)


def _oracle_sequences(p):
    """Twenty sequences per prime: random, cyclic where one fits, and all-zero."""
    rng = np.random.default_rng(p)
    sequences = [explicit_sequence(p, [0] * 3)]
    if p > 2:
        g = primitive_roots(p)[0]
        sequences.append(cyclic_sequence(g, p, min(p - 1, 6)))
    trial = 0
    while len(sequences) < 20:
        sequences.append(random_sequence(p, int(rng.integers(1, 9)), SEED, trial))
        trial += 1
    return sequences


@pytest.mark.parametrize("completion", list(Completion))
@pytest.mark.parametrize("size", [1, 2, 5, 16])
def test_first_column_completion(completion, size):
    rng = np.random.default_rng(size)
    alpha = rng.normal(size=size) + 1j * rng.normal(size=size)
    alpha /= np.linalg.norm(alpha)
    u = unitary_with_first_column(alpha, completion)
    assert unitarity_defect(u.entries) < 1e-12
    assert np.allclose(u.entries[:, 0], alpha, atol=1e-12)


@pytest.mark.parametrize("completion", list(Completion))
def test_first_row_completion_maps_uniform_state_home(completion):
    psi = np.full(9, 1 / 3)
    u = unitary_with_first_row(psi, completion)
    e1 = np.zeros(9)
    e1[0] = 1.0
    assert np.allclose(u.entries @ psi, e1, atol=1e-12)


@pytest.mark.parametrize("completion", list(Completion))
@pytest.mark.parametrize("size", [2, 3, 8, 64])
def test_first_row_completion_maps_real_vectors_home(completion, size):
    rng = np.random.default_rng(SEED + size)
    e1 = np.zeros(size)
    e1[0] = 1.0
    for _ in range(100):
        alpha = rng.normal(size=size)
        alpha /= np.linalg.norm(alpha)
        u = unitary_with_first_row(alpha, completion)
        assert unitarity_defect(u.entries) < 1e-12
        assert np.allclose(u.entries[0], alpha, atol=1e-12)
        assert np.max(np.abs(u.entries @ alpha - e1)) < 1e-12


def test_completion_rejects_non_unit_vector():
    with pytest.raises(ValueError, match="unit norm"):
        unitary_with_first_column([1.0, 1.0])


def test_unitary_matrix_rejects_non_unitary():
    with pytest.raises(ValueError, match="not unitary"):
        UnitaryMatrix(entries=np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_state_vector_rejects_lost_norm():
    with pytest.raises(ValueError, match="unit norm"):
        StateVector(amplitudes=np.array([1.0, 1.0]))


def test_machine_shape_and_labels():
    machine = build_qfa(random_sequence(31, 4, SEED, 0))
    assert machine.dim == 8
    assert machine.state_labels[:3] == ["q_1,0", "q_1,1", "q_2,0"]
    for matrix in (machine.v_left, machine.v_letter, machine.v_right):
        assert unitarity_defect(matrix.entries) < 1e-12


def test_machine_rejects_other_accepting_states():
    machine = build_qfa(random_sequence(31, 2, SEED, 0))
    with pytest.raises(ValueError):
        QfaMachine(**{**dict(machine), "accept_indices": (1,)})


@pytest.mark.parametrize("completion", list(Completion))
def test_right_endmarker_undoes_left(completion):
    machine = build_qfa(random_sequence(101, 12, SEED, 0), completion)
    start = np.zeros(machine.dim)
    start[0] = 1.0
    assert np.allclose(machine.v_right.entries @ (machine.v_left.entries @ start), start, atol=1e-12)


@pytest.mark.parametrize("p", [5, 31, 101])
def test_letter_has_order_p(p):
    machine = build_qfa(random_sequence(p, 6, SEED, 1))
    power = np.linalg.matrix_power(machine.v_letter.entries, p)
    assert np.max(np.abs(power - np.eye(machine.dim))) < 1e-8


@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_oracle_matches_closed_form(p):
    for seq in _oracle_sequences(p):
        machine = build_qfa(seq)
        for j in range(2 * p + 1):
            assert abs(run(machine, j) - accept_prob(seq, j)) < 1e-9


@pytest.mark.parametrize("p", [7, 13, 31])
def test_completions_agree(p):
    for seq in _oracle_sequences(p)[:8]:
        householder = build_qfa(seq, Completion.HOUSEHOLDER)
        qr = build_qfa(seq, Completion.QR)
        for j in range(p + 1):
            assert abs(run(householder, j) - run(qr, j)) < 1e-10


def test_fast_power_matches_letter_by_letter():
    seq = cyclic_sequence(3, 31, 10)
    machine = build_qfa(seq)
    for j in (0, 1, 17, 30, 31, 45):
        assert run(machine, j, fast_power=True) == pytest.approx(run(machine, j), abs=1e-9)


def test_trajectory_visits_every_step():
    machine = build_qfa(random_sequence(11, 3, SEED, 0))
    states = list(trajectory(machine, 14))
    # start, after the left endmarker, 14 mod 11 letters, after the right endmarker
    assert len(states) == 1 + 1 + 3 + 1
    assert all(abs(np.linalg.norm(s.amplitudes) - 1.0) < 1e-10 for s in states)
    assert len(list(trajectory(machine, 14, fast_power=True))) == 4


def test_letter_matrix_power():
    ks = np.array([1, 4, 9], dtype=np.uint64)
    assert np.allclose(
        letter_matrix(ks, 13, power=5),
        np.linalg.matrix_power(letter_matrix(ks, 13), 5),
        atol=1e-12,
    )


def test_single_rotation():
    assert single_rotation_run(1, 0, 5) == 1.0
    c, s = single_rotation_state(1, 1, 4 + 1)
    assert c * c + s * s == pytest.approx(1.0)
    for k in range(1, 7):
        for j in range(10):
            expected = math.cos(2 * math.pi * (j * k % 7) / 7) ** 2
            assert single_rotation_run(k, j, 7) == pytest.approx(expected, abs=1e-12)
            assert accept_prob(explicit_sequence(7, [k]), j) == pytest.approx(expected, abs=1e-12)


def test_single_rotation_range():
    with pytest.raises(ValueError):
        single_rotation_state(0, 1, 5)
