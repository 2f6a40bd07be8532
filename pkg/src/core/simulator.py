"""Explicit state-vector simulation of the 2d-state automaton.

State q_{i,0} sits at index 2(i-1) and q_{i,1} at 2(i-1)+1, so the letter
transformation is block diagonal with one 2x2 rotation per sub-automaton.
The start state and the only accepting state are both q_{1,0} (index 0).
"""
from enum import Enum
from typing import Iterator, List, Tuple
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from .errors import NOT_NORMALIZED, NOT_UNIT_VECTOR, NOT_UNITARY, OUT_OF_RANGE
from .sequences import ParameterSequence

logger = logging.getLogger(__name__)

UNITARY_TOLERANCE = 1e-12
NORM_TOLERANCE = 1e-10


class Completion(str, Enum):
    HOUSEHOLDER = "householder"
    QR = "qr"


class UnitaryMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: np.ndarray

    @field_validator("entries")
    @classmethod
    def _check_unitary(cls, entries: np.ndarray) -> np.ndarray:
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"{NOT_UNITARY}: shape {entries.shape}")
        defect = unitarity_defect(entries)
        if defect >= UNITARY_TOLERANCE:
            raise ValueError(f"{NOT_UNITARY}: max|U*U - I| = {defect:.3e}")
        entries.setflags(write=False)
        return entries

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


class StateVector(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    amplitudes: np.ndarray

    @field_validator("amplitudes")
    @classmethod
    def _check_norm(cls, amplitudes: np.ndarray) -> np.ndarray:
        amplitudes = np.array(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"{NOT_NORMALIZED}: norm {norm!r}")
        amplitudes.setflags(write=False)
        return amplitudes

    @property
    def dim(self) -> int:
        return self.amplitudes.size


def unitarity_defect(matrix: np.ndarray) -> float:
    """max |U^dagger U - I| over all entries."""
    identity = np.eye(matrix.shape[0])
    return float(np.max(np.abs(matrix.conj().T @ matrix - identity)))


def _unit_vector(alpha) -> np.ndarray:
    vector = np.array(alpha, dtype=complex).reshape(-1)
    norm = np.linalg.norm(vector) if vector.size else 0.0
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise ValueError(f"{NOT_UNIT_VECTOR}: norm {norm!r}")
    return vector / norm


def _householder_first_column(alpha: np.ndarray) -> np.ndarray:
    pivot = alpha[0]
    phase = pivot / abs(pivot) if abs(pivot) > 0 else 1.0
    target = alpha * np.conj(phase)
    # Reflect e_1 onto -target: target[0] >= 0 keeps |w| >= sqrt(2).
    w = target.copy()
    w[0] += 1.0
    reflector = np.eye(alpha.size, dtype=complex) - 2.0 * np.outer(w, w.conj()) / np.vdot(w, w).real
    return -phase * reflector


def _qr_first_column(alpha: np.ndarray) -> np.ndarray:
    basis = np.eye(alpha.size, dtype=complex)
    basis[:, 0] = alpha
    q, r = np.linalg.qr(basis)
    q[:, 0] *= r[0, 0] / abs(r[0, 0])
    return q


_COMPLETIONS = {
    Completion.HOUSEHOLDER: _householder_first_column,
    Completion.QR: _qr_first_column,
}


def unitary_with_first_column(alpha, completion: Completion = Completion.HOUSEHOLDER) -> UnitaryMatrix:
    """A unitary U with U e_1 = alpha."""
    vector = _unit_vector(alpha)
    return UnitaryMatrix(entries=_COMPLETIONS[Completion(completion)](vector))


def unitary_with_first_row(alpha, completion: Completion = Completion.HOUSEHOLDER) -> UnitaryMatrix:
    """A unitary U whose first row is alpha, so U conj(alpha) = e_1 (U alpha = e_1 for real alpha)."""
    vector = _unit_vector(alpha)
    column = _COMPLETIONS[Completion(completion)](vector.conj())
    return UnitaryMatrix(entries=column.conj().T)


def letter_matrix(ks: np.ndarray, p: int, power: int = 1) -> np.ndarray:
    """Block-diagonal rotations by 2*pi*(power*k_i mod p)/p."""
    ks = np.asarray(ks, dtype=np.uint64)
    residues = ks * np.uint64(power % p) % np.uint64(p)
    angles = 2.0 * math.pi * residues.astype(np.float64) / p
    c, s = np.cos(angles), np.sin(angles)
    zero, one = np.arange(0, 2 * ks.size, 2), np.arange(1, 2 * ks.size, 2)
    matrix = np.zeros((2 * ks.size, 2 * ks.size), dtype=complex)
    matrix[zero, zero] = c
    matrix[one, zero] = s
    matrix[zero, one] = -s
    matrix[one, one] = c
    return matrix


def _embed_on_zero_states(block: np.ndarray, dim: int) -> np.ndarray:
    """block on span{q_{i,0}}, identity on span{q_{i,1}}."""
    zero_states = np.arange(0, dim, 2)
    full = np.eye(dim, dtype=complex)
    full[np.ix_(zero_states, zero_states)] = block
    return full


class QfaMachine(BaseModel):
    """Measure-once 1-way automaton over {a} with endmarkers."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    p: int
    d: int
    ks: Tuple[int, ...]
    v_left: UnitaryMatrix
    v_letter: UnitaryMatrix
    v_right: UnitaryMatrix
    start_index: int = 0
    accept_indices: Tuple[int, ...] = (0,)

    @model_validator(mode="after")
    def _check_shape(self) -> "QfaMachine":
        dim = 2 * self.d
        for name in ("v_left", "v_letter", "v_right"):
            if getattr(self, name).dim != dim:
                raise ValueError(f"{name} must act on exactly 2d = {dim} states")
        if self.accept_indices != (self.start_index,) or self.start_index != 0:
            raise ValueError("the only accepting state must be q_{1,0}")
        return self

    @property
    def dim(self) -> int:
        return 2 * self.d

    @property
    def state_labels(self) -> List[str]:
        return [f"q_{i},{b}" for i in range(1, self.d + 1) for b in (0, 1)]


def build_qfa(seq: ParameterSequence, completion: Completion = Completion.HOUSEHOLDER) -> QfaMachine:
    d = seq.d
    dim = 2 * d
    psi_0 = np.full(d, 1.0 / math.sqrt(d))
    left = unitary_with_first_column(psi_0, completion).entries
    right = unitary_with_first_row(psi_0, completion).entries
    machine = QfaMachine(
        p=seq.p,
        d=d,
        ks=seq.ks,
        v_left=UnitaryMatrix(entries=_embed_on_zero_states(left, dim)),
        v_letter=UnitaryMatrix(entries=letter_matrix(seq.as_array(), seq.p)),
        v_right=UnitaryMatrix(entries=_embed_on_zero_states(right, dim)),
    )
    logger.debug(f"built {dim}-state automaton for p={seq.p} ({completion} completion)")
    return machine


def trajectory(machine: QfaMachine, j: int, fast_power: bool = False) -> Iterator[StateVector]:
    """Every superposition on the way through the endmarked word for a^j."""
    if j < 0:
        raise ValueError(f"{OUT_OF_RANGE}: j={j}")
    state = np.zeros(machine.dim, dtype=complex)
    state[machine.start_index] = 1.0
    yield StateVector(amplitudes=state)

    state = machine.v_left.entries @ state
    yield StateVector(amplitudes=state)

    # Every rotation has order dividing p, so j mod p letters suffice.
    letters = j % machine.p
    if fast_power:
        state = letter_matrix(np.asarray(machine.ks), machine.p, power=letters) @ state
        yield StateVector(amplitudes=state)
    else:
        for _ in range(letters):
            state = machine.v_letter.entries @ state
            yield StateVector(amplitudes=state)

    state = machine.v_right.entries @ state
    yield StateVector(amplitudes=state)


def run(machine: QfaMachine, j: int, fast_power: bool = False) -> float:
    """Probability that the machine accepts a^j."""
    final = None
    for final in trajectory(machine, j, fast_power=fast_power):
        pass
    amplitudes = final.amplitudes[list(machine.accept_indices)]
    return float(np.sum(np.abs(amplitudes) ** 2))


def single_rotation_state(k: int, j: int, p: int) -> Tuple[float, float]:
    """Amplitudes (q_0, q_1) of the 2-state automaton U_k after reading a^j."""
    if not 1 <= k < p or j < 0:
        raise ValueError(f"{OUT_OF_RANGE}: k={k}, j={j}, p={p}")
    angle = 2.0 * math.pi * ((j * k) % p) / p
    return math.cos(angle), math.sin(angle)


def single_rotation_run(k: int, j: int, p: int) -> float:
    return single_rotation_state(k, j, p)[0] ** 2
