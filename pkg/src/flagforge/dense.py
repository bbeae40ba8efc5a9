"""Dense linear-algebra kernel shared by the state-vector engine and oracles.

Qubit 0 is the least significant bit of a basis index. In a multi-qubit gate
matrix the first listed qubit is the most significant bit of the local index,
so ``CX`` on (control, target) is the familiar [[I,0],[0,X]] block matrix.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .angles import DyadicAngle
from .circuits import Circuit, Instruction

PAULI_MATS = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

UNITARY_OF_MAX_QUBITS = 13

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
_S = np.diag([1, 1j]).astype(np.complex128)


def _rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _rzz(theta: float) -> np.ndarray:
    # ZZ eigenvalue is +1 on 00/11 and -1 on 01/10
    lo, hi = np.exp(-0.5j * theta), np.exp(0.5j * theta)
    return np.diag([lo, hi, hi, lo])


def _controlled(block: np.ndarray) -> np.ndarray:
    d = block.shape[0]
    out = np.eye(2 * d, dtype=np.complex128)
    out[d:, d:] = block
    return out


@lru_cache(maxsize=None)
def _matrix(kind: str, angle: DyadicAngle | None) -> np.ndarray:
    theta = angle.radians() if angle is not None else 0.0
    if kind in PAULI_MATS:
        m = PAULI_MATS[kind]
    elif kind == "H":
        m = _H
    elif kind == "S":
        m = _S
    elif kind == "Sdg":
        m = _S.conj()
    elif kind == "CX":
        m = _controlled(PAULI_MATS["X"])
    elif kind == "CZ":
        m = _controlled(PAULI_MATS["Z"])
    elif kind == "CCX":
        m = _controlled(_controlled(PAULI_MATS["X"]))
    elif kind == "CCZ":
        m = _controlled(_controlled(PAULI_MATS["Z"]))
    elif kind == "RZ":
        m = _rz(theta)
    elif kind == "RZZ":
        m = _rzz(theta)
    elif kind == "CRZ":
        m = _controlled(_rz(theta))
    elif kind == "CRZZ":
        m = _controlled(_rzz(theta))
    else:
        raise ValueError(f"no matrix for instruction kind {kind!r}")
    m = np.asarray(m, dtype=np.complex128)
    m.setflags(write=False)
    return m


def instruction_matrix(inst: Instruction) -> np.ndarray:
    """Unitary matrix of a gate instruction (read-only view)."""
    if not inst.is_unitary:
        raise ValueError(f"{inst.kind} is not unitary")
    return _matrix(inst.kind, inst.angle)


def apply_unitary(
    state: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...], num_qubits: int
) -> np.ndarray:
    """Apply ``mat`` on ``qubits`` to batched state vectors of shape (..., 2**n)."""
    w = len(qubits)
    batch = state.shape[:-1]
    b = len(batch)
    t = state.reshape(batch + (2,) * num_qubits)
    src = [b + num_qubits - 1 - q for q in qubits]
    dest = list(range(b + num_qubits - w, b + num_qubits))
    t = np.moveaxis(t, src, dest)
    head = t.shape[: b + num_qubits - w]
    flat = t.reshape(-1, 2**w)
    flat = flat @ mat.T
    t = flat.reshape(head + (2,) * w)
    t = np.moveaxis(t, dest, src)
    return np.ascontiguousarray(t.reshape(batch + (2**num_qubits,)))


def pauli_word_matrix(
    word: tuple[tuple[int, str], ...], num_qubits: int
) -> np.ndarray:
    """Dense matrix of a Pauli product given as ((qubit, letter), ...)."""
    dim = 1 << num_qubits
    state = np.eye(dim, dtype=np.complex128)
    for q, letter in word:
        state = apply_unitary(state, PAULI_MATS[letter], (q,), num_qubits)
    return state.T.copy()


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Exact 2**n x 2**n unitary of a gate-only circuit.

    Errors on measurements or preparations and on more than 13 qubits (the
    memory wall for the dense oracle; larger circuits must be checked through
    the state-vector or stabilizer paths).
    """
    n = circuit.num_qubits
    if n > UNITARY_OF_MAX_QUBITS:
        raise ValueError(
            f"unitary_of supports at most {UNITARY_OF_MAX_QUBITS} qubits, got {n}"
        )
    cols = np.eye(1 << n, dtype=np.complex128)
    for inst in circuit.instructions:
        if not inst.is_unitary:
            raise ValueError(f"unitary_of: circuit contains {inst.kind}")
        cols = apply_unitary(cols, instruction_matrix(inst), inst.qubits, n)
    return cols.T.copy()


def phase_free_distance(a: np.ndarray, b: np.ndarray) -> float:
    """max-entry distance between a and b after aligning global phase."""
    inner = np.vdot(a, b)
    if abs(inner) < 1e-300:
        return float(np.abs(a - b).max())
    phase = inner / abs(inner)
    return float(np.abs(a * phase - b).max())


def proportional_to_identity(m: np.ndarray, tol: float = 1e-9) -> bool:
    d = m.shape[0]
    scale = np.trace(m) / d
    return bool(np.abs(m - scale * np.eye(d)).max() <= tol)
