"""Oracles shared by the test suite and the CLI: dense accepted-action
comparison for gadget reports, and stabilizer-group membership for Clifford
circuits too wide for the dense engine."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Instruction
from .constructors import GadgetReport
from .paulis import PauliWord
from .stab import Tableau

MAX_DENSE = 16


def register_basis(report: GadgetReport) -> np.ndarray:
    """Orthonormal basis of (code space x control register), controls high:
    shape (2^(n+m), 2^(k+m)), column order = (control bits, logical bits)."""
    b = report.code.basis()
    m = len(report.control_qubits)
    return np.kron(np.eye(1 << m), b)


def accepted_logical_block(
    report: GadgetReport, faults=()
) -> tuple[np.ndarray, float]:
    """Accepted action as a matrix over the register basis, row i = image of
    basis state i expressed in basis coordinates; plus acceptance."""
    from .sv import accepted_branch_state

    circ = report.circuit
    if circ.num_qubits > MAX_DENSE:
        raise ValueError(f"{circ.num_qubits} qubits exceed the dense cap")
    basis = register_basis(report)
    dim_data, ncols = basis.shape
    cols = np.zeros((ncols, 1 << circ.num_qubits), dtype=np.complex128)
    cols[:, :dim_data] = basis.T  # data block + controls sit at low indices
    red, acc = accepted_branch_state(circ, input_state=cols, faults=tuple(faults))
    return red @ basis.conj(), acc


def ideal_logical_block(report: GadgetReport) -> np.ndarray:
    """exp(-i theta/2 W), controlled, in the same row convention."""
    basis = register_basis(report)
    u = report.ideal_data_unitary()
    return (basis.conj().T @ u @ basis).T


def block_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.sum(np.abs(a) ** 2))
    nb = float(np.sum(np.abs(b) ** 2))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(abs(np.sum(a.conj() * b)) ** 2 / (na * nb))


@dataclass(frozen=True)
class ActionCheck:
    fidelity: float
    acceptance: float
    ok: bool


def verify_report(report: GadgetReport, tol: float = 1e-9) -> ActionCheck:
    got, acc = accepted_logical_block(report)
    want = ideal_logical_block(report)
    f = block_fidelity(got, want)
    return ActionCheck(fidelity=f, acceptance=acc, ok=(1.0 - f) <= tol)


# ---------------------------------------------------------------------------
# Clifford-side oracle


def run_clifford(circuit: Circuit, seed: int = 0) -> tuple[Tableau, list[int]]:
    """Noiseless tableau run from |0...0>; returns final tableau and records."""
    tab = Tableau(circuit.num_qubits)
    rng = np.random.default_rng(seed)
    records: list[int] = []
    for inst in circuit.instructions:
        if inst.is_meas:
            q = inst.qubits[0]
            if inst.kind == "MeasX":
                records.append(tab.measure_x(q, rng))
            else:
                records.append(tab.measure_z(q, rng))
        elif inst.is_prep:
            q = inst.qubits[0]
            tab.reset_z(q, rng)
            if inst.kind == "PrepX":
                tab.apply(Instruction("H", (q,)))
        else:
            tab.apply(inst)
    return tab, records


def detectors_quiet(circuit: Circuit, records: list[int]) -> bool:
    return all(
        sum(records[r] for r in det) % 2 == 0 for det in circuit.detectors
    )


def stabilizer_sign(tab: Tableau, word: PauliWord) -> int | None:
    """+1/-1 if the state stabilizes +/-word, None if word is not in the
    group up to sign. Exact phase tracking through the row products."""
    rows = tab.stabilizer_words()
    nr = len(rows)
    bits = np.array([np.concatenate([r.x, r.z]) for r in rows], dtype=np.uint8)
    target = np.concatenate([word.x, word.z]).astype(np.uint8)
    aug = np.concatenate([bits, np.eye(nr, dtype=np.uint8)], axis=1)
    ncols = bits.shape[1]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        hit = next((i for i in range(r, nr) if aug[i, c]), None)
        if hit is None:
            continue
        aug[[r, hit]] = aug[[hit, r]]
        for i in range(nr):
            if i != r and aug[i, c]:
                aug[i] ^= aug[r]
        pivots.append(c)
        r += 1
    sel = np.zeros(nr, dtype=np.uint8)
    rem = target.copy()
    for pi, c in enumerate(pivots):
        if rem[c]:
            rem ^= aug[pi, :ncols]
            sel ^= aug[pi, ncols:]
    if rem.any():
        return None
    prod = PauliWord.identity(tab.n)
    for i in np.flatnonzero(sel):
        prod = prod * rows[i]
    rel = complex(np.round(prod.sign() * np.conj(word.sign())))
    if abs(rel.imag) > 1e-9 or abs(abs(rel.real) - 1.0) > 1e-9:
        raise AssertionError("stabilizer membership produced a non-real sign")
    return int(rel.real)


def embed_word(word: PauliWord, n: int, offset: int = 0) -> PauliWord:
    """The same word acting on a wider register."""
    out = PauliWord.identity(n)
    out.x[offset : offset + word.n] = word.x
    out.z[offset : offset + word.n] = word.z
    out.phase = word.phase
    return out


# ---------------------------------------------------------------------------
# file-level action check (no GadgetReport available)


def _logical_word_matrix(code, word, nd: int) -> np.ndarray:
    """Dense matrix of a logical Pauli word on the physical data register.
    Ybar enters as i Xbar Zbar, so the result squares to +1 and the rotation
    formula cos - i sin applies directly."""
    from .dense import pauli_word_matrix

    m = np.eye(1 << nd, dtype=np.complex128)
    for idx, letter in word:
        if letter in ("X", "Y"):
            xw = code.logical_x[idx]
            m = m @ pauli_word_matrix(
                tuple((q, "X") for q in xw.support()), nd)
        if letter in ("Z", "Y"):
            zw = code.logical_z[idx]
            m = m @ pauli_word_matrix(
                tuple((q, "Z") for q in zw.support()), nd)
        if letter == "Y":
            m = m * 1j
    return m


def check_circuit_action(
    circuit: Circuit,
    word: tuple[tuple[int, str], ...],
    angle,
    code=None,
    tol: float = 1e-9,
) -> ActionCheck:
    """Accepted-branch action of a standalone circuit vs exp(-i theta/2 W).

    With a code, W is the logical word on the code's register (the data
    qubits must be the low block, ancillas start in |0>); with code=None the
    data register is bare and the word indexes physical data qubits."""
    from .circuits import QubitRole
    from .dense import pauli_word_matrix
    from .sv import accepted_branch_state

    if circuit.num_qubits > MAX_DENSE:
        raise ValueError(f"{circuit.num_qubits} qubits exceed the dense cap")
    data = tuple(q for q, r in enumerate(circuit.roles)
                 if r is QubitRole.DATA)
    nd = len(data)
    if data != tuple(range(nd)):
        raise ValueError("data qubits must occupy the low positions")
    if code is not None:
        if code.n != nd:
            raise ValueError(f"code expects {code.n} data qubits, file has {nd}")
        basis = code.basis()
        wmat = _logical_word_matrix(code, word, nd)
    else:
        basis = np.eye(1 << nd, dtype=np.complex128)
        wmat = pauli_word_matrix(tuple(word), nd)
    half = angle.radians() / 2.0
    u = math.cos(half) * np.eye(1 << nd) - 1j * math.sin(half) * wmat
    want = (basis.conj().T @ u @ basis).T
    ncols = basis.shape[1]
    cols = np.zeros((ncols, 1 << circuit.num_qubits), dtype=np.complex128)
    cols[:, : 1 << nd] = basis.T
    red, acc = accepted_branch_state(circuit, input_state=cols)
    got = red @ basis.conj()
    f = block_fidelity(got, want)
    return ActionCheck(fidelity=f, acceptance=acc, ok=(1.0 - f) <= tol)
