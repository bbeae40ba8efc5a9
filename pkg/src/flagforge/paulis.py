"""Pauli words over the symplectic (x, z) representation.

Per qubit the letter is encoded by two bits: x=1 means an X factor, z=1 a Z
factor, both set means Y. A word carries an overall i**phase with the
convention  P = i^phase * prod_q X_q^{x_q} Z_q^{z_q}  (X factors written left
of Z factors), so the Hermitian Y has (x=1, z=1, phase=1).

Clifford conjugation tables are derived numerically from the dense gate
matrices at first use and cached per (kind, angle): the dense kernel is the
single source of gate semantics, the stabilizer engines inherit it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .angles import DyadicAngle
from .circuits import Instruction
from .dense import PAULI_MATS, instruction_matrix

LETTERS = ("I", "X", "Z", "Y")  # index = x + 2*z


@dataclass
class PauliWord:
    x: np.ndarray
    z: np.ndarray
    phase: int = 0  # power of i, mod 4

    @staticmethod
    def identity(n: int) -> "PauliWord":
        return PauliWord(np.zeros(n, np.uint8), np.zeros(n, np.uint8), 0)

    @staticmethod
    def from_support(n: int, word: dict[int, str] | tuple[tuple[int, str], ...]) -> "PauliWord":
        items = word.items() if isinstance(word, dict) else word
        p = PauliWord.identity(n)
        for q, letter in items:
            if letter == "X":
                p.x[q] ^= 1
            elif letter == "Z":
                p.z[q] ^= 1
            elif letter == "Y":
                p.x[q] ^= 1
                p.z[q] ^= 1
                p.phase = (p.phase + 1) % 4
            else:
                raise ValueError(f"bad letter {letter!r}")
        return p

    @property
    def n(self) -> int:
        return len(self.x)

    def copy(self) -> "PauliWord":
        return PauliWord(self.x.copy(), self.z.copy(), self.phase)

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def support(self) -> tuple[int, ...]:
        return tuple(int(q) for q in np.flatnonzero(self.x | self.z))

    def letter(self, q: int) -> str:
        return LETTERS[int(self.x[q]) + 2 * int(self.z[q])]

    def commutes(self, other: "PauliWord") -> bool:
        s = int(np.sum(self.x & other.z)) + int(np.sum(self.z & other.x))
        return s % 2 == 0

    def __mul__(self, other: "PauliWord") -> "PauliWord":
        # Z factors of self hop over X factors of other
        hops = int(np.sum(self.z & other.x))
        return PauliWord(
            self.x ^ other.x,
            self.z ^ other.z,
            (self.phase + other.phase + 2 * hops) % 4,
        )

    def sign(self) -> complex:
        """Scalar prefactor relative to the Hermitian word with the same bits."""
        ys = int(np.sum(self.x & self.z))
        k = (self.phase - ys) % 4
        return (1j) ** k

    def to_matrix(self) -> np.ndarray:
        from .dense import pauli_word_matrix

        word = tuple((q, self.letter(q)) for q in self.support())
        return self.sign() * pauli_word_matrix(word, self.n)

    def key(self) -> bytes:
        return self.x.tobytes() + self.z.tobytes()

    def __str__(self) -> str:
        prefix = {1 + 0j: "+", -1 + 0j: "-", 1j: "+i", -1j: "-i"}[
            complex(np.round(self.sign()))
        ]
        return prefix + "".join(self.letter(q) for q in range(self.n))


def symplectic_dot(ax, az, bx, bz) -> int:
    """1 if the two supports anticommute."""
    return (int(np.sum(ax & bz)) + int(np.sum(az & bx))) % 2


@lru_cache(maxsize=None)
def _candidate_mats(w: int) -> np.ndarray:
    """All 4**w Hermitian Pauli matrices, index base-4 big-endian in LETTERS."""
    mats = [np.eye(1, dtype=np.complex128)]
    for _ in range(w):
        mats = [np.kron(m, PAULI_MATS[letter]) for m in mats for letter in LETTERS]
    return np.stack(mats)


@lru_cache(maxsize=None)
def conjugation_table(
    kind: str, angle: DyadicAngle | None
) -> tuple[np.ndarray, np.ndarray] | None:
    """(out_index, sign) arrays over local Pauli index, or None if non-Clifford.

    Local index: base-4 digits in LETTERS order, first gate qubit is the most
    significant digit (same endianness as the dense gate matrices).
    """
    try:
        u = instruction_matrix(Instruction(kind, tuple(range(_arity(kind))), angle))
    except ValueError:
        return None
    w = _arity(kind)
    cands = _candidate_mats(w)
    dim = 1 << w
    out_idx = np.zeros(4**w, dtype=np.int64)
    out_sign = np.zeros(4**w, dtype=np.int8)
    for i in range(4**w):
        q = u @ cands[i] @ u.conj().T
        coeffs = np.einsum("kij,ij->k", cands.conj(), q) / dim
        j = int(np.argmax(np.abs(coeffs)))
        c = coeffs[j]
        if abs(abs(c) - 1.0) > 1e-9 or abs(c.imag) > 1e-9:
            return None
        out_idx[i] = j
        out_sign[i] = 1 if c.real > 0 else -1
    return out_idx, out_sign


def _arity(kind: str) -> int:
    from .circuits import INSTRUCTION_SIGNATURES

    return INSTRUCTION_SIGNATURES[kind][0]


def is_clifford_instruction(inst: Instruction) -> bool:
    if not inst.is_unitary:
        return True
    return conjugation_table(inst.kind, inst.angle) is not None
