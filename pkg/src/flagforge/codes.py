"""Code definitions and code-level circuits.

Two code families:

  * iceberg [[k+2, k, 2]] for even k: stabilizers X^n and Z^n over
    n = k+2 physical qubits. Physical index 0 is the "bottom" qubit q_b,
    1..k the data block, k+1 the "top" qubit q_t. Logicals:
    Zbar_i = Z_i Z_0,  Xbar_i = X_i X_{k+1}.
  * Steane [[7,1,3]]: the self-dual CSS code on the Hamming(7,4) parity
    checks {3,4,5,6}, {1,2,5,6}, {0,2,4,6} in both bases, with
    Xbar = X1 X4 X6 and Zbar = Z0 Z1 Z2.

Code-level circuits: verified |+bar>^k preparation, flagged syndrome
extraction (one flag qubit guarding the hook window per generator), and
destructive transversal readout with reconstructed stabilizer detectors and
logical observables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit, QubitRole
from .paulis import PauliWord

LogicalWord = tuple[tuple[int, str], ...]


@dataclass(eq=False)
class CodeSpec:
    name: str
    n: int
    k: int
    stabilizers: tuple[PauliWord, ...]
    logical_x: tuple[PauliWord, ...]
    logical_z: tuple[PauliWord, ...]
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        for s in self.stabilizers:
            for t in self.stabilizers:
                if not s.commutes(t):
                    raise ValueError(f"{self.name}: stabilizers do not commute")
        for i, xb in enumerate(self.logical_x):
            for s in self.stabilizers:
                if not xb.commutes(s) or not self.logical_z[i].commutes(s):
                    raise ValueError(f"{self.name}: logicals hit stabilizers")
            for j, zb in enumerate(self.logical_z):
                want = i == j
                if xb.commutes(zb) == want:
                    raise ValueError(f"{self.name}: bad logical pairing {i},{j}")

    # -- dense code-space machinery -------------------------------------

    def projector(self) -> np.ndarray:
        if "proj" not in self._cache:
            dim = 1 << self.n
            p = np.eye(dim, dtype=np.complex128)
            for s in self.stabilizers:
                p = (p + p @ s.to_matrix()) / 2.0
            self._cache["proj"] = p
        return self._cache["proj"]

    def basis(self) -> np.ndarray:
        """Columns |m_bar> for m = 0..2^k-1; |m> = prod Xbar_i^{m_i} |0_bar>,
        bit i of m drives logical qubit i. |0_bar> has its first nonzero
        amplitude real positive."""
        if "basis" not in self._cache:
            p0 = self.projector().copy()
            for zb in self.logical_z:
                p0 = (p0 + p0 @ zb.to_matrix()) / 2.0
            col = p0[:, int(np.argmax(np.linalg.norm(p0, axis=0)))]
            nrm = np.linalg.norm(col)
            if nrm < 1e-12:
                raise ValueError("code space empty; bad stabilizer set")
            col = col / nrm
            nz = np.flatnonzero(np.abs(col) > 1e-12)[0]
            col = col * (abs(col[nz]) / col[nz])
            xmats = [xb.to_matrix() for xb in self.logical_x]
            cols = []
            for m in range(1 << self.k):
                v = col
                for i in range(self.k):
                    if (m >> i) & 1:
                        v = xmats[i] @ v
                cols.append(v)
            self._cache["basis"] = np.stack(cols, axis=1)
        return self._cache["basis"]

    def encode(self, logical_amps: np.ndarray) -> np.ndarray:
        amps = np.asarray(logical_amps, dtype=np.complex128)
        if amps.shape != (1 << self.k,):
            raise ValueError(f"expected {1 << self.k} logical amplitudes")
        return self.basis() @ amps

    def plus_state(self) -> np.ndarray:
        """|+bar>^k: uniform over the logical X basis."""
        amps = np.full(1 << self.k, 1.0 / np.sqrt(1 << self.k))
        return self.encode(amps)

    # -- logical words ----------------------------------------------------

    def logical_pauli(self, word: LogicalWord) -> PauliWord:
        """Physical representative of a logical word like ((0,'Z'), (1,'Y'))."""
        out = PauliWord.identity(self.n)
        for idx, letter in word:
            if not 0 <= idx < self.k:
                raise ValueError(f"logical index {idx} out of range (k={self.k})")
            if letter == "X":
                out = out * self.logical_x[idx]
            elif letter == "Z":
                out = out * self.logical_z[idx]
            elif letter == "Y":
                y = self.logical_x[idx] * self.logical_z[idx]
                y.phase = (y.phase + 1) % 4
                out = out * y
            else:
                raise ValueError(f"bad logical letter {letter!r}")
        return out

    def header_lines(self) -> list[str]:
        out = [f"# code {self.name} [[{self.n},{self.k}]]"]
        out += [f"# stabilizer {s}" for s in self.stabilizers]
        out += [f"# logical X{i} {x}" for i, x in enumerate(self.logical_x)]
        out += [f"# logical Z{i} {z}" for i, z in enumerate(self.logical_z)]
        return out


def iceberg_code(k: int) -> CodeSpec:
    if k < 1 or k % 2 != 0:
        raise ValueError(
            f"iceberg block size k={k} invalid: k must be even and >= 1, "
            "otherwise the two weight-n stabilizers anticommute"
        )
    n = k + 2
    top = k + 1
    sx = PauliWord.from_support(n, {q: "X" for q in range(n)})
    sz = PauliWord.from_support(n, {q: "Z" for q in range(n)})
    lx = tuple(PauliWord.from_support(n, {i: "X", top: "X"}) for i in range(1, k + 1))
    lz = tuple(PauliWord.from_support(n, {i: "Z", 0: "Z"}) for i in range(1, k + 1))
    return CodeSpec(f"iceberg_k{k}", n, k, (sx, sz), lx, lz)


STEANE_CHECKS = ((3, 4, 5, 6), (1, 2, 5, 6), (0, 2, 4, 6))


def steane_code() -> CodeSpec:
    n = 7
    sx = tuple(
        PauliWord.from_support(n, {q: "X" for q in row}) for row in STEANE_CHECKS
    )
    sz = tuple(
        PauliWord.from_support(n, {q: "Z" for q in row}) for row in STEANE_CHECKS
    )
    lx = (PauliWord.from_support(n, {1: "X", 4: "X", 6: "X"}),)
    lz = (PauliWord.from_support(n, {0: "Z", 1: "Z", 2: "Z"}),)
    return CodeSpec("steane", n, 1, sx + sz, lx, lz)


# ---------------------------------------------------------------------------
# circuits

# Steane |+bar> encoder: X-basis pivots and the CX fanout of each generator
# row of the Hamming code (row support minus the pivot itself).
_STEANE_PIVOTS = (2, 4, 5, 6)
_STEANE_FANOUT = {2: (0, 1), 4: (0, 3), 5: (1, 3), 6: (0, 1, 3)}


def ft_plus_prep(code: CodeSpec) -> Circuit:
    """Verified |+bar>^k preparation.

    Iceberg: GHZ-type spread of X^n plus one flag ancilla reading X_b X_t;
    every dangerous hook residual contains Z_t and flips the flag. Steane:
    Hamming-row fanout plus one flag ancilla reading Xbar, which catches the
    one CX hook whose residual is a weight-2 Z not equivalent to a stabilizer.
    Accepted output (all detectors 0) differs from |+bar>^k only by faults of
    weight >= 2 or by detectable leakage.
    """
    if code.name.startswith("iceberg"):
        k = code.k
        n = code.n
        top = k + 1
        c = Circuit(tuple([QubitRole.DATA] * n + [QubitRole.FLAG]))
        v = n
        for q in range(n - 1):
            c.append("PrepX", q)
        c.append("PrepZ", top)
        c.append("CX", 0, top)
        for i in range(1, k + 1):
            c.append("CX", i, top)
        c.append("PrepX", v)
        c.append("CX", v, 0)
        c.append("CX", v, top)
        r = c.append("MeasX", v)
        c.add_detector(r)
        c.validate()
        return c
    if code.name == "steane":
        c = Circuit(tuple([QubitRole.DATA] * 7 + [QubitRole.FLAG]))
        v = 7
        for q in _STEANE_PIVOTS:
            c.append("PrepX", q)
        for q in (0, 1, 3):
            c.append("PrepZ", q)
        for p in _STEANE_PIVOTS:
            for t in _STEANE_FANOUT[p]:
                c.append("CX", p, t)
        c.append("PrepX", v)
        for q in (1, 4, 6):  # Xbar support
            c.append("CX", v, q)
        r = c.append("MeasX", v)
        c.add_detector(r)
        c.validate()
        return c
    raise ValueError(f"no prep circuit for code {code.name}")


def flagged_syndrome_extraction(code: CodeSpec, basis: str = "Z") -> Circuit:
    """One flagged extraction round of every same-type stabilizer generator.

    basis "Z": each Z-type generator is accumulated onto a fresh |0> ancilla
    via CX(data -> s); a |+> flag couples to s twice, bracketing the middle
    data couplings, so any single Z fault on s that would hook a weight-2
    Z error onto the data flips the flag. basis "X" is the H-conjugate
    layout (CX(s -> data), |0> flag as target).

    Detectors: one per flag and one per syndrome ancilla; on a code-space
    input the fault-free round leaves every record 0.
    """
    if basis not in ("Z", "X"):
        raise ValueError("basis must be 'Z' or 'X'")
    want_x = basis == "X"
    gens = []
    for s in code.stabilizers:
        sup = s.support()
        letters = {s.letter(q) for q in sup}
        if letters == {"X"} and want_x:
            gens.append(sup)
        elif letters == {"Z"} and not want_x:
            gens.append(sup)
    if not gens:
        raise ValueError(f"code {code.name} has no pure {basis} generators")
    n = code.n
    roles = [QubitRole.DATA] * n + [QubitRole.FLAG] * (2 * len(gens))
    c = Circuit(tuple(roles))
    slot = n
    for sup in gens:
        s_anc = slot
        f_anc = slot + 1
        slot += 2
        w = len(sup)
        if want_x:
            c.append("PrepX", s_anc)
            c.append("PrepZ", f_anc)
        else:
            c.append("PrepZ", s_anc)
            c.append("PrepX", f_anc)

        def flag_tap():
            if want_x:
                c.append("CX", s_anc, f_anc)
            else:
                c.append("CX", f_anc, s_anc)

        for j, d in enumerate(sup):
            if j == 1 or j == w - 1:  # bracket the middle couplings
                flag_tap()
            if want_x:
                c.append("CX", s_anc, d)
            else:
                c.append("CX", d, s_anc)
        if want_x:
            rf = c.append("MeasZ", f_anc)
            rs = c.append("MeasX", s_anc)
        else:
            rf = c.append("MeasX", f_anc)
            rs = c.append("MeasZ", s_anc)
        c.add_detector(rf)
        c.add_detector(rs)
    c.validate()
    return c


def flagged_z_syndrome_extraction(code: CodeSpec) -> Circuit:
    return flagged_syndrome_extraction(code, "Z")


def destructive_measure(code: CodeSpec, basis: str = "X") -> Circuit:
    """Transversal readout of all data qubits.

    Detectors reconstruct the same-basis stabilizer parities; observables
    reconstruct the logical parities ("X0", "X1", ... / "Z0", ...).
    """
    if basis not in ("Z", "X"):
        raise ValueError("basis must be 'Z' or 'X'")
    c = Circuit(tuple([QubitRole.DATA] * code.n))
    recs = [c.append("MeasX" if basis == "X" else "MeasZ", q) for q in range(code.n)]
    letter = basis
    for s in code.stabilizers:
        sup = s.support()
        if {s.letter(q) for q in sup} == {letter}:
            c.add_detector(*[recs[q] for q in sup])
    logicals = code.logical_x if basis == "X" else code.logical_z
    for i, lw in enumerate(logicals):
        c.add_observable(f"{letter}{i}", *[recs[q] for q in lw.support()])
    c.validate()
    return c
