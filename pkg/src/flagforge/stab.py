"""Stabilizer engines: CHP tableau simulation and Pauli-frame propagation.

Both inherit gate semantics from the dense kernel through the numerically
derived conjugation tables, so there is no second, hand-written Clifford
convention to drift out of sync.

The frame propagator is the workhorse behind fault enumeration: single-fault
frames compose by XOR, so weight-2 and weight-3 scans reduce to signature
matching over packed bit arrays instead of quadratic/cubic re-simulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, FaultSite, Instruction, QubitRole
from .paulis import LETTERS, PauliWord, conjugation_table
from .sv import NoiseModel, ShotResult


class NonCliffordError(ValueError):
    pass


def _table_or_raise(inst: Instruction):
    tab = conjugation_table(inst.kind, inst.angle)
    if tab is None:
        raise NonCliffordError(
            f"{inst.kind}"
            + (f"({inst.angle})" if inst.angle is not None else "")
            + " is not Clifford; use the dense engine"
        )
    return tab


# ---------------------------------------------------------------------------
# CHP tableau


class Tableau:
    """Aaronson-Gottesman tableau: destabilizer rows 0..n-1, stabilizer rows
    n..2n-1, each a Hermitian Pauli word with a sign bit."""

    def __init__(self, n: int):
        self.n = n
        self.X = np.zeros((2 * n, n), dtype=np.uint8)
        self.Z = np.zeros((2 * n, n), dtype=np.uint8)
        self.R = np.zeros(2 * n, dtype=np.uint8)
        for i in range(n):
            self.X[i, i] = 1  # destabilizer X_i
            self.Z[n + i, i] = 1  # stabilizer Z_i

    # -- row algebra ----------------------------------------------------

    def _phase_y(self, rows) -> np.ndarray:
        return np.sum(self.X[rows] & self.Z[rows], axis=1).astype(np.int64)

    def _mul_rows(self, dest: np.ndarray, src: int) -> None:
        """rows[dest] <- row[src] * rows[dest], phases tracked exactly."""
        ph = (
            self._phase_y([src])[0]
            + self._phase_y(dest)
            + 2 * np.sum(self.Z[src][None, :] & self.X[dest], axis=1)
        )
        self.X[dest] ^= self.X[src]
        self.Z[dest] ^= self.Z[src]
        ph -= np.sum(self.X[dest] & self.Z[dest], axis=1)
        ph %= 4
        if np.any(ph % 2):
            raise AssertionError("tableau row product lost Hermiticity")
        self.R[dest] ^= self.R[src] ^ (ph == 2).astype(np.uint8)

    # -- gates ------------------------------------------------------------

    def apply(self, inst: Instruction) -> None:
        out_idx, out_sign = _table_or_raise(inst)
        qs = inst.qubits
        w = len(qs)
        idx = np.zeros(2 * self.n, dtype=np.int64)
        for q in qs:
            idx = (idx << 2) | (self.X[:, q] + 2 * self.Z[:, q])
        out = out_idx[idx]
        self.R ^= (out_sign[idx] < 0).astype(np.uint8)
        for j, q in enumerate(qs):
            d = (out >> (2 * (w - 1 - j))) & 3
            self.X[:, q] = (d & 1).astype(np.uint8)
            self.Z[:, q] = (d >> 1).astype(np.uint8)

    def apply_pauli(self, word: tuple[tuple[int, str], ...]) -> None:
        px = np.zeros(self.n, np.uint8)
        pz = np.zeros(self.n, np.uint8)
        for q, letter in word:
            if letter in ("X", "Y"):
                px[q] ^= 1
            if letter in ("Z", "Y"):
                pz[q] ^= 1
        anti = (np.sum(self.X & pz[None, :], axis=1)
                + np.sum(self.Z & px[None, :], axis=1)) % 2
        self.R ^= anti.astype(np.uint8)

    # -- measurement and reset -------------------------------------------

    def measure_z(self, q: int, rng: np.random.Generator) -> int:
        n = self.n
        xcol = self.X[:, q]
        stab_hits = np.flatnonzero(xcol[n:]) + n
        if len(stab_hits):
            p = int(stab_hits[0])
            others = np.flatnonzero(xcol)
            others = others[others != p]
            if len(others):
                self._mul_rows(others, p)
            # destabilizer takes the old stabilizer row
            self.X[p - n] = self.X[p]
            self.Z[p - n] = self.Z[p]
            self.R[p - n] = self.R[p]
            outcome = int(rng.integers(0, 2))
            self.X[p] = 0
            self.Z[p] = 0
            self.Z[p, q] = 1
            self.R[p] = outcome
            return outcome
        # deterministic: product of stabilizer partners of destabilizers
        # hitting q equals +/- Z_q
        acc_x = np.zeros(n, np.uint8)
        acc_z = np.zeros(n, np.uint8)
        acc_ph = 0
        for i in np.flatnonzero(xcol[:n]):
            j = n + int(i)
            acc_ph += int(np.sum(self.X[j] & self.Z[j]))
            acc_ph += 2 * int(np.sum(acc_z & self.X[j]))
            acc_ph += 2 * int(self.R[j])
            acc_x ^= self.X[j]
            acc_z ^= self.Z[j]
        acc_ph -= int(np.sum(acc_x & acc_z))
        if np.any(acc_x) or acc_ph % 2:
            raise AssertionError("deterministic Z measurement accumulator broken")
        return (acc_ph % 4) // 2

    def measure_x(self, q: int, rng: np.random.Generator) -> int:
        h = Instruction("H", (q,))
        self.apply(h)
        out = self.measure_z(q, rng)
        self.apply(h)
        return out

    def reset_z(self, q: int, rng: np.random.Generator) -> None:
        if self.measure_z(q, rng):
            self.apply_pauli(((q, "X"),))

    def stabilizer_words(self) -> list[PauliWord]:
        out = []
        for i in range(self.n, 2 * self.n):
            w = PauliWord(self.X[i].copy(), self.Z[i].copy(),
                          int(np.sum(self.X[i] & self.Z[i]) + 2 * self.R[i]) % 4)
            out.append(w)
        return out


_LETTER_OF_DIGIT = LETTERS  # index = x + 2z


def _depol_word(value: int, support: tuple[int, ...]) -> tuple[tuple[int, str], ...]:
    w = len(support)
    out = []
    for j, q in enumerate(support):
        d = (value >> (2 * (w - 1 - j))) & 3
        if d:
            out.append((q, _LETTER_OF_DIGIT[d]))
    return tuple(out)


def tableau_simulate_shot(circuit: Circuit, noise: NoiseModel, seed: int) -> ShotResult:
    """One Clifford trajectory under the same noise model as the dense sampler."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    t = Tableau(circuit.num_qubits)
    p = noise.p
    records = np.zeros(circuit.num_records, dtype=np.uint8)
    rec = 0
    for inst in circuit.instructions:
        if inst.is_meas:
            q = inst.qubits[0]
            out = t.measure_z(q, rng) if inst.kind == "MeasZ" else t.measure_x(q, rng)
            is_data = circuit.roles[q] == QubitRole.DATA
            if p > 0 and (noise.measure_flip_final or not is_data):
                out ^= int(rng.random() < p)
            records[rec] = out
            rec += 1
        elif inst.is_prep:
            q = inst.qubits[0]
            t.reset_z(q, rng)
            if inst.kind == "PrepX":
                t.apply(Instruction("H", (q,)))
        else:
            t.apply(inst)
            w = len(inst.qubits)
            if p > 0 and w >= 2:
                if w == 3 and noise.arity3 == "decompose":
                    a, b, c = inst.qubits
                    events = [(a, b), (b, c), (a, c)]
                else:
                    events = [inst.qubits]
                for support in events:
                    if rng.random() < p:
                        v = int(rng.integers(1, 4 ** len(support)))
                        t.apply_pauli(_depol_word(v, support))
    det = np.array(
        [int(np.bitwise_xor.reduce(records[list(d)])) if d else 0 for d in circuit.detectors],
        dtype=np.uint8,
    )
    obs = np.array(
        [int(np.bitwise_xor.reduce(records[list(r)])) if r else 0
         for _, r in circuit.observables],
        dtype=np.uint8,
    )
    return ShotResult(
        records=records,
        detectors=det,
        observables=obs,
        observable_names=tuple(n for n, _ in circuit.observables),
        accepted=not det.any(),
    )


# ---------------------------------------------------------------------------
# Pauli frames


@dataclass
class FaultReport:
    faults: tuple[FaultSite, ...]
    detector_flips: tuple[int, ...]
    observable_flips: tuple[int, ...]
    residual: PauliWord
    classification: str | None = None
    acceptance: float | None = None
    infidelity: float | None = None
    note: str = ""

    def describe(self, circuit: Circuit) -> str:
        parts = [f.describe(circuit) for f in self.faults]
        head = " + ".join(parts) if parts else "(no fault)"
        tail = f" -> {self.classification}" if self.classification else ""
        firing = [i for i, v in enumerate(self.detector_flips) if v]
        res = str(self.residual) if self.residual.weight() else "clean"
        return f"{head}{tail}; detectors {firing or 'quiet'}; residual {res}"


def clifford_frame_propagate(
    circuit: Circuit, faults: tuple[FaultSite, ...] | list[FaultSite]
) -> FaultReport:
    """Propagate a Pauli frame (difference from the fault-free run) through a
    Clifford circuit. Record flips are relative to the fault-free outcomes, so
    detector flips are absolute detector values."""
    n = circuit.num_qubits
    fx = np.zeros(n, np.uint8)
    fz = np.zeros(n, np.uint8)
    flips = np.zeros(circuit.num_records, np.uint8)
    pauli_after: dict[int, list[tuple[tuple[int, str], ...]]] = {}
    prep_flip_at: set[int] = set()
    meas_flip_at: dict[int, int] = {}
    for f in faults:
        if f.kind == "pauli":
            pauli_after.setdefault(f.index, []).append(f.paulis)
        elif f.kind == "prep_flip":
            if not circuit.instructions[f.index].is_prep:
                raise ValueError("prep_flip must sit on a preparation")
            prep_flip_at.symmetric_difference_update({f.index})
        else:
            if not circuit.instructions[f.index].is_meas:
                raise ValueError("meas_flip must sit on a measurement")
            meas_flip_at[f.index] = meas_flip_at.get(f.index, 0) ^ 1

    rec = 0
    for idx, inst in enumerate(circuit.instructions):
        if inst.is_meas:
            q = inst.qubits[0]
            flip = fx[q] if inst.kind == "MeasZ" else fz[q]
            flips[rec] = flip ^ meas_flip_at.get(idx, 0)
            rec += 1
        elif inst.is_prep:
            q = inst.qubits[0]
            fx[q] = 0
            fz[q] = 0
            if idx in prep_flip_at:
                if inst.kind == "PrepZ":
                    fx[q] = 1
                else:
                    fz[q] = 1
        else:
            qs = inst.qubits
            if any(fx[q] or fz[q] for q in qs):
                out_idx, _ = _table_or_raise(inst)
                loc = 0
                for q in qs:
                    loc = (loc << 2) | int(fx[q] + 2 * fz[q])
                out = int(out_idx[loc])
                w = len(qs)
                for j, q in enumerate(qs):
                    d = (out >> (2 * (w - 1 - j))) & 3
                    fx[q] = d & 1
                    fz[q] = d >> 1
        for word in pauli_after.get(idx, ()):
            for q, letter in word:
                if letter in ("X", "Y"):
                    fx[q] ^= 1
                if letter in ("Z", "Y"):
                    fz[q] ^= 1

    det = tuple(
        int(np.bitwise_xor.reduce(flips[list(d)])) if d else 0 for d in circuit.detectors
    )
    obs = tuple(
        int(np.bitwise_xor.reduce(flips[list(r)])) if r else 0
        for _, r in circuit.observables
    )
    return FaultReport(
        faults=tuple(faults),
        detector_flips=det,
        observable_flips=obs,
        residual=PauliWord(fx, fz, int(np.sum(fx & fz)) % 4),
    )


# ---------------------------------------------------------------------------
# fault enumeration


def enumerate_fault_sites(circuit: Circuit) -> list[FaultSite]:
    """All elementary fault locations: every instruction of arity w spawns the
    4^w - 1 Pauli insertions after itself; preparations add one prep_flip and
    measurements one meas_flip."""
    sites: list[FaultSite] = []
    for idx, inst in enumerate(circuit.instructions):
        sup = inst.qubits
        w = len(sup)
        for v in range(1, 4**w):
            sites.append(FaultSite("pauli", idx, _depol_word(v, sup)))
        if inst.is_prep:
            sites.append(FaultSite("prep_flip", idx))
        elif inst.is_meas:
            sites.append(FaultSite("meas_flip", idx))
    return sites


def expected_fault_site_count(circuit: Circuit) -> int:
    total = 0
    for inst in circuit.instructions:
        total += 4 ** len(inst.qubits) - 1
        if inst.is_prep or inst.is_meas:
            total += 1
    return total


def classify_residual(
    report: FaultReport,
    checks: tuple[PauliWord, ...],
    witnesses: tuple[PauliWord, ...],
) -> str:
    """Gadget-level classification of a propagated fault.

    detected: a detector fired, or the residual anticommutes some check
    operator (a later ideal stabilizer round would flag it);
    undetected_logical: quiet, commutes all checks, anticommutes a witness;
    benign: quiet and equivalent to a stabilizer (or supported off-code).
    """
    if any(report.detector_flips):
        return "detected"
    r = report.residual
    if any(not r.commutes(c) for c in checks):
        return "detected"
    if any(not r.commutes(w) for w in witnesses):
        return "undetected_logical"
    return "benign"


@dataclass
class FaultDistanceResult:
    distance_found: int | None  # smallest logical weight found, else None
    searched_to: int  # every weight <= this was exhausted
    witness: FaultReport | None

    def claim(self) -> str:
        if self.distance_found is not None:
            return str(self.distance_found)
        return f">= {self.searched_to + 1}"


def _site_signatures(
    circuit: Circuit,
    sites: list[FaultSite],
    checks: tuple[PauliWord, ...],
    witnesses: tuple[PauliWord, ...],
):
    """Per-site packed (detector+check, witness) anticommutation signatures."""
    nsig = np.zeros(len(sites), dtype=object)
    wsig = np.zeros(len(sites), dtype=object)
    reports = []
    for i, s in enumerate(sites):
        rep = clifford_frame_propagate(circuit, (s,))
        sig = 0
        for v in rep.detector_flips:
            sig = (sig << 1) | v
        for c in checks:
            sig = (sig << 1) | (0 if rep.residual.commutes(c) else 1)
        wit = 0
        for w in witnesses:
            wit = (wit << 1) | (0 if rep.residual.commutes(w) else 1)
        nsig[i] = sig
        wsig[i] = wit
        reports.append(rep)
    return nsig, wsig, reports


def fault_distance(
    circuit: Circuit,
    max_weight: int,
    engine: str,
    checks: tuple[PauliWord, ...],
    witnesses: tuple[PauliWord, ...],
    dense_context: "DenseContext | None" = None,
) -> FaultDistanceResult:
    """Smallest fault-set weight producing an undetected logical, scanning all
    subsets of elementary fault sites up to ``max_weight``.

    engine "clifford": frame propagation; weight >= 2 uses the XOR linearity
    of frames, matching packed signatures instead of re-propagating pairs.
    engine "dense": accepted-branch classification of every single site
    (max_weight must be 1); needs a DenseContext for the ideal comparison.
    """
    if max_weight < 1:
        raise ValueError("max_weight must be >= 1")
    if engine == "dense":
        if max_weight != 1:
            raise ValueError("dense engine enumerates single faults only")
        if dense_context is None:
            raise ValueError("dense engine needs a DenseContext")
        sites = enumerate_fault_sites(circuit)
        for s in sites:
            rep = classify_fault_dense(circuit, (s,), dense_context)
            if rep.classification == "undetected_logical":
                return FaultDistanceResult(1, 1, rep)
        return FaultDistanceResult(None, 1, None)
    if engine != "clifford":
        raise ValueError(f"unknown engine {engine!r}")

    sites = enumerate_fault_sites(circuit)
    nsig, wsig, reports = _site_signatures(circuit, sites, checks, witnesses)

    for i in range(len(sites)):
        if nsig[i] == 0 and wsig[i] != 0:
            rep = reports[i]
            rep.classification = "undetected_logical"
            return FaultDistanceResult(1, max_weight, rep)
    if max_weight == 1:
        return FaultDistanceResult(None, 1, None)

    groups: dict[int, list[int]] = {}
    for i, sig in enumerate(nsig):
        groups.setdefault(int(sig), []).append(i)
    for sig, members in sorted(groups.items()):
        wit_seen: dict[int, int] = {}
        for i in members:
            w = int(wsig[i])
            if wit_seen and any(w != w0 for w0 in wit_seen):
                j = next(j0 for w0, j0 in wit_seen.items() if w0 != w)
                pair = (sites[j], sites[i])
                rep = clifford_frame_propagate(circuit, pair)
                rep.classification = classify_residual(rep, checks, witnesses)
                if rep.classification != "undetected_logical":
                    raise AssertionError("pair signature scan disagrees with direct propagation")
                return FaultDistanceResult(2, max_weight, rep)
            wit_seen.setdefault(w, i)
    if max_weight == 2:
        return FaultDistanceResult(None, 2, None)

    # weight 3: for each pair, a completing third site must cancel the
    # detector/check signature; group lookup keeps it near-quadratic
    nsites = len(sites)
    for i in range(nsites):
        for j in range(i + 1, nsites):
            need = int(nsig[i]) ^ int(nsig[j])
            for k in groups.get(need, ()):
                if k <= j:
                    continue
                if (int(wsig[i]) ^ int(wsig[j]) ^ int(wsig[k])) != 0:
                    triple = (sites[i], sites[j], sites[k])
                    rep = clifford_frame_propagate(circuit, triple)
                    rep.classification = classify_residual(rep, checks, witnesses)
                    if rep.classification != "undetected_logical":
                        raise AssertionError(
                            "triple signature scan disagrees with direct propagation"
                        )
                    return FaultDistanceResult(3, max_weight, rep)
    return FaultDistanceResult(None, min(max_weight, 3), None)


# ---------------------------------------------------------------------------
# dense single-fault classification


@dataclass
class DenseContext:
    """What the dense classifier needs to judge a gadget circuit: the embedded
    code-basis input columns, the fault-free accepted block, and thresholds."""

    input_columns: np.ndarray  # (2^k, 2^n) embedded basis states
    data_basis: np.ndarray  # (2^n_data, 2^k) code basis over the data register
    reference_block: np.ndarray  # (2^k, 2^k) fault-free accepted logical block
    reference_acceptance: float
    tol_acceptance: float = 1e-12
    tol_benign: float = 1e-10


def make_dense_context(
    circuit: Circuit,
    data_basis: np.ndarray,
    tol_acceptance: float = 1e-12,
    tol_benign: float = 1e-10,
) -> DenseContext:
    from .sv import accepted_branch_state

    n = circuit.num_qubits
    dim_data, ncols = data_basis.shape
    cols = np.zeros((ncols, 1 << n), dtype=np.complex128)
    cols[:, :dim_data] = data_basis.T  # data qubits are the low indices
    red, acc = accepted_branch_state(circuit, input_state=cols)
    block = red @ data_basis.conj()
    return DenseContext(
        input_columns=cols,
        data_basis=data_basis,
        reference_block=block,
        reference_acceptance=acc,
        tol_acceptance=tol_acceptance,
        tol_benign=tol_benign,
    )


def classify_fault_dense(
    circuit: Circuit, faults: tuple[FaultSite, ...], ctx: DenseContext
) -> FaultReport:
    """Classify a fault set by its accepted-branch action against the
    fault-free block: detected (rejected or leaked), benign (proportional to
    the reference), or undetected_logical."""
    from .sv import accepted_branch_state

    red, acc = accepted_branch_state(
        circuit, input_state=ctx.input_columns, faults=faults
    )
    n_data = int(np.log2(ctx.data_basis.shape[0]))
    dummy = PauliWord.identity(circuit.num_qubits)
    block = red @ ctx.data_basis.conj()
    total = float(np.sum(np.abs(red) ** 2))
    in_code = float(np.sum(np.abs(block) ** 2))
    rep = FaultReport(
        faults=tuple(faults),
        detector_flips=(),
        observable_flips=(),
        residual=dummy,
        acceptance=acc,
    )
    if acc < ctx.tol_acceptance:
        rep.classification = "detected"
        rep.note = "rejected: acceptance ~ 0"
        return rep
    if in_code < ctx.tol_acceptance * max(total, 1.0):
        rep.classification = "detected"
        rep.note = "leaked: no code-space mass survives"
        rep.infidelity = 1.0
        return rep
    ref = ctx.reference_block
    fid = abs(np.trace(ref.conj().T @ block)) ** 2 / (
        float(np.sum(np.abs(ref) ** 2)) * in_code
    )
    rep.infidelity = float(max(0.0, 1.0 - fid))
    if rep.infidelity > ctx.tol_benign:
        rep.classification = "undetected_logical"
        return rep
    leak_frac = (total - in_code) / total if total > 0 else 0.0
    if leak_frac > ctx.tol_benign:
        rep.classification = "detected"
        rep.note = f"leakage fraction {leak_frac:.3e} flagged by a later round"
    else:
        rep.classification = "benign"
    return rep
