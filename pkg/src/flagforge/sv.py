"""Dense state-vector engine.

Three execution modes over one compiled instruction stream:

  * trajectory sampling (``run_noisy_shot``, ``sample_batches``): Born-rule
    measurements, depolarizing noise after every gate of arity >= 2, record
    flips with probability p,
  * noiseless single shots (``run_noiseless``),
  * accepted-branch projection (``accepted_branch_state``): the circuit as a
    linear map with every detector-covered measurement projected onto its
    trivial outcome; the oracle behind all fault-tolerance checks.

Width is capped at 16 qubits. Amplitude arrays always carry a leading batch
axis internally; public single-shot entry points wrap and unwrap it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit, FaultSite, Instruction, QubitRole
from .dense import PAULI_MATS, apply_unitary, instruction_matrix

MAX_QUBITS = 16

_ARITY3_MODES = ("depolarize", "decompose")


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing-plus-readout noise.

    After every gate of arity w >= 2: with probability p a uniformly random
    non-identity w-qubit Pauli. Every measurement record flips with
    probability p (``measure_flip_final=False`` exempts measurements of
    data-role qubits, i.e. the final destructive readout). ``arity3``
    chooses between one 3-qubit depolarizing event per 3-qubit gate
    ("depolarize") or three 2-qubit events on its qubit pairs ("decompose").
    """

    p: float = 0.0
    arity3: str = "depolarize"
    measure_flip_final: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"noise strength p={self.p} outside [0, 1]")
        if self.arity3 not in _ARITY3_MODES:
            raise ValueError(f"arity3 must be one of {_ARITY3_MODES}")


@dataclass
class ShotResult:
    records: np.ndarray
    detectors: np.ndarray
    observables: np.ndarray
    observable_names: tuple[str, ...]
    accepted: bool

    def observable(self, name: str) -> int:
        return int(self.observables[self.observable_names.index(name)])


@dataclass
class StateVector:
    amps: np.ndarray
    num_qubits: int

    @staticmethod
    def zeros(n: int) -> "StateVector":
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[0] = 1.0
        return StateVector(amps, n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize zero state")
        return StateVector(self.amps / n, self.num_qubits)

    def overlap(self, other: "StateVector | np.ndarray") -> complex:
        o = other.amps if isinstance(other, StateVector) else other
        return complex(np.vdot(self.amps, o))


# ---------------------------------------------------------------------------
# compilation


@dataclass
class _Compiled:
    circuit: Circuit
    n: int
    dim: int
    # per instruction: ("diag", vec) | ("perm", src) | ("dense", mat, qubits)
    #                | ("measz"/"measx", qubit, record) | ("prepz"/"prepx", qubit)
    steps: list[tuple]
    # per instruction: list of depolarizing supports fired after it
    depol_after: list[list[tuple[int, ...]]]
    record_flip_ok: np.ndarray  # per record, bool
    detector_masks: list[np.ndarray]
    observable_masks: list[np.ndarray]
    observable_names: tuple[str, ...]

    @property
    def num_records(self) -> int:
        return len(self.record_flip_ok)

    def noise_location_count(self, p_nonzero: bool = True) -> int:
        gates = sum(len(d) for d in self.depol_after)
        return gates + int(np.sum(self.record_flip_ok))


def _full_diag(diag: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    idx = np.zeros(1 << n, dtype=np.int64)
    ar = np.arange(1 << n)
    for q in qubits:  # first qubit = most significant local digit
        idx = (idx << 1) | ((ar >> q) & 1)
    return diag[idx]


def _full_perm(mat: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Global source-index array for a 0/1 permutation gate matrix."""
    d = mat.shape[0]
    src_local = np.zeros(d, dtype=np.int64)
    for r in range(d):
        c = int(np.argmax(np.abs(mat[r])))
        src_local[r] = c
    ar = np.arange(1 << n)
    local = np.zeros(1 << n, dtype=np.int64)
    for q in qubits:
        local = (local << 1) | ((ar >> q) & 1)
    src_local_of = src_local[local]
    out = ar.copy()
    w = len(qubits)
    for j, q in enumerate(qubits):
        bit = (src_local_of >> (w - 1 - j)) & 1
        out = (out & ~(1 << q)) | (bit << q)
    return out


def _classify_gate(mat: np.ndarray) -> str:
    if np.abs(mat - np.diag(np.diag(mat))).max() < 1e-14:
        return "diag"
    binary = np.isin(np.round(mat.real, 12), (0.0, 1.0)).all()
    if binary and np.abs(mat.imag).max() < 1e-14:
        if (np.abs(mat).sum(axis=0) == 1).all() and (np.abs(mat).sum(axis=1) == 1).all():
            return "perm"
    return "dense"


def compile_circuit(circuit: Circuit, noise: NoiseModel) -> _Compiled:
    n = circuit.num_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"state-vector engine caps at {MAX_QUBITS} qubits, got {n}")
    steps: list[tuple] = []
    depol_after: list[list[tuple[int, ...]]] = []
    flip_ok: list[bool] = []
    rec = 0
    for inst in circuit.instructions:
        events: list[tuple[int, ...]] = []
        if inst.is_meas:
            q = inst.qubits[0]
            steps.append(("measz" if inst.kind == "MeasZ" else "measx", q, rec))
            is_data = circuit.roles[q] == QubitRole.DATA
            flip_ok.append(noise.measure_flip_final or not is_data)
            rec += 1
        elif inst.is_prep:
            steps.append(("prepz" if inst.kind == "PrepZ" else "prepx", inst.qubits[0]))
        else:
            mat = instruction_matrix(inst)
            kind = _classify_gate(mat)
            if kind == "diag":
                steps.append(("diag", _full_diag(np.diag(mat).copy(), inst.qubits, n)))
            elif kind == "perm":
                steps.append(("perm", _full_perm(mat, inst.qubits, n)))
            else:
                steps.append(("dense", mat, inst.qubits))
            w = len(inst.qubits)
            if w >= 2:
                if w == 3 and noise.arity3 == "decompose":
                    a, b, c = inst.qubits
                    events = [(a, b), (b, c), (a, c)]
                else:
                    events = [inst.qubits]
        depol_after.append(events)
    nrec = rec

    def mask(recs: tuple[int, ...]) -> np.ndarray:
        m = np.zeros(nrec, dtype=bool)
        for r in recs:
            m[r] = True
        return m

    return _Compiled(
        circuit=circuit,
        n=n,
        dim=1 << n,
        steps=steps,
        depol_after=depol_after,
        record_flip_ok=np.array(flip_ok, dtype=bool),
        detector_masks=[mask(d) for d in circuit.detectors],
        observable_masks=[mask(r) for _, r in circuit.observables],
        observable_names=tuple(name for name, _ in circuit.observables),
    )


# ---------------------------------------------------------------------------
# trajectory sampling

_H1 = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)

_LETTERS_BY_DIGIT = ("I", "X", "Z", "Y")


def _depol_letters(value: np.ndarray, w: int) -> list[tuple[str, ...]]:
    out = []
    for v in value:
        digits = []
        for j in range(w):
            digits.append(_LETTERS_BY_DIGIT[(v >> (2 * (w - 1 - j))) & 3])
        out.append(tuple(digits))
    return out


class _Trajectory:
    """Mutable batch of shots marching through a compiled circuit."""

    def __init__(self, comp: _Compiled, batch: int):
        self.comp = comp
        self.n = comp.n
        self.state = np.zeros((batch, comp.dim), dtype=np.complex128)
        self.state[:, 0] = 1.0
        self.batch = batch
        self.records = np.zeros((batch, comp.num_records), dtype=np.uint8)
        self.physical = np.zeros((batch, comp.num_records), dtype=np.uint8)

    def _bitview(self, q: int) -> np.ndarray:
        return self.state.reshape(self.batch, -1, 2, 1 << q)

    def apply_h(self, q: int) -> None:
        self.state = apply_unitary(self.state, _H1, (q,), self.n)

    def collapse_z(self, q: int, rng: np.random.Generator) -> np.ndarray:
        v = self._bitview(q)
        p1 = np.einsum("bkl->b", np.abs(v[:, :, 1, :]) ** 2)
        outcome = rng.random(self.batch) < p1
        sel = outcome.astype(np.uint8)
        keep = (np.arange(2, dtype=np.uint8)[None, None, :, None] == sel[:, None, None, None])
        v *= keep
        kept_p = np.where(outcome, p1, 1.0 - p1)
        kept_p = np.maximum(kept_p, 1e-300)
        self.state *= (1.0 / np.sqrt(kept_p))[:, None]
        return sel

    def reset_z(self, q: int, rng: np.random.Generator) -> None:
        # collapse-then-correct; a plain value lookup would go stale under
        # X-basis measurements and injected noise
        out = self.collapse_z(q, rng)
        rows = np.flatnonzero(out)
        if len(rows):
            v = self._bitview(q)
            v[rows] = v[rows][:, :, ::-1, :]

    def apply_pauli_rows(self, rows: np.ndarray, word: tuple[tuple[int, str], ...]) -> None:
        sub = self.state[rows]
        for q, letter in word:
            sub = apply_unitary(sub, PAULI_MATS[letter], (q,), self.n)
        self.state[rows] = sub


def _run_batch(
    comp: _Compiled,
    noise: NoiseModel,
    rng: np.random.Generator,
    batch: int,
    keep_state: bool = False,
    active_locations: set[int] | None = None,
) -> dict:
    """One batch of trajectories. ``active_locations`` (instruction indices)
    optionally restricts which noise locations fire; None means all."""
    t = _Trajectory(comp, batch)
    p = noise.p
    for idx, step in enumerate(comp.steps):
        kind = step[0]
        if kind == "diag":
            t.state *= step[1][None, :]
        elif kind == "perm":
            t.state = t.state[:, step[1]]
        elif kind == "dense":
            t.state = apply_unitary(t.state, step[1], step[2], t.n)
        elif kind in ("measz", "measx"):
            _, q, r = step
            if kind == "measx":
                t.apply_h(q)
            out = t.collapse_z(q, rng)
            if kind == "measx":
                t.apply_h(q)
            t.physical[:, r] = out
            if p > 0 and comp.record_flip_ok[r] and _loc_active(active_locations, idx):
                out = out ^ (rng.random(batch) < p)
            t.records[:, r] = out
        elif kind == "prepz":
            t.reset_z(step[1], rng)
        elif kind == "prepx":
            q = step[1]
            t.reset_z(q, rng)
            t.apply_h(q)
        if p > 0 and comp.depol_after[idx] and _loc_active(active_locations, idx):
            for support in comp.depol_after[idx]:
                w = len(support)
                hits = np.flatnonzero(rng.random(batch) < p)
                if len(hits) == 0:
                    continue
                values = rng.integers(1, 4**w, size=len(hits))
                for v in np.unique(values):
                    rows = hits[values == v]
                    digits = _depol_letters(np.array([v]), w)[0]
                    word = tuple(
                        (q, letter)
                        for q, letter in zip(support, digits)
                        if letter != "I"
                    )
                    t.apply_pauli_rows(rows, word)
    det = np.zeros((batch, len(comp.detector_masks)), dtype=np.uint8)
    for j, m in enumerate(comp.detector_masks):
        det[:, j] = np.bitwise_xor.reduce(t.records[:, m], axis=1) if m.any() else 0
    obs = np.zeros((batch, len(comp.observable_masks)), dtype=np.uint8)
    for j, m in enumerate(comp.observable_masks):
        obs[:, j] = np.bitwise_xor.reduce(t.records[:, m], axis=1) if m.any() else 0
    accepted = ~det.any(axis=1)
    return {
        "records": t.records,
        "physical": t.physical,
        "detectors": det,
        "observables": obs,
        "accepted": accepted,
        "state": t.state if keep_state else None,
    }


def _loc_active(active: set[int] | None, idx: int) -> bool:
    return active is None or idx in active


def shot_seed_sequence(root_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(root_seed, spawn_key=(index,))


def run_noisy_shot(
    circuit: Circuit, noise: NoiseModel, seed: int, keep_state: bool = False
) -> ShotResult:
    """One reproducible trajectory: (circuit, noise, seed) -> ShotResult."""
    comp = compile_circuit(circuit, noise)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    out = _run_batch(comp, noise, rng, 1, keep_state=keep_state)
    return ShotResult(
        records=out["records"][0],
        detectors=out["detectors"][0],
        observables=out["observables"][0],
        observable_names=comp.observable_names,
        accepted=bool(out["accepted"][0]),
    )


def run_noiseless(
    circuit: Circuit, input_state: np.ndarray | None = None, seed: int = 0
) -> tuple[StateVector, ShotResult]:
    """Noiseless run; measurements still Born-sampled (seeded)."""
    comp = compile_circuit(circuit, NoiseModel(0.0))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    t = _Trajectory(comp, 1)
    if input_state is not None:
        amps = np.asarray(input_state, dtype=np.complex128).reshape(1, -1)
        if amps.shape[1] != comp.dim:
            raise ValueError("input state has wrong dimension")
        t.state = amps.copy()
    for idx, step in enumerate(comp.steps):
        kind = step[0]
        if kind == "diag":
            t.state *= step[1][None, :]
        elif kind == "perm":
            t.state = t.state[:, step[1]]
        elif kind == "dense":
            t.state = apply_unitary(t.state, step[1], step[2], t.n)
        elif kind in ("measz", "measx"):
            _, q, r = step
            if kind == "measx":
                t.apply_h(q)
            out = t.collapse_z(q, rng)
            if kind == "measx":
                t.apply_h(q)
            t.physical[:, r] = out
            t.records[:, r] = out
        elif kind == "prepz":
            t.reset_z(step[1], rng)
        elif kind == "prepx":
            t.reset_z(step[1], rng)
            t.apply_h(step[1])
    det = np.array(
        [np.bitwise_xor.reduce(t.records[0, m]) if m.any() else 0 for m in comp.detector_masks],
        dtype=np.uint8,
    )
    obs = np.array(
        [np.bitwise_xor.reduce(t.records[0, m]) if m.any() else 0 for m in comp.observable_masks],
        dtype=np.uint8,
    )
    shot = ShotResult(
        records=t.records[0],
        detectors=det,
        observables=obs,
        observable_names=comp.observable_names,
        accepted=not det.any(),
    )
    return StateVector(t.state[0], comp.n), shot


def sample_batches(
    circuit: Circuit,
    noise: NoiseModel,
    shots: int,
    root_seed: int,
    batch_size: int = 1 << 14,
    keep_state: bool = False,
    active_locations: set[int] | None = None,
):
    """Yield batch result dicts; deterministic in (circuit, noise, shots, seed).

    Batch b draws from SeedSequence(root_seed, spawn_key=(b,)); the partition
    of shots into batches is a pure function of (shots, batch_size), so the
    stream is reproducible and order-independent under parallel execution.
    """
    comp = compile_circuit(circuit, noise)
    done = 0
    b = 0
    while done < shots:
        take = min(batch_size, shots - done)
        rng = np.random.default_rng(np.random.SeedSequence(root_seed, spawn_key=(b,)))
        yield _run_batch(comp, noise, rng, take, keep_state=keep_state,
                         active_locations=active_locations)
        done += take
        b += 1


# ---------------------------------------------------------------------------
# accepted-branch projection


def _project_bit(state: np.ndarray, q: int, value: int) -> np.ndarray:
    """Project onto |value> of qubit q without renormalizing."""
    out = state.copy()
    v = out.reshape(out.shape[0], -1, 2, 1 << q)
    v[:, :, 1 - value, :] = 0.0
    return out


def _apply_h_cols(state: np.ndarray, q: int, n: int) -> np.ndarray:
    return apply_unitary(state, _H1, (q,), n)


@dataclass
class _Branch:
    state: np.ndarray  # (B, dim), subnormalized
    records: list[int] = field(default_factory=list)


def accepted_branch_state(
    circuit: Circuit,
    fault: FaultSite | None = None,
    input_state: np.ndarray | None = None,
    faults: tuple[FaultSite, ...] = (),
    prune_tol: float = 1e-14,
) -> tuple[np.ndarray, float]:
    """Accepted-branch linear map applied to ``input_state``.

    Measurements covered by a single-record detector are projected onto the
    accepted outcome (record 0; the physical outcome is 1 when a record-flip
    fault sits on that measurement). Measurements left uncovered branch over
    both outcomes; surviving branches are filtered by the remaining detector
    parities at the end. Returns the reduced state over the data qubits
    (other qubits must end collapsed) and the total acceptance probability.

    ``input_state`` spans the full register, shape (2**n,) or batched
    (B, 2**n); default is |0...0>. Data-qubit measurements are rejected:
    destructive readout is the samplers' business, not the oracle's.
    """
    n = circuit.num_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"accepted_branch_state caps at {MAX_QUBITS} qubits")
    all_faults = tuple(faults) + ((fault,) if fault is not None else ())
    for f in all_faults:
        if not 0 <= f.index < len(circuit.instructions):
            raise ValueError(f"fault index {f.index} out of range")
    pauli_after: dict[int, list[tuple[tuple[int, str], ...]]] = {}
    flip_at: dict[int, int] = {}
    prep_flip_at: set[int] = set()
    for f in all_faults:
        if f.kind == "pauli":
            pauli_after.setdefault(f.index, []).append(f.paulis)
        elif f.kind == "meas_flip":
            if not circuit.instructions[f.index].is_meas:
                raise ValueError("meas_flip fault must sit on a measurement")
            flip_at[f.index] = flip_at.get(f.index, 0) ^ 1
        else:
            if not circuit.instructions[f.index].is_prep:
                raise ValueError("prep_flip fault must sit on a preparation")
            prep_flip_at.add(f.index)

    dim = 1 << n
    if input_state is None:
        base = np.zeros((1, dim), dtype=np.complex128)
        base[0, 0] = 1.0
    else:
        base = np.asarray(input_state, dtype=np.complex128)
        base = base.reshape(1, -1) if base.ndim == 1 else base.copy()
        if base.shape[1] != dim:
            raise ValueError("input state has wrong dimension")
    squeeze = input_state is None or np.asarray(input_state).ndim == 1

    single_cov: set[int] = {d[0] for d in circuit.detectors if len(d) == 1}
    data_qubits = circuit.qubits_with_role(QubitRole.DATA)

    branches = [_Branch(base)]
    rec = 0
    # qubits parked in the Hadamard frame after an X-basis measurement; the
    # frame is restored lazily if anything touches them again, so factoring at
    # the end always sees computational-basis ancillas
    xframe: set[int] = set()

    def restore(qubits: tuple[int, ...]) -> None:
        for q in qubits:
            if q in xframe:
                for br in branches:
                    br.state = _apply_h_cols(br.state, q, n)
                xframe.discard(q)

    for idx, inst in enumerate(circuit.instructions):
        restore(inst.qubits)
        if inst.is_meas:
            q = inst.qubits[0]
            if circuit.roles[q] == QubitRole.DATA:
                raise ValueError(
                    f"accepted_branch_state: data qubit q{q} is measured; "
                    "use the trajectory samplers for destructive readout"
                )
            flip = flip_at.get(idx, 0)
            x_basis = inst.kind == "MeasX"
            nxt: list[_Branch] = []
            for br in branches:
                s = br.state
                if x_basis:
                    s = _apply_h_cols(s, q, n)
                if rec in single_cov:
                    phys = flip  # record must read 0
                    s2 = _project_bit(s, q, phys)
                    nxt.append(_Branch(s2, br.records + [0]))
                else:
                    for phys in (0, 1):
                        s2 = _project_bit(s, q, phys)
                        if float(np.abs(s2).max(initial=0.0)) <= prune_tol:
                            continue
                        nxt.append(_Branch(s2, br.records + [phys ^ flip]))
            if x_basis:
                xframe.add(q)
            branches = nxt
            rec += 1
        elif inst.is_prep:
            q = inst.qubits[0]
            x_basis = inst.kind == "PrepX"
            nxt = []
            for br in branches:
                pieces = []
                for val in (0, 1):
                    s2 = _project_bit(br.state, q, val)
                    if float(np.abs(s2).max(initial=0.0)) <= prune_tol:
                        continue
                    if val == 1:
                        s2 = apply_unitary(s2, PAULI_MATS["X"], (q,), n)
                    pieces.append(s2)
                if not pieces:
                    continue
                for s2 in pieces:
                    if x_basis:
                        s2 = _apply_h_cols(s2, q, n)
                    nxt.append(_Branch(s2, list(br.records)))
            branches = nxt
            if idx in prep_flip_at:
                letter = "X" if inst.kind == "PrepZ" else "Z"
                for br in branches:
                    br.state = apply_unitary(br.state, PAULI_MATS[letter], (q,), n)
        else:
            mat = instruction_matrix(inst)
            for br in branches:
                br.state = apply_unitary(br.state, mat, inst.qubits, n)
        for word in pauli_after.get(idx, ()):
            # faults act in the physical frame; re-park afterwards so the
            # final factoring still sees collapsed ancillas
            parked = [q for q, _ in word if q in xframe]
            restore(tuple(q for q, _ in word))
            for br in branches:
                s = br.state
                for q, letter in word:
                    s = apply_unitary(s, PAULI_MATS[letter], (q,), n)
                br.state = s
            for q in parked:
                for br in branches:
                    br.state = _apply_h_cols(br.state, q, n)
                xframe.add(q)
        if not branches:
            break

    kept: list[_Branch] = []
    for br in branches:
        recs = np.array(br.records, dtype=np.uint8)
        ok = all(int(np.bitwise_xor.reduce(recs[list(d)])) == 0 for d in circuit.detectors)
        if ok:
            kept.append(br)

    nb = base.shape[0]
    nd = len(data_qubits)
    reduced = np.zeros((nb, 1 << nd), dtype=np.complex128)
    accept = 0.0
    for br in kept:
        accept += float(np.sum(np.abs(br.state) ** 2))
        reduced += _factor_data(br.state, data_qubits, n)
    in_norm = float(np.sum(np.abs(base) ** 2))
    accept_prob = accept / in_norm if in_norm > 0 else 0.0
    if squeeze and nb == 1:
        return reduced[0], accept_prob
    return reduced, accept_prob


def _factor_data(state: np.ndarray, data_qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Slice out the data-qubit factor; non-data qubits must be collapsed."""
    nb = state.shape[0]
    nd = len(data_qubits)
    if nd == n:
        return state.copy()
    others = tuple(q for q in range(n) if q not in data_qubits)
    t = state.reshape((nb,) + (2,) * n)
    axis_of = lambda q: 1 + (n - 1 - q)
    order = (0,) + tuple(axis_of(q) for q in sorted(others, reverse=True)) + tuple(
        axis_of(q) for q in sorted(data_qubits, reverse=True)
    )
    m = t.transpose(order).reshape(nb, 1 << len(others), 1 << nd)
    mass = np.sum(np.abs(m) ** 2, axis=2)
    rows = np.argmax(mass, axis=1)
    total = np.sum(mass, axis=1)
    picked = np.take_along_axis(mass, rows[:, None], axis=1)[:, 0]
    stray = total - picked
    bad = stray > 1e-18 + 1e-9 * total
    if bad.any():
        raise ValueError(
            "ancilla register not collapsed to a product state; cannot factor"
        )
    return np.take_along_axis(m, rows[:, None, None], axis=1)[:, 0, :]


def logical_infidelity(
    state: np.ndarray | StateVector,
    projector: np.ndarray | None,
    ideal: np.ndarray | StateVector,
) -> float:
    """1 - |<ideal|state>|^2 / <state|P|state>, both sides inside the code space.

    ``ideal`` must lie in the code space and be normalized. Mass outside the
    code space is excluded: it is detectable by a later stabilizer round, so
    it is leakage, not logical damage. ``projector=None`` treats the whole
    space as the code space. Zero-norm states are rejected; a state with
    (numerically) no code-space mass returns 1.0.
    """
    s = state.amps if isinstance(state, StateVector) else np.asarray(state)
    i = ideal.amps if isinstance(ideal, StateVector) else np.asarray(ideal)
    norm2 = float(np.vdot(s, s).real)
    if norm2 <= 0.0:
        raise ValueError("zero-norm state")
    if projector is None:
        mass = norm2
    else:
        mass = float(np.vdot(s, projector @ s).real)
    if mass <= 1e-300:
        return 1.0
    ov = abs(np.vdot(i, s)) ** 2
    return float(min(1.0, max(0.0, 1.0 - ov / mass)))
