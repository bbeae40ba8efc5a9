"""Circuit intermediate representation.

A circuit is a straight-line sequence of instructions over a fixed register of
role-tagged qubits, plus detectors (parities of measurement records that are
deterministically 0 on the fault-free run) and named observables (record
parities whose value carries logical meaning).

Conventions:
  * every qubit starts in |0> at the top of the circuit; gadget inputs ride on
    qubits the circuit never prepares (role ``data`` plus caller-owned controls),
  * a Prep on a qubit that might be entangled is rejected statically: Prep is
    only allowed as a qubit's first instruction or after a measurement,
  * measurement records are indexed in program order starting at 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .angles import DyadicAngle


class QubitRole(str, enum.Enum):
    DATA = "data"
    FLAG = "flag"
    GARBAGE = "garbage"
    CAT = "cat_ancilla"
    LOGICAL_ANCILLA = "logical_ancilla"


# kind -> (arity, takes_angle)
INSTRUCTION_SIGNATURES: dict[str, tuple[int, bool]] = {
    "PrepZ": (1, False),
    "PrepX": (1, False),
    "MeasZ": (1, False),
    "MeasX": (1, False),
    "X": (1, False),
    "Y": (1, False),
    "Z": (1, False),
    "H": (1, False),
    "S": (1, False),
    "Sdg": (1, False),
    "CX": (2, False),
    "CZ": (2, False),
    "CCX": (3, False),
    "CCZ": (3, False),
    "RZ": (1, True),
    "RZZ": (2, True),
    "CRZ": (2, True),
    "CRZZ": (3, True),
}

PREP_KINDS = frozenset({"PrepZ", "PrepX"})
MEAS_KINDS = frozenset({"MeasZ", "MeasX"})
ROTATION_KINDS = frozenset({"RZ", "RZZ", "CRZ", "CRZZ"})

_SELF_INVERSE = frozenset({"X", "Y", "Z", "H", "CX", "CZ", "CCX", "CCZ"})


@dataclass(frozen=True)
class Instruction:
    kind: str
    qubits: tuple[int, ...]
    angle: DyadicAngle | None = None

    def __post_init__(self) -> None:
        sig = INSTRUCTION_SIGNATURES.get(self.kind)
        if sig is None:
            raise ValueError(f"unknown instruction kind {self.kind!r}")
        arity, takes_angle = sig
        if len(self.qubits) != arity:
            raise ValueError(
                f"{self.kind} expects {arity} qubit(s), got {len(self.qubits)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind} qubits must be distinct: {self.qubits}")
        if takes_angle and self.angle is None:
            raise ValueError(f"{self.kind} requires an angle")
        if not takes_angle and self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    @property
    def is_prep(self) -> bool:
        return self.kind in PREP_KINDS

    @property
    def is_meas(self) -> bool:
        return self.kind in MEAS_KINDS

    @property
    def is_unitary(self) -> bool:
        return not self.is_prep and not self.is_meas

    def inverse(self) -> "Instruction":
        if not self.is_unitary:
            raise ValueError(f"{self.kind} has no inverse")
        if self.kind in _SELF_INVERSE:
            return self
        if self.kind == "S":
            return replace(self, kind="Sdg")
        if self.kind == "Sdg":
            return replace(self, kind="S")
        assert self.angle is not None
        return replace(self, angle=-self.angle)


@dataclass(frozen=True)
class FaultSite:
    """One elementary fault location.

    ``kind`` is ``"pauli"`` (Pauli error inserted right after instruction
    ``index``; ``paulis`` pairs each support qubit with 'X'/'Y'/'Z', identity
    entries omitted), ``"prep_flip"`` (orthogonal state prepared) or
    ``"meas_flip"`` (recorded bit inverted, state untouched).
    """

    kind: str
    index: int
    paulis: tuple[tuple[int, str], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("pauli", "prep_flip", "meas_flip"):
            raise ValueError(f"bad fault kind {self.kind!r}")
        if self.kind == "pauli":
            if not self.paulis:
                raise ValueError("pauli fault needs at least one non-identity factor")
            for _, p in self.paulis:
                if p not in ("X", "Y", "Z"):
                    raise ValueError(f"bad pauli letter {p!r}")
        elif self.paulis:
            raise ValueError(f"{self.kind} fault carries no paulis")

    def describe(self, circuit: "Circuit") -> str:
        inst = circuit.instructions[self.index]
        loc = f"after #{self.index} {inst.kind} {' '.join(f'q{q}' for q in inst.qubits)}"
        if self.kind == "pauli":
            err = " ".join(f"{p}(q{q})" for q, p in self.paulis)
            return f"{err} {loc}"
        return f"{self.kind} {loc}"


@dataclass
class Circuit:
    roles: tuple[QubitRole, ...]
    instructions: list[Instruction] = field(default_factory=list)
    detectors: list[tuple[int, ...]] = field(default_factory=list)
    observables: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)

    @property
    def num_qubits(self) -> int:
        return len(self.roles)

    @property
    def num_records(self) -> int:
        return sum(1 for i in self.instructions if i.is_meas)

    def append(self, kind: str, *qubits: int, angle: DyadicAngle | None = None) -> int:
        """Append one instruction; returns the record index for measurements, else -1."""
        inst = Instruction(kind, tuple(qubits), angle)
        for q in inst.qubits:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit q{q} out of range (n={self.num_qubits})")
        rec = self.num_records if inst.is_meas else -1
        self.instructions.append(inst)
        return rec

    def add_detector(self, *records: int) -> int:
        self._check_records(records)
        self.detectors.append(tuple(records))
        return len(self.detectors) - 1

    def add_observable(self, name: str, *records: int) -> None:
        self._check_records(records)
        if any(n == name for n, _ in self.observables):
            raise ValueError(f"duplicate observable name {name!r}")
        self.observables.append((name, tuple(records)))

    def _check_records(self, records: tuple[int, ...]) -> None:
        n = self.num_records
        for r in records:
            if not 0 <= r < n:
                raise ValueError(f"record r{r} out of range (have {n})")

    def validate(self) -> None:
        """Full static check: bounds, prep discipline, record references."""
        n = self.num_qubits
        # "open" = qubit holds live quantum state (prepped or gate-touched)
        live = [False] * n
        for inst in self.instructions:
            for q in inst.qubits:
                if not 0 <= q < n:
                    raise ValueError(f"qubit q{q} out of range")
            if inst.is_prep:
                q = inst.qubits[0]
                if live[q]:
                    raise ValueError(
                        f"Prep on live qubit q{q}; measure it first"
                    )
                live[q] = True
            elif inst.is_meas:
                live[inst.qubits[0]] = False
            else:
                for q in inst.qubits:
                    live[q] = True
        nrec = self.num_records
        for d in self.detectors:
            for r in d:
                if not 0 <= r < nrec:
                    raise ValueError(f"detector record r{r} out of range")
        seen: set[str] = set()
        for name, recs in self.observables:
            if name in seen:
                raise ValueError(f"duplicate observable name {name!r}")
            seen.add(name)
            for r in recs:
                if not 0 <= r < nrec:
                    raise ValueError(f"observable record r{r} out of range")

    def qubits_with_role(self, role: QubitRole) -> tuple[int, ...]:
        return tuple(q for q, r in enumerate(self.roles) if r == role)

    def record_meta(self) -> list[Instruction]:
        """Measurement instructions in record order."""
        return [i for i in self.instructions if i.is_meas]

    def covered_records(self) -> set[int]:
        """Records referenced by at least one detector."""
        out: set[int] = set()
        for d in self.detectors:
            out.update(d)
        return out

    def copy(self) -> "Circuit":
        return Circuit(
            self.roles,
            list(self.instructions),
            list(self.detectors),
            list(self.observables),
        )


def invert(circuit: Circuit) -> Circuit:
    """Adjoint of a purely unitary circuit. Rejects preps and measurements."""
    for inst in circuit.instructions:
        if not inst.is_unitary:
            raise ValueError(f"cannot invert circuit containing {inst.kind}")
    out = Circuit(circuit.roles)
    for inst in reversed(circuit.instructions):
        out.instructions.append(inst.inverse())
    return out


def compose(first: Circuit, second: Circuit, qubit_map: dict[int, int]) -> Circuit:
    """Run ``first`` then ``second``, identifying second's qubits through qubit_map.

    ``qubit_map`` sends a qubit index of ``second`` to a qubit index of
    ``first``; unmapped qubits of ``second`` get fresh slots appended. A data
    qubit may only map onto a data qubit; ancilla slots may be reused across
    ancilla roles (the composite keeps the first circuit's role tag). Detector
    and observable record references are shifted; observable names must not
    collide.
    """
    n1 = first.num_qubits
    targets = list(qubit_map.values())
    if len(set(targets)) != len(targets):
        raise ValueError("qubit_map must be injective")
    roles = list(first.roles)
    full_map: dict[int, int] = {}
    for q2 in range(second.num_qubits):
        if q2 in qubit_map:
            q1 = qubit_map[q2]
            if not 0 <= q1 < n1:
                raise ValueError(f"qubit_map target q{q1} out of range")
            if (first.roles[q1] == QubitRole.DATA) != (
                second.roles[q2] == QubitRole.DATA
            ):
                raise ValueError(
                    f"role conflict mapping q{q2} ({second.roles[q2].value}) "
                    f"onto q{q1} ({first.roles[q1].value})"
                )
            full_map[q2] = q1
        else:
            full_map[q2] = len(roles)
            roles.append(second.roles[q2])
    out = Circuit(tuple(roles), list(first.instructions), list(first.detectors),
                  list(first.observables))
    shift = first.num_records
    for inst in second.instructions:
        out.instructions.append(
            replace(inst, qubits=tuple(full_map[q] for q in inst.qubits))
        )
    for d in second.detectors:
        out.detectors.append(tuple(r + shift for r in d))
    names = {n for n, _ in first.observables}
    for name, recs in second.observables:
        if name in names:
            raise ValueError(f"duplicate observable name {name!r} in composition")
        out.observables.append((name, tuple(r + shift for r in recs)))
    out.validate()
    return out


@dataclass(frozen=True)
class CircuitStats:
    num_qubits: int
    depth: int
    gate_counts: dict[str, int]
    two_plus_qubit_gates: int
    ancilla_by_role: dict[str, int]
    num_measurements: int
    num_detectors: int

    def summary(self) -> str:
        lines = [
            f"qubits            {self.num_qubits}",
            f"depth             {self.depth}",
            f"2q+ gates         {self.two_plus_qubit_gates}",
            f"measurements      {self.num_measurements}",
            f"detectors         {self.num_detectors}",
        ]
        for role, count in sorted(self.ancilla_by_role.items()):
            lines.append(f"ancilla[{role}]".ljust(18) + str(count))
        for kind in sorted(self.gate_counts):
            lines.append(f"  {kind}".ljust(18) + str(self.gate_counts[kind]))
        return "\n".join(lines)


def stats(circuit: Circuit) -> CircuitStats:
    """Gate counts, greedy depth (disjoint supports share a layer), ancilla budget."""
    counts: dict[str, int] = {}
    frontier = [0] * circuit.num_qubits
    depth = 0
    two_plus = 0
    for inst in circuit.instructions:
        counts[inst.kind] = counts.get(inst.kind, 0) + 1
        if inst.is_unitary and len(inst.qubits) >= 2:
            two_plus += 1
        layer = 1 + max(frontier[q] for q in inst.qubits)
        for q in inst.qubits:
            frontier[q] = layer
        depth = max(depth, layer)
    ancilla: dict[str, int] = {}
    for role in circuit.roles:
        if role != QubitRole.DATA:
            ancilla[role.value] = ancilla.get(role.value, 0) + 1
    return CircuitStats(
        num_qubits=circuit.num_qubits,
        depth=depth,
        gate_counts=counts,
        two_plus_qubit_gates=two_plus,
        ancilla_by_role=ancilla,
        num_measurements=circuit.num_records,
        num_detectors=len(circuit.detectors),
    )
