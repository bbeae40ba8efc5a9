"""Plain-text circuit format.

One statement per line, ``#`` starts a comment:

    QUBIT q0 data
    QUBIT q1 flag
    PrepX q1
    RZZ 1/4 q0 q1
    MeasX q1
    DETECTOR r0
    OBSERVABLE xbar r0

Angles print as ``numerator/denominator`` with a power-of-two denominator.
``print_circuit`` followed by ``parse_circuit`` is the identity on valid
circuits; the printer emits qubit declarations first, instructions in order,
then detectors and observables.
"""

from __future__ import annotations

from .angles import DyadicAngle
from .circuits import INSTRUCTION_SIGNATURES, Circuit, QubitRole

_ROLE_BY_NAME = {r.value: r for r in QubitRole}


def print_circuit(circuit: Circuit) -> str:
    lines: list[str] = []
    for q, role in enumerate(circuit.roles):
        lines.append(f"QUBIT q{q} {role.value}")
    for inst in circuit.instructions:
        parts = [inst.kind]
        if inst.angle is not None:
            parts.append(str(inst.angle))
        parts.extend(f"q{q}" for q in inst.qubits)
        lines.append(" ".join(parts))
    for recs in circuit.detectors:
        lines.append("DETECTOR " + " ".join(f"r{r}" for r in recs))
    for name, recs in circuit.observables:
        lines.append(f"OBSERVABLE {name} " + " ".join(f"r{r}" for r in recs))
    return "\n".join(lines) + "\n"


def _parse_qubit(token: str, line_no: int) -> int:
    if not token.startswith("q") or not token[1:].isdigit():
        raise ValueError(f"line {line_no}: expected qubit token, got {token!r}")
    return int(token[1:])


def _parse_record(token: str, line_no: int) -> int:
    if not token.startswith("r") or not token[1:].isdigit():
        raise ValueError(f"line {line_no}: expected record token, got {token!r}")
    return int(token[1:])


def parse_circuit(text: str) -> Circuit:
    roles: dict[int, QubitRole] = {}
    body: list[tuple[int, list[str]]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "QUBIT":
            if len(tokens) != 3:
                raise ValueError(f"line {line_no}: QUBIT wants index and role")
            q = _parse_qubit(tokens[1], line_no)
            role = _ROLE_BY_NAME.get(tokens[2])
            if role is None:
                raise ValueError(f"line {line_no}: unknown role {tokens[2]!r}")
            if q in roles:
                raise ValueError(f"line {line_no}: duplicate QUBIT q{q}")
            roles[q] = role
        else:
            body.append((line_no, tokens))
    if roles:
        n = max(roles) + 1
        missing = [q for q in range(n) if q not in roles]
        if missing:
            raise ValueError(f"missing QUBIT declarations for {missing}")
    else:
        n = 0
    circuit = Circuit(tuple(roles[q] for q in range(n)))
    for line_no, tokens in body:
        head = tokens[0]
        try:
            if head == "DETECTOR":
                circuit.add_detector(
                    *(_parse_record(t, line_no) for t in tokens[1:]))
            elif head == "OBSERVABLE":
                if len(tokens) < 3:
                    raise ValueError("OBSERVABLE wants a name and records")
                circuit.add_observable(
                    tokens[1], *(_parse_record(t, line_no) for t in tokens[2:])
                )
            elif head in INSTRUCTION_SIGNATURES:
                _, takes_angle = INSTRUCTION_SIGNATURES[head]
                rest = tokens[1:]
                angle = None
                if takes_angle:
                    if not rest:
                        raise ValueError(f"{head} wants an angle")
                    angle = DyadicAngle.parse(rest[0])
                    rest = rest[1:]
                qubits = [_parse_qubit(t, line_no) for t in rest]
                circuit.append(head, *qubits, angle=angle)
            else:
                raise ValueError(f"unknown statement {head!r}")
        except ValueError as exc:
            msg = str(exc)
            if msg.startswith(f"line {line_no}:"):
                raise
            raise ValueError(f"line {line_no}: {msg}") from exc
    circuit.validate()
    return circuit
