import pytest

from flagforge.angles import DyadicAngle
from flagforge.circuits import (
    Circuit,
    FaultSite,
    Instruction,
    QubitRole,
    compose,
    invert,
    stats,
)

D = QubitRole.DATA
F = QubitRole.FLAG


def test_instruction_validation():
    with pytest.raises(ValueError):
        Instruction("NOPE", (0,))
    with pytest.raises(ValueError):
        Instruction("CX", (0,))
    with pytest.raises(ValueError):
        Instruction("CX", (1, 1))
    with pytest.raises(ValueError):
        Instruction("RZ", (0,))  # angle required
    with pytest.raises(ValueError):
        Instruction("H", (0,), DyadicAngle.pi_over(1))


def test_instruction_inverse():
    assert Instruction("H", (0,)).inverse() == Instruction("H", (0,))
    assert Instruction("S", (0,)).inverse().kind == "Sdg"
    rz = Instruction("RZ", (0,), DyadicAngle.pi_over(2))
    assert rz.inverse().angle == -DyadicAngle.pi_over(2)
    with pytest.raises(ValueError):
        Instruction("MeasZ", (0,)).inverse()


def test_append_records_and_detectors():
    c = Circuit((D, F))
    assert c.append("PrepZ", 1) == -1
    assert c.append("CX", 0, 1) == -1
    r = c.append("MeasZ", 1)
    assert r == 0 and c.num_records == 1
    c.add_detector(r)
    c.add_observable("z0", r)
    with pytest.raises(ValueError):
        c.add_detector(5)
    with pytest.raises(ValueError):
        c.add_observable("z0", r)  # duplicate name
    with pytest.raises(ValueError):
        c.append("H", 7)
    c.validate()


def test_prep_discipline():
    c = Circuit((D, F))
    c.append("PrepZ", 1)
    c.append("CX", 0, 1)
    c.append("PrepZ", 1)  # prep on a live qubit
    with pytest.raises(ValueError):
        c.validate()
    ok = Circuit((D, F))
    ok.append("PrepZ", 1)
    ok.append("CX", 0, 1)
    ok.append("MeasZ", 1)
    ok.append("PrepZ", 1)  # measured, so reusable
    ok.validate()


def test_invert_reverses_unitaries():
    c = Circuit((D,))
    c.append("H", 0)
    c.append("RZ", 0, angle=DyadicAngle.pi_over(2))
    inv = invert(c)
    assert [i.kind for i in inv.instructions] == ["RZ", "H"]
    assert inv.instructions[0].angle == -DyadicAngle.pi_over(2)
    c.append("MeasZ", 0)
    with pytest.raises(ValueError):
        invert(c)


def test_compose_maps_and_shifts():
    a = Circuit((D, F))
    a.append("PrepZ", 1)
    a.append("CX", 0, 1)
    ra = a.append("MeasZ", 1)
    a.add_detector(ra)
    b = Circuit((D, F))
    b.append("PrepX", 1)
    rb = b.append("MeasX", 1)
    b.add_detector(rb)
    out = compose(a, b, {0: 0, 1: 1})
    assert out.num_qubits == 2
    assert out.detectors == [(0,), (1,)]
    out.validate()
    # unmapped qubits get fresh slots
    grown = compose(a, b, {0: 0})
    assert grown.num_qubits == 3
    assert grown.roles[2] == F


def test_compose_rejects_role_mixups():
    a = Circuit((D, F))
    b = Circuit((D, F))
    with pytest.raises(ValueError):
        compose(a, b, {0: 1})  # data onto flag
    with pytest.raises(ValueError):
        compose(a, b, {0: 0, 1: 0})  # not injective


def test_stats_counts_and_depth():
    c = Circuit((D, D, F))
    c.append("H", 0)
    c.append("H", 1)  # parallel with the first layer
    c.append("CX", 0, 1)
    c.append("PrepZ", 2)
    c.append("CX", 1, 2)
    c.append("MeasZ", 2)
    s = stats(c)
    assert s.gate_counts["H"] == 2 and s.gate_counts["CX"] == 2
    assert s.two_plus_qubit_gates == 2
    assert s.depth == 4
    assert s.ancilla_by_role == {"flag": 1}
    assert s.num_measurements == 1


def test_fault_site_validation():
    FaultSite("pauli", 0, ((0, "X"),))
    FaultSite("meas_flip", 3)
    with pytest.raises(ValueError):
        FaultSite("pauli", 0)
    with pytest.raises(ValueError):
        FaultSite("meas_flip", 0, ((0, "X"),))
    with pytest.raises(ValueError):
        FaultSite("pauli", 0, ((0, "W"),))
    with pytest.raises(ValueError):
        FaultSite("oops", 0)
