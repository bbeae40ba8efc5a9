import pytest

from flagforge.angles import DyadicAngle
from flagforge.circuits import Circuit, QubitRole
from flagforge.constructors import (
    iceberg_logical_rz,
    iceberg_pair_rotation,
    steane_ft_rz,
    steane_pi2_d3,
    steane_state_prep,
)
from flagforge.textfmt import parse_circuit, print_circuit


def _roundtrip(circ):
    text = print_circuit(circ)
    back = parse_circuit(text)
    assert print_circuit(back) == text
    assert back.roles == circ.roles
    assert list(back.instructions) == list(circ.instructions)
    assert list(back.detectors) == list(circ.detectors)
    assert list(back.observables) == list(circ.observables)


def test_roundtrip_handmade():
    c = Circuit((QubitRole.DATA, QubitRole.FLAG))
    c.append("PrepX", 1)
    c.append("RZZ", 0, 1, angle=DyadicAngle.pi_over(2, -1))
    r = c.append("MeasX", 1)
    c.add_detector(r)
    c.add_observable("xbar", r)
    _roundtrip(c)


@pytest.mark.parametrize("circ", [
    iceberg_logical_rz(1, 2).circuit,
    iceberg_pair_rotation(1, 2, 1).circuit,
    steane_ft_rz(2).circuit,
    steane_state_prep(2),
    steane_pi2_d3(),
], ids=["iceberg-rz", "iceberg-pair", "steane-rz", "steane-prep", "steane-pi2"])
def test_roundtrip_gadgets(circ):
    _roundtrip(circ)


def test_comments_and_blanks():
    text = ("# header\n"
            "QUBIT q0 data\n"
            "\n"
            "QUBIT q1 flag   # trailing comment\n"
            "PrepZ q1\n"
            "CX q0 q1\n"
            "MeasZ q1\n"
            "DETECTOR r0\n")
    c = parse_circuit(text)
    assert c.num_qubits == 2
    assert c.detectors == [(0,)]


def test_angle_text():
    c = Circuit((QubitRole.DATA,))
    c.append("RZ", 0, angle=DyadicAngle(-3, 3))
    assert "RZ -3/8 q0" in print_circuit(c)


@pytest.mark.parametrize("bad", [
    "QUBIT q0 nonsense\n",
    "QUBIT x0 data\n",
    "QUBIT q0 data\nH q1\n",
    "QUBIT q0 data\nFROB q0\n",
    "QUBIT q0 data\nMeasZ q0\nDETECTOR r1\n",
    "QUBIT q0 data\nRZ q0\n",
    "QUBIT q0 data\nH 0\n",
    "QUBIT q0 data\nOBSERVABLE only_name\n",
])
def test_parse_errors_carry_line_numbers(bad):
    with pytest.raises(ValueError) as err:
        parse_circuit(bad)
    assert "line" in str(err.value)
