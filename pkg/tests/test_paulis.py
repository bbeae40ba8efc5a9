import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flagforge.angles import DyadicAngle
from flagforge.circuits import Instruction
from flagforge.dense import instruction_matrix
from flagforge.paulis import (
    PauliWord,
    conjugation_table,
    is_clifford_instruction,
    symplectic_dot,
)


def _word(n, items):
    return PauliWord.from_support(n, tuple(items))


def test_from_support_and_letters():
    w = _word(3, [(0, "X"), (1, "Z"), (2, "Y")])
    assert w.letter(0) == "X" and w.letter(1) == "Z" and w.letter(2) == "Y"
    assert w.weight() == 3
    assert w.support() == (0, 1, 2)
    assert str(w) == "+XZY"
    with pytest.raises(ValueError):
        _word(2, [(0, "Q")])


def test_mul_matches_matrices():
    a = _word(2, [(0, "X"), (1, "Y")])
    b = _word(2, [(0, "Z"), (1, "Z")])
    np.testing.assert_allclose((a * b).to_matrix(),
                               a.to_matrix() @ b.to_matrix(), atol=1e-12)


def test_y_phase_convention():
    y = _word(1, [(0, "Y")])
    np.testing.assert_allclose(y.to_matrix(),
                               np.array([[0, -1j], [1j, 0]]), atol=1e-15)
    assert y.sign() == 1  # Hermitian
    yy = y * y
    assert yy.weight() == 0 and yy.sign() == 1


words = st.builds(
    lambda items: _word(4, [(q, p) for q, p in dict(items).items()]),
    st.lists(st.tuples(st.integers(0, 3), st.sampled_from("XYZ")), max_size=4),
)


@given(words, words)
def test_commutes_matches_dense(a, b):
    ma, mb = a.to_matrix(), b.to_matrix()
    comm = np.allclose(ma @ mb, mb @ ma)
    assert a.commutes(b) == comm
    assert symplectic_dot(a.x, a.z, b.x, b.z) == (0 if comm else 1)


@given(words, words)
def test_mul_associates_with_dense(a, b):
    np.testing.assert_allclose((a * b).to_matrix(),
                               a.to_matrix() @ b.to_matrix(), atol=1e-9)


@pytest.mark.parametrize("kind,angle", [
    ("H", None), ("S", None), ("Sdg", None), ("X", None), ("Y", None),
    ("Z", None), ("CX", None), ("CZ", None),
    ("RZ", DyadicAngle.pi_over(1)), ("RZZ", DyadicAngle.pi_over(1)),
    ("RZ", DyadicAngle(1, 0)),
])
def test_conjugation_tables_match_dense(kind, angle):
    table = conjugation_table(kind, angle)
    assert table is not None
    out_idx, out_sign = table
    from flagforge.paulis import _candidate_mats

    arity = {"CX": 2, "CZ": 2, "RZZ": 2}.get(kind, 1)
    u = instruction_matrix(Instruction(kind, tuple(range(arity)), angle))
    cands = _candidate_mats(arity)
    for i in range(4**arity):
        got = u @ cands[i] @ u.conj().T
        want = out_sign[i] * cands[out_idx[i]]
        np.testing.assert_allclose(got, want, atol=1e-9)


def test_non_clifford_angles_have_no_table():
    assert conjugation_table("RZ", DyadicAngle.pi_over(2)) is None
    assert conjugation_table("RZZ", DyadicAngle.pi_over(3)) is None
    t = Instruction("RZ", (0,), DyadicAngle.pi_over(2))
    assert not is_clifford_instruction(t)
    s = Instruction("RZ", (0,), DyadicAngle.pi_over(1))
    assert is_clifford_instruction(s)
    assert is_clifford_instruction(Instruction("MeasZ", (0,)))


def test_ccx_is_not_clifford():
    assert conjugation_table("CCX", None) is None
    assert conjugation_table("CCZ", None) is None
