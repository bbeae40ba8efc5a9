"""Code definitions, code-space machinery, and code-level circuits."""

import itertools

import numpy as np
import pytest

from flagforge.circuits import QubitRole
from flagforge.codes import (CodeSpec, destructive_measure,
                             flagged_syndrome_extraction, ft_plus_prep,
                             iceberg_code, steane_code)
from flagforge.constructors import compose_data
from flagforge.paulis import PauliWord
from flagforge.stab import (classify_residual, clifford_frame_propagate,
                            enumerate_fault_sites, make_dense_context)
from flagforge.sv import run_noiseless
from flagforge.verify import block_fidelity, embed_word


# ---------------------------------------------------------------------------
# code algebra


def test_iceberg_structure():
    code = iceberg_code(2)
    assert (code.n, code.k) == (4, 2)
    assert {str(s) for s in code.stabilizers} == {"+XXXX", "+ZZZZ"}
    assert str(code.logical_z[0]) == "+ZZII"
    assert str(code.logical_z[1]) == "+ZIZI"
    assert str(code.logical_x[0]) == "+IXIX"
    assert str(code.logical_x[1]) == "+IIXX"


def test_iceberg_rejects_odd_or_small_k():
    with pytest.raises(ValueError):
        iceberg_code(3)
    with pytest.raises(ValueError):
        iceberg_code(0)


def test_steane_structure():
    code = steane_code()
    assert (code.n, code.k) == (7, 1)
    assert len(code.stabilizers) == 6
    x_supports = {s.support() for s in code.stabilizers if "X" in str(s)}
    z_supports = {s.support() for s in code.stabilizers if "Z" in str(s)}
    assert x_supports == z_supports  # self-dual
    assert all(s.weight() == 4 for s in code.stabilizers)


def test_steane_distance_three_brute_force():
    """Every Pauli commuting with all stabilizers but outside the group has
    weight >= 3 (exhaustive over all 4^7 words)."""
    code = steane_code()
    sx = np.array([s.x for s in code.stabilizers], dtype=np.uint8)
    sz = np.array([s.z for s in code.stabilizers], dtype=np.uint8)
    group = set()
    for picks in itertools.product((0, 1), repeat=6):
        gx = np.zeros(7, np.uint8)
        gz = np.zeros(7, np.uint8)
        for b, s in zip(picks, code.stabilizers):
            if b:
                gx ^= s.x
                gz ^= s.z
        group.add((gx.tobytes(), gz.tobytes()))
    best = 7
    for xi in range(128):
        x = np.array([(xi >> i) & 1 for i in range(7)], np.uint8)
        for zi in range(128):
            z = np.array([(zi >> i) & 1 for i in range(7)], np.uint8)
            if xi == 0 and zi == 0:
                continue
            # symplectic product with every stabilizer must vanish
            if ((sx @ z + sz @ x) % 2).any():
                continue
            if (x.tobytes(), z.tobytes()) in group:
                continue
            best = min(best, int(np.count_nonzero(x | z)))
    assert best == 3


def test_codespec_validation_catches_bad_input():
    z0 = PauliWord.from_support(2, ((0, "Z"),))
    x0 = PauliWord.from_support(2, ((0, "X"),))
    x1 = PauliWord.from_support(2, ((1, "X"),))
    with pytest.raises(ValueError):
        CodeSpec("bad", 2, 1, (z0, x0), (x1,), (z0,))  # anticommuting checks
    with pytest.raises(ValueError):
        CodeSpec("bad", 2, 1, (), (x1,), (z0,))  # Xbar commutes its Zbar? no:
    # x1 and z0 act on different qubits, so they commute: bad pairing


def test_projector_and_basis():
    for code in (iceberg_code(2), steane_code()):
        proj = code.projector()
        basis = code.basis()
        assert np.allclose(proj, proj.conj().T, atol=1e-12)
        assert np.allclose(proj @ proj, proj, atol=1e-12)
        assert np.isclose(np.trace(proj).real, 1 << code.k)
        assert np.allclose(basis.conj().T @ basis, np.eye(1 << code.k), atol=1e-12)
        assert np.allclose(proj @ basis, basis, atol=1e-12)
        for s in code.stabilizers:
            assert np.allclose(s.to_matrix() @ basis, basis, atol=1e-12)


def test_logical_pauli_block_action():
    code = iceberg_code(2)
    basis = code.basis()
    for i in (0, 1):
        zb = code.logical_pauli(((i, "Z"),)).to_matrix()
        block = basis.conj().T @ zb @ basis
        want = np.diag([(-1.0) ** ((b >> i) & 1) for b in range(4)])
        np.testing.assert_allclose(block, want, atol=1e-12)
    yb = code.logical_pauli(((0, "Y"),))
    xb = code.logical_pauli(((0, "X"),))
    zb = code.logical_pauli(((0, "Z"),))
    np.testing.assert_allclose(yb.to_matrix(),
                               1j * xb.to_matrix() @ zb.to_matrix(), atol=1e-12)


def test_plus_state_is_stabilized():
    for code in (iceberg_code(2), steane_code()):
        psi = code.plus_state()
        for w in list(code.stabilizers) + list(code.logical_x):
            np.testing.assert_allclose(w.to_matrix() @ psi, psi, atol=1e-12)


# ---------------------------------------------------------------------------
# code-level circuits


def _data_block(circuit, state):
    nd = sum(1 for r in circuit.roles if r == QubitRole.DATA)
    assert all(r == QubitRole.DATA for r in circuit.roles[:nd])
    return state.reshape(-1, 1 << nd)[0]


def test_ft_plus_prep_prepares_plus():
    for code in (iceberg_code(2), steane_code()):
        circ = ft_plus_prep(code)
        sv, shot = run_noiseless(circ)
        assert shot.accepted
        # flags end in MeasX eigenstates, so normalize the ancilla-0 slice
        block = _data_block(circ, sv.amps.ravel())
        block = block / np.linalg.norm(block)
        f = abs(np.vdot(code.plus_state(), block))
        assert f == pytest.approx(1.0, abs=1e-9)


def test_ft_plus_prep_no_single_fault_logicals():
    # the verification round must catch every dangerous single fault; a
    # residual damages |+bar> only when it flips an Xbar sign, so the
    # witnesses are the logical X operators (Xbar-type residuals are benign)
    for code in (iceberg_code(2), steane_code()):
        circ = ft_plus_prep(code)
        n = circ.num_qubits
        checks = tuple(embed_word(w, n) for w in code.stabilizers)
        wits = tuple(embed_word(w, n) for w in code.logical_x)
        for site in enumerate_fault_sites(circ):
            rep = clifford_frame_propagate(circ, (site,))
            assert classify_residual(rep, checks, wits) != "undetected_logical"


def test_flagged_syndrome_extraction_is_transparent():
    for code in (iceberg_code(2), steane_code()):
        for basis_kind in ("Z", "X"):
            circ = flagged_syndrome_extraction(code, basis_kind)
            assert any(r == QubitRole.FLAG for r in circ.roles)
            assert circ.detectors
            ctx = make_dense_context(circ, code.basis())
            assert ctx.reference_acceptance == pytest.approx(1.0, abs=1e-12)
            f = block_fidelity(ctx.reference_block, np.eye(1 << code.k))
            assert f == pytest.approx(1.0, abs=1e-12)


def test_flagged_syndrome_extraction_catches_single_faults():
    code = steane_code()
    circ = flagged_syndrome_extraction(code, "Z")
    n = circ.num_qubits
    checks = tuple(embed_word(w, n) for w in code.stabilizers)
    wits = tuple(embed_word(w, n)
                 for w in code.logical_x + code.logical_z)
    for site in enumerate_fault_sites(circ):
        rep = clifford_frame_propagate(circ, (site,))
        assert classify_residual(rep, checks, wits) != "undetected_logical", site


def test_destructive_measure_readout():
    for code in (iceberg_code(2), steane_code()):
        circ = compose_data(ft_plus_prep(code), destructive_measure(code, "X"))
        sv, shot = run_noiseless(circ, seed=4)
        assert shot.accepted
        assert len(shot.observables) == code.k
        assert not shot.observables.any()  # |+bar> has Xbar = +1


def test_destructive_measure_flags_stabilizer_violation():
    # readout of a state outside the code space must fire a reconstruction
    # detector: measure |0...0> in the X basis and the X-stabilizer parities
    # are random, so over a few seeds at least one shot is rejected
    code = steane_code()
    circ = destructive_measure(code, "X")
    rejects = 0
    for seed in range(12):
        _, shot = run_noiseless(circ, seed=seed)
        rejects += int(not shot.accepted)
    assert rejects > 0
