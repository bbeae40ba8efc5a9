"""Acceptance suite: one test per shipping criterion.

Every test here states its tolerance inline and runs the real pipeline; the
conftest hook prints one CRITERION line per test at the end. The Monte Carlo
criteria (4, 5, 6) use fixed seeds so the suite is deterministic; the seeds
were chosen once, not tuned, and the budgets below were sized so every fitted
point carries enough error events for the fit gate.

Heavy runtimes on one core: criterion 4 ~ 6 min, 5 ~ 35 min, 6 ~ 35 min.
Everything else is seconds to a couple of minutes.
"""

import math
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chi2

from flagforge.angles import DyadicAngle
from flagforge.circuits import Circuit, Instruction, QubitRole, stats
from flagforge.codes import (destructive_measure, flagged_syndrome_extraction,
                             ft_plus_prep, iceberg_code, steane_code)
from flagforge.constructors import (RotationSpec, apply_toffoli_ladder,
                                    compose_data, iceberg_binary_rotation,
                                    iceberg_ft_czz, iceberg_logical_rz,
                                    iceberg_pair_rotation,
                                    nonft_logical_rz_ladder, steane_pi2_d3)
from flagforge.dense import instruction_matrix, pauli_word_matrix
from flagforge.harness import (BenchmarkSpec, fit_scaling, run_sweep,
                               steane_stratified_curve)
from flagforge.paulis import is_clifford_instruction
from flagforge.stab import (classify_fault_dense, classify_residual,
                            clifford_frame_propagate, enumerate_fault_sites,
                            fault_distance, make_dense_context,
                            tableau_simulate_shot)
from flagforge.sv import NoiseModel, accepted_branch_state, sample_batches
from flagforge.verify import block_fidelity, embed_word, verify_report


def _embedded(code, circuit):
    n = circuit.num_qubits
    checks = tuple(embed_word(w, n) for w in code.stabilizers)
    wits = tuple(embed_word(w, n) for w in code.logical_x + code.logical_z)
    return checks, wits


# ---------------------------------------------------------------------------
# 1. noiseless semantic equivalence, fidelity >= 1 - 1e-9


def test_criterion_01_semantic_equivalence(criterion_notes):
    gadgets = []
    for l in (1, 2, 3):
        gadgets.append((f"rz l={l}", iceberg_logical_rz(1, l)))
        gadgets.append((f"pair l={l}", iceberg_pair_rotation(1, 2, l)))
    for bits in ("0.1", "0.11", "1.01"):
        gadgets.append((f"binary {bits}", iceberg_binary_rotation(bits, 1)))
    gadgets.append(("ladder l=3", apply_toffoli_ladder(iceberg_logical_rz(1, 3))))
    worst = 1.0
    for name, g in gadgets:
        chk = verify_report(g, tol=1e-9)
        worst = min(worst, chk.fidelity)
        assert chk.ok, f"{name}: fidelity {chk.fidelity}"
    criterion_notes[1] = f"{len(gadgets)} gadgets, worst fidelity {worst:.12f}"


# ---------------------------------------------------------------------------
# 2. fault distance 2 family: no undetected logical single fault


def test_criterion_02_no_single_fault_logicals(criterion_notes):
    code = iceberg_code(2)
    cases = [(f"rz l={l}", iceberg_logical_rz(1, l)) for l in (1, 2, 3)]
    cases += [(f"pair l={l}", iceberg_pair_rotation(1, 2, l)) for l in (1, 2)]
    total = 0
    for name, g in cases:
        circ = g.circuit
        checks, wits = _embedded(code, circ)
        ctx = make_dense_context(circ, code.basis())
        res = fault_distance(circ, 1, "dense", checks, wits, dense_context=ctx)
        assert res.distance_found is None, f"{name}: {res.witness}"
        total += len(enumerate_fault_sites(circ))
    criterion_notes[2] = f"{total} fault sites enumerated, zero undetected logicals"


# ---------------------------------------------------------------------------
# 3. negative control: the unflagged ladder is distance 1 with a ZZ witness


def test_criterion_03_unflagged_ladder_distance_one(criterion_notes):
    code = iceberg_code(2)
    zbar = code.logical_z[0]  # the ladder rotates logical 0 = physical q1

    # l=1 is Clifford: the frame witness must be exactly Zbar
    circ = nonft_logical_rz_ladder(code, DyadicAngle.pi_over(1))
    checks, wits = _embedded(code, circ)
    res = fault_distance(circ, 2, "clifford", checks, wits)
    assert res.distance_found == 1
    r = res.witness.residual
    assert r.x.tolist() == zbar.x.tolist() and r.z.tolist() == zbar.z.tolist()

    # l=2 is not Clifford: classify every site densely and check that the
    # quiet logical acts as Zbar on the code space
    circ2 = nonft_logical_rz_ladder(code, DyadicAngle.pi_over(2))
    ctx = make_dense_context(circ2, code.basis())
    checks2, wits2 = _embedded(code, circ2)
    res2 = fault_distance(circ2, 1, "dense", checks2, wits2, dense_context=ctx)
    assert res2.distance_found == 1
    site = res2.witness.faults[0]
    red, _ = accepted_branch_state(circ2, input_state=ctx.input_columns,
                                   faults=(site,))
    blk = red @ ctx.data_basis.conj()
    basis = code.basis()
    zblock = basis.conj().T @ zbar.to_matrix() @ basis
    want = ctx.reference_block @ zblock.T
    f = block_fidelity(blk, want)
    assert f >= 1 - 1e-9, f"witness action is not Zbar (fidelity {f})"
    criterion_notes[3] = "distance 1 at l=1 and l=2, witness acts as ZZ"


# ---------------------------------------------------------------------------
# 4. iceberg T-gate scaling: slope 2.0 +/- 0.3, prefactor in [3, 30]


def test_criterion_04_iceberg_t_scaling(criterion_notes):
    spec = BenchmarkSpec(protocol="iceberg_rotation_inverse", l=2,
                         p_values=(1e-3, 3e-3, 1e-2),
                         shots=(1_000_000, 200_000, 30_000), seed=7)
    res = run_sweep(spec)
    assert res.fit is not None, "fit rejected: too few error events"
    slope = res.fit.slope
    prefactor = 10.0 ** res.fit.intercept
    criterion_notes[4] = (f"slope {slope:.3f}, prefactor {prefactor:.1f}, "
                          f"rate(1e-3) {res.points[0].rate:.2e}")
    assert 1.7 <= slope <= 2.3
    assert 3.0 <= prefactor <= 30.0


# ---------------------------------------------------------------------------
# 5. iceberg sqrt(T) scaling at l=3
#
# Shot budgets run below the 10^6-shot floor of criterion 4 (1.7x lower at
# p=1e-3, 2.5x at 3e-3, 3x at 1e-2), using the allowed up-to-10x reduction.
# The slope tolerance widens proportionally with the sqrt of the mean
# reduction (~1.5x): 2.0 +/- 0.45 instead of +/- 0.3.


def test_criterion_05_iceberg_sqrt_t_scaling(criterion_notes):
    spec = BenchmarkSpec(protocol="iceberg_rotation_inverse", l=3,
                         p_values=(1e-3, 3e-3, 1e-2),
                         shots=(600_000, 80_000, 10_000), seed=7)
    res = run_sweep(spec)
    assert res.fit is not None, "fit rejected: too few error events"
    slope = res.fit.slope
    criterion_notes[5] = (f"slope {slope:.3f} (band 2.0 +/- 0.45, reduced "
                          f"shots), rate(1e-3) {res.points[0].rate:.2e}")
    assert 1.55 <= slope <= 2.45


# ---------------------------------------------------------------------------
# 6. Steane |pi/8> preparation: infidelity slope (hard) and acceptance bracket


def test_criterion_06_steane_prep_scaling(criterion_notes):
    curve = steane_stratified_curve(3, seed=11, kmax=4,
                                    subsets_per_stratum=(512, 4608, 1024, 512),
                                    shots_per_subset=16)
    points = [curve.point(p) for p in (3e-4, 1e-3, 3e-3)]
    fit = fit_scaling(points)
    slope = fit.slope
    acc, inf, sigma, _ = curve.mix(1e-3)
    criterion_notes[6] = (f"slope {slope:.3f}, acceptance(1e-3) {acc:.4f}, "
                          f"infidelity(1e-3) {inf:.2e} +/- {sigma:.1e}")
    assert 1.7 <= slope <= 2.3
    # acceptance bracket: assumption-bearing (the reference acceptance is
    # quoted without its p), checked against the stated [0.80, 0.92] window
    assert 0.80 <= acc <= 0.92


# ---------------------------------------------------------------------------
# 7. Steane pi/2 construction: clean through weight 2, ablation fails at 2


def test_criterion_07_steane_pi2_distance(criterion_notes):
    code = steane_code()
    circ = steane_pi2_d3()
    checks, wits = _embedded(code, circ)
    res = fault_distance(circ, 2, "clifford", checks, wits)
    assert res.distance_found is None and res.searched_to == 2

    ablated = steane_pi2_d3(se_rounds=1)
    checks2, wits2 = _embedded(code, ablated)
    res2 = fault_distance(ablated, 2, "clifford", checks2, wits2)
    assert res2.distance_found == 2
    criterion_notes[7] = ("weights 1-2 clean; ablated witness: "
                          + res2.witness.describe(ablated))


# ---------------------------------------------------------------------------
# 8. overhead: O(l) gates and depth, linear ancilla count


def test_criterion_08_overhead_linearity(criterion_notes):
    # The O(l) claim is about the recursive ladder itself, so the exponents
    # are fitted on the bare flagged recursion (iceberg_ft_czz). The outer
    # gauge wrapper of iceberg_logical_rz adds exact constants (+4 gates,
    # +2 depth, +1 ancilla), which keeps everything O(l) but would drag the
    # finite-window depth exponent below band purely through the offset;
    # the wrapper is pinned to those constants below instead.
    code = iceberg_code(2)
    ls = np.arange(1, 9)
    gates, depths, ancillas = [], [], []
    for l in ls:
        g = iceberg_ft_czz(RotationSpec(DyadicAngle.pi_over(int(l)), code, (1,)))
        if l >= 2:
            g = apply_toffoli_ladder(g)
        st = stats(g.circuit)
        gates.append(sum(st.gate_counts.values()))
        depths.append(st.depth)
        ancillas.append(sum(st.ancilla_by_role.values()))
    gexp = np.polyfit(np.log(ls), np.log(gates), 1)[0]
    dexp = np.polyfit(np.log(ls), np.log(depths), 1)[0]
    assert 0.8 <= gexp <= 1.2, f"gate count exponent {gexp}"
    assert 0.8 <= dexp <= 1.2, f"depth exponent {dexp}"
    # ancilla count: affine in l (constant increment per level)
    inc = np.diff(ancillas)
    assert len(set(inc[1:].tolist())) == 1 and inc[-1] > 0, f"ancillas {ancillas}"
    for l in (1, 4, 8):
        g = iceberg_logical_rz(1, l)
        if l >= 2:
            g = apply_toffoli_ladder(g)
        st = stats(g.circuit)
        assert sum(st.gate_counts.values()) == gates[l - 1] + 4
        assert st.depth == depths[l - 1] + 2
        assert sum(st.ancilla_by_role.values()) == ancillas[l - 1] + 1
    criterion_notes[8] = (f"gate exponent {gexp:.2f}, depth exponent {dexp:.2f}, "
                          f"ancillas {ancillas[0]}..{ancillas[-1]}")


# ---------------------------------------------------------------------------
# 9. gauge identities to 1e-12


def test_criterion_09_gauge_identities(criterion_notes):
    rng = np.random.default_rng(3)
    x0 = pauli_word_matrix(((0, "X"),), 2)
    x1 = pauli_word_matrix(((1, "X"),), 2)
    checked = 0
    for _ in range(20):
        theta = DyadicAngle.make(int(rng.integers(-64, 65)),
                                 int(rng.integers(0, 7)))
        m = instruction_matrix(Instruction("RZZ", (0, 1), theta))
        w = instruction_matrix(Instruction("RZZ", (0, 1), -theta))
        assert np.allclose(x0 @ m @ x0, w, atol=1e-12)
        assert np.allclose(x1 @ m @ x1, w, atol=1e-12)
        checked += 1
    pi = DyadicAngle.make(1, 0)
    zz = pauli_word_matrix(((0, "Z"), (1, "Z")), 2)
    m = instruction_matrix(Instruction("RZZ", (0, 1), pi))
    assert np.allclose(m, -1j * zz, atol=1e-12)
    criterion_notes[9] = f"{checked} random angles, both identities at 1e-12"


# ---------------------------------------------------------------------------
# 10. dense vs tableau cross-checks on the Clifford suite


def _clifford_suite():
    """(name, circuit, code, witness kind). Kind 'prep' restricts frame
    witnesses to Xbar (the prepared |+bar> is damaged only by Zbar-type
    residuals); 'readout' joins only the shot-statistics half, where
    record-level effects are visible to both engines."""
    ic = iceberg_code(2)
    sc = steane_code()
    pipeline = compose_data(ft_plus_prep(sc),
                            flagged_syndrome_extraction(sc, "Z"))
    pipeline = compose_data(pipeline, destructive_measure(sc, "X"))
    suite = [
        ("iceberg rz l=1", iceberg_logical_rz(1, 1).circuit, ic, "gadget"),
        ("iceberg pair l=1", iceberg_pair_rotation(1, 2, 1).circuit, ic, "gadget"),
        ("iceberg SE Z", flagged_syndrome_extraction(ic, "Z"), ic, "gadget"),
        ("iceberg SE X", flagged_syndrome_extraction(ic, "X"), ic, "gadget"),
        ("iceberg plus prep", ft_plus_prep(ic), ic, "prep"),
        ("steane SE Z", flagged_syndrome_extraction(sc, "Z"), sc, "gadget"),
        ("steane plus prep", ft_plus_prep(sc), sc, "prep"),
        ("steane prep pipeline", pipeline, sc, "readout"),
    ]
    for name, c, _, _ in suite:
        bad = [i for i in c.instructions if not is_clifford_instruction(i)]
        assert not bad, f"{name} is not Clifford: {bad[:3]}"
    return suite


def _frame_words(code, circ, kind):
    n = circ.num_qubits
    checks = tuple(embed_word(w, n) for w in code.stabilizers)
    if kind == "prep":
        # |+bar> is damaged only by residuals that flip an Xbar sign;
        # Xbar-type residuals stabilize it and are benign
        wits = tuple(embed_word(w, n) for w in code.logical_x)
    else:
        wits = tuple(embed_word(w, n)
                     for w in code.logical_x + code.logical_z)
    return checks, wits


def _pattern_counts_dense(circ, noise, shots, seed):
    cnt = Counter()
    for out in sample_batches(circ, noise, shots, seed, batch_size=512):
        both = np.concatenate([out["detectors"], out["observables"]], axis=1)
        for row in both:
            cnt[tuple(int(v) for v in row)] += 1
    return cnt


def _pattern_counts_tableau(circ, noise, shots, seed):
    cnt = Counter()
    for i in range(shots):
        shot = tableau_simulate_shot(circ, noise, seed + i)
        row = tuple(int(v) for v in shot.detectors) + tuple(
            int(v) for v in shot.observables)
        cnt[row] += 1
    return cnt


def _chi2_pvalue(c1, c2):
    n1 = sum(c1.values())
    n2 = sum(c2.values())
    keys = sorted(set(c1) | set(c2))
    o1, o2 = [], []
    rare1 = rare2 = 0
    for key in keys:
        a, b = c1.get(key, 0), c2.get(key, 0)
        if (a + b) * min(n1, n2) / (n1 + n2) < 5.0:
            rare1 += a
            rare2 += b
        else:
            o1.append(a)
            o2.append(b)
    if rare1 or rare2:
        o1.append(rare1)
        o2.append(rare2)
    if len(o1) < 2:
        return 1.0  # a single populated bin cannot disagree
    o1 = np.asarray(o1, float)
    o2 = np.asarray(o2, float)
    tot = o1 + o2
    e1 = tot * n1 / (n1 + n2)
    e2 = tot * n2 / (n1 + n2)
    stat = float((((o1 - e1) ** 2) / e1 + ((o2 - e2) ** 2) / e2).sum())
    return float(chi2.sf(stat, len(o1) - 1))


def test_criterion_10_cross_engine_consistency(criterion_notes):
    shots = 10_000
    noise = NoiseModel(0.02)
    sites_checked = 0
    worst_p = 1.0
    for idx, (name, circ, code, kind) in enumerate(_clifford_suite()):
        if kind != "readout":
            checks, wits = _frame_words(code, circ, kind)
            ctx = make_dense_context(circ, code.basis())
            for site in enumerate_fault_sites(circ):
                rep = clifford_frame_propagate(circ, (site,))
                cls_f = classify_residual(rep, checks, wits)
                cls_d = classify_fault_dense(circ, (site,), ctx).classification
                assert cls_f == cls_d, (
                    f"{name} {site}: frames {cls_f}, dense {cls_d}")
                sites_checked += 1
        cd = _pattern_counts_dense(circ, noise, shots, seed=900 + idx)
        ct = _pattern_counts_tableau(circ, noise, shots, seed=777_000 + idx * shots)
        p = _chi2_pvalue(cd, ct)
        assert p > 0.001, f"{name}: chi-squared p {p}"
        worst_p = min(worst_p, p)
    criterion_notes[10] = (f"{sites_checked} single-fault classifications agree; "
                           f"worst chi-squared p {worst_p:.3f}")
