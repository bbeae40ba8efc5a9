"""Circuit families: recursive flag gadgets for dyadic-angle rotations.

The iceberg recursion nests one flagged window per binary digit of the angle:

    F(ctrls, theta):                       # theta = pi * n / 2^l, n odd
      if l == 0:  emit C(RZ(n pi)) on q_a and C(Z) on q_c   # RZZ(n pi) factors
      else:
        PrepX a; CX(a -> q_a)
        C_ctrls(RZZ(theta)) on (q_a, q_c)
        F(ctrls + [a], -2 theta)           # counter-rotation inside the window
        CX(a -> q_a); MeasX a (detector)

On the a=1 branch X RZZ(-2t) RZZ(t) X = RZZ(t), so the accepted action is
RZZ(theta) on both branches while any single ZZ-component fault flips a flag.
Multi-controlled rotations are lowered through Toffoli AND-funnels; the
ladder optimization shares one incrementally built funnel across all levels.

The Steane recursion stores a logical X in a Bell pair per level and drives
counter-rotations off the pair's Z-prepared half, terminating in a transversal
RZ layer once the angle reaches pi/2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .angles import DyadicAngle
from .circuits import Circuit, Instruction, QubitRole
from .codes import (
    CodeSpec,
    LogicalWord,
    flagged_syndrome_extraction,
    ft_plus_prep,
    iceberg_code,
    steane_code,
)
from .paulis import PauliWord, conjugation_table

_RECURSIVE_FAMILIES = (
    "iceberg_ft_czz",
    "iceberg_logical_rz",
    "iceberg_pair_rotation",
    "iceberg_binary_rotation",
)


@dataclass(frozen=True)
class RotationSpec:
    """Which logical rotation to build and how."""

    angle: DyadicAngle
    code: CodeSpec
    target: tuple  # (i,) | (i, j) | logical Pauli word ((idx, letter), ...)
    num_external_controls: int = 0
    use_ladder: bool = False

    def __post_init__(self) -> None:
        if self.num_external_controls < 0:
            raise ValueError("control count must be non-negative")
        t = self.target
        if len(t) == 2 and isinstance(t[0], int):
            if t[0] == t[1]:
                raise ValueError("pair target needs two distinct logical qubits")


@dataclass
class GadgetReport:
    circuit: Circuit
    code: CodeSpec
    spec: RotationSpec
    family: str
    ideal_word: LogicalWord
    ideal_angle: DyadicAngle
    data_qubits: tuple[int, ...]  # the code block
    control_qubits: tuple[int, ...]
    flag_detector_indices: tuple[int, ...]
    ancilla_budget: dict[str, int]
    relabel_word: LogicalWord | None = None

    def __post_init__(self) -> None:
        covered: dict[int, int] = {}
        for d in self.circuit.detectors:
            for r in d:
                covered[r] = covered.get(r, 0) + 1
        meta = self.circuit.record_meta()
        for rec, inst in enumerate(meta):
            if covered.get(rec, 0) != 1:
                raise ValueError(
                    f"record r{rec} ({inst.kind} q{inst.qubits[0]}) must sit in "
                    f"exactly one detector, found {covered.get(rec, 0)}"
                )

    def ideal_unitary_spec(self) -> tuple[LogicalWord, DyadicAngle]:
        return (self.ideal_word, self.ideal_angle)

    def ideal_data_unitary(self) -> np.ndarray:
        """exp(-i theta/2 W) on the code block, controlled on every external
        control qubit (controls are the high factors of the register)."""
        w = self.code.logical_pauli(self.ideal_word).to_matrix()
        if np.abs(w - w.conj().T).max() > 1e-12:
            raise AssertionError("logical word representative not Hermitian")
        th = self.ideal_angle.radians()
        dim = w.shape[0]
        r = np.cos(th / 2) * np.eye(dim) - 1j * np.sin(th / 2) * w
        m = len(self.control_qubits)
        if m == 0:
            return r
        dc = 1 << m
        pick = np.zeros((dc, dc))
        pick[dc - 1, dc - 1] = 1.0
        rest = np.eye(dc) - pick
        return np.kron(rest, np.eye(dim)) + np.kron(pick, r)


class _Builder:
    def __init__(self) -> None:
        self.roles: list[QubitRole] = []
        self.insts: list[Instruction] = []
        self.detectors: list[tuple[int, ...]] = []
        self.nrec = 0

    def alloc(self, role: QubitRole) -> int:
        self.roles.append(role)
        return len(self.roles) - 1

    def emit(self, kind: str, *qubits: int, angle: DyadicAngle | None = None) -> int:
        inst = Instruction(kind, tuple(qubits), angle)
        rec = -1
        if inst.is_meas:
            rec = self.nrec
            self.nrec += 1
        self.insts.append(inst)
        return rec

    def detector(self, *records: int) -> int:
        self.detectors.append(tuple(records))
        return len(self.detectors) - 1

    def circuit(self) -> Circuit:
        c = Circuit(tuple(self.roles), list(self.insts), list(self.detectors), [])
        c.validate()
        return c


def _budget(roles, data: tuple[int, ...]) -> dict[str, int]:
    out: dict[str, int] = {}
    for q, r in enumerate(roles):
        if q in data:
            continue
        out[r.value] = out.get(r.value, 0) + 1
    return out


# ---------------------------------------------------------------------------
# iceberg recursion


def _emit_iceberg_recursion(
    b: _Builder,
    q_rot: int,
    q_comp: int,
    ext_controls: tuple[int, ...],
    theta0: DyadicAngle,
    use_ladder: bool,
    flag_dets: list[int],
    comp_first: bool = True,
    alternate_legs: bool = True,
    lower_crzz: bool = True,
) -> None:
    ladder_chain: list[tuple[int, int, int]] = []  # (left, right, garbage)

    def ladder_and(ctrls: list[int]) -> int:
        # shared chain; ctrls lists are nested prefixes by construction
        while len(ladder_chain) < len(ctrls) - 1:
            j = len(ladder_chain)
            left = ctrls[0] if j == 0 else ladder_chain[j - 1][2]
            right = ctrls[j + 1]
            g = b.alloc(QubitRole.GARBAGE)
            b.emit("PrepZ", g)
            b.emit("CCX", left, right, g)
            ladder_chain.append((left, right, g))
        return ladder_chain[len(ctrls) - 2][2]

    def ladder_teardown() -> None:
        for left, right, g in reversed(ladder_chain):
            b.emit("CCX", left, right, g)
            r = b.emit("MeasZ", g)
            flag_dets.append(b.detector(r))

    def fresh_and(ctrls: list[int]):
        links: list[tuple[int, int, int]] = []
        head = ctrls[0]
        for c in ctrls[1:]:
            g = b.alloc(QubitRole.GARBAGE)
            b.emit("PrepZ", g)
            b.emit("CCX", head, c, g)
            links.append((head, c, g))
            head = g

        def teardown() -> None:
            for left, right, g in reversed(links):
                b.emit("CCX", left, right, g)
                r = b.emit("MeasZ", g)
                flag_dets.append(b.detector(r))

        return head, teardown

    def and_control(ctrls: list[int]):
        if not ctrls:
            return None, None
        if len(ctrls) == 1:
            return ctrls[0], None
        if use_ladder:
            return ladder_and(ctrls), None  # torn down once, after the tail
        return fresh_and(ctrls)

    def base_pair(g: int | None, theta: DyadicAngle) -> None:
        # the Z coupling on the companion goes first: a Y-type fault on the
        # control after the last q_rot coupling then leaves a bare weight-1
        # residual instead of completing a logical word
        if g is None:
            if comp_first:
                b.emit("Z", q_comp)
                b.emit("RZ", q_rot, angle=theta)
            else:
                b.emit("RZ", q_rot, angle=theta)
                b.emit("Z", q_comp)
        else:
            if comp_first:
                b.emit("CZ", g, q_comp)
                b.emit("CRZ", g, q_rot, angle=theta)
            else:
                b.emit("CRZ", g, q_rot, angle=theta)
                b.emit("CZ", g, q_comp)

    def rec(ctrls: list[int], theta: DyadicAngle, depth: int) -> None:
        if theta.log2_denom == 0:
            n = theta.numerator
            assert n % 2 == 1, "canonical dyadic base case must be odd"
            g, teardown = and_control(ctrls)
            base_pair(g, theta)
            if use_ladder:
                ladder_teardown()
            elif teardown is not None:
                teardown()
            return
        # alternating the flag leg between the two rotation qubits stops
        # X-pair faults on two flags from canceling at the closing layer
        leg = q_comp if (alternate_legs and depth % 2 == 1) else q_rot
        a = b.alloc(QubitRole.FLAG)
        b.emit("PrepX", a)
        b.emit("CX", a, leg)
        g, teardown = and_control(ctrls)
        if g is None:
            b.emit("RZZ", q_rot, q_comp, angle=theta)
        elif lower_crzz:
            # compile the one-controlled ZZ rotation as CX.CRZ.CX so the
            # control and q_rot never share a gate: a correlated
            # Y(control)X(q_rot) fault after a native CRZZ interferes with
            # the closing CX and survives post-selection as a clean logical
            # flip, which no reordering of this gate set removes
            b.emit("CX", q_rot, q_comp)
            b.emit("CRZ", g, q_comp, angle=theta)
            b.emit("CX", q_rot, q_comp)
        else:
            b.emit("CRZZ", g, q_rot, q_comp, angle=theta)
        if teardown is not None:
            teardown()
        rec(ctrls + [a], -theta.doubled(), depth + 1)
        b.emit("CX", a, leg)
        r = b.emit("MeasX", a)
        flag_dets.append(b.detector(r))

    # telescoping sanity: depth-j angle is (-2)^j theta0
    check = theta0
    for _ in range(theta0.log2_denom):
        check = -check.doubled()
    assert check.log2_denom == 0 and check.numerator % 2 == 1

    rec(list(ext_controls), theta0, 0)


def _iceberg_gadget(
    spec: RotationSpec,
    with_az: bool,
    family: str,
    comp_first: bool = True,
    alternate_legs: bool = True,
    lower_crzz: bool = True,
) -> GadgetReport:
    code = spec.code
    if not code.name.startswith("iceberg"):
        raise ValueError(f"{family} needs an iceberg code, got {code.name}")
    if spec.angle.is_zero or spec.angle.log2_denom == 0:
        raise ValueError(
            f"angle {spec.angle} has no flagged recursion (l = 0); "
            "multiples of pi are Clifford and need no gadget"
        )
    t = spec.target
    if len(t) == 1:
        i = t[0]
        if not 1 <= i <= code.k:
            raise ValueError(f"logical index i={i} out of range 1..{code.k}")
        q_rot, q_comp = i, 0  # physical pair (q_i, q_b)
        word: LogicalWord = ((i - 1, "Z"),)
    elif len(t) == 2 and isinstance(t[0], int):
        i, j = t
        if i == j:
            raise ValueError("pair rotation needs i != j")
        for idx in (i, j):
            if not 1 <= idx <= code.k:
                raise ValueError(f"logical index {idx} out of range 1..{code.k}")
        q_rot, q_comp = i, j
        word = ((i - 1, "Z"), (j - 1, "Z"))
    else:
        raise ValueError("iceberg constructors take a single or pair target")

    b = _Builder()
    data = tuple(b.alloc(QubitRole.DATA) for _ in range(code.n))
    controls = tuple(
        b.alloc(QubitRole.DATA) for _ in range(spec.num_external_controls)
    )
    flag_dets: list[int] = []
    az = None
    if with_az:
        az = b.alloc(QubitRole.FLAG)
        b.emit("PrepX", az)
        b.emit("CZ", az, q_rot)
    _emit_iceberg_recursion(
        b, q_rot, q_comp, controls, spec.angle, spec.use_ladder, flag_dets,
        comp_first=comp_first, alternate_legs=alternate_legs,
        lower_crzz=lower_crzz,
    )
    if with_az:
        b.emit("CZ", az, q_rot)
        r = b.emit("MeasX", az)
        flag_dets.append(b.detector(r))
    circ = b.circuit()
    return GadgetReport(
        circuit=circ,
        code=code,
        spec=spec,
        family=family,
        ideal_word=word,
        ideal_angle=spec.angle,
        data_qubits=data,
        control_qubits=controls,
        flag_detector_indices=tuple(flag_dets),
        ancilla_budget=_budget(circ.roles, data + controls),
    )


def iceberg_ft_czz(spec: RotationSpec) -> GadgetReport:
    """Flagged multi-controlled ZZ rotation on (q_i, q_b): the bare recursive
    gadget, no outer XX/YY check."""
    return _iceberg_gadget(spec, with_az=False, family="iceberg_ft_czz")


def iceberg_logical_rz(
    i: int, l: int, sign: int = 1, code: CodeSpec | None = None
) -> GadgetReport:
    """exp(-i (pi/2^(l+1)) Zbar_i), sign-adjustable, with the outer gauge flag
    bracketing the gadget so escaping X-type pair errors flip a detector."""
    code = code if code is not None else iceberg_code(2)
    spec = RotationSpec(DyadicAngle.pi_over(l, sign), code, (i,))
    return _iceberg_gadget(spec, with_az=True, family="iceberg_logical_rz")


def iceberg_pair_rotation(
    i: int, j: int, l: int, sign: int = 1, code: CodeSpec | None = None
) -> GadgetReport:
    """exp(-i (pi/2^(l+1)) Zbar_i Zbar_j): same gadget on the pair (q_i, q_j),
    using Z_i Z_j = Zbar_i Zbar_j."""
    code = code if code is not None else iceberg_code(2)
    spec = RotationSpec(DyadicAngle.pi_over(l, sign), code, (i, j))
    return _iceberg_gadget(spec, with_az=True, family="iceberg_pair_rotation")


def iceberg_binary_rotation(
    bits: str, i: int, code: CodeSpec | None = None
) -> GadgetReport:
    """exp(-i (pi/2)(x0.x1...xl) Zbar_i): the binary-fraction angle is
    canonicalized and fed to the same recursion, consuming one digit per
    level. bits "0.1" rebuilds the l=1 circuit exactly."""
    code = code if code is not None else iceberg_code(2)
    angle = DyadicAngle.from_binary_fraction(bits)
    spec = RotationSpec(angle, code, (i,))
    return _iceberg_gadget(spec, with_az=True, family="iceberg_binary_rotation")


def apply_toffoli_ladder(g: GadgetReport) -> GadgetReport:
    """Rebuild a recursive gadget with the shared just-in-time Toffoli ladder:
    one garbage qubit per level, all uncomputed after the tail rotation and
    before the closing layer, each measured in Z with a detector."""
    if g.family not in _RECURSIVE_FAMILIES:
        raise ValueError(f"{g.family} is not in recursive form")
    spec = replace(g.spec, use_ladder=True)
    out = _iceberg_gadget(spec, with_az=g.family != "iceberg_ft_czz", family=g.family)
    if g.relabel_word is not None:
        out = relabel_pauli_basis(out, g.relabel_word)
    return out


# ---------------------------------------------------------------------------
# basis relabeling

_LAYER_SEQS: tuple[tuple[str, ...], ...] = (
    (),
    ("H",),
    ("S",),
    ("Sdg",),
    ("H", "S"),
    ("H", "Sdg"),
    ("S", "H"),
    ("Sdg", "H"),
    ("H", "S", "H"),
    ("H", "Sdg", "H"),
    ("S", "H", "S"),
    ("Sdg", "H", "Sdg"),
)


def _layer_letter_map(seq: tuple[str, ...]) -> dict[str, tuple[str, int]]:
    """letter -> (letter', sign) under P -> U P U't for U = seq in circuit order."""
    out: dict[str, tuple[str, int]] = {}
    letters = ("X", "Z", "Y")
    digit = {"I": 0, "X": 1, "Z": 2, "Y": 3}
    rev = {v: k for k, v in digit.items()}
    for letter in letters:
        d, s = digit[letter], 1
        for kind in seq:
            out_idx, out_sign = conjugation_table(kind, None)
            s *= int(out_sign[d])
            d = int(out_idx[d])
        out[letter] = (rev[d], s)
    return out


def _invert_letter_map(m: dict[str, tuple[str, int]]) -> dict[str, tuple[str, int]]:
    return {lo: (li, s) for li, (lo, s) in m.items()}


def _conj_word_by_layer(
    w: PauliWord, lm: dict[str, tuple[str, int]], block: tuple[int, ...]
) -> tuple[PauliWord, int]:
    """Hermitian word and overall +/-1 sign after the per-qubit letter map."""
    letters: dict[int, str] = {}
    sign = 1
    for q in w.support():
        letter = w.letter(q)
        if q in block:
            letter, s = lm[letter]
            sign *= s
        letters[q] = letter
    return PauliWord.from_support(w.n, letters), sign


def _hermitian_bits(w: PauliWord) -> PauliWord:
    """Same x/z bits, phase normalized so sign() == +1."""
    ys = int(np.sum(w.x & w.z))
    return PauliWord(w.x.copy(), w.z.copy(), ys % 4)


def _permute_word(w: PauliWord, perm: dict[int, int]) -> PauliWord:
    out = PauliWord.identity(w.n)
    for q in w.support():
        t = perm.get(q, q)
        out.x[t] = w.x[q]
        out.z[t] = w.z[q]
    return out


def _stabilizer_group_signed(code: CodeSpec) -> dict[bytes, int]:
    """Every element of the stabilizer group with its +/-1 sign."""
    group: dict[bytes, int] = {PauliWord.identity(code.n).key(): 1}
    elems = [PauliWord.identity(code.n)]
    for g in code.stabilizers:
        new = []
        for e in elems:
            prod = e * g
            if prod.key() not in group:
                s = prod.sign()
                if abs(s.imag) > 1e-9:
                    raise AssertionError("stabilizer group sign not real")
                group[prod.key()] = int(np.sign(s.real))
                new.append(prod)
        elems.extend(new)
    return group


def relabel_pauli_basis(g: GadgetReport, word: LogicalWord) -> GadgetReport:
    """Wrap the gadget with transversal single-qubit layers and/or a data-block
    permutation so the accepted action becomes exp(-i theta/2 word).

    The search requires the conjugated rotation generator to equal the target
    word times a +1-signed stabilizer exactly, so the action on the code space
    is the requested rotation with no hidden sign."""
    code = g.code
    target = code.logical_pauli(word)
    if target.weight() == 0:
        raise ValueError("target word is the identity")
    if abs(target.sign().imag) > 1e-9:
        raise AssertionError("logical word representative must be Hermitian")
    if tuple(sorted(word)) == tuple(sorted(g.ideal_word)):
        return replace(g)

    generator = PauliWord.from_support(
        code.n, {q: "Z" for q in _rotation_support(g)}
    )
    group = _stabilizer_group_signed(code)
    block = g.data_qubits
    t_herm = _hermitian_bits(target)
    t_sgn = complex(np.round(target.sign()))
    if abs(t_sgn.imag) > 1e-9:
        raise AssertionError("logical word representative must be Hermitian")
    t_sgn = int(t_sgn.real)

    def try_candidate(perm: dict[int, int], inv) -> bool:
        # conjugated generator = layer_sign * H(mapped); must equal the target
        # operator times a +1 stabilizer with bits(mapped) xor bits(target)
        mapped, layer_sign = _conj_word_by_layer(
            _permute_word(generator, perm), inv, block
        )
        rem_key = (mapped.x ^ t_herm.x).tobytes() + (mapped.z ^ t_herm.z).tobytes()
        entry = group.get(rem_key)
        if entry is None:
            return False
        rem = _hermitian_bits(PauliWord(mapped.x ^ t_herm.x, mapped.z ^ t_herm.z, 0))
        prod = t_herm * rem  # bits equal mapped's; sign() is the relative phase
        mu = complex(np.round(prod.sign()))
        if abs(mu.imag) > 1e-9:
            return False
        return layer_sign == t_sgn * entry * int(mu.real)

    found = None
    perms: list[dict[int, int]] = []
    ids = list(block)
    for p in itertools.permutations(ids):
        perms.append({a: b for a, b in zip(ids, p)})
        if len(perms) >= 50000:
            break
    for seq in _LAYER_SEQS:
        inv = _invert_letter_map(_layer_letter_map(seq))
        for perm in perms:
            if try_candidate(perm, inv):
                found = (perm, seq)
                break
        if found:
            break
    if found is None:
        raise ValueError(
            f"no transversal-layer/permutation relabeling reaches {word}"
        )
    perm, seq = found

    old = g.circuit
    new = Circuit(old.roles)
    for kind in seq:
        for q in block:
            new.append(kind, q)
    for inst in old.instructions:
        new.instructions.append(
            replace(inst, qubits=tuple(perm.get(q, q) for q in inst.qubits))
        )
    for kind in reversed(seq):
        inv = Instruction(kind, (0,)).inverse().kind
        for q in block:
            new.append(inv, q)
    new.detectors = list(old.detectors)
    new.observables = list(old.observables)
    new.validate()
    return GadgetReport(
        circuit=new,
        code=code,
        spec=replace(g.spec, target=word),
        family=g.family,
        ideal_word=word,
        ideal_angle=g.ideal_angle,
        data_qubits=g.data_qubits,
        control_qubits=g.control_qubits,
        flag_detector_indices=g.flag_detector_indices,
        ancilla_budget=g.ancilla_budget,
        relabel_word=word,
    )


def _rotation_support(g: GadgetReport) -> tuple[int, ...]:
    t = g.spec.target
    if len(t) == 1:
        return (t[0], 0)
    if len(t) == 2 and isinstance(t[0], int):
        return (t[0], t[1])
    raise ValueError("relabeling a relabeled gadget is not supported; "
                     "relabel the original instead")


# ---------------------------------------------------------------------------
# non-FT ladder and the Steane family


def _emit_cx_ladder_rz(
    b: _Builder, support: tuple[int, ...], angle: DyadicAngle, control: int | None
) -> None:
    for a, c in zip(support, support[1:]):
        b.emit("CX", a, c)
    root = support[-1]
    if control is None:
        b.emit("RZ", root, angle=angle)
    else:
        b.emit("CRZ", control, root, angle=angle)
    for a, c in reversed(list(zip(support, support[1:]))):
        b.emit("CX", a, c)


def nonft_logical_rz_ladder(
    code: CodeSpec, angle: DyadicAngle, num_controls: int = 0
) -> Circuit:
    """CNOT fan-in along the logical-Z support, (controlled) RZ on the root,
    fan-out. Exact unitary exp(-i angle/2 Zbar), but a single X fault on the
    ladder spine becomes a logical error: this is the unprotected baseline."""
    b = _Builder()
    for _ in range(code.n):
        b.alloc(QubitRole.DATA)
    controls = [b.alloc(QubitRole.DATA) for _ in range(num_controls)]
    support = code.logical_z[0].support()
    if num_controls <= 1:
        ctrl = controls[0] if controls else None
        _emit_cx_ladder_rz(b, support, angle, ctrl)
    else:
        head = controls[0]
        links = []
        for c in controls[1:]:
            gq = b.alloc(QubitRole.GARBAGE)
            b.emit("PrepZ", gq)
            b.emit("CCX", head, c, gq)
            links.append((head, c, gq))
            head = gq
        _emit_cx_ladder_rz(b, support, angle, head)
        for left, right, gq in reversed(links):
            b.emit("CCX", left, right, gq)
            r = b.emit("MeasZ", gq)
            b.detector(r)
    return b.circuit()


def steane_ft_rz(l: int, sign: int = 1) -> GadgetReport:
    """Flagged exp(-i (pi/2^(l+1)) Zbar) on the Steane code.

    Each level stores a logical X in a Bell pair (u = PrepX half, v = PrepZ
    half; the controlled-Xbar splits u -> d1, d4 and v -> d6), applies the
    bare CNOT-ladder rotation, and counter-rotates at doubled, negated angle
    controlled off the v halves. The recursion terminates once the angle
    reaches an odd multiple of pi/2, where R_Zbar(theta) = RZ(-theta) on every
    qubit exactly; deeper controls funnel through one Toffoli chain. Closing
    each level un-prepares the pair so u reads X+ (gauge) and v reads 0
    (flag); a hooked X on u toggles v deterministically, which is why no
    outer gauge ancilla is needed."""
    if l < 1:
        raise ValueError("l must be >= 1")
    code = steane_code()
    angle = DyadicAngle.pi_over(l, sign)
    b = _Builder()
    data = tuple(b.alloc(QubitRole.DATA) for _ in range(7))
    flag_dets: list[int] = []
    zsup = code.logical_z[0].support()
    xsup = code.logical_x[0].support()  # (1, 4, 6)

    def and_control(ctrls: list[int]):
        """(control or None, teardown fn or None): AND-funnel for 2+ controls."""
        if not ctrls:
            return None, None
        if len(ctrls) == 1:
            return ctrls[0], None
        links = []
        head = ctrls[0]
        for c in ctrls[1:]:
            gq = b.alloc(QubitRole.GARBAGE)
            b.emit("PrepZ", gq)
            b.emit("CCX", head, c, gq)
            links.append((head, c, gq))
            head = gq

        def teardown() -> None:
            for left, right, gq in reversed(links):
                b.emit("CCX", left, right, gq)
                r = b.emit("MeasZ", gq)
                flag_dets.append(b.detector(r))

        return head, teardown

    def tail(ctrls: list[int], theta: DyadicAngle) -> None:
        # R_Zbar(n pi/2) = RZ(-n pi/2)^x7 exactly (odd codewords have weight
        # 3 mod 4, even ones weight 0 mod 4)
        per_qubit = -theta
        g, teardown = and_control(ctrls)
        for q in range(7):
            if g is None:
                b.emit("RZ", q, angle=per_qubit)
            else:
                b.emit("CRZ", g, q, angle=per_qubit)
        if teardown is not None:
            teardown()

    def rec(ctrls: list[int], theta: DyadicAngle) -> None:
        if theta.log2_denom <= 1:
            tail(ctrls, theta)
            return
        u = b.alloc(QubitRole.CAT)
        v = b.alloc(QubitRole.CAT)
        b.emit("PrepX", u)
        b.emit("PrepZ", v)
        b.emit("CX", u, v)
        b.emit("CX", u, xsup[0])
        b.emit("CX", u, xsup[1])
        b.emit("CX", v, xsup[2])
        g, teardown = and_control(ctrls)
        _emit_cx_ladder_rz(b, zsup, theta, g)
        if teardown is not None:
            teardown()
        rec(ctrls + [v], -theta.doubled())
        b.emit("CX", u, xsup[0])
        b.emit("CX", u, xsup[1])
        b.emit("CX", v, xsup[2])
        b.emit("CX", u, v)
        r_u = b.emit("MeasX", u)
        flag_dets.append(b.detector(r_u))
        r_v = b.emit("MeasZ", v)
        flag_dets.append(b.detector(r_v))

    if l == 1:
        tail([], angle)
    else:
        rec([], angle)
    circ = b.circuit()
    spec = RotationSpec(angle, code, ((0, "Z"),))
    return GadgetReport(
        circuit=circ,
        code=code,
        spec=spec,
        family="steane_ft_rz",
        ideal_word=((0, "Z"),),
        ideal_angle=angle,
        data_qubits=data,
        control_qubits=(),
        flag_detector_indices=tuple(flag_dets),
        ancilla_budget=_budget(circ.roles, data),
    )


def steane_state_prep(l: int) -> Circuit:
    """Verified |+bar>, the flagged rotation, then one flagged detection round
    in both bases; acceptance = every detector across all stages reads 0."""
    code = steane_code()
    c = ft_plus_prep(code)
    c = compose_data(c, steane_ft_rz(l).circuit)
    c = compose_data(c, flagged_syndrome_extraction(code, "Z"))
    c = compose_data(c, flagged_syndrome_extraction(code, "X"))
    return c


def compose_data(first: Circuit, second: Circuit) -> Circuit:
    """Compose on the shared data block, reusing finished ancilla slots.

    An ancilla of ``first`` is reusable once its last touch is a measurement;
    second-stage ancillas are mapped onto those slots (same role preferred)
    so chained gadgets stay inside the dense engines' qubit ceiling. Every
    ancilla is re-prepared by its own stage, so reuse never leaks state."""
    from .circuits import compose

    d1 = first.qubits_with_role(QubitRole.DATA)
    d2 = second.qubits_with_role(QubitRole.DATA)
    if len(d1) < len(d2):
        raise ValueError("second circuit has more data qubits than the first")
    mapping = {b: a for a, b in zip(d1, d2)}

    last_op: dict[int, str] = {}
    for inst in first.instructions:
        for q in inst.qubits:
            last_op[q] = inst.kind
    pool = [
        q
        for q in range(len(first.roles))
        if first.roles[q] != QubitRole.DATA
        and last_op.get(q, "").startswith("Meas")
    ]
    order: list[int] = []
    first_op: dict[int, str] = {}
    for inst in second.instructions:
        for q in inst.qubits:
            if second.roles[q] != QubitRole.DATA and q not in order:
                order.append(q)
                first_op[q] = inst.kind
    for q2 in order:
        if not first_op[q2].startswith("Prep"):
            continue
        same = [q for q in pool if first.roles[q] == second.roles[q2]]
        if same:
            slot = same[0]
        elif pool:
            slot = pool[0]
        else:
            continue
        pool.remove(slot)
        mapping[q2] = slot
    return compose(first, second, mapping)


def steane_pi2_d3(se_rounds: int = 2) -> Circuit:
    """Distance-3 logical R_Z(pi/2) on the Steane code, all-Clifford.

    Two outer gauge flags bracket everything, each watching the ladder root
    where the bare RZ(pi/2) physically lands: an X fault there conjugates
    the rotation into a logical Z byproduct, and a flag coupled to the whole
    logical-Z support would itself inject Zbar through a single X fault, so
    the flags touch only the root. Two 3-qubit cat states each store a
    logical X and counter-rotate by R_Zbar(-pi) (split as one CRZ(-pi) plus
    two CZ off the cat qubits); syndrome-extraction rounds are interleaved
    before and after the bare rotation, reusing one syndrome and one flag
    slot sequentially."""
    if se_rounds not in (1, 2):
        raise ValueError("se_rounds must be 1 or 2")
    code = steane_code()
    b = _Builder()
    data = [b.alloc(QubitRole.DATA) for _ in range(7)]
    az = [b.alloc(QubitRole.FLAG) for _ in range(2)]
    catA = [b.alloc(QubitRole.CAT) for _ in range(3)]
    catB = [b.alloc(QubitRole.CAT) for _ in range(3)]
    s_slot = b.alloc(QubitRole.FLAG)
    f_slot = b.alloc(QubitRole.FLAG)
    zsup = code.logical_z[0].support()  # (0, 1, 2)
    xsup = code.logical_x[0].support()  # (1, 4, 6)
    root = zsup[-1]

    def az_open(a: int) -> None:
        b.emit("PrepX", a)
        b.emit("CZ", a, root)

    def az_close(a: int) -> None:
        b.emit("CZ", a, root)
        r = b.emit("MeasX", a)
        b.detector(r)

    def cat_open(cat: list[int]) -> None:
        b.emit("PrepX", cat[0])
        b.emit("PrepZ", cat[1])
        b.emit("PrepZ", cat[2])
        b.emit("CX", cat[0], cat[1])
        b.emit("CX", cat[1], cat[2])
        for cq, dq in zip(cat, xsup):
            b.emit("CX", cq, dq)

    def cat_close(cat: list[int]) -> None:
        # counter-rotation R_Zbar(-pi) = +i Z0 Z1 Z2, distributed over the cat
        b.emit("CRZ", cat[0], zsup[0], angle=DyadicAngle.make(-1, 0))
        b.emit("CZ", cat[1], zsup[1])
        b.emit("CZ", cat[2], zsup[2])
        for cq, dq in zip(cat, xsup):
            b.emit("CX", cq, dq)
        b.emit("CX", cat[1], cat[2])
        b.emit("CX", cat[0], cat[1])
        r0 = b.emit("MeasX", cat[0])
        b.detector(r0)
        r1 = b.emit("MeasZ", cat[1])
        b.detector(r1)
        r2 = b.emit("MeasZ", cat[2])
        b.detector(r2)

    def se_round() -> None:
        for srow in ((3, 4, 5, 6), (1, 2, 5, 6), (0, 2, 4, 6)):
            b.emit("PrepZ", s_slot)
            b.emit("PrepX", f_slot)
            w = len(srow)
            for j, d in enumerate(srow):
                if j == 1 or j == w - 1:
                    b.emit("CX", f_slot, s_slot)
                b.emit("CX", d, s_slot)
            rf = b.emit("MeasX", f_slot)
            b.detector(rf)
            rs = b.emit("MeasZ", s_slot)
            b.detector(rs)

    az_open(az[0])
    az_open(az[1])
    cat_open(catA)
    cat_open(catB)
    se_round()
    _emit_cx_ladder_rz(b, zsup, DyadicAngle.make(1, 1), None)
    if se_rounds == 2:
        se_round()
    cat_close(catB)
    cat_close(catA)
    az_close(az[1])
    az_close(az[0])
    return b.circuit()
