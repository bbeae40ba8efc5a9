"""Command-line front end: build gadget files, verify their accepted action,
search fault distance, run noise sweeps, and round-trip the text format.

Exit codes are a stable contract: 0 success, 1 verification failure,
2 argument error, 3 resource limit (circuit too wide for the dense engine).
`FLAGFORGE_SEED` supplies the default sweep seed; a flat key = value config
file can preload sweep options, with explicit flags winning.
"""

from __future__ import annotations

import argparse
import os
import re
import sys

from .angles import DyadicAngle
from .circuits import Circuit, QubitRole
from .codes import CodeSpec, iceberg_code, steane_code
from .constructors import (
    iceberg_binary_rotation,
    iceberg_logical_rz,
    iceberg_pair_rotation,
    nonft_logical_rz_ladder,
    steane_ft_rz,
    steane_pi2_d3,
    steane_state_prep,
)
from .harness import BenchmarkSpec, fit_scaling, load_config, run_sweep
from .paulis import is_clifford_instruction
from .stab import fault_distance, make_dense_context
from .textfmt import parse_circuit, print_circuit
from .verify import check_circuit_action, embed_word

OK = 0
FAIL = 1
USAGE = 2
RESOURCE = 3

VERIFY_MAX_QUBITS = 13


def _die(msg: str, code: int = USAGE) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _read_circuit(path: str) -> Circuit:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_circuit(fh.read())


def _infer_code(circuit: Circuit, name: str | None) -> CodeSpec | None:
    """steane for 7 data qubits, iceberg for an even count >= 4, else bare
    (None). An explicit name overrides the guess."""
    nd = sum(1 for r in circuit.roles if r is QubitRole.DATA)
    if name == "steane":
        return steane_code()
    if name == "iceberg":
        if nd < 4 or nd % 2:
            raise ValueError(f"iceberg needs an even data count >= 4, file has {nd}")
        return iceberg_code(nd - 2)
    if name == "none":
        return None
    if nd == 7:
        return steane_code()
    if nd >= 4 and nd % 2 == 0:
        return iceberg_code(nd - 2)
    return None


def _parse_word(text: str, k: int) -> tuple[tuple[int, str], ...]:
    """Logical Pauli word: 'I' is empty, 'Z1' indexes logical 1 (1-based),
    'Y1Y2' is a product, bare letters like 'ZZ' take consecutive logicals."""
    s = text.strip().replace(" ", "")
    if s in ("", "I"):
        return ()
    if not re.fullmatch(r"(?:[XYZ]\d*)+", s):
        raise ValueError(f"cannot parse pauli word {text!r}")
    tokens = re.findall(r"([XYZ])(\d*)", s)
    if all(idx == "" for _, idx in tokens):
        word = tuple((j, letter) for j, (letter, _) in enumerate(tokens))
    elif all(idx != "" for _, idx in tokens):
        word = tuple((int(idx) - 1, letter) for letter, idx in tokens)
    else:
        raise ValueError(f"mix of indexed and bare letters in {text!r}")
    seen = set()
    for j, _ in word:
        if not 0 <= j < k:
            raise ValueError(f"logical index {j + 1} out of range 1..{k}")
        if j in seen:
            raise ValueError(f"logical index {j + 1} repeated in {text!r}")
        seen.add(j)
    return word


# ---------------------------------------------------------------------------
# subcommands


def cmd_build(args: argparse.Namespace) -> int:
    try:
        if args.kind == "iceberg-rz":
            circ = iceberg_logical_rz(args.i, args.l, args.sign,
                                      iceberg_code(args.k)).circuit
        elif args.kind == "iceberg-pair":
            circ = iceberg_pair_rotation(args.i, args.j, args.l, args.sign,
                                         iceberg_code(args.k)).circuit
        elif args.kind == "iceberg-binary":
            if args.bits is None:
                return _die("iceberg-binary needs --bits")
            circ = iceberg_binary_rotation(args.bits, args.i,
                                           iceberg_code(args.k)).circuit
        elif args.kind == "rz-ladder":
            circ = nonft_logical_rz_ladder(iceberg_code(args.k),
                                           DyadicAngle.pi_over(args.l, args.sign))
        elif args.kind == "steane-rz":
            circ = steane_ft_rz(args.l, args.sign).circuit
        elif args.kind == "steane-prep":
            circ = steane_state_prep(args.l)
        else:  # steane-pi2
            circ = steane_pi2_d3()
    except ValueError as e:
        return _die(str(e))
    text = print_circuit(circ)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}: {circ.num_qubits} qubits, "
              f"{len(circ.instructions)} instructions")
    return OK


def cmd_verify_unitary(args: argparse.Namespace) -> int:
    try:
        circ = _read_circuit(args.file)
    except OSError as e:
        return _die(str(e))
    except ValueError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return FAIL
    if circ.num_qubits > VERIFY_MAX_QUBITS:
        print(f"error: {circ.num_qubits} qubits exceed the dense verify "
              f"cap of {VERIFY_MAX_QUBITS}", file=sys.stderr)
        return RESOURCE
    try:
        code = _infer_code(circ, args.code)
        k = code.k if code is not None else sum(
            1 for r in circ.roles if r is QubitRole.DATA)
        word = _parse_word(args.against[0], k)
        angle = DyadicAngle.parse(args.against[1])
        check = check_circuit_action(circ, word, angle, code, tol=args.tol)
    except ValueError as e:
        return _die(str(e))
    label = "bare" if code is None else f"[[{code.n},{code.k}]]"
    print(f"register: {label}; fidelity {check.fidelity:.12f}; "
          f"acceptance {check.acceptance:.6f}")
    if check.ok:
        print("PASS")
        return OK
    print("FAIL")
    return FAIL


def cmd_fault_distance(args: argparse.Namespace) -> int:
    try:
        circ = _read_circuit(args.file)
        code = _infer_code(circ, args.code)
        if code is None:
            return _die("fault distance needs a code; use --code")
        n = circ.num_qubits
        checks = tuple(embed_word(s, n) for s in code.stabilizers)
        witnesses = tuple(embed_word(w, n)
                          for w in code.logical_x + code.logical_z)
        engine = args.engine
        if engine is None:
            clifford = all(is_clifford_instruction(inst)
                           for inst in circ.instructions)
            engine = "clifford" if clifford else "dense"
        ctx = None
        if engine == "dense":
            if n > VERIFY_MAX_QUBITS:
                print(f"error: {n} qubits exceed the dense cap of "
                      f"{VERIFY_MAX_QUBITS}", file=sys.stderr)
                return RESOURCE
            ctx = make_dense_context(circ, code.basis())
        res = fault_distance(circ, args.max_weight, engine,
                             checks, witnesses, dense_context=ctx)
    except OSError as e:
        return _die(str(e))
    except ValueError as e:
        return _die(str(e))
    print(f"fault distance {res.claim()} "
          f"(searched all weights <= {res.searched_to})")
    if res.witness is not None:
        print("witness: " + res.witness.describe(circ))
    return OK


def _merged_sweep_options(args: argparse.Namespace) -> dict:
    opts: dict = {}
    if args.config is not None:
        opts.update(load_config(args.config))
    for key in ("protocol", "l", "p", "shots", "seed", "i", "k",
                "estimator", "threads", "out"):
        val = getattr(args, key)
        if val is not None:
            opts[key] = val
    return opts


def _as_tuple(val) -> tuple:
    return val if isinstance(val, tuple) else (val,)


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        opts = _merged_sweep_options(args)
    except (OSError, ValueError) as e:
        return _die(str(e))
    missing = [k for k in ("protocol", "l", "p", "shots") if k not in opts]
    if missing:
        return _die("missing sweep options: " + ", ".join(missing))
    name = {"iceberg": "iceberg_rotation_inverse",
            "steane": "steane_state_prep"}.get(opts["protocol"], opts["protocol"])
    if "seed" not in opts:
        opts["seed"] = int(os.environ.get("FLAGFORGE_SEED", "0"))
    try:
        p_values = tuple(float(x) for x in _as_tuple(opts["p"]))
        shots = tuple(int(float(x)) for x in _as_tuple(opts["shots"]))
        spec = BenchmarkSpec(
            protocol=name,
            l=int(opts["l"]),
            p_values=p_values,
            shots=shots if len(shots) > 1 else shots[0],
            i=int(opts.get("i", 1)),
            k=int(opts.get("k", 2)),
            seed=int(opts["seed"]),
            estimator=str(opts.get("estimator", "direct")),
        )
    except (TypeError, ValueError) as e:
        return _die(str(e))
    threads = int(opts.get("threads") or os.cpu_count() or 1)
    result = run_sweep(spec, threads=threads)
    text = result.csv()
    out = opts.get("out")
    if out and out != "-":
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)
    if result.fit is not None:
        f = result.fit
        print(f"fit: slope {f.slope:.3f}, prefactor {f.prefactor:.2f}, "
              f"residual {f.residual:.3f}, points {f.points_used}")
    else:
        print("fit: skipped (fewer than 3 points with enough error events)")
    return OK


def cmd_parse_check(args: argparse.Namespace) -> int:
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        return _die(str(e))
    try:
        circ = parse_circuit(text)
        echoed = print_circuit(circ)
        again = parse_circuit(echoed)
    except ValueError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return FAIL
    if print_circuit(again) != echoed:
        print("round-trip mismatch", file=sys.stderr)
        return FAIL
    print(f"ok: {circ.num_qubits} qubits, {len(circ.instructions)} "
          f"instructions, {len(circ.detectors)} detectors, "
          f"{len(circ.observables)} observables")
    return OK


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="flagforge",
        description="flagged dyadic-rotation gadgets: build, verify, benchmark",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a gadget and write its text form")
    b.add_argument("kind", choices=["iceberg-rz", "iceberg-pair",
                                    "iceberg-binary", "rz-ladder",
                                    "steane-rz", "steane-prep", "steane-pi2"])
    b.add_argument("--i", type=int, default=1, help="data qubit index (1-based)")
    b.add_argument("--j", type=int, default=2, help="second index for pairs")
    b.add_argument("--l", type=int, default=2, help="angle is pi/2^l")
    b.add_argument("--k", type=int, default=2, help="iceberg logical count")
    b.add_argument("--sign", type=int, default=1, choices=[1, -1])
    b.add_argument("--bits", help="binary fraction like 1.01 for iceberg-binary")
    b.add_argument("--out", default="-", help="output path, - for stdout")
    b.set_defaults(fn=cmd_build)

    v = sub.add_parser("verify-unitary",
                       help="compare a file's accepted action to a rotation")
    v.add_argument("file")
    v.add_argument("--against", nargs=2, required=True,
                   metavar=("WORD", "ANGLE"),
                   help="logical pauli word and angle as a fraction of pi, "
                        "e.g. Z1 1/4")
    v.add_argument("--code", choices=["steane", "iceberg", "none"],
                   help="override the code guessed from the data count")
    v.add_argument("--tol", type=float, default=1e-9)
    v.set_defaults(fn=cmd_verify_unitary)

    f = sub.add_parser("fault-distance",
                       help="search for the smallest undetected logical fault set")
    f.add_argument("file")
    f.add_argument("--max-weight", type=int, default=1)
    f.add_argument("--engine", choices=["clifford", "dense"],
                   help="default: clifford when the file is all-Clifford")
    f.add_argument("--code", choices=["steane", "iceberg"])
    f.set_defaults(fn=cmd_fault_distance)

    s = sub.add_parser("sweep", help="Monte Carlo noise sweep, CSV out")
    s.add_argument("--protocol", choices=["iceberg", "steane"])
    s.add_argument("--l", type=int)
    s.add_argument("--p", type=lambda t: tuple(float(x) for x in t.split(",")),
                   help="comma-separated noise strengths")
    s.add_argument("--shots",
                   type=lambda t: tuple(int(float(x)) for x in t.split(",")),
                   help="shot count, or one per p")
    s.add_argument("--seed", type=int,
                   help="default from FLAGFORGE_SEED, else 0")
    s.add_argument("--i", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--estimator", choices=["direct", "stratified"])
    s.add_argument("--threads", type=int, help="default: available cores")
    s.add_argument("--config", help="flat key = value file; flags win")
    s.add_argument("--out", help="CSV path, - for stdout")
    s.set_defaults(fn=cmd_sweep)

    pc = sub.add_parser("parse-check",
                        help="parse a circuit file and verify the round-trip")
    pc.add_argument("file")
    pc.set_defaults(fn=cmd_parse_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
