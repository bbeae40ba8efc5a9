"""Benchmark protocols, Monte Carlo sweeps over p, and scaling fits.

Two protocols are measured. The iceberg rotation+inverse benchmark prepares
|++..+> in the [[k+2,k,2]] code, applies the flagged logical rotation and its
inverse, extracts Z syndromes with a flagged round, and reads all qubits out
destructively in X; a shot is a logical error iff it is accepted and some
logical X parity flipped. The Steane preparation benchmark runs the
|pi/2^l> state factory followed by one full flagged error-detection round
(both bases), then scores the accepted shots by in-code infidelity against
the ideal state: residuals outside the code space are detectable by the
next consumer's own detection round, so they are leakage, not logical
damage, and the projector excludes them.

Rates at realistic p (1e-3 and below) sit on p^2, so the Steane curve also
has a stratified estimator: condition on the number of fired noise
locations, estimate each stratum by Monte Carlo with exactly those
locations active, and mix with exact binomial weights. One set of stratum
estimates then yields the whole curve, which is what makes the small-p
slope measurable without 1e8-shot runs.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .angles import DyadicAngle
from .circuits import Circuit, QubitRole
from .codes import (
    CodeSpec,
    destructive_measure,
    flagged_syndrome_extraction,
    flagged_z_syndrome_extraction,
    ft_plus_prep,
    iceberg_code,
    steane_code,
)
from .constructors import compose_data, iceberg_logical_rz, relabel_pauli_basis
from .constructors import steane_state_prep
from .sv import MAX_QUBITS, NoiseModel, compile_circuit, _run_batch

_PROTOCOLS = ("iceberg_rotation_inverse", "steane_state_prep")

# a sampled infidelity below this is the numerical floor of a clean shot,
# not an error event
INFIDELITY_EVENT_FLOOR = 1e-9

DEFAULT_BATCH = 1 << 13


@dataclass(frozen=True)
class BenchmarkSpec:
    """One sweep: a protocol, a p grid, and shot counts.

    ``shots`` is either one count for every p or a per-p tuple. The noise
    switches mirror NoiseModel; ``estimator`` selects direct sampling or the
    stratified mixture (Steane protocol only).
    """

    protocol: str
    l: int
    p_values: tuple[float, ...]
    shots: tuple[int, ...]
    i: int = 1
    k: int = 2
    word: tuple | None = None
    seed: int = 0
    arity3: str = "depolarize"
    measure_flip_final: bool = True
    estimator: str = "direct"

    def __post_init__(self):
        if self.protocol not in _PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if len(self.p_values) == 0:
            raise ValueError("empty p grid")
        for p in self.p_values:
            if not 0.0 < p <= 0.25:
                raise ValueError(f"p={p} outside (0, 0.25]")
        shots = self.shots
        if isinstance(shots, int):
            shots = (shots,) * len(self.p_values)
            object.__setattr__(self, "shots", shots)
        if len(shots) != len(self.p_values):
            raise ValueError("shots list does not match p grid")
        for s in shots:
            if s < 1:
                raise ValueError("shots must be >= 1 for every p")
        if self.estimator not in ("direct", "stratified"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.estimator == "stratified" and self.protocol != "steane_state_prep":
            raise ValueError("stratified estimator applies to steane_state_prep only")

    def noise(self, p: float) -> NoiseModel:
        return NoiseModel(p, arity3=self.arity3,
                          measure_flip_final=self.measure_flip_final)


@dataclass(frozen=True)
class CurvePoint:
    """One (p, rate) sample with its Wilson 95% interval.

    For the iceberg protocol ``errors`` counts accepted shots with a flipped
    logical observable and rate = errors/accepted. For the Steane protocol
    rate is the mean in-code infidelity of accepted shots and ``errors``
    counts the accepted shots above the event floor; the interval then uses
    the effective count rate*accepted, which is the Bernoulli-dominated
    limit of the infidelity distribution.
    """

    p: float
    shots: int
    accepted: int
    errors: int
    rate: float
    ci_lo: float
    ci_hi: float

    def __post_init__(self):
        if self.accepted > self.shots:
            raise ValueError("accepted > shots")
        if self.errors > self.accepted:
            raise ValueError("errors > accepted")


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float  # log10 of the prefactor A in rate = A * p^slope
    residual: float  # rms of log10 residuals
    points_used: int

    @property
    def prefactor(self) -> float:
        return float(10.0 ** self.intercept)


def wilson_interval(k: float, n: int, z: float = 1.959963984540054):
    """Wilson score interval for k successes in n trials (k may be an
    effective, non-integer count)."""
    if n <= 0:
        return (0.0, 1.0)
    ph = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (ph + z2 / (2 * n)) / denom
    half = (z / denom) * math.sqrt(ph * (1 - ph) / n + z2 / (4 * n * n))
    return (max(0.0, center - half), min(1.0, center + half))


def _point(p: float, shots: int, accepted: int, errors: int, rate: float) -> CurvePoint:
    eff = rate * accepted
    lo, hi = wilson_interval(eff, accepted)
    return CurvePoint(p=p, shots=shots, accepted=accepted, errors=errors,
                      rate=rate, ci_lo=lo, ci_hi=hi)


# ---------------------------------------------------------------------------
# protocol circuits


def build_iceberg_benchmark(
    i: int = 1, l: int = 2, k: int = 2, word: tuple | None = None
) -> Circuit:
    """|+..+> prep, R(+pi/2^l), R(-pi/2^l), flagged Z-syndrome round,
    destructive X readout with logical-X observables."""
    code = iceberg_code(k)
    plus = iceberg_logical_rz(i, l, 1, code)
    minus = iceberg_logical_rz(i, l, -1, code)
    if word is not None:
        plus = relabel_pauli_basis(plus, word)
        minus = relabel_pauli_basis(minus, word)
    c = compose_data(ft_plus_prep(code), plus.circuit)
    c = compose_data(c, minus.circuit)
    c = compose_data(c, flagged_z_syndrome_extraction(code))
    c = compose_data(c, destructive_measure(code, "X"))
    if c.num_qubits > MAX_QUBITS:
        raise ValueError(f"benchmark needs {c.num_qubits} qubits > {MAX_QUBITS}")
    return c


@dataclass(frozen=True)
class PrepBenchmark:
    """Steane |pi/2^l> factory plus one full detection round, and the ideal
    data-block state the accepted output is scored against."""

    circuit: Circuit
    code: CodeSpec
    ideal: np.ndarray
    l: int

    def score(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-shot (ideal overlap, code-space mass), ancillas traced out.

        The benchmark's infidelity is the ensemble ratio
        1 - sum(overlap)/sum(mass): a shot whose state left the code space
        entirely has mass ~ 0 and drops out of both sums, because that
        residual is detectable by the consumer's own detection round and is
        leakage, not logical damage. states is (batch, 2**n); data qubits
        must be the low bit positions."""
        data = tuple(q for q, r in enumerate(self.circuit.roles)
                     if r == QubitRole.DATA)
        nd = len(data)
        if data != tuple(range(nd)):
            raise ValueError("data qubits must occupy the low positions")
        blocks = states.reshape(states.shape[0], -1, 1 << nd)
        proj = self.code.projector()
        mass = np.einsum("bai,ij,baj->b", blocks.conj(), proj, blocks).real
        overlap = (np.abs(blocks @ self.ideal.conj()) ** 2).sum(axis=1)
        norm = np.einsum("bai,bai->b", blocks.conj(), blocks).real
        norm = np.maximum(norm, 1e-300)
        return overlap / norm, np.clip(mass / norm, 0.0, 1.0)

    def infidelities(self, states: np.ndarray) -> np.ndarray:
        """Per-shot in-code infidelity; pure-leakage shots score 0 (they
        carry no code-space state to be wrong about)."""
        overlap, mass = self.score(states)
        out = 1.0 - overlap / np.maximum(mass, 1e-300)
        out[mass <= 1e-12] = 0.0
        return np.clip(out, 0.0, 1.0)


def ideal_prep_state(code: CodeSpec, l: int) -> np.ndarray:
    theta = DyadicAngle.pi_over(l).radians()
    zbar = code.logical_pauli(((0, "Z"),)).to_matrix()
    plus = code.plus_state()
    return np.cos(theta / 2) * plus - 1j * np.sin(theta / 2) * (zbar @ plus)


def build_steane_prep_benchmark(l: int) -> PrepBenchmark:
    code = steane_code()
    c = steane_state_prep(l)
    c = compose_data(c, flagged_syndrome_extraction(code, "Z"))
    c = compose_data(c, flagged_syndrome_extraction(code, "X"))
    if c.num_qubits > MAX_QUBITS:
        raise ValueError(f"benchmark needs {c.num_qubits} qubits > {MAX_QUBITS}")
    return PrepBenchmark(circuit=c, code=code, ideal=ideal_prep_state(code, l), l=l)


# ---------------------------------------------------------------------------
# direct sampling

def _seed_for_point(seed: int, j: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(j,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _iceberg_batch_task(args) -> tuple[int, int, int]:
    circuit, noise, root_seed, b, take = args
    comp = compile_circuit(circuit, noise)
    rng = np.random.default_rng(np.random.SeedSequence(root_seed, spawn_key=(b,)))
    out = _run_batch(comp, noise, rng, take)
    acc = out["accepted"]
    flipped = out["observables"][acc].any(axis=1)
    return int(acc.sum()), int(flipped.sum()), take


def _steane_batch_task(args) -> tuple[int, int, float, float, int]:
    circuit, noise, root_seed, b, take, l = args
    bench = build_steane_prep_benchmark(l)
    comp = compile_circuit(circuit, noise)
    rng = np.random.default_rng(np.random.SeedSequence(root_seed, spawn_key=(b,)))
    out = _run_batch(comp, noise, rng, take, keep_state=True)
    acc = out["accepted"]
    n_acc = int(acc.sum())
    if n_acc == 0:
        return 0, 0, 0.0, 0.0, take
    overlap, mass = bench.score(out["state"][acc])
    deficit = mass - overlap
    events = int((deficit > INFIDELITY_EVENT_FLOOR).sum())
    return n_acc, events, float(deficit.sum()), float(mass.sum()), take


def _batches(shots: int, batch_size: int):
    done = 0
    b = 0
    while done < shots:
        take = min(batch_size, shots - done)
        yield b, take
        done += take
        b += 1


def _run_tasks(tasks, fn, threads: int):
    if threads <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def _direct_point(spec: BenchmarkSpec, j: int, threads: int,
                  batch_size: int) -> CurvePoint:
    p = spec.p_values[j]
    shots = spec.shots[j]
    noise = spec.noise(p)
    root = _seed_for_point(spec.seed, j)
    if spec.protocol == "iceberg_rotation_inverse":
        circuit = build_iceberg_benchmark(spec.i, spec.l, spec.k, spec.word)
        tasks = [(circuit, noise, root, b, take)
                 for b, take in _batches(shots, batch_size)]
        parts = _run_tasks(tasks, _iceberg_batch_task, threads)
        accepted = sum(a for a, _, _ in parts)
        errors = sum(e for _, e, _ in parts)
        rate = errors / accepted if accepted else 0.0
        return _point(p, shots, accepted, errors, rate)
    bench = build_steane_prep_benchmark(spec.l)
    tasks = [(bench.circuit, noise, root, b, take, spec.l)
             for b, take in _batches(shots, batch_size)]
    parts = _run_tasks(tasks, _steane_batch_task, threads)
    accepted = sum(a for a, _, _, _, _ in parts)
    events = sum(e for _, e, _, _, _ in parts)
    d_sum = math.fsum(d for _, _, d, _, _ in parts)  # order-stable reductions
    m_sum = math.fsum(m for _, _, _, m, _ in parts)
    rate = d_sum / m_sum if m_sum > 0 else 0.0
    return _point(p, shots, accepted, events, rate)


# ---------------------------------------------------------------------------
# stratified estimator (Steane prep)


def noise_locations(circuit: Circuit, noise: NoiseModel) -> list[int]:
    """Instruction indices that carry exactly one noise event each.

    Requires arity3='depolarize' so a 3-qubit gate is one event; the
    stratified mixture conditions on how many locations fired, which is
    only the binomial count when locations and events coincide."""
    if noise.arity3 != "depolarize":
        raise ValueError("stratified estimator needs arity3='depolarize'")
    comp = compile_circuit(circuit, noise)
    locs = []
    rec = 0
    for idx, inst in enumerate(circuit.instructions):
        if inst.is_meas:
            if comp.record_flip_ok[rec]:
                locs.append(idx)
            rec += 1
        elif comp.depol_after[idx]:
            locs.append(idx)
    return locs


@dataclass(frozen=True)
class StratumEstimate:
    """Per-shot averages for the k-fault stratum, with subset-level sample
    variances (each subset of k locations is one observation, so the
    clustering of shots within a subset is priced into the error bars).

    q_deficit = E[(mass - overlap) * accepted], q_mass = E[mass * accepted]:
    rejected shots contribute zero, so no separate acceptance factor is
    needed when mixing."""

    k: int
    subsets: int
    samples: int
    accepted: int
    acceptance: float
    q_deficit: float
    q_mass: float
    var_q_deficit: float
    var_q_mass: float
    cov_q: float
    var_acc: float
    events: int

    @property
    def mean_infidelity(self) -> float:
        return self.q_deficit / self.q_mass if self.q_mass > 0 else 0.0


@dataclass(frozen=True)
class StratifiedCurve:
    l: int
    locations: int
    strata: tuple[StratumEstimate, ...]

    def mix(self, p: float) -> tuple[float, float, float, float]:
        """(acceptance, infidelity, infidelity se, truncation bound) at p.

        Infidelity is the ensemble ratio sum(deficit)/sum(mass) over the
        accepted post-selected mixture, so leakage shots drop out of both
        sums. The se is the delta-method error of that ratio from the
        subset-level variances."""
        L = self.locations
        kmax = max(s.k for s in self.strata)
        acc = 0.0
        num = 0.0
        den = 0.0
        for s in self.strata:
            w = math.comb(L, s.k) * p**s.k * (1 - p) ** (L - s.k)
            acc += w * s.acceptance
            num += w * s.q_deficit
            den += w * s.q_mass
        inf = num / den if den > 0 else 1.0
        var = 0.0
        if den > 0:
            for s in self.strata:
                if s.subsets <= 1:
                    continue
                w = math.comb(L, s.k) * p**s.k * (1 - p) ** (L - s.k)
                c = (w / den) ** 2 / s.subsets
                var += c * max(
                    0.0,
                    s.var_q_deficit - 2 * inf * s.cov_q + inf**2 * s.var_q_mass,
                )
        tail = 1.0 - sum(
            math.comb(L, k) * p**k * (1 - p) ** (L - k) for k in range(kmax + 1)
        )
        # tail shots pessimistically counted as rejected
        return acc, inf, math.sqrt(var), max(0.0, tail)

    def point(self, p: float) -> CurvePoint:
        """Mixture point at p. shots/accepted/errors are the raw stratum
        sample totals (shared by every p on the curve); the interval is the
        delta-method CI of the weighted mixture plus the truncation bound."""
        acc, inf, se, tail = self.mix(p)
        shots = sum(s.samples for s in self.strata)
        accepted = sum(s.accepted for s in self.strata)
        events = sum(s.events for s in self.strata)
        lo = max(0.0, inf - 1.96 * se)
        hi = min(1.0, inf + 1.96 * se + tail)
        return CurvePoint(p=p, shots=max(shots, 1), accepted=min(accepted, max(shots, 1)),
                          errors=min(events, accepted) if accepted else 0,
                          rate=inf, ci_lo=lo, ci_hi=hi)


def _stratum_task(args):
    """One worker's share of a stratum: `subsets` uniform k-subsets of the
    noise locations, `shots_per_subset` shots each. Returns subset-level
    first and second moments of the per-shot means (u = deficit, v = mass,
    a = acceptance), so the caller can price within-subset clustering into
    the variances."""
    circuit, l, locs, k, root_seed, b, subsets, shots_per_subset = args
    bench = build_steane_prep_benchmark(l)
    noise = NoiseModel(1.0, arity3="depolarize")
    comp = compile_circuit(circuit, noise)
    rng = np.random.default_rng(np.random.SeedSequence(root_seed, spawn_key=(b,)))
    accepted = 0
    events = 0
    u1 = u2 = v1 = v2 = uv = a1 = a2 = 0.0
    for _ in range(subsets):
        active = {locs[i] for i in
                  rng.choice(len(locs), size=k, replace=False).tolist()}
        out = _run_batch(comp, noise, rng, shots_per_subset, keep_state=True,
                         active_locations=active)
        acc = out["accepted"]
        n_acc = int(acc.sum())
        accepted += n_acc
        u = v = 0.0
        if n_acc:
            overlap, mass = bench.score(out["state"][acc])
            deficit = mass - overlap
            events += int((deficit > INFIDELITY_EVENT_FLOOR).sum())
            u = float(deficit.sum()) / shots_per_subset
            v = float(mass.sum()) / shots_per_subset
        a = n_acc / shots_per_subset
        u1 += u
        u2 += u * u
        v1 += v
        v2 += v * v
        uv += u * v
        a1 += a
        a2 += a * a
    return (k, subsets, subsets * shots_per_subset, accepted,
            u1, u2, v1, v2, uv, a1, a2, events)


def steane_stratified_curve(
    l: int,
    seed: int = 0,
    kmax: int = 4,
    subsets_per_stratum: int | Sequence[int] = 512,
    shots_per_subset: int = 16,
    threads: int = 1,
    jobs_per_stratum: int = 8,
) -> StratifiedCurve:
    """Estimate E[accept | k faults] and the in-code damage per shot for
    k = 0..kmax by two-stage sampling (uniform location subsets, then shots
    per subset), for mixing into curve points at any p. subsets_per_stratum
    may be a sequence giving a separate budget for each k = 1..kmax (the
    damage signal lives in k >= 2, which deserves more samples)."""
    bench = build_steane_prep_benchmark(l)
    locs = noise_locations(bench.circuit, NoiseModel(0.001, arity3="depolarize"))
    if isinstance(subsets_per_stratum, int):
        budgets = [subsets_per_stratum] * kmax
    else:
        budgets = list(subsets_per_stratum)
        if len(budgets) != kmax:
            raise ValueError(f"need {kmax} subset budgets, got {len(budgets)}")
    # k=0 is exact: the noiseless run accepts with certainty and is ideal
    strata = [StratumEstimate(k=0, subsets=0, samples=0, accepted=0,
                              acceptance=1.0, q_deficit=0.0, q_mass=1.0,
                              var_q_deficit=0.0, var_q_mass=0.0, cov_q=0.0,
                              var_acc=0.0, events=0)]
    for k in range(1, kmax + 1):
        root = _seed_for_point(seed, 100 + k)
        per_job = max(1, budgets[k - 1] // jobs_per_stratum)
        tasks = [(bench.circuit, l, locs, k, root, b, per_job, shots_per_subset)
                 for b in range(jobs_per_stratum)]
        parts = _run_tasks(tasks, _stratum_task, threads)
        n_sub = sum(t[1] for t in parts)
        total = sum(t[2] for t in parts)
        accepted = sum(t[3] for t in parts)
        u1 = math.fsum(t[4] for t in parts)
        u2 = math.fsum(t[5] for t in parts)
        v1 = math.fsum(t[6] for t in parts)
        v2 = math.fsum(t[7] for t in parts)
        uv = math.fsum(t[8] for t in parts)
        a1 = math.fsum(t[9] for t in parts)
        a2 = math.fsum(t[10] for t in parts)
        events = sum(t[11] for t in parts)
        qd, qm, qa = u1 / n_sub, v1 / n_sub, a1 / n_sub
        strata.append(StratumEstimate(
            k=k, subsets=n_sub, samples=total, accepted=accepted,
            acceptance=qa,
            q_deficit=qd, q_mass=qm,
            var_q_deficit=max(0.0, u2 / n_sub - qd**2),
            var_q_mass=max(0.0, v2 / n_sub - qm**2),
            cov_q=uv / n_sub - qd * qm,
            var_acc=max(0.0, a2 / n_sub - qa**2),
            events=events,
        ))
    return StratifiedCurve(l=l, locations=len(locs), strata=tuple(strata))


# ---------------------------------------------------------------------------
# fits, sweeps, serialization


def fit_scaling(points: list[CurvePoint], min_events: int = 10) -> ScalingFit:
    usable = [pt for pt in points if pt.errors >= min_events and pt.rate > 0]
    if len(usable) < 3:
        raise ValueError(
            f"need >= 3 points with >= {min_events} error events, "
            f"have {len(usable)}"
        )
    x = np.log10([pt.p for pt in usable])
    y = np.log10([pt.rate for pt in usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return ScalingFit(slope=float(slope), intercept=float(intercept),
                      residual=resid, points_used=len(usable))


@dataclass(frozen=True)
class SweepResult:
    spec: BenchmarkSpec
    points: tuple[CurvePoint, ...]
    fit: ScalingFit | None

    def csv(self) -> str:
        return points_to_csv(self.spec.protocol, self.spec.l, list(self.points))


def run_sweep(spec: BenchmarkSpec, threads: int = 1,
              batch_size: int = DEFAULT_BATCH) -> SweepResult:
    """Deterministic in spec (including seed): per-point seeds are derived,
    batch partitions are pure functions of the shot counts, and reductions
    are ordered, so equal specs give byte-identical CSV."""
    if spec.estimator == "stratified":
        curve = steane_stratified_curve(spec.l, seed=spec.seed, threads=threads)
        points = [curve.point(p) for p in spec.p_values]
    else:
        points = [_direct_point(spec, j, threads, batch_size)
                  for j in range(len(spec.p_values))]
    try:
        fit = fit_scaling(points)
    except ValueError:
        fit = None
    return SweepResult(spec=spec, points=tuple(points), fit=fit)


CSV_HEADER = "protocol,l,p,shots,accepted,errors,rate,ci_lo,ci_hi"


def points_to_csv(protocol: str, l: int, points: list[CurvePoint]) -> str:
    lines = [CSV_HEADER]
    for pt in points:
        lines.append(
            f"{protocol},{l},{pt.p:.17g},{pt.shots},{pt.accepted},"
            f"{pt.errors},{pt.rate:.17g},{pt.ci_lo:.17g},{pt.ci_hi:.17g}"
        )
    return "\n".join(lines) + "\n"


def points_from_csv(text: str) -> list[tuple[str, int, CurvePoint]]:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or wrong CSV header")
    out = []
    for ln in lines[1:]:
        f = ln.split(",")
        if len(f) != 9:
            raise ValueError(f"bad CSV row: {ln!r}")
        pt = CurvePoint(p=float(f[2]), shots=int(f[3]), accepted=int(f[4]),
                        errors=int(f[5]), rate=float(f[6]),
                        ci_lo=float(f[7]), ci_hi=float(f[8]))
        out.append((f[0], int(f[1]), pt))
    return out


def acceptance_monotone(points: list[CurvePoint], sigmas: float = 3.0) -> bool:
    """Acceptance rate should not increase with p beyond statistical noise."""
    seq = sorted(points, key=lambda pt: pt.p)
    for a, b in zip(seq, seq[1:]):
        ra, rb = a.accepted / a.shots, b.accepted / b.shots
        se = math.sqrt(ra * (1 - ra) / a.shots + rb * (1 - rb) / b.shots)
        if rb > ra + sigmas * max(se, 1e-12):
            return False
    return True


# ---------------------------------------------------------------------------
# flat key = value config files


def parse_config(text: str) -> dict:
    """Flat `key = value` lines; # starts a comment; values parse as int,
    float, bool, or bare string; commas make tuples."""
    out: dict = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {no}: expected key = value")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if not key:
            raise ValueError(f"config line {no}: empty key")
        out[key] = _parse_value(val)
    return out


def _parse_value(val: str):
    if "," in val:
        return tuple(_parse_value(v.strip()) for v in val.split(","))
    low = val.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(val)
    except ValueError:
        pass
    try:
        return float(val)
    except ValueError:
        pass
    return val


def load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
