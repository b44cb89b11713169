"""Syndrome-measurement circuits and their verification.

One syndrome cycle spans 8 rounds and measures every check once; the
unitary part is 7 rounds of CNOT layers, two per round at most.  Each
CNOT layer is a permutation along one polynomial term: X-ancilla-side
layers write from q(X) into a data register, Z-ancilla-side layers
write from a data register into q(Z).  Verification replays the layer
algebra symbolically on 4-register polynomial blocks, so it is exact
and independent of the code size.

Also here: the batched Pauli-frame propagation engine used by the
noise model, and the depth-4 move circuits realizing code
automorphisms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .code import BBCode, BivariatePoly, Monomial, _shift_index
from .gf2 import BinVector

REGISTERS = ("L", "R", "X", "Z")
REG_OFFSET = {r: i for i, r in enumerate(REGISTERS)}


def qubit_id(register: str, index: int, lm: int) -> int:
    return REG_OFFSET[register] * lm + index


# ---------------------------------------------------------------------------
# CNOT layers and schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class CNOTLayer:
    """One permutation layer of the syndrome cycle.

    side "X": controls q(X); an A-layer targets q(L), a B-layer q(R).
    side "Z": targets q(Z); an A-layer is controlled on q(R), a B-layer
    on q(L).
    """

    side: str  # "X" or "Z"
    family: str  # "A" or "B"
    index: int  # 1..3

    def label(self) -> str:
        return f"{self.side}:{self.family}{self.index}"

    def registers(self) -> tuple[str, str]:
        """(control register, target register)."""
        if self.side == "X":
            return ("X", "L" if self.family == "A" else "R")
        return ("R" if self.family == "A" else "L", "Z")


ALL_LAYERS = [
    CNOTLayer(side, family, index)
    for side in ("X", "Z")
    for family in ("A", "B")
    for index in (1, 2, 3)
]


@dataclass(frozen=True)
class Schedule:
    """Assignment of the 12 CNOT layers to the 7 unitary rounds."""

    rounds: tuple[tuple[CNOTLayer, ...], ...]  # length 7, rounds 1..7

    def layers_in_order(self) -> list[tuple[int, CNOTLayer]]:
        return [(r + 1, layer) for r, rnd in enumerate(self.rounds) for layer in rnd]

    def round_of(self, layer: CNOTLayer) -> int | None:
        for r, rnd in enumerate(self.rounds):
            if layer in rnd:
                return r + 1
        return None

    def structural_problems(self, cnot_depth: int = 7) -> list[str]:
        """Violations of the packing rules; empty list means well formed."""
        problems = []
        layers = [layer for rnd in self.rounds for layer in rnd]
        if sorted(layers) != sorted(ALL_LAYERS):
            problems.append("each of the 12 layers must appear exactly once")
        if len(self.rounds) != cnot_depth:
            problems.append(f"expected {cnot_depth} unitary rounds")
        for r, rnd in enumerate(self.rounds, start=1):
            x_side = [l for l in rnd if l.side == "X"]
            z_side = [l for l in rnd if l.side == "Z"]
            if len(x_side) > 1 or len(z_side) > 1:
                problems.append(f"round {r}: more than one layer per ancilla side")
            if x_side and z_side and x_side[0].family != z_side[0].family:
                problems.append(f"round {r}: layers overlap on a data register")
            if x_side and r == 1:
                problems.append("round 1 is taken by the X-ancilla initialization")
            if z_side and r == len(self.rounds):
                problems.append("the last unitary round is taken by the Z-ancilla readout")
        return problems


CANONICAL_SCHEDULE = Schedule(
    (
        (CNOTLayer("Z", "A", 1),),
        (CNOTLayer("X", "A", 2), CNOTLayer("Z", "A", 3)),
        (CNOTLayer("X", "B", 2), CNOTLayer("Z", "B", 1)),
        (CNOTLayer("X", "B", 1), CNOTLayer("Z", "B", 2)),
        (CNOTLayer("X", "B", 3), CNOTLayer("Z", "B", 3)),
        (CNOTLayer("X", "A", 1), CNOTLayer("Z", "A", 2)),
        (CNOTLayer("X", "A", 3),),
    )
)


def _layer_term(code: BBCode, layer: CNOTLayer) -> Monomial:
    poly = code.a_poly if layer.family == "A" else code.b_poly
    return poly.term(layer.index)


def layer_gates(code: BBCode, layer: CNOTLayer) -> tuple[np.ndarray, np.ndarray]:
    """(controls, targets) as global qubit ids, one CNOT per group element."""
    lm = code.lm
    idx = np.arange(lm)
    shifted = _shift_index(idx, _layer_term(code, layer))
    creg, treg = layer.registers()
    return REG_OFFSET[creg] * lm + idx, REG_OFFSET[treg] * lm + shifted


# ---------------------------------------------------------------------------
# Scheduled circuits
# ---------------------------------------------------------------------------


@dataclass
class Step:
    """One depth-1 slice of the compiled circuit."""

    kind: str  # "cnot" | "init" | "meas" | "idle"
    round_id: int
    cycle: int  # 1-based cycle attribution (0 for the leading init round)
    qubits: np.ndarray  # measured/initialized/idle qubits, or CNOT controls
    targets: np.ndarray | None = None  # CNOT targets
    basis: str | None = None  # "X" or "Z" for init/meas
    layer: CNOTLayer | None = None
    meas_slot: int | None = None  # index into the measurement record


@dataclass
class ScheduledCircuit:
    """A full syndrome-measurement circuit for ``n_cycles`` cycles.

    Round 0 holds the Z-ancilla initialization that precedes the first
    cycle (total depth 8*N_c + 1); the last cycle omits its trailing
    re-initialization.  Rounds are depth-1: within any round every
    qubit is touched by at most one operation.
    """

    code: BBCode
    n_cycles: int
    schedule: Schedule = CANONICAL_SCHEDULE
    steps: list[Step] = field(default_factory=list, repr=False)
    n_meas_z: int = 0  # measurement slots per kind, filled at build time
    n_meas_x: int = 0

    @property
    def n_qubits(self) -> int:
        return 4 * self.code.lm

    def cnot_count(self) -> int:
        return sum(len(s.qubits) for s in self.steps if s.kind == "cnot")

    def depth(self) -> int:
        return 1 + max(s.round_id for s in self.steps)

    def op_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for s in self.steps:
            out[s.kind] = out.get(s.kind, 0) + len(s.qubits)
        return out


def build_sm_circuit(
    code: BBCode, n_cycles: int, schedule: Schedule = CANONICAL_SCHEDULE
) -> ScheduledCircuit:
    """Emit the syndrome-measurement circuit for the given schedule.

    Raises:
        ValueError: n_cycles < 1 or a structurally invalid schedule.
    """
    if n_cycles < 1:
        raise ValueError("need at least one syndrome cycle")
    problems = schedule.structural_problems()
    if problems:
        raise ValueError("invalid schedule: " + "; ".join(problems))

    lm = code.lm
    circ = ScheduledCircuit(code=code, n_cycles=n_cycles, schedule=schedule)
    reg = {r: REG_OFFSET[r] * lm + np.arange(lm) for r in REGISTERS}
    meas_z = 0
    meas_x = 0

    def add(step: Step):
        circ.steps.append(step)

    # round 0: bring up the Z ancillas for the first cycle
    add(Step(kind="init", round_id=0, cycle=1, qubits=reg["Z"], basis="Z"))

    for t in range(1, n_cycles + 1):
        base = (t - 1) * 8
        for r in range(1, 8):
            rid = base + r
            for layer in schedule.rounds[r - 1]:
                ctrl, tgt = layer_gates(code, layer)
                add(Step(kind="cnot", round_id=rid, cycle=t, qubits=ctrl,
                         targets=tgt, layer=layer))
            if r == 1:
                add(Step(kind="init", round_id=rid, cycle=t, qubits=reg["X"], basis="X"))
                add(Step(kind="idle", round_id=rid, cycle=t, qubits=reg["L"]))
            if r == 7:
                add(Step(kind="meas", round_id=rid, cycle=t, qubits=reg["Z"],
                         basis="Z", meas_slot=meas_z))
                meas_z += 1
                add(Step(kind="idle", round_id=rid, cycle=t, qubits=reg["R"]))
        rid = base + 8
        add(Step(kind="meas", round_id=rid, cycle=t, qubits=reg["X"], basis="X",
                 meas_slot=meas_x))
        meas_x += 1
        if t < n_cycles:
            add(Step(kind="init", round_id=rid, cycle=t, qubits=reg["Z"], basis="Z"))
        add(Step(kind="idle", round_id=rid, cycle=t, qubits=reg["L"]))
        add(Step(kind="idle", round_id=rid, cycle=t, qubits=reg["R"]))

    circ.n_meas_z = meas_z
    circ.n_meas_x = meas_x
    _check_round_disjointness(circ)
    return circ


def _check_round_disjointness(circ: ScheduledCircuit) -> None:
    by_round: dict[int, list[np.ndarray]] = {}
    for s in circ.steps:
        by_round.setdefault(s.round_id, []).append(s.qubits)
        if s.targets is not None:
            by_round[s.round_id].append(s.targets)
    for rid, chunks in by_round.items():
        allq = np.concatenate(chunks)
        if len(np.unique(allq)) != len(allq):
            raise ValueError(f"round {rid}: a qubit is touched twice")


def circuit_text(circ: ScheduledCircuit) -> str:
    """Stable text form: one op per line, ordered by (round, kind, index)."""
    lm = circ.code.lm
    kind_name = {"cnot": "CNOT", "init": "INIT", "meas": "MEAS", "idle": "IDLE"}
    lines = []
    for s in sorted(circ.steps, key=lambda s: (s.round_id, s.kind)):
        name = kind_name[s.kind]
        if s.basis:
            name += f"_{s.basis}"
        if s.kind == "cnot":
            for c, t in zip(s.qubits, s.targets):
                lines.append(
                    f"ROUND {s.round_id}; {name} "
                    f"{REGISTERS[c // lm]} {c % lm} {REGISTERS[t // lm]} {t % lm}"
                )
        else:
            for q in s.qubits:
                lines.append(f"ROUND {s.round_id}; {name} {REGISTERS[q // lm]} {q % lm}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Symbolic tableau verification
# ---------------------------------------------------------------------------


@dataclass
class TableauReport:
    """Outcome of the block-algebra replay of one syndrome cycle."""

    passed: bool
    structural_problems: list[str]
    x_ancilla_blocks: list[BivariatePoly]          # final top-row blocks, X replay
    x_residual: BivariatePoly                      # q(Z) block that must vanish
    z_residual: BivariatePoly                      # q(X) block that must vanish (Z replay)
    x_stabilizer_ok: bool
    z_stabilizer_ok: bool
    logical_ok: bool
    offending_rounds: list[int]                    # rounds whose writes survive in a residual
    trace: list[str] = field(default_factory=list)

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        return (
            f"{state}: x_residual={self.x_residual}, z_residual={self.z_residual}, "
            f"logical_ok={self.logical_ok}"
        )


def verify_sm_circuit(
    circ_or_schedule: ScheduledCircuit | Schedule, code: BBCode
) -> TableauReport:
    """Replay one unitary cycle on symbolic polynomial blocks.

    Checks, exactly and without sampling:
      * the X-ancilla row evolves (I 0 0 0) -> (I A B 0),
      * the Z-ancilla row evolves (0 0 0 I) -> (0 B^T A^T I),
      * both code-check rows return to themselves,
      * logical operators are untouched (the q(Z) accumulation of a
        logical row (0 u w 0) equals u*B + w*A, which vanishes).
    """
    schedule = (
        circ_or_schedule.schedule
        if isinstance(circ_or_schedule, ScheduledCircuit)
        else circ_or_schedule
    )
    problems = schedule.structural_problems(cnot_depth=len(schedule.rounds))
    zero = BivariatePoly.zero(code.l, code.m)
    one = BivariatePoly.one(code.l, code.m)
    A, B = code.a_poly, code.b_poly

    # blocks indexed by register order (X, L, R, Z) to match the algebra
    order = ("X", "L", "R", "Z")
    pos = {r: i for i, r in enumerate(order)}
    x_top = [one, zero, zero, zero]
    x_bot = [zero, A, B, zero]
    z_top = [zero, zero, zero, one]
    z_bot = [zero, B.T, A.T, zero]
    coeff_u = zero  # accumulated q(L)-sourced writes into q(Z)
    coeff_w = zero

    trace: list[str] = []
    x_writes: list[tuple[int, BivariatePoly]] = []  # (round, terms added to q(Z))
    z_writes: list[tuple[int, BivariatePoly]] = []  # (round, terms added to q(X))
    for rnd, layer in schedule.layers_in_order():
        M = _layer_term(code, layer)
        creg, treg = layer.registers()
        c, t = pos[creg], pos[treg]
        for row in (x_top, x_bot):
            row[t] = row[t] + row[c] * M
        for row in (z_top, z_bot):
            row[c] = row[c] + row[t] * M.T
        if layer.side == "Z":
            x_writes.append((rnd, x_top[pos["Z"]]))
            if layer.family == "B":
                coeff_u = coeff_u + BivariatePoly((M,), code.l, code.m)
            else:
                coeff_w = coeff_w + BivariatePoly((M,), code.l, code.m)
        else:
            z_writes.append((rnd, z_top[pos["X"]]))
        trace.append(
            f"round {rnd} {layer.label()}: "
            f"x_top=({', '.join(str(b) for b in x_top)})"
        )

    x_ok = x_top == [one, A, B, zero] and x_bot == [zero, A, B, zero]
    z_ok = z_top == [zero, B.T, A.T, one] and z_bot == [zero, B.T, A.T, zero]
    logical_ok = coeff_u == B and coeff_w == A

    offending: set[int] = set()
    for residual, writes in ((x_top[pos["Z"]], x_writes), (z_top[pos["X"]], z_writes)):
        bad = set(residual.terms)
        if not bad:
            continue
        prev: set = set()
        for rnd, state in writes:
            added = set(state.terms) ^ prev
            prev = set(state.terms)
            if added & bad:
                offending.add(rnd)

    passed = not problems and x_ok and z_ok and logical_ok
    return TableauReport(
        passed=passed,
        structural_problems=problems,
        x_ancilla_blocks=list(x_top),
        x_residual=x_top[pos["Z"]],
        z_residual=z_top[pos["X"]],
        x_stabilizer_ok=x_ok,
        z_stabilizer_ok=z_ok,
        logical_ok=logical_ok,
        offending_rounds=sorted(offending),
        trace=trace,
    )


def _index_mul_table(code: BBCode) -> tuple[int, int]:
    return code.l, code.m


def _fast_schedule_valid(
    code: BBCode, x_seq: tuple[CNOTLayer, ...], z_seq: tuple[CNOTLayer, ...]
) -> bool:
    """Replay only the two algebraic conditions, on integer term sets.

    x_seq[i] acts in round i+2; z_seq[i] in round i+1, so z_seq[i] and
    x_seq[i-1] share a round (registers disjoint by the family rule).
    """
    l, m = code.l, code.m

    def mul(terms: set[int], t: Monomial) -> set[int]:
        return {((e // m + t.a) % l) * m + (e % m + t.b) % m for e in terms}

    sa: set[int] = set()  # A-terms written into q(L) so far
    sb: set[int] = set()  # B-terms written into q(R) so far
    sat: set[int] = set()  # A^T-terms received by q(R) in the Z replay
    sbt: set[int] = set()  # B^T-terms received by q(L) in the Z replay
    acc_x: set[int] = set()
    acc_z: set[int] = set()
    for r in range(1, 8):
        xl = x_seq[r - 2] if 2 <= r else None
        zl = z_seq[r - 1] if r <= 6 else None
        # both layers in a round act on disjoint registers; order is moot
        if xl is not None:
            t = _layer_term(code, xl)
            if xl.family == "A":
                acc_z ^= mul(sbt, t.T)
                sa ^= {t.index}
            else:
                acc_z ^= mul(sat, t.T)
                sb ^= {t.index}
        if zl is not None:
            t = _layer_term(code, zl)
            if zl.family == "B":
                acc_x ^= mul(sa, t)
                sbt ^= {t.T.index}
            else:
                acc_x ^= mul(sb, t)
                sat ^= {t.T.index}
    return not acc_x and not acc_z


def enumerate_schedules(code: BBCode, cnot_depth: int = 7) -> list[Schedule]:
    """All packings of the 12 layers into ``cnot_depth`` rounds that verify.

    The search space: Z-side layers occupy rounds 1..depth-1 (the last
    unitary round belongs to the Z readout), X-side layers rounds
    2..depth (round 1 holds the X initialization), one layer per side
    per round, and layers sharing a round must act on disjoint
    registers.  Each structurally valid packing is kept iff the
    symbolic tableau replay passes.  Depths below 7 cannot fit the six
    X-side layers, so the search space is empty there.
    """
    from itertools import permutations

    x_layers = [l for l in ALL_LAYERS if l.side == "X"]
    z_layers = [l for l in ALL_LAYERS if l.side == "Z"]
    if cnot_depth < 7:
        return []
    if cnot_depth > 7:
        raise NotImplementedError("packings with idle CNOT rounds are not supported")

    valid = []
    for zp in permutations(z_layers):
        zfam = tuple(l.family for l in zp)
        for xp in permutations(x_layers):
            # overlap rounds 2..6: x_seq[i] shares a round with z_seq[i+1]
            if any(xp[i].family != zfam[i + 1] for i in range(5)):
                continue
            if _fast_schedule_valid(code, xp, zp):
                rounds = [(zp[0],)]
                rounds.extend((xp[i], zp[i + 1]) for i in range(5))
                rounds.append((xp[5],))
                valid.append(Schedule(tuple(rounds)))
    return valid


# ---------------------------------------------------------------------------
# Pauli-frame propagation (batched, bit-packed over scenarios)
# ---------------------------------------------------------------------------


def _scenario_words(batch: int) -> int:
    return max(1, (batch + 63) // 64)


@dataclass
class Injection:
    """A Pauli flip inserted right after one step, for one scenario."""

    step: int  # index into circuit.steps
    qubit: int
    frame: str  # "X" or "Z"
    scenario: int


@dataclass
class MeasFlip:
    step: int
    position: int  # index within the step's qubit list
    scenario: int


@dataclass
class FrameResult:
    """Propagation output, packed 64 scenarios per word."""

    batch: int
    z_check_outcomes: np.ndarray  # (n_cycles, lm, W) flips of MeasZ on q(Z)
    x_check_outcomes: np.ndarray  # (n_cycles, lm, W) flips of MeasX on q(X)
    final_x_frame: np.ndarray  # (n data qubits, W): residual X error
    final_z_frame: np.ndarray  # (n data qubits, W)

    def unpack_scenario(self, j: int) -> dict:
        w, b = j // 64, np.uint64(j % 64)
        pick = lambda a: ((a[..., w] >> b) & np.uint64(1)).astype(np.uint8)
        return {
            "z_check": pick(self.z_check_outcomes),
            "x_check": pick(self.x_check_outcomes),
            "alpha": pick(self.final_x_frame),
            "beta": pick(self.final_z_frame),
        }


def propagate_frames(
    circ: ScheduledCircuit,
    batch: int,
    injections: list[Injection] | None = None,
    meas_flips: list[MeasFlip] | None = None,
    injection_arrays: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] | None = None,
    measflip_arrays: dict[int, tuple[np.ndarray, np.ndarray]] | None = None,
) -> FrameResult:
    """Propagate X/Z Pauli frames through the circuit for many scenarios.

    Faults are supplied either as explicit lists or pre-grouped arrays
    keyed by step index: ``injection_arrays[step] = (qubits, frames,
    scenarios)`` with frames encoded 0 for X and 1 for Z, and
    ``measflip_arrays[step] = (positions, scenarios)``.
    """
    lm = circ.code.lm
    W = _scenario_words(batch)
    xf = np.zeros((4 * lm, W), dtype=np.uint64)
    zf = np.zeros((4 * lm, W), dtype=np.uint64)
    zrec = np.zeros((circ.n_cycles, lm, W), dtype=np.uint64)
    xrec = np.zeros((circ.n_cycles, lm, W), dtype=np.uint64)

    inj_by_step = injection_arrays or {}
    flips_by_step = measflip_arrays or {}
    if injections:
        grouped: dict[int, list[Injection]] = {}
        for inj in injections:
            grouped.setdefault(inj.step, []).append(inj)
        for sidx, items in grouped.items():
            inj_by_step[sidx] = (
                np.array([i.qubit for i in items]),
                np.array([0 if i.frame == "X" else 1 for i in items]),
                np.array([i.scenario for i in items]),
            )
    if meas_flips:
        fgrouped: dict[int, list[MeasFlip]] = {}
        for fl in meas_flips:
            fgrouped.setdefault(fl.step, []).append(fl)
        for sidx, items in fgrouped.items():
            flips_by_step[sidx] = (
                np.array([f.position for f in items]),
                np.array([f.scenario for f in items]),
            )

    one = np.uint64(1)
    for sidx, step in enumerate(circ.steps):
        if step.kind == "cnot":
            xf[step.targets] ^= xf[step.qubits]
            zf[step.qubits] ^= zf[step.targets]
        elif step.kind == "init":
            xf[step.qubits] = 0
            zf[step.qubits] = 0
        elif step.kind == "meas":
            rec = xf[step.qubits].copy() if step.basis == "Z" else zf[step.qubits].copy()
            if sidx in flips_by_step:
                posv, scen = flips_by_step[sidx]
                np.bitwise_xor.at(rec, (posv, scen // 64), one << (scen % 64).astype(np.uint64))
            if step.basis == "Z":
                zrec[step.meas_slot] = rec
            else:
                xrec[step.meas_slot] = rec
        # idle: nothing to apply
        if sidx in inj_by_step:
            qv, fv, scen = inj_by_step[sidx]
            masks = one << (scen % 64).astype(np.uint64)
            words = scen // 64
            xm = fv == 0
            if xm.any():
                np.bitwise_xor.at(xf, (qv[xm], words[xm]), masks[xm])
            zm = ~xm
            if zm.any():
                np.bitwise_xor.at(zf, (qv[zm], words[zm]), masks[zm])

    return FrameResult(
        batch=batch,
        z_check_outcomes=zrec,
        x_check_outcomes=xrec,
        final_x_frame=xf[: 2 * lm],
        final_z_frame=zf[: 2 * lm],
    )


# ---------------------------------------------------------------------------
# Automorphism circuits
# ---------------------------------------------------------------------------


@dataclass
class AutomorphismCircuit:
    """A depth-4 CNOT gadget shifting both data blocks by one monomial."""

    code: BBCode
    kind: str  # "A" or "B"
    j: int
    k: int
    shift: Monomial
    steps: list[Step] = field(default_factory=list, repr=False)

    def cnot_depth(self) -> int:
        return len({s.round_id for s in self.steps if s.kind == "cnot"})


def build_automorphism_circuit(code: BBCode, kind: str, j: int, k: int) -> AutomorphismCircuit:
    """Emit the move-based automorphism circuit for shift s.

    A-type: s = A_j A_k^T; the q(L) block cycles through q(X) while the
    q(R) block cycles through q(Z).  B-type mirrors this with s =
    B_j B_k^T, moving q(L) through q(Z) and q(R) through q(X).  Blank
    targets are re-initialized before every move so errors never
    propagate between data qubits.

    Raises:
        ValueError: j == k (the identity needs no circuit) or bad kind.
    """
    if kind not in ("A", "B"):
        raise ValueError("kind must be 'A' or 'B'")
    if j == k:
        raise ValueError("j == k is the identity automorphism; no circuit needed")
    lm = code.lm
    idx = np.arange(lm)
    poly = code.a_poly if kind == "A" else code.b_poly
    tj, tk = poly.term(j), poly.term(k)
    shift = tj * tk.T
    circ = AutomorphismCircuit(code=code, kind=kind, j=j, k=k, shift=shift)

    L = REG_OFFSET["L"] * lm + idx
    R = REG_OFFSET["R"] * lm + idx
    X = REG_OFFSET["X"] * lm + idx
    Z = REG_OFFSET["Z"] * lm + idx

    def shifted(reg0: int, t: Monomial) -> np.ndarray:
        return reg0 * lm + _shift_index(idx, t)

    Lr, Rr, Xr, Zr = (REG_OFFSET[r] for r in ("L", "R", "X", "Z"))
    if kind == "A":
        # q(L, A_k a) -> q(X, a) -> q(L, A_j a);  q(R, A_j^T g) -> q(Z, g) -> q(R, A_k^T g)
        moves = [
            (shifted(Lr, tk), X, shifted(Lr, tj)),
            (shifted(Rr, tj.T), Z, shifted(Rr, tk.T)),
        ]
    else:
        # q(L, B_j^T g) -> q(Z, g) -> q(L, B_k^T g);  q(R, B_k b) -> q(X, b) -> q(R, B_j b)
        moves = [
            (shifted(Lr, tj.T), Z, shifted(Lr, tk.T)),
            (shifted(Rr, tk), X, shifted(Rr, tj)),
        ]

    def add(kind_, rid, qubits, targets=None, basis=None):
        circ.steps.append(Step(kind=kind_, round_id=rid, cycle=1, qubits=qubits,
                               targets=targets, basis=basis))

    for src, anc, dst in moves:
        add("init", 0, anc, basis="Z")
        add("cnot", 1, src, anc)
        add("cnot", 2, anc, src)
        add("init", 3, dst, basis="Z")
        add("cnot", 4, anc, dst)
        add("cnot", 5, dst, anc)
    return circ


def automorphism_data_permutation(circ: AutomorphismCircuit) -> np.ndarray:
    """Recover the realized data permutation by frame propagation.

    Injects an X (and a Z) on each data qubit in turn, pushes the
    frames through the move gadget, and reads off where the flip ends
    up.  Residual frames on ancillas are discarded: the gadget leaves
    ancillas in |0>, where they are re-initialized before any reuse.

    Returns:
        perm: array with perm[q] = destination of data qubit q, or
        raises ValueError if the circuit is not a clean permutation.
    """
    code = circ.code
    lm = code.lm
    n = 2 * lm
    for frame in ("X", "Z"):
        injections = [Injection(step=-1, qubit=q, frame=frame, scenario=q) for q in range(n)]
        # step -1 means before everything: emulate with a leading idle step
        lead = Step(kind="idle", round_id=-1, cycle=0, qubits=np.arange(0))
        probe = ScheduledCircuit(code=code, n_cycles=1, schedule=CANONICAL_SCHEDULE)
        probe.steps = [lead] + circ.steps
        probe.n_meas_z = probe.n_meas_x = 1
        for inj in injections:
            inj.step = 0
        res = propagate_frames(probe, batch=n, injections=injections)
        fin = res.final_x_frame if frame == "X" else res.final_z_frame
        dense = np.zeros((n, n), dtype=np.uint8)
        for q in range(n):
            w, b = q // 64, np.uint64(q % 64)
            dense[:, q] = ((fin[:, w] >> b) & np.uint64(1)).astype(np.uint8)
        if frame == "X":
            if not ((dense.sum(axis=0) == 1).all() and (dense.sum(axis=1) == 1).all()):
                raise ValueError("gadget does not implement a data permutation")
            perm = np.argmax(dense, axis=0)
        else:
            if not np.array_equal(np.argmax(dense, axis=0), perm):
                raise ValueError("X and Z frames disagree on the permutation")
    return perm


def shift_permutation(code: BBCode, s: Monomial) -> np.ndarray:
    """Data permutation q(T, a) -> q(T, s*a) on both blocks."""
    idx = np.arange(code.lm)
    moved = _shift_index(idx, s)
    return np.concatenate([moved, code.lm + moved])


def verify_automorphism(
    code: BBCode,
    s: Monomial | None = None,
    data_permutation: np.ndarray | None = None,
    basis=None,
) -> bool:
    """Check a data-qubit permutation preserves both check matrices.

    Permuting columns must amount to a row relabeling of HX and of HZ.
    When a logical basis is supplied the induced action on the
    unprimed X family is also checked: the image of X(a*f, 0) must
    equal X(s*a*f, 0) modulo stabilizer.
    """
    if data_permutation is None:
        if s is None:
            raise ValueError("need a shift or an explicit permutation")
        data_permutation = shift_permutation(code, s)
    perm = np.asarray(data_permutation)

    for h in (code.hx, code.hz):
        dense = h.to_dense()
        permuted = np.zeros_like(dense)
        permuted[:, perm] = dense  # column q of dense becomes column perm[q]
        rows = {dense[i].tobytes() for i in range(h.rows)}
        prows = [permuted[i].tobytes() for i in range(h.rows)]
        if set(prows) != rows or len(set(prows)) != len(rows):
            return False

    if basis is not None and s is not None:
        from .gf2 import BinVector as _BV
        for alpha in (Monomial.one(code.l, code.m), s):
            sup = basis.x_bar(alpha).support_vector(code)
            moved = np.zeros(code.n, dtype=np.uint8)
            moved[perm] = sup.to_bits()
            target = basis.x_bar(s * alpha).support_vector(code)
            diff = _BV.from_bits(moved) ^ target
            if not (diff.is_zero() or code.hx.in_rowspace(diff)):
                return False
    return True
