"""Circuit-level depolarizing noise: fault enumeration and sampling.

Every operation of the syndrome-measurement circuit fails independently with
probability p: a faulty CNOT applies one of 15 two-qubit Paulis after
the gate (p/15 each), a faulty idle one of X/Y/Z (p/3), a faulty
initialization prepares the orthogonal state and a faulty measurement
flips its outcome (p each).

The offline stage enumerates all single-fault circuits, propagates
each one and stores (measured-syndrome, final-error-syndrome,
logical-syndrome) triples as columns of the two per-type decoding
matrices; identical columns merge with summed priors; measured
syndromes are sparsified by differencing consecutive cycles of the
same check.  The final-error block is kept raw: it plays the part of
the appended noiseless readout cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import ScheduledCircuit, propagate_frames, _scenario_words
from .code import BBCode
from .gf2 import BinMatrix, BinVector
from .logical import LogicalBasis

# Pauli encoding for two-qubit fault classes: I=0, X=1, Y=2, Z=3.
_X_PART = np.array([0, 1, 1, 0], dtype=np.uint8)
_Z_PART = np.array([0, 0, 1, 1], dtype=np.uint8)
CNOT_CLASSES = [(c, t) for c in range(4) for t in range(4)][1:]  # 15, II excluded
IDLE_CLASSES = [1, 2, 3]  # X, Y, Z


@dataclass
class FaultRecord:
    index: int
    kind: str  # "cnot" | "idle" | "init" | "meas"
    step: int
    cycle: int
    prior_class: float  # 1/15, 1/3 or 1 (multiplied by p later)
    detail: tuple


@dataclass
class FaultTable:
    """All single-fault circuits of one SM circuit, in a fixed order."""

    circuit: ScheduledCircuit
    records: list[FaultRecord]
    injection_arrays: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]]
    measflip_arrays: dict[int, tuple[np.ndarray, np.ndarray]]

    @property
    def count(self) -> int:
        return len(self.records)

    def priors(self, p: float) -> np.ndarray:
        return p * np.array([r.prior_class for r in self.records])

    def injections_for(self, scenarios: list[list[int]]):
        """Regroup the table's faults for a forced-fault propagation.

        ``scenarios[j]`` lists fault indices applied in scenario j; the
        same fault may appear in several scenarios.  Returns
        (injection_arrays, measflip_arrays) in propagate_frames form.
        """
        inj: dict[int, list[tuple[int, int, int]]] = {}
        flips: dict[int, list[tuple[int, int]]] = {}
        by_index: dict[int, list[tuple]] = {}
        for step, (qv, fv, sv) in self.injection_arrays.items():
            for q, f, s in zip(qv, fv, sv):
                by_index.setdefault(int(s), []).append(("inj", step, int(q), int(f)))
        for step, (posv, sv) in self.measflip_arrays.items():
            for pos, s in zip(posv, sv):
                by_index.setdefault(int(s), []).append(("flip", step, int(pos), 0))
        for j, faults in enumerate(scenarios):
            for fidx in faults:
                for tag, step, a, b in by_index.get(fidx, []):
                    if tag == "inj":
                        inj.setdefault(step, []).append((a, b, j))
                    else:
                        flips.setdefault(step, []).append((a, j))
        inj_arrays = {
            s: (np.array([t[0] for t in items]), np.array([t[1] for t in items]),
                np.array([t[2] for t in items]))
            for s, items in inj.items()
        }
        flip_arrays = {
            s: (np.array([t[0] for t in items]), np.array([t[1] for t in items]))
            for s, items in flips.items()
        }
        return inj_arrays, flip_arrays


def build_fault_table(circ: ScheduledCircuit) -> FaultTable:
    """Enumerate every admissible single-fault realization of the circuit."""
    records: list[FaultRecord] = []
    inj: dict[int, list[tuple[int, int, int]]] = {}
    flips: dict[int, list[tuple[int, int]]] = {}
    idx = 0

    def add_inj(step, qubit, frame_bit):
        inj.setdefault(step, []).append((int(qubit), int(frame_bit), idx))

    for sidx, step in enumerate(circ.steps):
        if step.kind == "cnot":
            for g, (c, t) in enumerate(zip(step.qubits, step.targets)):
                for pc, pt in CNOT_CLASSES:
                    if _X_PART[pc]:
                        add_inj(sidx, c, 0)
                    if _Z_PART[pc]:
                        add_inj(sidx, c, 1)
                    if _X_PART[pt]:
                        add_inj(sidx, t, 0)
                    if _Z_PART[pt]:
                        add_inj(sidx, t, 1)
                    records.append(FaultRecord(idx, "cnot", sidx, step.cycle, 1 / 15,
                                               (g, pc, pt)))
                    idx += 1
        elif step.kind == "idle":
            for g, q in enumerate(step.qubits):
                for cls in IDLE_CLASSES:
                    if _X_PART[cls]:
                        add_inj(sidx, q, 0)
                    if _Z_PART[cls]:
                        add_inj(sidx, q, 1)
                    records.append(FaultRecord(idx, "idle", sidx, step.cycle, 1 / 3,
                                               (g, cls)))
                    idx += 1
        elif step.kind == "init":
            # orthogonal-state preparation: |-> for InitX, |1> for InitZ
            frame_bit = 1 if step.basis == "X" else 0
            for g, q in enumerate(step.qubits):
                add_inj(sidx, q, frame_bit)
                records.append(FaultRecord(idx, "init", sidx, step.cycle, 1.0, (g,)))
                idx += 1
        elif step.kind == "meas":
            for g in range(len(step.qubits)):
                flips.setdefault(sidx, []).append((g, idx))
                records.append(FaultRecord(idx, "meas", sidx, step.cycle, 1.0, (g,)))
                idx += 1

    inj_arrays = {
        s: (np.array([t[0] for t in items]), np.array([t[1] for t in items]),
            np.array([t[2] for t in items]))
        for s, items in inj.items()
    }
    flip_arrays = {
        s: (np.array([t[0] for t in items]), np.array([t[1] for t in items]))
        for s, items in flips.items()
    }
    return FaultTable(circuit=circ, records=records,
                      injection_arrays=inj_arrays, measflip_arrays=flip_arrays)


# ---------------------------------------------------------------------------
# Syndrome assembly
# ---------------------------------------------------------------------------


def _difference_map(rec: np.ndarray) -> np.ndarray:
    """Per-check XOR of consecutive cycles: (N_c, lm, W) -> same shape."""
    out = rec.copy()
    out[1:] ^= rec[:-1]
    return out


def _gf2_rows_dot(matrix: BinMatrix, frames: np.ndarray) -> np.ndarray:
    """Rows of a support matrix applied to packed scenario frames.

    frames has one row per qubit; the output row c is the XOR of the
    frame rows in check c's support.
    """
    W = frames.shape[1]
    out = np.zeros((matrix.rows, W), dtype=np.uint64)
    for i, sup in enumerate(matrix.row_supports()):
        if sup.size:
            out[i] = np.bitwise_xor.reduce(frames[sup], axis=0)
    return out


@dataclass
class SyndromeBundle:
    """Packed per-scenario syndromes of one propagation run."""

    batch: int
    diff_z_checks: np.ndarray  # (N_c, lm, W): differenced MeasZ outcomes
    diff_x_checks: np.ndarray
    raw_z_checks: np.ndarray
    raw_x_checks: np.ndarray
    final_x_error_syndrome: np.ndarray  # (lm, W): HZ . alpha
    final_z_error_syndrome: np.ndarray  # (lm, W): HX . beta
    logical_x: np.ndarray  # (k, W): Z-basis-operator overlap with alpha
    logical_z: np.ndarray  # (k, W)
    alpha: np.ndarray  # (n, W) final X frame
    beta: np.ndarray  # (n, W) final Z frame

    def x_side_columns(self) -> np.ndarray:
        """Detector+final rows of the X-error model, packed over scenarios."""
        nc, lm, W = self.diff_z_checks.shape
        return np.vstack([self.diff_z_checks.reshape(nc * lm, W),
                          self.final_x_error_syndrome])

    def z_side_columns(self) -> np.ndarray:
        nc, lm, W = self.diff_x_checks.shape
        return np.vstack([self.diff_x_checks.reshape(nc * lm, W),
                          self.final_z_error_syndrome])

    def unpack_bits(self, arr: np.ndarray) -> np.ndarray:
        """(rows, W) packed -> (rows, batch) uint8."""
        as_bytes = np.ascontiguousarray(arr).view(np.uint8)
        bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
        return bits[:, : self.batch]


def propagate_with_faults(
    circ: ScheduledCircuit,
    basis: LogicalBasis,
    batch: int,
    injection_arrays,
    measflip_arrays,
) -> SyndromeBundle:
    res = propagate_frames(circ, batch, injection_arrays=injection_arrays,
                           measflip_arrays=measflip_arrays)
    code = circ.code
    x_sup = basis.x_support_matrix(code)
    z_sup = basis.z_support_matrix(code)
    return SyndromeBundle(
        batch=batch,
        diff_z_checks=_difference_map(res.z_check_outcomes),
        diff_x_checks=_difference_map(res.x_check_outcomes),
        raw_z_checks=res.z_check_outcomes,
        raw_x_checks=res.x_check_outcomes,
        final_x_error_syndrome=_gf2_rows_dot(code.hz, res.final_x_frame),
        final_z_error_syndrome=_gf2_rows_dot(code.hx, res.final_z_frame),
        logical_x=_gf2_rows_dot(z_sup, res.final_x_frame),
        logical_z=_gf2_rows_dot(x_sup, res.final_z_frame),
        alpha=res.final_x_frame,
        beta=res.final_z_frame,
    )


def enumerate_faults(
    circ: ScheduledCircuit, basis: LogicalBasis
) -> tuple[FaultTable, SyndromeBundle]:
    """Propagate every single-fault circuit in one batched run."""
    table = build_fault_table(circ)
    bundle = propagate_with_faults(
        circ, basis, table.count, table.injection_arrays, table.measflip_arrays
    )
    return table, bundle


# ---------------------------------------------------------------------------
# Detector model
# ---------------------------------------------------------------------------


@dataclass
class SideModel:
    """Decoding data for one error type (X errors or Z errors)."""

    error_type: str  # which Pauli errors this side decodes
    matrix: BinMatrix  # detectors x merged fault columns
    logical: BinMatrix  # k x merged fault columns
    priors: np.ndarray
    provenance: list[np.ndarray] = field(repr=False)
    n_detector_rows: int = 0

    @property
    def n_columns(self) -> int:
        return self.matrix.cols

    def column_weights(self) -> np.ndarray:
        return np.bitwise_count(self.matrix.transpose().words).sum(axis=1).astype(int)

    def row_weights(self) -> np.ndarray:
        return np.bitwise_count(self.matrix.words).sum(axis=1).astype(int)

    def sparsity(self) -> tuple[int, int]:
        """(max column weight, max row weight)."""
        return int(self.column_weights().max()), int(self.row_weights().max())


@dataclass
class DetectorModel:
    code: BBCode
    circuit: ScheduledCircuit
    basis: LogicalBasis
    p: float
    pre_merge_count: int
    x: SideModel
    z: SideModel
    fault_table: FaultTable = field(repr=False)


def _pack_columns(detector_rows: np.ndarray, logical_rows: np.ndarray, batch: int):
    """Transpose packed scenario-major data into per-column signatures."""
    all_rows = np.vstack([detector_rows, logical_rows])
    nrows = all_rows.shape[0]
    sig_words = (nrows + 63) // 64
    out = np.zeros((batch, sig_words), dtype=np.uint64)
    chunk = 8192
    for lo in range(0, batch, chunk):
        hi = min(batch, lo + chunk)
        wlo, wb = lo // 64, lo % 64
        # unpack the scenario slice, transpose, repack as signature rows
        src = np.ascontiguousarray(all_rows[:, wlo : (hi + 63) // 64]).view(np.uint8)
        bits = np.unpackbits(src, axis=1, bitorder="little")[:, wb : wb + (hi - lo)]
        cols = np.ascontiguousarray(bits.T)
        padded = np.zeros((cols.shape[0], sig_words * 64), dtype=np.uint8)
        padded[:, :nrows] = cols
        out[lo:hi] = np.packbits(padded, axis=1, bitorder="little").view(np.uint64)
    return out


def _side_model(
    error_type: str,
    detector_rows: np.ndarray,
    logical_rows: np.ndarray,
    priors: np.ndarray,
) -> SideModel:
    batch = len(priors)
    n_det = detector_rows.shape[0]
    n_log = logical_rows.shape[0]
    signatures = _pack_columns(detector_rows, logical_rows, batch)
    merged, inverse = np.unique(signatures, axis=0, return_inverse=True)
    merged_priors = np.zeros(len(merged))
    np.add.at(merged_priors, inverse, priors)
    merged_priors = np.minimum(merged_priors, 1.0 - 1e-9)

    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(len(merged)))
    provenance = np.split(order, bounds[1:])

    # drop the all-zero column: it is undetectable and acts trivially
    zero_mask = ~merged.any(axis=1)
    keep = np.flatnonzero(~zero_mask)
    merged = merged[keep]
    merged_priors = merged_priors[keep]
    provenance = [provenance[i] for i in keep]

    as_bytes = np.ascontiguousarray(merged).view(np.uint8)
    col_bits = np.unpackbits(as_bytes, axis=1, bitorder="little")[:, : n_det + n_log]
    dense = col_bits.T  # rows x merged columns
    return SideModel(
        error_type=error_type,
        matrix=BinMatrix.from_dense(dense[:n_det]),
        logical=BinMatrix.from_dense(dense[n_det:]),
        priors=merged_priors,
        provenance=provenance,
        n_detector_rows=n_det,
    )


def build_detector_model(
    circ: ScheduledCircuit, p: float, basis: LogicalBasis
) -> DetectorModel:
    """Enumerate, difference, split and merge into the two side models."""
    table, bundle = enumerate_faults(circ, basis)
    priors = table.priors(p)
    x_side = _side_model("X", bundle.x_side_columns(),
                         bundle.logical_x, priors)
    z_side = _side_model("Z", bundle.z_side_columns(),
                         bundle.logical_z, priors)
    return DetectorModel(
        code=circ.code,
        circuit=circ,
        basis=basis,
        p=p,
        pre_merge_count=table.count,
        x=x_side,
        z=z_side,
        fault_table=table,
    )


def dump_side_model(side: SideModel) -> str:
    """Sparse text dump: header then one 'col: prior; dets; logicals' line."""
    lines = [f"{side.matrix.rows} {side.matrix.cols} {side.logical.rows}"]
    det_cols = side.matrix.transpose().row_supports()
    log_cols = side.logical.transpose().row_supports()
    for j in range(side.matrix.cols):
        dets = " ".join(str(i) for i in det_cols[j])
        logs = " ".join(str(i) for i in log_cols[j])
        lines.append(f"{j}: {side.priors[j]:.12e}; {dets}; {logs}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


@dataclass
class SampleBatch:
    """Unpacked per-shot syndromes ready for decoding."""

    shots: int
    x_syndromes: np.ndarray  # (shots, detector rows of the X model)
    z_syndromes: np.ndarray
    logical_x: np.ndarray  # (shots, k) true logical syndromes
    logical_z: np.ndarray
    raw_z_checks: np.ndarray  # (shots, N_c * lm)
    raw_x_checks: np.ndarray
    alpha: np.ndarray  # (shots, n)
    beta: np.ndarray


def _shot_rng(seed: int, shot: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, shot]))


def sample_circuit_noise(
    circ: ScheduledCircuit,
    p: float,
    shots: int,
    seed: int,
    basis: LogicalBasis,
    first_shot: int = 0,
    forced_faults: list[list[int]] | None = None,
    fault_table: FaultTable | None = None,
) -> SampleBatch:
    """Sample noisy circuit runs (or forced fault multisets) exactly.

    Each operation fails independently with probability p; the chosen
    Pauli/flip is propagated through the full circuit so the returned
    syndromes and final errors are exact.  Shots are keyed by
    (seed, first_shot + index) with a counter-based generator, so
    results are independent of batching and worker layout.

    With ``forced_faults`` the randomness is bypassed and scenario j
    applies exactly the listed fault-table entries.
    """
    if forced_faults is not None:
        table = fault_table or build_fault_table(circ)
        inj, flips = table.injections_for(forced_faults)
        batch = len(forced_faults)
        bundle = propagate_with_faults(circ, basis, batch, inj, flips)
        return _bundle_to_samples(bundle)

    if not 0 <= p <= 1:
        raise ValueError("p must be a probability")
    inj: dict[int, list[tuple[int, int, int]]] = {}
    flips: dict[int, list[tuple[int, int]]] = {}
    for j in range(shots):
        rng = _shot_rng(seed, first_shot + j)
        for sidx, step in enumerate(circ.steps):
            nq = len(step.qubits)
            if nq == 0:
                continue
            faulty = np.flatnonzero(rng.random(nq) < p)
            if faulty.size == 0:
                continue
            if step.kind == "cnot":
                classes = rng.integers(0, 15, size=faulty.size)
                for g, cidx in zip(faulty, classes):
                    pc, pt = CNOT_CLASSES[cidx]
                    c, t = int(step.qubits[g]), int(step.targets[g])
                    if _X_PART[pc]:
                        inj.setdefault(sidx, []).append((c, 0, j))
                    if _Z_PART[pc]:
                        inj.setdefault(sidx, []).append((c, 1, j))
                    if _X_PART[pt]:
                        inj.setdefault(sidx, []).append((t, 0, j))
                    if _Z_PART[pt]:
                        inj.setdefault(sidx, []).append((t, 1, j))
            elif step.kind == "idle":
                classes = rng.integers(0, 3, size=faulty.size)
                for g, cidx in zip(faulty, classes):
                    cls = IDLE_CLASSES[cidx]
                    q = int(step.qubits[g])
                    if _X_PART[cls]:
                        inj.setdefault(sidx, []).append((q, 0, j))
                    if _Z_PART[cls]:
                        inj.setdefault(sidx, []).append((q, 1, j))
            elif step.kind == "init":
                frame_bit = 1 if step.basis == "X" else 0
                for g in faulty:
                    inj.setdefault(sidx, []).append((int(step.qubits[g]), frame_bit, j))
            elif step.kind == "meas":
                for g in faulty:
                    flips.setdefault(sidx, []).append((int(g), j))

    inj_arrays = {
        s: (np.array([t[0] for t in v]), np.array([t[1] for t in v]),
            np.array([t[2] for t in v]))
        for s, v in inj.items()
    }
    flip_arrays = {
        s: (np.array([t[0] for t in v]), np.array([t[1] for t in v]))
        for s, v in flips.items()
    }
    bundle = propagate_with_faults(circ, basis, shots, inj_arrays, flip_arrays)
    return _bundle_to_samples(bundle)


def _bundle_to_samples(bundle: SyndromeBundle) -> SampleBatch:
    unp = bundle.unpack_bits
    nc, lm, _ = bundle.raw_z_checks.shape
    return SampleBatch(
        shots=bundle.batch,
        x_syndromes=unp(bundle.x_side_columns()).T.copy(),
        z_syndromes=unp(bundle.z_side_columns()).T.copy(),
        logical_x=unp(bundle.logical_x).T.copy(),
        logical_z=unp(bundle.logical_z).T.copy(),
        raw_z_checks=unp(bundle.raw_z_checks.reshape(nc * lm, -1)).T.copy(),
        raw_x_checks=unp(bundle.raw_x_checks.reshape(nc * lm, -1)).T.copy(),
        alpha=unp(bundle.alpha).T.copy(),
        beta=unp(bundle.beta).T.copy(),
    )
