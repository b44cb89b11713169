"""BP-OSD decoding and distance estimation.

The decoder treats an arbitrary binary matrix D with per-column priors
as a classical linear code with noiseless syndromes: belief propagation
(normalized min-sum, flooding schedule) estimates per-column posterior
marginals, then ordered-statistics post-processing solves the syndrome
on the most reliable information set, optionally sweeping single and
paired flips of the excluded columns to lower the solution weight.

The same machinery doubles as a randomized upper bound on code and
circuit distance: minimize a solution weight subject to anticommuting
with a random logical operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .code import BBCode
from .gf2 import WORD, BinMatrix, BinVector

PRIOR_FLOOR = 1e-12


class DecodingError(RuntimeError):
    """Syndrome outside the model's column space (a model bug, not noise)."""


@dataclass
class BPConfig:
    """Min-sum belief propagation settings."""

    max_iters: int = 10000
    scale: float = 0.625
    early_exit: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class OSDConfig:
    """Ordered-statistics settings.

    mode "order-0" solves once on the information set;
    "combination-sweep" additionally tries every single excluded-column
    flip and all pairs among the ``sweep_depth`` most suspect ones.
    """

    mode: str = "combination-sweep"
    sweep_depth: int = 20

    def __post_init__(self):
        if self.mode not in ("order-0", "combination-sweep"):
            raise ValueError(f"unknown OSD mode {self.mode!r}")
        if self.sweep_depth < 0:
            raise ValueError("sweep_depth must be >= 0")


@dataclass
class DecodeOutcome:
    xi: BinVector
    logical: BinVector | None
    converged: bool
    iterations: int
    weight: float


class BPOSDDecoder:
    """Reusable decoder for a fixed (D, priors) pair.

    Immutable after construction; decode calls are pure functions of
    the syndrome, so instances can be shared across worker threads.
    """

    def __init__(
        self,
        matrix: BinMatrix,
        priors: np.ndarray,
        bp: BPConfig | None = None,
        osd: OSDConfig | None = None,
        logical: BinMatrix | None = None,
        log_weights: np.ndarray | None = None,
    ):
        self.matrix = matrix
        self.priors = np.clip(np.asarray(priors, dtype=np.float64), PRIOR_FLOOR, 1 - PRIOR_FLOOR)
        if self.priors.shape != (matrix.cols,):
            raise ValueError("priors length must equal the column count")
        self.bp_cfg = bp or BPConfig()
        self.osd_cfg = osd or OSDConfig()
        self.logical = logical
        self.log_weights = (
            np.log(1.0 / self.priors) if log_weights is None else np.asarray(log_weights, float)
        )

        # edge structure in check-major order
        supports = matrix.row_supports()
        self.check_start = np.zeros(matrix.rows + 1, dtype=np.int64)
        for i, sup in enumerate(supports):
            self.check_start[i + 1] = self.check_start[i] + len(sup)
        self.edge_var = np.concatenate(supports) if matrix.rows else np.zeros(0, dtype=np.int64)
        self.edge_check = np.repeat(np.arange(matrix.rows), np.diff(self.check_start))
        self.n_edges = len(self.edge_var)
        self.prior_llr = np.log((1 - self.priors) / self.priors)

    # -- belief propagation ------------------------------------------------

    def bp_marginals(self, syndrome: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool, int]:
        """Run min-sum BP; returns (q, hard_decision, converged, iterations).

        q[j] estimates Pr[xi_j = 1]; converged means the hard decision
        reproduced the syndrome exactly at some iteration.
        """
        syndrome = np.asarray(syndrome, dtype=np.uint8)
        m, n = self.matrix.rows, self.matrix.cols
        if syndrome.shape != (m,):
            raise ValueError("syndrome length mismatch")
        if self.n_edges == 0:
            converged = not syndrome.any()
            return np.zeros(n), np.zeros(n, dtype=np.uint8), converged, 0

        ev, ec, cs = self.edge_var, self.edge_check, self.check_start
        syn_sign = np.where(syndrome[ec] == 1, -1.0, 1.0)
        c2v = np.zeros(self.n_edges)
        llr_total = self.prior_llr.copy()
        hard = (llr_total < 0).astype(np.uint8)
        converged = False
        iters = 0
        packed_rows = self.matrix.words
        for iters in range(1, self.bp_cfg.max_iters + 1):
            v2c = llr_total[ev] - c2v
            np.clip(v2c, -1e30, 1e30, out=v2c)
            mags = np.abs(v2c)
            neg = v2c < 0
            # per-check parity of negative messages, and two smallest magnitudes
            par = np.bitwise_xor.reduceat(neg.view(np.uint8), cs[:-1]).astype(bool)
            par[np.diff(cs) == 0] = False
            min1 = np.minimum.reduceat(mags, cs[:-1])
            min1[np.diff(cs) == 0] = np.inf
            is_min = mags == min1[ec]
            # first occurrence of the minimum per check carries min2 instead
            first_min = np.zeros(self.n_edges, dtype=bool)
            idx_first = np.flatnonzero(is_min)
            chk_first = ec[idx_first]
            keep = np.ones(len(idx_first), dtype=bool)
            keep[1:] = chk_first[1:] != chk_first[:-1]
            first_min[idx_first[keep]] = True
            mags2 = np.where(first_min, np.inf, mags)
            min2 = np.minimum.reduceat(mags2, cs[:-1])
            min2[np.diff(cs) == 0] = np.inf
            out_mag = np.where(first_min, min2[ec], min1[ec])
            sign = np.where(par[ec] ^ neg, -1.0, 1.0) * syn_sign
            c2v = self.bp_cfg.scale * sign * np.where(np.isfinite(out_mag), out_mag, 0.0)
            llr_total = self.prior_llr + np.bincount(ev, weights=c2v, minlength=n)
            hard = (llr_total < 0).astype(np.uint8)
            if self.bp_cfg.early_exit or iters == self.bp_cfg.max_iters:
                if self._syndrome_of(hard).tobytes() == syndrome.tobytes():
                    converged = True
                    break
        with np.errstate(over="ignore"):
            q = 1.0 / (1.0 + np.exp(np.clip(llr_total, -500, 500)))
        return q, hard, converged, iters

    def _syndrome_of(self, bits: np.ndarray) -> np.ndarray:
        v = BinVector.from_bits(bits)
        return (np.bitwise_count(self.matrix.words & v.words[None, :]).sum(axis=1) & 1).astype(
            np.uint8
        )

    # -- ordered statistics --------------------------------------------------

    def osd_postprocess(self, syndrome: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Solve D xi = syndrome on the most reliable information set.

        Columns are ranked by reliability max(q, 1-q), ties broken by
        lower index; a greedy elimination keeps each column that is
        independent of the more reliable ones, which maximizes the
        information set's reliability product.  In combination-sweep
        mode the excluded columns are then flipped singly (all) and in
        pairs (among the ``sweep_depth`` most error-prone) and the
        lightest solution wins.

        Raises:
            DecodingError: syndrome not in the column space.
        """
        syndrome = np.asarray(syndrome, dtype=np.uint8)
        m, n = self.matrix.rows, self.matrix.cols
        rel = np.maximum(q, 1 - q)
        order = np.argsort(-rel, kind="stable")

        dense = self.matrix.to_dense()[:, order]
        aug = np.hstack([dense, syndrome.reshape(-1, 1)])
        words = BinMatrix.from_dense(aug).words
        ncols = n + 1

        pivot_rows: list[int] = []
        pivot_cols: list[int] = []
        pr = 0
        for c in range(n):
            if pr >= m:
                break
            w, b = c // WORD, np.uint64(c % WORD)
            col = (words[:, w] >> b) & np.uint64(1)
            hits = np.flatnonzero(col[pr:])
            if hits.size == 0:
                continue
            piv = pr + int(hits[0])
            if piv != pr:
                words[[pr, piv]] = words[[piv, pr]]
            col = (words[:, w] >> b) & np.uint64(1)
            col[pr] = 0
            flip = np.flatnonzero(col)
            if flip.size:
                words[flip] ^= words[pr]
            pivot_rows.append(pr)
            pivot_cols.append(c)
            pr += 1

        rank = len(pivot_cols)
        rhs = ((words[:, n // WORD] >> np.uint64(n % WORD)) & np.uint64(1)).astype(np.uint8)
        if rhs[rank:].any():
            raise DecodingError("syndrome is not in the column space of D")

        red = BinMatrix(m, ncols, words).to_dense()[:rank, :n]
        base = rhs[:rank]
        pivot_cols_arr = np.array(pivot_cols, dtype=np.int64)
        nonpivot = np.setdiff1d(np.arange(n), pivot_cols_arr, assume_unique=False)
        lw_perm = self.log_weights[order]

        def solution_weight(np_pattern: np.ndarray) -> tuple[float, np.ndarray]:
            piv_bits = base.copy()
            for j in np_pattern:
                piv_bits ^= red[:, j]
            w = float(lw_perm[pivot_cols_arr] @ piv_bits) + float(lw_perm[np_pattern].sum())
            return w, piv_bits

        best_w, best_piv = solution_weight(np.zeros(0, dtype=np.int64))
        best_np: np.ndarray = np.zeros(0, dtype=np.int64)

        if self.osd_cfg.mode == "combination-sweep" and nonpivot.size:
            cols_np = red[:, nonpivot]
            piv_matrix = cols_np ^ base[:, None]
            weights = lw_perm[pivot_cols_arr] @ piv_matrix + lw_perm[nonpivot]
            j = int(np.argmin(weights))
            if weights[j] < best_w:
                best_w = float(weights[j])
                best_piv = piv_matrix[:, j]
                best_np = nonpivot[j : j + 1]
            # pairs among the most error-prone excluded columns
            by_q = nonpivot[np.argsort(-q[order][nonpivot], kind="stable")]
            top = by_q[: self.osd_cfg.sweep_depth]
            for a, b in combinations(range(len(top)), 2):
                pattern = top[[a, b]]
                w, piv_bits = solution_weight(pattern)
                if w < best_w:
                    best_w, best_piv, best_np = w, piv_bits, pattern

        x_perm = np.zeros(n, dtype=np.uint8)
        x_perm[pivot_cols_arr] = best_piv
        x_perm[best_np] = 1
        x = np.zeros(n, dtype=np.uint8)
        x[order] = x_perm
        return x

    # -- end-to-end ---------------------------------------------------------

    def decode(self, syndrome) -> DecodeOutcome:
        """BP then OSD; the returned solution always satisfies D xi = s."""
        if isinstance(syndrome, BinVector):
            syndrome = syndrome.to_bits()
        syndrome = np.asarray(syndrome, dtype=np.uint8)
        q, hard, converged, iters = self.bp_marginals(syndrome)
        x = self.osd_postprocess(syndrome, q)
        w = float(self.log_weights[x.astype(bool)].sum())
        if converged:
            w_bp = float(self.log_weights[hard.astype(bool)].sum())
            if w_bp < w:
                x, w = hard, w_bp
        if self._syndrome_of(x).tobytes() != syndrome.tobytes():
            raise DecodingError("post-processing failed to satisfy the syndrome")
        xi = BinVector.from_bits(x)
        logical = self.logical.mul_vec(xi) if self.logical is not None else None
        return DecodeOutcome(xi=xi, logical=logical, converged=converged,
                             iterations=iters, weight=w)


def bp_marginals(matrix: BinMatrix, priors, syndrome, cfg: BPConfig | None = None):
    """One-shot functional wrapper around :meth:`BPOSDDecoder.bp_marginals`."""
    return BPOSDDecoder(matrix, priors, bp=cfg).bp_marginals(np.asarray(syndrome, np.uint8))


def osd_postprocess(matrix: BinMatrix, priors, syndrome, q, cfg: OSDConfig | None = None):
    return BPOSDDecoder(matrix, priors, osd=cfg).osd_postprocess(
        np.asarray(syndrome, np.uint8), np.asarray(q, float)
    )


# ---------------------------------------------------------------------------
# Distance upper bounds
# ---------------------------------------------------------------------------

_DISTANCE_BP = BPConfig(max_iters=300)
_DISTANCE_OSD = OSDConfig(sweep_depth=30)


@dataclass
class DistanceEstimate:
    upper_bound: int | None
    trials: int
    witness: BinVector | None
    weights: list[int] = field(default_factory=list)


def reduce_weight_modulo_rows(v: BinVector, mat: BinMatrix, passes: int = 8) -> BinVector:
    """Greedy weight reduction of v by XORing rows of mat.

    Single-row moves only; used to shrink coset representatives so that
    they make useful (sparse) check nodes for belief propagation.
    """
    rows = [mat.row(i) for i in range(mat.rows)]
    for _ in range(passes):
        improved = False
        for r in rows:
            cand = v ^ r
            if cand.weight < v.weight:
                v = cand
                improved = True
        if not improved:
            break
    return v


def descend_modulo_rows(v: BinVector, mat: BinMatrix, pair_budget: int = 400) -> BinVector:
    """Local minimum of |v| under XOR with rows (and row pairs) of mat.

    Candidate rows are the ones overlapping the current support, which
    is where a weight drop is possible; pairs are scanned among the
    ``pair_budget`` highest-overlap rows once singles are exhausted.
    """
    dense = mat.to_dense()
    rows = [mat.row(i) for i in range(mat.rows)]
    improved = True
    while improved:
        improved = False
        overlap = dense @ v.to_bits()
        for i in np.flatnonzero(overlap >= 2)[np.argsort(-overlap[overlap >= 2], kind="stable")]:
            cand = v ^ rows[int(i)]
            if cand.weight < v.weight:
                v = cand
                improved = True
                break
        if improved:
            continue
        touching = np.flatnonzero(overlap >= 1)
        if len(touching) > pair_budget:
            touching = touching[np.argsort(-overlap[touching], kind="stable")][:pair_budget]
        for a, b in combinations(touching.tolist(), 2):
            cand = v ^ rows[a] ^ rows[b]
            if cand.weight < v.weight:
                v = cand
                improved = True
                break
    return v


def _random_kernel_logical(
    rng: np.random.Generator, kernel_basis: BinMatrix, rowspace: BinMatrix
) -> BinVector:
    """Uniform element of ker \\ rowspace by rejection sampling."""
    for _ in range(10000):
        coeff = rng.integers(0, 2, kernel_basis.rows, dtype=np.uint8)
        if not coeff.any():
            continue
        eta = BinVector.zeros(kernel_basis.cols)
        for i in np.flatnonzero(coeff):
            eta = eta ^ kernel_basis.row(int(i))
        if not rowspace.in_rowspace(eta):
            return eta
    raise RuntimeError("could not sample a logical representative")


def minimum_weight_in_coset(
    kernel_mat: BinMatrix,
    eta: BinVector,
    bp: BPConfig | None = None,
    osd: OSDConfig | None = None,
) -> BinVector:
    """BP-OSD minimization of |xi| with kernel_mat xi = 0, eta . xi = 1."""
    stacked = kernel_mat.append_row(eta)
    syndrome = np.zeros(stacked.rows, dtype=np.uint8)
    syndrome[-1] = 1
    priors = np.full(stacked.cols, 0.01)
    dec = BPOSDDecoder(stacked, priors, bp=bp or _DISTANCE_BP, osd=osd or _DISTANCE_OSD,
                       log_weights=np.ones(stacked.cols))
    return dec.decode(syndrome).xi


def distance_upper_bound(
    code: BBCode,
    trials: int,
    seed: int = 0,
    pauli: str = "Z",
    target: int | None = None,
    bp: BPConfig | None = None,
    osd: OSDConfig | None = None,
    collect: bool = False,
) -> DistanceEstimate:
    """Randomized BP-OSD upper bound on the code distance.

    For Z-type distance, picks a random X-type logical eta (in ker HZ
    but not rs(HX)) and minimizes the weight of xi in ker HX with
    eta . xi = 1; every such xi is a Z-type logical, so the smallest
    weight seen across trials bounds the distance from above.  eta is
    first shrunk modulo rs(HX) so BP sees a sparse extra check, and the
    solution is locally descended modulo rs(HZ) (which preserves both
    constraints).  Stops early once ``target`` is reached.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if pauli == "Z":
        kernel_mat, dual_kernel_mat = code.hx, code.hz
    elif pauli == "X":
        kernel_mat, dual_kernel_mat = code.hz, code.hx
    else:
        raise ValueError("pauli must be 'X' or 'Z'")
    basis = dual_kernel_mat.nullspace_basis()
    if not basis:
        return DistanceEstimate(None, 0, None)
    kernel_basis = BinMatrix.from_rows(basis)

    rng = np.random.default_rng(seed)
    best: BinVector | None = None
    weights = []
    done = 0
    for _ in range(trials):
        eta = _random_kernel_logical(rng, kernel_basis, kernel_mat)
        eta = reduce_weight_modulo_rows(eta, kernel_mat)
        xi = minimum_weight_in_coset(kernel_mat, eta, bp=bp, osd=osd)
        xi = descend_modulo_rows(xi, dual_kernel_mat)
        assert kernel_mat.mul_vec(xi).is_zero() and eta.dot(xi) == 1
        done += 1
        if collect:
            weights.append(xi.weight)
        if best is None or xi.weight < best.weight:
            best = xi
        if target is not None and best.weight <= target:
            break
    return DistanceEstimate(best.weight if best else None, done, best, weights)


def circuit_distance_upper_bound(
    side_model,
    trials: int,
    seed: int = 0,
    target: int | None = None,
    bp: BPConfig | None = None,
    osd: OSDConfig | None = None,
) -> DistanceEstimate:
    """Randomized upper bound on the circuit-level distance of one side.

    ``side_model`` carries the detector matrix D and the logical-action
    matrix L of one error type.  eta is a random combination of rows of
    D plus a nonzero combination of rows of L; any xi in ker D with
    eta . xi = 1 is an undetectable fault set with nontrivial logical
    action, so its weight bounds the circuit distance for this type.
    """
    D: BinMatrix = side_model.matrix
    L: BinMatrix = side_model.logical
    rng = np.random.default_rng(seed)
    best: BinVector | None = None
    done = 0
    for _ in range(trials):
        coeff_l = rng.integers(0, 2, L.rows, dtype=np.uint8)
        while not coeff_l.any():
            coeff_l = rng.integers(0, 2, L.rows, dtype=np.uint8)
        coeff_d = rng.integers(0, 2, D.rows, dtype=np.uint8)
        eta = BinVector.zeros(D.cols)
        for i in np.flatnonzero(coeff_l):
            eta = eta ^ L.row(int(i))
        for i in np.flatnonzero(coeff_d):
            eta = eta ^ D.row(int(i))
        xi = minimum_weight_in_coset(D, eta, bp=bp, osd=osd)
        assert D.mul_vec(xi).is_zero() and eta.dot(xi) == 1
        done += 1
        if best is None or xi.weight < best.weight:
            best = xi
        if target is not None and best.weight <= target:
            break
    return DistanceEstimate(best.weight if best else None, done, best)


# ---------------------------------------------------------------------------
# Exact distance for small codes
# ---------------------------------------------------------------------------


class BudgetExceeded(RuntimeError):
    """The enumeration guard refused to start; fall back to upper bounds."""


def exact_distance_small(
    code: BBCode,
    w_max: int,
    budget: float = 1e9,
    pauli: str = "Z",
    collect_witnesses: bool = False,
) -> int | None | tuple[int | None, list[BinVector]]:
    """Certified minimum logical weight up to w_max, or None if none exists.

    Enumerates, exhaustively after quotienting by the lm translation
    symmetry, all weight <= w_max vectors in the check kernel and keeps
    those outside the opposite row space.  A meet-in-the-middle split
    over syndrome collisions keeps the search tractable.  With
    ``collect_witnesses`` every logical representative found (not just
    the lightest) is returned alongside the minimum.

    Raises:
        BudgetExceeded: the guard estimate exceeds ``budget``.
    """
    witnesses: list[BinVector] = []
    if w_max <= 0:
        return (None, witnesses) if collect_witnesses else None
    n, lm = code.n, code.lm
    est = sum(math.comb(n, w) for w in range(w_max + 1)) / lm
    if est > budget:
        raise BudgetExceeded(f"enumeration estimate {est:.2e} above budget {budget:.2e}")

    kernel_mat = code.hx if pauli == "Z" else code.hz
    rs_mat = code.hz if pauli == "Z" else code.hx
    rs_basis = rs_mat.row_basis()

    cols = [int.from_bytes(
        np.packbits(kernel_mat.to_dense()[:, j], bitorder="little").tobytes(), "little")
        for j in range(n)]

    half_hi = (w_max - 1 + 1) // 2  # extra elements alongside the anchor
    half_lo = (w_max - 1) // 2
    best: int | None = None
    seen: set[bytes] = set()

    for anchor in (0, lm):  # L-block identity, or R-block identity if L-free
        rest = range(anchor + 1, n)
        # hash side: subsets of size <= half_lo from the tail
        table: dict[int, list[tuple[int, ...]]] = {0: [()]}
        for size in range(1, half_lo + 1):
            for sub in combinations(rest, size):
                syn = 0
                for j in sub:
                    syn ^= cols[j]
                table.setdefault(syn, []).append(sub)
        # scan side: anchor plus subsets of size <= half_hi
        for size in range(0, half_hi + 1):
            for sub in combinations(rest, size):
                syn = cols[anchor]
                for j in sub:
                    syn ^= cols[j]
                buckets = table.get(syn)
                if not buckets:
                    continue
                s1 = {anchor, *sub}
                for other in buckets:
                    support = s1.symmetric_difference(other)
                    w = len(support)
                    if w == 0 or w > w_max:
                        continue
                    if not collect_witnesses and best is not None and w >= best:
                        continue
                    v = BinVector.from_support(n, support)
                    if v.key() in seen:
                        continue
                    if not kernel_mat.mul_vec(v).is_zero():
                        continue  # collision across anchor parity, impossible
                    if not rs_basis.contains(v):
                        seen.add(v.key())
                        if collect_witnesses:
                            witnesses.append(v)
                        if best is None or w < best:
                            best = w
    return (best, witnesses) if collect_witnesses else best
