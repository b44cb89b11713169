"""Logical Pauli machinery for bivariate bicycle codes.

Logical operators are handled as pairs of polynomials acting on the two
data blocks: X(P, Q) applies X on q(L, a) for a in P and q(R, b) for b
in Q.  A basis is generated from three polynomials f, g, h with
f*B = 0 and g*B + h*A = 0: the families X(a*f, 0) / Z(a*h^T, a*g^T)
form the unprimed block and X(a*g, a*h) / Z(0, a*f^T) the primed one.
Anticommutation inside a block depends only on whether a^T*b appears in
the product f*h, which drives the logical-qubit label selection.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .code import (
    BBCode,
    BivariatePoly,
    Monomial,
    group_pair_ratios,
    monomial_from_index,
    translation_table,
)
from .decode import (
    BPConfig,
    OSDConfig,
    _random_kernel_logical,
    descend_modulo_rows,
    minimum_weight_in_coset,
    reduce_weight_modulo_rows,
)
from .gf2 import BinMatrix, BinVector


def pauli_anticommute(
    p: BivariatePoly, q: BivariatePoly, pb: BivariatePoly, qb: BivariatePoly
) -> bool:
    """True iff X(p, q) and Z(pb, qb) anticommute.

    The overlap parity is the coefficient of the identity monomial in
    p*pb^T + q*qb^T.
    """
    return ((p * pb.T) + (q * qb.T)).contains_one()


@dataclass(frozen=True)
class LogicalPauli:
    """An X- or Z-type Pauli given by its two block polynomials."""

    pauli: str  # "X" or "Z"
    l_poly: BivariatePoly
    r_poly: BivariatePoly

    @property
    def weight(self) -> int:
        return self.l_poly.weight + self.r_poly.weight

    def support_vector(self, code: BBCode) -> BinVector:
        lm = code.lm
        sup = [t.index for t in self.l_poly.terms]
        sup += [lm + t.index for t in self.r_poly.terms]
        return BinVector.from_support(code.n, sup)

    def anticommutes_with(self, other: "LogicalPauli") -> bool:
        if self.pauli == other.pauli:
            return False
        return pauli_anticommute(self.l_poly, self.r_poly, other.l_poly, other.r_poly)


class BasisSearchError(RuntimeError):
    pass


@dataclass
class LogicalBasis:
    """A full symplectic basis of 2k logical operators.

    Ordering convention (used for logical syndromes everywhere): the k
    X-type operators are the unprimed X(n_i f, 0) followed by the
    primed X(n_i g, n_i h); Z-type mirrors with the m labels.  Operator
    i of one type anticommutes exactly with operator i of the other.
    """

    f: BivariatePoly
    g: BivariatePoly
    h: BivariatePoly
    n_labels: tuple[Monomial, ...]
    m_labels: tuple[Monomial, ...]

    def x_bar(self, alpha: Monomial) -> LogicalPauli:
        return LogicalPauli("X", self.f.shift(alpha), BivariatePoly.zero(self.f.l, self.f.m))

    def z_bar(self, alpha: Monomial) -> LogicalPauli:
        return LogicalPauli("Z", self.h.T.shift(alpha), self.g.T.shift(alpha))

    def x_bar_primed(self, alpha: Monomial) -> LogicalPauli:
        return LogicalPauli("X", self.g.shift(alpha), self.h.shift(alpha))

    def z_bar_primed(self, alpha: Monomial) -> LogicalPauli:
        return LogicalPauli("Z", BivariatePoly.zero(self.f.l, self.f.m), self.f.T.shift(alpha))

    def x_ops(self) -> list[LogicalPauli]:
        return [self.x_bar(a) for a in self.n_labels] + [
            self.x_bar_primed(a) for a in self.n_labels
        ]

    def z_ops(self) -> list[LogicalPauli]:
        return [self.z_bar(a) for a in self.m_labels] + [
            self.z_bar_primed(a) for a in self.m_labels
        ]

    def x_support_matrix(self, code: BBCode) -> BinMatrix:
        return BinMatrix.from_rows([op.support_vector(code) for op in self.x_ops()])

    def z_support_matrix(self, code: BBCode) -> BinMatrix:
        return BinMatrix.from_rows([op.support_vector(code) for op in self.z_ops()])

    def max_weight(self) -> int:
        return max(self.f.weight, self.g.weight + self.h.weight)

    def validate(self, code: BBCode) -> None:
        """Assert commutation, pairing and span; raises on any failure."""
        xs, zs = self.x_ops(), self.z_ops()
        if len(xs) != code.k or len(zs) != code.k:
            raise BasisSearchError("operator count != k")
        for op in xs:
            v = op.support_vector(code)
            if not code.hz.mul_vec(v).is_zero():
                raise BasisSearchError("X operator fails to commute with Z checks")
        for op in zs:
            v = op.support_vector(code)
            if not code.hx.mul_vec(v).is_zero():
                raise BasisSearchError("Z operator fails to commute with X checks")
        for i, xop in enumerate(xs):
            for j, zop in enumerate(zs):
                if xop.anticommutes_with(zop) != (i == j):
                    raise BasisSearchError(f"pairing defect at ({i}, {j})")
        for mat, h in ((self.x_support_matrix(code), code.hx),
                       (self.z_support_matrix(code), code.hz)):
            if h.stack(mat).rank() != h.rank() + code.k:
                raise BasisSearchError("operators do not span k qubits modulo stabilizer")

    def to_json(self) -> dict:
        def poly(p: BivariatePoly):
            return [[t.a, t.b] for t in p.terms]

        return {
            "f": poly(self.f),
            "g": poly(self.g),
            "h": poly(self.h),
            "n_labels": [[t.a, t.b] for t in self.n_labels],
            "m_labels": [[t.a, t.b] for t in self.m_labels],
        }


# ---------------------------------------------------------------------------
# Basis search
# ---------------------------------------------------------------------------


def _orbit_canonical(v: BinVector, code: BBCode) -> bytes:
    """Canonical representative key of v under the lm translations."""
    lm = code.lm
    table = translation_table(code.l, code.m)
    bits = v.to_bits()
    left = np.flatnonzero(bits[:lm])
    right = np.flatnonzero(bits[lm:])
    moved = np.hstack(
        [np.sort(table[:, left], axis=1), lm + np.sort(table[:, right], axis=1)]
    )
    if moved.shape[1] == 0:
        return b""
    order = np.lexsort(moved[:, ::-1].T)
    return moved[order[0]].tobytes()


def _f_candidates(code: BBCode, limit: int, rng: np.random.Generator) -> list[BivariatePoly]:
    """Low-weight solutions of f*B = 0, one per translation orbit."""
    bt = code.b_poly.to_matrix().transpose()
    basis = bt.nullspace_basis()
    dim = len(basis)
    pool: dict[bytes, BinVector] = {}

    def consider(v: BinVector):
        if not v.is_zero():
            pool.setdefault(_orbit_canonical(v, code), v)

    if dim <= 16:
        for mask in range(1, 1 << dim):
            v = BinVector.zeros(code.lm)
            for i in range(dim):
                if (mask >> i) & 1:
                    v = v ^ basis[i]
            consider(v)
    else:
        for i in range(dim):
            consider(basis[i])
            for j in range(i + 1, dim):
                consider(basis[i] ^ basis[j])
        for _ in range(20000):
            coeff = rng.integers(0, 2, dim, dtype=np.uint8)
            if not coeff.any():
                continue
            v = BinVector.zeros(code.lm)
            for i in np.flatnonzero(coeff):
                v = v ^ basis[int(i)]
            consider(v)
    ranked = sorted(pool.values(), key=lambda v: (v.weight, tuple(v.support)))
    return [BivariatePoly.from_vector(v, code.l, code.m) for v in ranked[:limit]]


def _gh_candidates(
    code: BBCode, trials: int, rng: np.random.Generator, limit: int = 60
) -> list[tuple[BivariatePoly, BivariatePoly]]:
    """Low-weight X-type logicals (g, h), one per translation orbit.

    Small codes get an exhaustive sweep of the lightest logicals via
    the meet-in-the-middle oracle; BP-OSD sampling covers the rest and
    keeps both the raw and locally-descended solution of every trial,
    which diversifies the pool.
    """
    from .decode import exact_distance_small, BudgetExceeded

    pool: dict[bytes, BinVector] = {}

    def consider(v: BinVector):
        pool.setdefault(_orbit_canonical(v, code), v)

    d_hint = code.distance_exact or code.distance_upper
    if d_hint is not None:
        try:
            _, witnesses = exact_distance_small(
                code, min(d_hint + 2, 8), budget=1e9, pauli="X", collect_witnesses=True
            )
            for v in witnesses:
                consider(v)
        except BudgetExceeded:
            pass

    hx_kernel_basis = BinMatrix.from_rows(code.hx.nullspace_basis())
    for _ in range(trials):
        eta = _random_kernel_logical(rng, hx_kernel_basis, code.hz)
        eta = reduce_weight_modulo_rows(eta, code.hz)
        xi = minimum_weight_in_coset(code.hz, eta)
        consider(xi)
        consider(descend_modulo_rows(xi, code.hx))
    out = []
    for v in sorted(pool.values(), key=lambda v: (v.weight, tuple(v.support)))[:limit]:
        bits = v.to_bits()
        g = BivariatePoly.from_vector(BinVector.from_bits(bits[: code.lm]), code.l, code.m)
        h = BivariatePoly.from_vector(BinVector.from_bits(bits[code.lm :]), code.l, code.m)
        out.append((g, h))
    return out


def _family_span_ok(code: BBCode, f: BivariatePoly, g: BivariatePoly, h: BivariatePoly) -> bool:
    """Do the translated families span k logical qubits mod stabilizer?"""
    rows = []
    for alpha in code.monomials():
        rows.append(LogicalPauli("X", f.shift(alpha), BivariatePoly.zero(code.l, code.m))
                    .support_vector(code))
        rows.append(LogicalPauli("X", g.shift(alpha), h.shift(alpha)).support_vector(code))
    fam = BinMatrix.from_rows(rows)
    return code.hx.stack(fam).rank() == code.hx.rank() + code.k


def _pairing_matrix(code: BBCode, f: BivariatePoly, h: BivariatePoly) -> np.ndarray:
    """K[i, j] = 1 iff X_bar(mono_i) anticommutes with Z_bar(mono_j)."""
    lm = code.lm
    coeffs = (f * h).to_vector().to_bits()
    table = translation_table(code.l, code.m)
    ia, ib = np.divmod(np.arange(lm), code.m)
    inv = ((code.l - ia) % code.l) * code.m + (code.m - ib) % code.m
    return coeffs[table[inv]]


def select_qubit_labels(
    code: BBCode,
    f: BivariatePoly,
    h: BivariatePoly,
    max_nodes: int = 500_000,
) -> tuple[tuple[Monomial, ...], tuple[Monomial, ...]] | None:
    """Find labels {n_i}, {m_i} whose pairing matrix is the identity.

    Depth-first search over monomial pairs with conflict masks; returns
    None when the search space is exhausted (callers fall back to a
    different basis triple).
    """
    lm = code.lm
    half = code.k // 2
    K = _pairing_matrix(code, f, h)
    if np.linalg.matrix_rank(K.astype(float)) < half:  # cheap refusal
        return None

    nodes = 0
    chosen_n: list[int] = []
    chosen_m: list[int] = []

    def feasible(row_mask, col_mask) -> bool:
        return row_mask.sum() >= half - len(chosen_n)

    def dfs(row_mask: np.ndarray, col_mask: np.ndarray) -> bool:
        nonlocal nodes
        if len(chosen_n) == half:
            return True
        nodes += 1
        if nodes > max_nodes:
            return False
        start = chosen_n[-1] + 1 if chosen_n else 0
        for ni in range(start, lm):
            if not row_mask[ni]:
                continue
            cols = np.flatnonzero(K[ni] & col_mask)
            for mi in cols:
                new_row = row_mask & (K[:, mi] == 0)
                new_col = col_mask & (K[ni] == 0)
                new_row[ni] = False
                new_col[mi] = False
                chosen_n.append(ni)
                chosen_m.append(int(mi))
                if feasible(new_row, new_col) and dfs(new_row, new_col):
                    return True
                chosen_n.pop()
                chosen_m.pop()
        return False

    ok = dfs(np.ones(lm, dtype=bool), np.ones(lm, dtype=bool))
    if not ok:
        return None
    n_labels = tuple(monomial_from_index(i, code.l, code.m) for i in chosen_n)
    m_labels = tuple(monomial_from_index(i, code.l, code.m) for i in chosen_m)
    return n_labels, m_labels


def find_basis_polynomials(
    code: BBCode,
    max_candidates: int = 5,
    f_limit: int = 30,
    gh_trials: int = 40,
    seed: int = 0,
) -> list[LogicalBasis]:
    """Search (f, g, h) triples and assemble validated logical bases.

    Candidates are ranked by max(|f|, |g|+|h|) so minimum-weight bases
    come first.  Triples that fail the span condition or admit no label
    selection are dropped.

    Raises:
        BasisSearchError: k < 2 or nothing found (never observed for
        the stock catalog).
    """
    if code.k < 2:
        raise BasisSearchError("need k >= 2")
    rng = np.random.default_rng(seed)
    fs = _f_candidates(code, f_limit, rng)
    ghs = _gh_candidates(code, gh_trials, rng)
    if not fs or not ghs:
        raise BasisSearchError("no kernel solutions found")

    scored = sorted(
        ((max(f.weight, g.weight + h.weight), fi, gi, f, g, h)
         for fi, f in enumerate(fs) for gi, (g, h) in enumerate(ghs)),
        key=lambda t: (t[0], t[1], t[2]),
    )
    out: list[LogicalBasis] = []
    for _, _, _, f, g, h in scored:
        if len(out) >= max_candidates:
            break
        if not _family_span_ok(code, f, g, h):
            continue
        labels = select_qubit_labels(code, f, h)
        if labels is None:
            continue
        basis = LogicalBasis(f=f, g=g, h=h, n_labels=labels[0], m_labels=labels[1])
        try:
            basis.validate(code)
        except BasisSearchError:
            continue
        out.append(basis)
    if not out:
        raise BasisSearchError("no valid (f, g, h) triple found")
    return out


# ---------------------------------------------------------------------------
# ZX duality
# ---------------------------------------------------------------------------


def zx_duality_permutation(code: BBCode) -> np.ndarray:
    """The data permutation q(L, a) <-> q(R, a^T) as an index map."""
    lm = code.lm
    perm = np.zeros(code.n, dtype=np.int64)
    for i in range(lm):
        ti = monomial_from_index(i, code.l, code.m).T.index
        perm[i] = lm + ti
        perm[lm + i] = ti
    return perm


def zx_duality_check(code: BBCode, permutation: np.ndarray | None = None) -> bool:
    """Does the permutation swap every X check with a Z check?

    With the canonical q(L, a) <-> q(R, a^T) map, the X check at b must
    land on the support of the Z check at b^T (and vice versa).
    """
    perm = zx_duality_permutation(code) if permutation is None else np.asarray(permutation)
    hx, hz = code.hx.to_dense(), code.hz.to_dense()
    lm = code.lm
    moved_x = np.zeros_like(hx)
    moved_x[:, perm] = hx
    moved_z = np.zeros_like(hz)
    moved_z[:, perm] = hz
    z_rows = {hz[i].tobytes(): i for i in range(lm)}
    x_rows = {hx[i].tobytes(): i for i in range(lm)}
    for beta in range(lm):
        if moved_x[beta].tobytes() not in z_rows:
            return False
        if moved_z[beta].tobytes() not in x_rows:
            return False
    return True


# ---------------------------------------------------------------------------
# Group decomposition and duality swap planning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupFactor:
    name: str
    prime: int
    power: int
    order: int
    generator: Monomial
    variable: str  # "x" or "y"


@dataclass
class GroupDecomposition:
    """Primary decomposition of Z_l x Z_m with named cyclic generators."""

    l: int
    m: int
    factors: tuple[GroupFactor, ...]

    def order_signature(self) -> str:
        return "".join(f"{f.name}{f.order}" for f in self.factors)

    def express(self, variable: str) -> list[str]:
        return [f.name for f in self.factors if f.variable == variable]


def _prime_power_factors(value: int) -> list[tuple[int, int]]:
    out = []
    rem = value
    p = 2
    while p * p <= rem:
        if rem % p == 0:
            a = 0
            while rem % p == 0:
                rem //= p
                a += 1
            out.append((p, a))
        p += 1
    if rem > 1:
        out.append((rem, 1))
    return out


def decompose_group(l: int, m: int) -> GroupDecomposition:
    """Split Z_l x Z_m into cyclic factors of prime-power order.

    Generators are chosen so that the factor generators of each
    variable multiply back to it: x equals the product of its factor
    generators, same for y.
    """
    if l < 1 or m < 1:
        raise ValueError("group dimensions must be >= 1")
    names = iter("pqrstuvw")
    factors = []
    for value, variable in ((l, "x"), (m, "y")):
        for prime, power in _prime_power_factors(value):
            pk = prime**power
            rest = value // pk
            e = 1 if rest == 1 else rest * pow(rest, -1, pk) % value
            gen = Monomial(e, 0, l, m) if variable == "x" else Monomial(0, e, l, m)
            factors.append(
                GroupFactor(next(names), prime, power, pk, gen, variable)
            )
    return GroupDecomposition(l=l, m=m, factors=tuple(factors))


@dataclass
class RatioPlanEntry:
    """Swap plan for inverting one cyclic factor."""

    factor: GroupFactor
    pair_offset: int  # c: pairs are (i, -i-c)
    carrier: Monomial | None  # extra involution multiplied into each ratio
    ratios: list[Monomial]
    costs: list[int]
    expressions: list[list[Monomial]]

    @property
    def cost(self) -> int:
        extra = 0 if self.carrier is None else self.costs[-1]
        return sum(self.costs)


@dataclass
class DualitySwapPlan:
    code_name: str
    decomposition: GroupDecomposition
    entries: list[RatioPlanEntry]
    chain_length: int
    cnot_depth: int
    unreachable: list[str] = field(default_factory=list)


def _ratio_distances(code: BBCode) -> tuple[dict[Monomial, int], dict[Monomial, list[Monomial]]]:
    """BFS over products of available term ratios; returns dist and paths."""
    gens = group_pair_ratios(code)
    start = Monomial.one(code.l, code.m)
    dist = {start: 0}
    path: dict[Monomial, list[Monomial]] = {start: []}
    frontier = [start]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = g * s
                if h not in dist:
                    dist[h] = dist[g] + 1
                    path[h] = path[g] + [s]
                    nxt.append(h)
        frontier = nxt
    return dist, path


def _required_ratios(gen: Monomial, order: int, offset: int) -> list[Monomial]:
    """Ratios needed to swap i <-> -i-offset pairs of the factor <gen>."""
    seen: set[Monomial] = set()
    out: list[Monomial] = []
    for i in range(order):
        j = (-i - offset) % order
        if i >= j:
            continue
        ratio = gen ** (j - i)
        canon = min(ratio, ratio.T)
        if canon not in seen and not ratio.is_one():
            seen.add(canon)
            out.append(canon)
    return out


def plan_duality_swaps(code: BBCode) -> DualitySwapPlan:
    """Plan the qubit relabeling a -> a^T out of available term ratios.

    Each cyclic factor of odd order o needs its (o-1)/2 inversion-pair
    ratios; even orders scan the pairing offset, which can trade the
    g^2 chord for g itself.  When a required ratio is expensive to
    reach, multiplying all of a factor's ratios by a cheap involution
    (and undoing it with one extra swap layer) is also considered.
    The chain length is the total number of elementary swap layers;
    the full end-to-end exchange costs (2*chain - 1) nearest-neighbor
    swap gadgets of CNOT depth 12 each.
    """
    dist, path = _ratio_distances(code)
    dec = decompose_group(code.l, code.m)
    involutions = [
        mono
        for i in range(code.lm)
        if not (mono := monomial_from_index(i, code.l, code.m)).is_one()
        and (mono * mono).is_one()
    ]
    entries = []
    unreachable = []
    for factor in dec.factors:
        o = factor.order
        if o <= 2:
            continue
        best: RatioPlanEntry | None = None
        for offset in range(o):
            base = _required_ratios(factor.generator, o, offset)
            if not base:
                continue
            for carrier in [None] + involutions:
                ratios = [r * carrier if carrier else r for r in base]
                if carrier is not None:
                    ratios = ratios + [carrier]
                if any(r not in dist for r in ratios):
                    continue
                costs = [dist[r] for r in ratios]
                entry = RatioPlanEntry(
                    factor=factor,
                    pair_offset=offset,
                    carrier=carrier,
                    ratios=ratios,
                    costs=costs,
                    expressions=[path[r] for r in ratios],
                )
                if best is None or entry.cost < best.cost:
                    best = entry
        if best is None:
            unreachable.append(factor.name)
            continue
        entries.append(best)
    chain = sum(e.cost for e in entries)
    return DualitySwapPlan(
        code_name=f"[[{code.n},{code.k}]]",
        decomposition=dec,
        entries=entries,
        chain_length=chain,
        cnot_depth=(2 * chain - 1) * 12 if chain else 0,
        unreachable=unreachable,
    )


# ---------------------------------------------------------------------------
# Ancilla measurement systems
# ---------------------------------------------------------------------------


@dataclass
class PlaneComponentReport:
    sizes: list[int]
    kinds: list[str]  # per component: "pair", "path", "ring", "hairy-ring", "other"

    def all_pairs(self) -> bool:
        return all(k == "pair" or s == 1 for k, s in zip(self.kinds, self.sizes))


@dataclass
class AncillaSystem:
    """Layered Tanner-graph extension measuring one logical operator."""

    target: str  # "X" or "Z"
    operator: LogicalPauli
    qubit_vertices: list[int]  # V: data qubits of the base subgraph
    check_vertices: list[int]  # C: incident opposite-type checks
    edges: list[tuple[int, int, str]]
    layers: int  # r
    added_layers: int  # 2r - 1
    added_qubits: int
    inter_layer_pairs: int  # association edges between adjacent layers
    plane_a: PlaneComponentReport
    plane_b: PlaneComponentReport

    @property
    def layer_size(self) -> int:
        return len(self.qubit_vertices) + len(self.check_vertices)

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "layer_size": self.layer_size,
            "layers": self.layers,
            "added_qubits": self.added_qubits,
            "qubits": self.qubit_vertices,
            "checks": self.check_vertices,
            "edges": [[u, v, tag] for u, v, tag in self.edges],
        }


def _classify_components(vertices: set[int], edges: list[tuple[int, int]]) -> PlaneComponentReport:
    adj: dict[int, list[int]] = {v: [] for v in vertices}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen: set[int] = set()
    sizes, kinds = [], []
    for start in sorted(vertices):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
        ecount = sum(len(adj[u]) for u in comp) // 2
        degs = sorted(len(adj[u]) for u in comp)
        n = len(comp)
        if n == 1:
            kind = "isolated"
        elif n == 2 and ecount == 1:
            kind = "pair"
        elif ecount == n - 1:
            kind = "path" if max(degs) <= 2 else "tree"
        elif ecount == n:
            kind = "ring" if degs[0] == 2 else "hairy-ring"
        else:
            kind = "other"
        sizes.append(n)
        kinds.append(kind)
    return PlaneComponentReport(sizes=sizes, kinds=kinds)


def build_ancilla_system(
    code: BBCode, basis: LogicalBasis, target: str, layers: int
) -> AncillaSystem:
    """Construct the layered extension that measures X(f,0) or Z(h^T,g^T).

    The base subgraph collects the operator's data qubits plus every
    opposite-type check touching them.  On top of the in-code copy the
    extension adds ``layers`` dual copies interleaved with layers-1
    primal copies, adjacent copies joined by their associated vertex
    pairs, for (2*layers - 1) * layer_size added qubits in total.

    Raises:
        ValueError: layers < 1 or unknown target.
    """
    if layers < 1:
        raise ValueError("need at least one layer")
    lm = code.lm
    if target == "X":
        op = basis.x_bar(Monomial.one(code.l, code.m))
    elif target == "Z":
        op = basis.z_bar(Monomial.one(code.l, code.m))
    else:
        raise ValueError("target must be 'X' or 'Z'")

    qubits: list[int] = sorted(
        [t.index for t in op.l_poly.terms] + [lm + t.index for t in op.r_poly.terms]
    )
    qubit_set = set(qubits)
    graph = code.tanner_graph()
    want_checks = "Z" if target == "X" else "X"
    check_reg = 3 if want_checks == "Z" else 2
    edges = [
        (u, v, tag)
        for u, v, tag in graph.edges
        if v in qubit_set and u // lm == check_reg
    ]
    checks = sorted({u for u, _v, _t in edges})

    layer_size = len(qubits) + len(checks)
    added_layers = 2 * layers - 1
    tags_a = {"A2", "A3", "B3", "A2T", "A3T", "B3T"}
    plane_a = _classify_components(
        qubit_set | set(checks), [(u, v) for u, v, t in edges if t in tags_a]
    )
    plane_b = _classify_components(
        qubit_set | set(checks), [(u, v) for u, v, t in edges if t not in tags_a]
    )
    return AncillaSystem(
        target=target,
        operator=op,
        qubit_vertices=qubits,
        check_vertices=checks,
        edges=edges,
        layers=layers,
        added_layers=added_layers,
        added_qubits=added_layers * layer_size,
        inter_layer_pairs=added_layers * layer_size,
        plane_a=plane_a,
        plane_b=plane_b,
    )


def basis_report_json(code: BBCode, basis: LogicalBasis, r: int | None = None) -> str:
    r = r if r is not None else (code.distance_exact or code.distance_upper or 1)
    sys_x = build_ancilla_system(code, basis, "X", r)
    sys_z = build_ancilla_system(code, basis, "Z", r)
    plan = plan_duality_swaps(code)
    payload = {
        "basis": basis.to_json(),
        "max_operator_weight": basis.max_weight(),
        "ancilla": {
            "r": r,
            "layer_size_x": sys_x.layer_size,
            "layer_size_z": sys_z.layer_size,
            "added_qubits_total": sys_x.added_qubits + sys_z.added_qubits,
        },
        "duality": {
            "orders": plan.decomposition.order_signature(),
            "chain_length": plan.chain_length,
            "cnot_depth": plan.cnot_depth,
        },
    }
    return json.dumps(payload, indent=2)
