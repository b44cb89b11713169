"""Bivariate bicycle code construction and structural checks.

A code is defined over the abelian group Z_l x Z_m by two three-term
polynomials A and B in the commuting shift monomials x and y.  Check
matrices are HX = [A | B] and HZ = [B^T | A^T]; data qubits split into
a left and a right block of l*m qubits each.

Group (and matrix-index) convention: the monomial x^a y^b corresponds
to index a*m + b, x shifts a, y shifts b.  As a matrix, a polynomial P
has a 1 at (row i, col j) exactly when monomial_j = monomial_i * t for
some term t of P.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gf2 import BinMatrix, BinVector


@dataclass(frozen=True, order=True)
class Monomial:
    """x^a y^b over Z_l x Z_m, exponents kept reduced."""

    a: int
    b: int
    l: int
    m: int

    def __post_init__(self):
        if self.l <= 0 or self.m <= 0:
            raise ValueError("group dimensions must be positive")
        object.__setattr__(self, "a", self.a % self.l)
        object.__setattr__(self, "b", self.b % self.m)

    @classmethod
    def one(cls, l: int, m: int) -> "Monomial":
        return cls(0, 0, l, m)

    def __mul__(self, other: "Monomial") -> "Monomial":
        if (self.l, self.m) != (other.l, other.m):
            raise ValueError("mixed groups")
        return Monomial(self.a + other.a, self.b + other.b, self.l, self.m)

    def __pow__(self, e: int) -> "Monomial":
        return Monomial(self.a * e, self.b * e, self.l, self.m)

    @property
    def T(self) -> "Monomial":
        """Inverse element (transpose of the permutation matrix)."""
        return Monomial(-self.a, -self.b, self.l, self.m)

    @property
    def index(self) -> int:
        return self.a * self.m + self.b

    def order(self) -> int:
        return _lcm(self.l // math.gcd(self.a, self.l), self.m // math.gcd(self.b, self.m))

    def is_one(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_pure_power(self) -> bool:
        return self.a == 0 or self.b == 0

    def __str__(self) -> str:
        if self.is_one():
            return "1"
        out = ""
        if self.a:
            out += f"x{self.a}" if self.a != 1 else "x"
        if self.b:
            out += f"y{self.b}" if self.b != 1 else "y"
        return out


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


_TERM_RE = re.compile(r"^(?:1|(?:x(\d*))?(?:y(\d*))?)$")


@dataclass(frozen=True, eq=False)
class BivariatePoly:
    """A sum of distinct monomials over Z_l x Z_m, written order kept.

    Term order matters: the published circuit schedules and the planar
    decomposition refer to terms by their position (A1, A2, A3 reading
    left to right), so we never silently re-sort.  Equality, however,
    is algebraic (order-insensitive).
    """

    terms: tuple[Monomial, ...]
    l: int
    m: int

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BivariatePoly)
            and (self.l, self.m) == (other.l, other.m)
            and set(self.terms) == set(other.terms)
        )

    def __hash__(self):
        return hash((self.l, self.m, frozenset(self.terms)))

    def __post_init__(self):
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("duplicate terms in polynomial")
        for t in self.terms:
            if (t.l, t.m) != (self.l, self.m):
                raise ValueError("term group mismatch")

    @classmethod
    def parse(cls, text: str, l: int, m: int) -> "BivariatePoly":
        """Parse e.g. 'x3+y1+y2' (also accepts 'y', 'x2y3', '1')."""
        terms = []
        for raw in text.replace(" ", "").split("+"):
            mobj = _TERM_RE.match(raw)
            if not mobj or raw == "":
                raise ValueError(f"bad monomial token {raw!r}")
            if raw == "1":
                terms.append(Monomial.one(l, m))
                continue
            ax, by = mobj.groups()
            a = 0 if ax is None else int(ax) if ax != "" else 1
            b = 0 if by is None else int(by) if by != "" else 1
            terms.append(Monomial(a, b, l, m))
        return cls(tuple(terms), l, m)

    @classmethod
    def from_terms(cls, terms, l: int, m: int) -> "BivariatePoly":
        return cls(tuple(Monomial(a, b, l, m) for a, b in terms), l, m)

    @classmethod
    def zero(cls, l: int, m: int) -> "BivariatePoly":
        return cls((), l, m)

    @classmethod
    def one(cls, l: int, m: int) -> "BivariatePoly":
        return cls((Monomial.one(l, m),), l, m)

    def term(self, i: int) -> Monomial:
        """1-based term access matching the A1/A2/A3 naming."""
        return self.terms[i - 1]

    @property
    def weight(self) -> int:
        return len(self.terms)

    @property
    def T(self) -> "BivariatePoly":
        return BivariatePoly(tuple(t.T for t in self.terms), self.l, self.m)

    def shift(self, s: Monomial) -> "BivariatePoly":
        return BivariatePoly(tuple(s * t for t in self.terms), self.l, self.m)

    def __add__(self, other: "BivariatePoly") -> "BivariatePoly":
        """Mod-2 sum: symmetric difference of term sets (order by index)."""
        sym = set(self.terms) ^ set(other.terms)
        return BivariatePoly(tuple(sorted(sym, key=lambda t: t.index)), self.l, self.m)

    def __mul__(self, other) -> "BivariatePoly":
        if isinstance(other, Monomial):
            return self.shift(other)
        acc: set[Monomial] = set()
        for s in self.terms:
            for t in other.terms:
                acc ^= {s * t}
        return BivariatePoly(tuple(sorted(acc, key=lambda t: t.index)), self.l, self.m)

    def contains_one(self) -> bool:
        return any(t.is_one() for t in self.terms)

    def to_matrix(self) -> BinMatrix:
        """The l*m x l*m permutation-sum matrix of this polynomial."""
        n = self.l * self.m
        dense = np.zeros((n, n), dtype=np.uint8)
        idx = np.arange(n)
        for t in self.terms:
            dense[idx, _shift_index(idx, t)] ^= 1
        return BinMatrix.from_dense(dense)

    def to_vector(self) -> BinVector:
        """Coefficient vector over the group element indexing."""
        return BinVector.from_support(self.l * self.m, [t.index for t in self.terms])

    @classmethod
    def from_vector(cls, v: BinVector, l: int, m: int) -> "BivariatePoly":
        return cls(tuple(Monomial(int(i) // m, int(i) % m, l, m) for i in v.support), l, m)

    def __str__(self) -> str:
        return "+".join(str(t) for t in self.terms) if self.terms else "0"


def _shift_index(idx: np.ndarray, t: Monomial) -> np.ndarray:
    """Index of monomial_i * t for each index i (vectorized)."""
    a, b = np.divmod(idx, t.m)
    return ((a + t.a) % t.l) * t.m + (b + t.b) % t.m


def monomial_from_index(i: int, l: int, m: int) -> Monomial:
    return Monomial(i // m, i % m, l, m)


@lru_cache(maxsize=32)
def translation_table(l: int, m: int) -> np.ndarray:
    """T[t, i] = index of monomial_i * monomial_t, for all pairs."""
    lm = l * m
    ta, tb = np.divmod(np.arange(lm), m)
    ia, ib = np.divmod(np.arange(lm), m)
    return (((ia[None, :] + ta[:, None]) % l) * m + (ib[None, :] + tb[:, None]) % m).astype(
        np.int64
    )


# Tanner graph vertex numbering: L block, R block, X checks, Z checks.
REGISTERS = ("L", "R", "X", "Z")


@dataclass
class TannerGraph:
    """Bipartite check/data graph with edges tagged by generating term.

    Vertices are (register, index) pairs flattened as
    L: [0, lm), R: [lm, 2lm), X: [2lm, 3lm), Z: [3lm, 4lm).
    """

    l: int
    m: int
    edges: list[tuple[int, int, str]]  # (check vertex, data vertex, tag)

    @property
    def lm(self) -> int:
        return self.l * self.m

    @property
    def n_vertices(self) -> int:
        return 4 * self.lm

    def vertex(self, register: str, index: int) -> int:
        return REGISTERS.index(register) * self.lm + index

    def vertex_label(self, v: int) -> tuple[str, int]:
        return REGISTERS[v // self.lm], v % self.lm

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for u, v, _tag in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=int)
        for u, v, _tag in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def connected_component_count(self) -> int:
        adj = self.adjacency()
        seen = np.zeros(self.n_vertices, dtype=bool)
        count = 0
        for start in range(self.n_vertices):
            if seen[start]:
                continue
            count += 1
            stack = [start]
            seen[start] = True
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
        return count


class CodeConstructionError(ValueError):
    pass


@dataclass
class BBCode:
    """A bivariate bicycle code QC(A, B) with cached analyses.

    Immutable after construction; every derived analysis is read-only.
    Use :func:`build_code` rather than the bare constructor so that all
    structural invariants get checked.
    """

    l: int
    m: int
    a_poly: BivariatePoly
    b_poly: BivariatePoly
    hx: BinMatrix = field(repr=False)
    hz: BinMatrix = field(repr=False)
    k: int
    distance_upper: int | None = None
    distance_exact: int | None = None

    @property
    def lm(self) -> int:
        return self.l * self.m

    @property
    def n(self) -> int:
        return 2 * self.l * self.m

    @property
    def name(self) -> str:
        d = self.distance_exact if self.distance_exact is not None else self.distance_upper
        dtxt = "?" if d is None else str(d)
        return f"[[{self.n},{self.k},{dtxt}]]"

    def monomials(self) -> list[Monomial]:
        return [monomial_from_index(i, self.l, self.m) for i in range(self.lm)]

    # -- Tanner graph ---------------------------------------------------

    def tanner_graph(self) -> TannerGraph:
        g = TannerGraph(self.l, self.m, [])
        lm = self.lm
        idx = np.arange(lm)
        for p in (1, 2, 3):
            ai, bi = self.a_poly.term(p), self.b_poly.term(p)
            a_of = _shift_index(idx, ai)
            b_of = _shift_index(idx, bi)
            for i in range(lm):
                # X check i touches L qubit A_p(i) and R qubit B_p(i)
                g.edges.append((2 * lm + i, int(a_of[i]), f"A{p}"))
                g.edges.append((2 * lm + i, lm + int(b_of[i]), f"B{p}"))
                # Z check B_p(i) touches L qubit i; Z check A_p(i) touches R qubit i
                g.edges.append((3 * lm + int(b_of[i]), i, f"B{p}T"))
                g.edges.append((3 * lm + int(a_of[i]), lm + i, f"A{p}T"))
        return g

    # -- vector classification -------------------------------------------

    def classify_vector(self, v: BinVector, pauli: str) -> tuple[bool, bool]:
        """Classify a Pauli support vector as (is_stabilizer, is_logical).

        For an X-type operator the kernel is ker HZ and the stabilizer
        row space is rs(HX); mirrored for Z-type.  Vectors commuting
        with nothing in particular are (False, False).
        """
        if v.n != self.n:
            raise ValueError(f"vector length {v.n}, expected {self.n}")
        if pauli not in ("X", "Z"):
            raise ValueError("pauli must be 'X' or 'Z'")
        kernel_of = self.hz if pauli == "X" else self.hx
        rowspace_of = self.hx if pauli == "X" else self.hz
        if rowspace_of.in_rowspace(v):
            return True, False
        if kernel_of.mul_vec(v).is_zero():
            return False, True
        return False, False


def _poly_matrices(code_or_pair) -> tuple[BinMatrix, BinMatrix]:
    a, b = code_or_pair
    return a.to_matrix(), b.to_matrix()


def build_code(
    l: int,
    m: int,
    a_poly: BivariatePoly | str,
    b_poly: BivariatePoly | str,
    require_pure_powers: bool = False,
) -> BBCode:
    """Construct a bivariate bicycle code and verify its invariants.

    Args:
        l, m: cyclic dimensions (both must be positive).
        a_poly, b_poly: three-term polynomials (or their string form).
        require_pure_powers: reject mixed monomials x^a y^b with a, b
            both nonzero (the stricter published form of the family).

    Raises:
        CodeConstructionError: bad dimensions, duplicate or non-3 terms,
            or an internal invariant violation (which would be a bug).
    """
    if l <= 0 or m <= 0:
        raise CodeConstructionError("l and m must be positive")
    try:
        if isinstance(a_poly, str):
            a_poly = BivariatePoly.parse(a_poly, l, m)
        if isinstance(b_poly, str):
            b_poly = BivariatePoly.parse(b_poly, l, m)
    except ValueError as exc:
        raise CodeConstructionError(str(exc)) from exc
    for name, poly in (("A", a_poly), ("B", b_poly)):
        if (poly.l, poly.m) != (l, m):
            raise CodeConstructionError(f"{name} is defined over the wrong group")
        if poly.weight != 3:
            raise CodeConstructionError(f"{name} must have exactly 3 distinct terms")
        if require_pure_powers and not all(t.is_pure_power() for t in poly.terms):
            raise CodeConstructionError(f"{name} has mixed x/y terms")

    lm = l * m
    amat, bmat = a_poly.to_matrix(), b_poly.to_matrix()
    hx = amat.hstack(bmat)
    hz = bmat.transpose().hstack(amat.transpose())

    # CSS condition and rank symmetry
    if hx.mul_mat(hz.transpose()).nnz != 0:
        raise CodeConstructionError("HX HZ^T != 0; construction bug")
    rx, rz = hx.rank(), hz.rank()
    if rx != rz:
        raise CodeConstructionError("rank(HX) != rank(HZ); construction bug")

    k_rank = 2 * lm - 2 * rz
    k_kernel = 2 * (lm - amat.stack(bmat).rank())
    if k_rank != k_kernel:
        raise CodeConstructionError(
            f"logical-count formulas disagree: {k_rank} vs {k_kernel}"
        )
    return BBCode(l=l, m=m, a_poly=a_poly, b_poly=b_poly, hx=hx, hz=hz, k=k_rank)


def compute_k(code: BBCode) -> int:
    """Logical qubit count, computed two independent ways.

    Both n - 2*rank(HZ) and 2*dim(ker A ∩ ker B) are evaluated; a
    mismatch is a fatal invariant violation.
    """
    amat, bmat = code.a_poly.to_matrix(), code.b_poly.to_matrix()
    k_rank = code.n - 2 * code.hz.rank()
    k_kernel = 2 * (code.lm - amat.stack(bmat).rank())
    if k_rank != k_kernel:
        raise CodeConstructionError(f"k formulas disagree: {k_rank} vs {k_kernel}")
    return k_rank


def logical_operator_syndromes(code: BBCode, v: BinVector, pauli: str) -> tuple[bool, bool]:
    """Spec alias for :meth:`BBCode.classify_vector`."""
    return code.classify_vector(v, pauli)


# -- Lemma machinery ------------------------------------------------------


def group_pair_ratios(code: BBCode) -> list[Monomial]:
    """All ratios A_i A_j^T and B_i B_j^T for i != j (with repeats removed)."""
    out: list[Monomial] = []
    seen = set()
    for poly in (code.a_poly, code.b_poly):
        for i in range(1, 4):
            for j in range(1, 4):
                if i == j:
                    continue
                r = poly.term(i) * poly.term(j).T
                if r not in seen:
                    seen.add(r)
                    out.append(r)
    return out


def subgroup_closure(generators: list[Monomial], l: int, m: int) -> set[Monomial]:
    """The subgroup of Z_l x Z_m generated by the given elements."""
    seen = {Monomial.one(l, m)}
    frontier = [Monomial.one(l, m)]
    while frontier:
        g = frontier.pop()
        for s in generators:
            h = g * s
            if h not in seen:
                seen.add(h)
                frontier.append(h)
    return seen


def connected_components(code: BBCode) -> int:
    """Number of Tanner graph components, via the subgroup-order formula.

    The group-theoretic count lm / |<S>| (S the set of term ratios) is
    cross-checked against a direct graph traversal; disagreement is a
    fatal invariant violation.
    """
    sub = subgroup_closure(group_pair_ratios(code), code.l, code.m)
    by_formula = code.lm // len(sub)
    by_bfs = code.tanner_graph().connected_component_count()
    if by_formula != by_bfs:
        raise CodeConstructionError(
            f"component count mismatch: formula {by_formula}, traversal {by_bfs}"
        )
    return by_formula


@dataclass
class WheelReport:
    """Structure report for one planar half of the Tanner graph."""

    subgraph: str  # "A" or "B"
    half_length: int  # p: number of checks per cycle
    component_count: int
    edge_count: int
    all_degree_3: bool
    ok: bool
    problems: list[str] = field(default_factory=list)


@dataclass
class ThicknessDecomposition:
    edges_a: list[tuple[int, int, str]]
    edges_b: list[tuple[int, int, str]]
    report_a: WheelReport
    report_b: WheelReport

    @property
    def ok(self) -> bool:
        return self.report_a.ok and self.report_b.ok


def _verify_wheels(
    code: BBCode,
    edges: list[tuple[int, int, str]],
    outer_terms: tuple[Monomial, Monomial],
    radial_tag: str,
    name: str,
) -> WheelReport:
    """Check every component of a planar half is a wheel.

    A wheel is two equal-length alternating check/data cycles (one on
    the X-check side, one on the Z-check side) joined by radial edges,
    one per cycle vertex.  The cycle half-length equals the order of
    the ratio of the two doubled terms.
    """
    lm = code.lm
    problems: list[str] = []
    t_hi, t_lo = outer_terms  # e.g. (A3, A2): cycle shift is t_hi * t_lo^T
    p = (t_hi * t_lo.T).order()

    deg = np.zeros(4 * lm, dtype=int)
    adj: dict[int, list[tuple[int, str]]] = {}
    for u, v, tag in edges:
        deg[u] += 1
        deg[v] += 1
        adj.setdefault(u, []).append((v, tag))
        adj.setdefault(v, []).append((u, tag))
    all_deg3 = bool((deg == 3).all())
    if not all_deg3:
        problems.append("vertex of degree != 3")

    cyc_tags = {f"{name}{i}" for i in (1, 2, 3)} | {f"{name}{i}T" for i in (1, 2, 3)}
    radial_tags = {radial_tag, radial_tag + "T"}

    seen = np.zeros(4 * lm, dtype=bool)
    components = 0
    for start in range(4 * lm):
        if seen[start] or start not in adj:
            continue
        components += 1
        comp = []
        stack = [start]
        seen[start] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for w, _tag in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        if len(comp) != 4 * p:
            problems.append(f"component size {len(comp)} != 4p = {4 * p}")
            continue
        # split into the two cycles by walking cycle-tagged edges only
        comp_set = set(comp)
        cycle_edges = {
            u: [w for w, tag in adj[u] if tag in cyc_tags] for u in comp_set
        }
        if any(len(ws) != 2 for ws in cycle_edges.values()):
            problems.append("cycle-edge degree != 2 inside a component")
            continue
        # walk one cycle from an arbitrary vertex
        cycles = []
        visited = set()
        for u in comp:
            if u in visited:
                continue
            cyc = [u]
            visited.add(u)
            prev, cur = None, u
            while True:
                nxt = [w for w in cycle_edges[cur] if w != prev]
                nxt = nxt[0] if nxt else prev
                if nxt == cyc[0]:
                    break
                cyc.append(nxt)
                visited.add(nxt)
                prev, cur = cur, nxt
            cycles.append(cyc)
        if len(cycles) != 2 or {len(cycles[0]), len(cycles[1])} != {2 * p}:
            problems.append(
                f"expected two cycles of length {2 * p}, got {[len(c) for c in cycles]}"
            )
            continue
        cyc0 = set(cycles[0])
        radials = [
            (u, w)
            for u in comp_set
            for w, tag in adj[u]
            if tag in radial_tags and u < w
        ]
        if len(radials) != 2 * p:
            problems.append(f"{len(radials)} radial edges, expected {2 * p}")
            continue
        if not all((u in cyc0) != (w in cyc0) for u, w in radials):
            problems.append("radial edge inside a single cycle")

    return WheelReport(
        subgraph=name,
        half_length=p,
        component_count=components,
        edge_count=len(edges),
        all_degree_3=all_deg3,
        ok=not problems,
        problems=problems,
    )


def thickness_decomposition(code: BBCode) -> ThicknessDecomposition:
    """Split the Tanner graph into its two planar degree-3 halves.

    Half 'A' carries the term edges A2, A3 and B3 (plus transposes);
    half 'B' carries A1, B1 and B2.  Every component of each half must
    be a wheel; a structural mismatch is reported, not swallowed.
    """
    g = code.tanner_graph()
    tags_a = {"A2", "A3", "B3", "A2T", "A3T", "B3T"}
    edges_a = [e for e in g.edges if e[2] in tags_a]
    edges_b = [e for e in g.edges if e[2] not in tags_a]
    report_a = _verify_wheels(
        code, edges_a, (code.a_poly.term(3), code.a_poly.term(2)), "B3", "A"
    )
    report_b = _verify_wheels(
        code, edges_b, (code.b_poly.term(2), code.b_poly.term(1)), "A1", "B"
    )
    return ThicknessDecomposition(edges_a, edges_b, report_a, report_b)


@dataclass
class ToricLayout:
    """A spanning torus grid inside the Tanner graph, when one exists."""

    i: int
    j: int
    g: int
    h: int
    mu: int
    lam: int

    def as_tuple(self):
        return (self.i, self.j, self.g, self.h, self.mu, self.lam)


def toric_layout(code: BBCode) -> ToricLayout | None:
    """Search for a toric layout certificate.

    Scans i, j, g, h in {1,2,3}^4 (lexicographically) for a pair of
    ratios A_i A_j^T, B_g B_h^T that generate the whole group with
    order product lm; returns the first hit or None.
    """
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            sa = code.a_poly.term(i) * code.a_poly.term(j).T
            mu = sa.order()
            for g in (1, 2, 3):
                for h in (1, 2, 3):
                    sb = code.b_poly.term(g) * code.b_poly.term(h).T
                    lam = sb.order()
                    if mu * lam != code.lm:
                        continue
                    if len(subgroup_closure([sa, sb], code.l, code.m)) == code.lm:
                        return ToricLayout(i, j, g, h, mu, lam)
    return None


def toric_layout_embedding(code: BBCode, layout: ToricLayout) -> dict[int, tuple[int, int]]:
    """Map all 2n Tanner vertices onto Z_{2mu} x Z_{2lam}.

    L qubit (A_i A_j^T)^a (B_g B_h^T)^b goes to (2a, 2b); the same
    element times A_j^T B_g, A_j^T, B_g gives the R qubit, X check and
    Z check at (2a+1, 2b+1), (2a+1, 2b), (2a, 2b+1) respectively.
    The chosen four term edges then follow the torus grid, which
    :func:`verify_toric_embedding` checks explicitly.
    """
    lm = code.lm
    sa = code.a_poly.term(layout.i) * code.a_poly.term(layout.j).T
    sb = code.b_poly.term(layout.g) * code.b_poly.term(layout.h).T
    coord: dict[Monomial, tuple[int, int]] = {}
    g = Monomial.one(code.l, code.m)
    for a in range(layout.mu):
        h = g
        for b in range(layout.lam):
            coord[h] = (a, b)
            h = h * sb
        g = g * sa
    if len(coord) != lm:
        raise CodeConstructionError("layout ratios do not enumerate the group")

    aj_t = code.a_poly.term(layout.j).T
    bg = code.b_poly.term(layout.g)
    emb: dict[int, tuple[int, int]] = {}
    for alpha, (a, b) in coord.items():
        emb[alpha.index] = (2 * a, 2 * b)  # L
        emb[lm + (alpha * aj_t * bg).index] = (2 * a + 1, 2 * b + 1)  # R
        emb[2 * lm + (alpha * aj_t).index] = (2 * a + 1, 2 * b)  # X
        emb[3 * lm + (alpha * bg).index] = (2 * a, 2 * b + 1)  # Z
    return emb


def verify_toric_embedding(code: BBCode, layout: ToricLayout) -> bool:
    """Check the layout is a bijection mapping its four term edges to grid edges."""
    emb = toric_layout_embedding(code, layout)
    if len(emb) != 4 * code.lm or len(set(emb.values())) != 4 * code.lm:
        return False
    two_mu, two_lam = 2 * layout.mu, 2 * layout.lam
    chosen = {f"A{layout.i}", f"A{layout.j}", f"B{layout.g}", f"B{layout.h}"}
    g = code.tanner_graph()
    for u, v, tag in g.edges:
        base = tag[:-1] if tag.endswith("T") else tag
        if base not in chosen:
            continue
        (ua, ub), (va, vb) = emb[u], emb[v]
        da = min((ua - va) % two_mu, (va - ua) % two_mu)
        db = min((ub - vb) % two_lam, (vb - ub) % two_lam)
        if sorted((da, db)) != [0, 1]:
            return False
    return True


# -- code spec files -------------------------------------------------------


def code_from_spec(spec: dict | str) -> BBCode:
    """Build a code from a JSON spec {"l":…, "m":…, "a_poly":…, "b_poly":…}."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    try:
        l, m = int(spec["l"]), int(spec["m"])
        a, b = spec["a_poly"], spec["b_poly"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CodeConstructionError(f"bad code spec: {exc}") from exc
    return build_code(l, m, a, b)


def code_to_spec(code: BBCode) -> dict:
    def fmt(p: BivariatePoly) -> str:
        outs = []
        for t in p.terms:
            if t.is_one():
                outs.append("1")
            else:
                s = ""
                if t.a:
                    s += f"x{t.a}"
                if t.b:
                    s += f"y{t.b}"
                outs.append(s)
        return "+".join(outs)

    return {"l": code.l, "m": code.m, "a_poly": fmt(code.a_poly), "b_poly": fmt(code.b_poly)}


# The stock catalog of published small codes: name -> (l, m, A, B, k, d, d_is_exact)
CODE_CATALOG: dict[str, tuple[int, int, str, str, int, int, bool]] = {
    "bb72": (6, 6, "x3+y+y2", "y3+x+x2", 12, 6, True),
    "bb90": (15, 3, "x9+y+y2", "1+x2+x7", 8, 10, True),
    "bb108": (9, 6, "x3+y+y2", "y3+x+x2", 8, 10, True),
    "bb144": (12, 6, "x3+y+y2", "y3+x+x2", 12, 12, True),
    "bb288": (12, 12, "x3+y2+y7", "y3+x+x2", 12, 18, True),
    "bb360": (30, 6, "x9+y+y2", "y3+x25+x26", 12, 24, False),
    "bb756": (21, 18, "x3+y10+y17", "y5+x3+x19", 16, 34, False),
}


def catalog_code(name: str) -> BBCode:
    l, m, a, b, k, d, exact = CODE_CATALOG[name]
    code = build_code(l, m, a, b)
    if code.k != k:
        raise CodeConstructionError(f"catalog {name}: k={code.k}, expected {k}")
    if exact:
        code.distance_exact = d
    code.distance_upper = d
    return code
