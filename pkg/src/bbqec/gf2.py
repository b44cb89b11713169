"""Bit-packed dense linear algebra over GF(2).

Vectors and matrices are stored as little-endian ``uint64`` words, 64
columns per word.  Elimination routines use word-wide XOR row updates,
which is plenty fast for the matrix sizes that occur here (n up to a
couple of thousand).  A sorted column-index-per-row sparse view is
derived on demand for message-passing decoders.
"""

from __future__ import annotations

import numpy as np

WORD = 64


def _nwords(nbits: int) -> int:
    return max(1, (nbits + WORD - 1) // WORD)


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a 1-D or 2-D 0/1 array into little-endian uint64 words."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8) & 1)
    r, n = bits.shape
    w = _nwords(n)
    padded = np.zeros((r, w * WORD), dtype=np.uint8)
    padded[:, :n] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(r, w)


def _unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    words = np.atleast_2d(words)
    as_bytes = np.ascontiguousarray(words).view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :n]


class BinVector:
    """A length-n vector over GF(2), packed 64 entries per word."""

    __slots__ = ("n", "words")

    def __init__(self, n: int, words: np.ndarray | None = None):
        self.n = int(n)
        if words is None:
            words = np.zeros(_nwords(self.n), dtype=np.uint64)
        self.words = words

    @classmethod
    def zeros(cls, n: int) -> "BinVector":
        return cls(n)

    @classmethod
    def from_bits(cls, bits) -> "BinVector":
        bits = np.asarray(bits, dtype=np.uint8)
        return cls(bits.shape[0], _pack_bits(bits)[0])

    @classmethod
    def from_support(cls, n: int, support) -> "BinVector":
        v = cls(n)
        idx = np.asarray(list(support), dtype=np.int64)
        if idx.size:
            if idx.min() < 0 or idx.max() >= n:
                raise ValueError("support index out of range")
            np.bitwise_xor.at(v.words, idx // WORD, np.uint64(1) << (idx % WORD).astype(np.uint64))
        return v

    def copy(self) -> "BinVector":
        return BinVector(self.n, self.words.copy())

    def to_bits(self) -> np.ndarray:
        return _unpack_bits(self.words, self.n)[0]

    @property
    def weight(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.to_bits())

    def get(self, i: int) -> int:
        return int((self.words[i // WORD] >> np.uint64(i % WORD)) & np.uint64(1))

    def set(self, i: int, value: int = 1) -> None:
        mask = np.uint64(1) << np.uint64(i % WORD)
        if value:
            self.words[i // WORD] |= mask
        else:
            self.words[i // WORD] &= ~mask

    def dot(self, other: "BinVector") -> int:
        return int(np.bitwise_count(self.words & other.words).sum()) & 1

    def is_zero(self) -> bool:
        return not self.words.any()

    def key(self) -> bytes:
        """Hashable canonical content, for set/dict membership."""
        return self.words.tobytes()

    def __xor__(self, other: "BinVector") -> "BinVector":
        if self.n != other.n:
            raise ValueError("length mismatch")
        return BinVector(self.n, self.words ^ other.words)

    def __eq__(self, other) -> bool:
        return isinstance(other, BinVector) and self.n == other.n and bool(
            np.array_equal(self.words, other.words)
        )

    def __hash__(self):
        return hash((self.n, self.key()))

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"BinVector(n={self.n}, weight={self.weight})"


class BinMatrix:
    """A rows x cols matrix over GF(2) with bit-packed rows.

    Immutable by convention once built: elimination-style routines work
    on private copies, so instances can be shared freely across threads.
    """

    __slots__ = ("rows", "cols", "words", "_row_supports")

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        self.rows = int(rows)
        self.cols = int(cols)
        if words is None:
            words = np.zeros((self.rows, _nwords(self.cols)), dtype=np.uint64)
        self.words = words
        self._row_supports = None

    # -- construction -------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BinMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BinMatrix":
        m = cls(n, n)
        for i in range(n):
            m.words[i, i // WORD] |= np.uint64(1) << np.uint64(i % WORD)
        return m

    @classmethod
    def from_dense(cls, arr) -> "BinMatrix":
        arr = np.atleast_2d(np.asarray(arr, dtype=np.uint8) & 1)
        r, c = arr.shape
        return cls(r, c, _pack_bits(arr))

    @classmethod
    def from_rows(cls, vectors: list[BinVector]) -> "BinMatrix":
        if not vectors:
            raise ValueError("need at least one row")
        n = vectors[0].n
        m = cls(len(vectors), n)
        for i, v in enumerate(vectors):
            if v.n != n:
                raise ValueError("row length mismatch")
            m.words[i] = v.words
        return m

    # -- views ---------------------------------------------------------

    def to_dense(self) -> np.ndarray:
        return _unpack_bits(self.words, self.cols)

    def row(self, i: int) -> BinVector:
        return BinVector(self.cols, self.words[i].copy())

    def col_bits(self, j: int) -> np.ndarray:
        return ((self.words[:, j // WORD] >> np.uint64(j % WORD)) & np.uint64(1)).astype(np.uint8)

    def row_supports(self) -> list[np.ndarray]:
        """Sparse view: sorted column indices of each row."""
        if self._row_supports is None:
            dense = self.to_dense()
            self._row_supports = [np.flatnonzero(dense[i]) for i in range(self.rows)]
        return self._row_supports

    def transpose(self) -> "BinMatrix":
        return BinMatrix.from_dense(self.to_dense().T)

    def copy(self) -> "BinMatrix":
        return BinMatrix(self.rows, self.cols, self.words.copy())

    @property
    def nnz(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    # -- arithmetic ----------------------------------------------------

    def mul_vec(self, v: BinVector) -> BinVector:
        """Matrix-vector product Mv over GF(2)."""
        if v.n != self.cols:
            raise ValueError("dimension mismatch")
        par = np.bitwise_count(self.words & v.words[None, :]).sum(axis=1) & 1
        return BinVector.from_bits(par.astype(np.uint8))

    def mul_mat(self, other: "BinMatrix") -> "BinMatrix":
        """Matrix product M @ other over GF(2)."""
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        out = BinMatrix(self.rows, other.cols)
        for i, sup in enumerate(self.row_supports()):
            if sup.size:
                out.words[i] = np.bitwise_xor.reduce(other.words[sup], axis=0)
        return out

    def stack(self, other: "BinMatrix") -> "BinMatrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch")
        return BinMatrix(
            self.rows + other.rows, self.cols, np.vstack([self.words, other.words])
        )

    def hstack(self, other: "BinMatrix") -> "BinMatrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        return BinMatrix.from_dense(np.hstack([self.to_dense(), other.to_dense()]))

    def append_row(self, v: BinVector) -> "BinMatrix":
        if v.n != self.cols:
            raise ValueError("length mismatch")
        return BinMatrix(self.rows + 1, self.cols, np.vstack([self.words, v.words[None, :]]))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BinMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    # -- elimination ---------------------------------------------------

    def rref(self, max_pivot_cols: int | None = None):
        """Reduced row echelon form.

        Pivots are chosen at the first nonzero column, lowest row index,
        so the result is deterministic.

        Returns:
            (R, pivot_cols): R is a new BinMatrix in RREF; pivot_cols is
            a list of pivot column indices (length = rank when the full
            column range is eligible).
        """
        W = self.words.copy()
        rows = self.rows
        limit = self.cols if max_pivot_cols is None else max_pivot_cols
        pivot_cols: list[int] = []
        pr = 0
        for c in range(limit):
            if pr >= rows:
                break
            w, b = c // WORD, np.uint64(c % WORD)
            colbits = (W[pr:, w] >> b) & np.uint64(1)
            hits = np.flatnonzero(colbits)
            if hits.size == 0:
                continue
            piv = pr + int(hits[0])
            if piv != pr:
                W[[pr, piv]] = W[[piv, pr]]
            col_all = (W[:, w] >> b) & np.uint64(1)
            col_all[pr] = 0
            flip = np.flatnonzero(col_all)
            if flip.size:
                W[flip] ^= W[pr]
            pivot_cols.append(c)
            pr += 1
        return BinMatrix(rows, self.cols, W), pivot_cols

    def rank(self) -> int:
        """GF(2) rank via Gaussian elimination."""
        return len(self.rref()[1])

    def nullspace_basis(self) -> list[BinVector]:
        """Basis of the right kernel {v : Mv = 0}."""
        R, pivots = self.rref()
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        Rd = R.to_dense()
        basis = []
        for f in free:
            v = np.zeros(self.cols, dtype=np.uint8)
            v[f] = 1
            # pivot row i has its pivot at pivots[i]; back-substitute.
            for i, pc in enumerate(pivots):
                if Rd[i, f]:
                    v[pc] = 1
            basis.append(BinVector.from_bits(v))
        return basis

    def solve(self, s: BinVector) -> BinVector | None:
        """Some x with Mx = s, or None if the system is inconsistent."""
        if s.n != self.rows:
            raise ValueError("rhs length mismatch")
        aug = self.hstack(BinMatrix.from_dense(s.to_bits().reshape(-1, 1)))
        # restrict pivots to the coefficient columns
        R, pivots = aug.rref(max_pivot_cols=self.cols)
        Rd = R.to_dense()
        rhs = Rd[:, self.cols]
        # inconsistent iff some zero row has rhs 1
        for i in range(len(pivots), self.rows):
            if rhs[i]:
                return None
        x = np.zeros(self.cols, dtype=np.uint8)
        for i, pc in enumerate(pivots):
            x[pc] = rhs[i]
        return BinVector.from_bits(x)

    def row_basis(self) -> "RowBasis":
        return RowBasis(self)

    def in_rowspace(self, v: BinVector) -> bool:
        """True iff v is a GF(2) combination of the rows of M."""
        return self.row_basis().contains(v)

    # -- text format ----------------------------------------------------

    def dumps(self) -> str:
        """Plain-text dump: 'rows cols' header then 0/1 rows."""
        lines = [f"{self.rows} {self.cols}"]
        dense = self.to_dense()
        lines.extend("".join("1" if b else "0" for b in dense[i]) for i in range(self.rows))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "BinMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        rows, cols = (int(t) for t in lines[0].split())
        if len(lines) - 1 != rows:
            raise ValueError("row count does not match header")
        arr = np.zeros((rows, cols), dtype=np.uint8)
        for i, ln in enumerate(lines[1:]):
            ln = ln.strip()
            if len(ln) != cols:
                raise ValueError(f"row {i} has length {len(ln)}, expected {cols}")
            arr[i] = np.frombuffer(ln.encode(), dtype=np.uint8) - ord("0")
        return cls.from_dense(arr)


class RowBasis:
    """Incremental row-space membership oracle.

    Keeps an internally reduced basis of the rows seen so far; reducing
    a vector against it answers membership and can grow the basis.
    """

    def __init__(self, m: BinMatrix | None = None, cols: int | None = None):
        if m is not None:
            self.cols = m.cols
            self._rows: list[np.ndarray] = []
            self._pivots: list[int] = []
            for i in range(m.rows):
                self.add(m.row(i))
        else:
            if cols is None:
                raise ValueError("need a matrix or a column count")
            self.cols = cols
            self._rows = []
            self._pivots = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    def _reduce(self, v: BinVector) -> np.ndarray:
        w = v.words.copy()
        for words, p in zip(self._rows, self._pivots):
            if (w[p // WORD] >> np.uint64(p % WORD)) & np.uint64(1):
                w ^= words
        return w

    def contains(self, v: BinVector) -> bool:
        if v.n != self.cols:
            raise ValueError("length mismatch")
        return not self._reduce(v).any()

    def add(self, v: BinVector) -> bool:
        """Add a row; returns True if it enlarged the span."""
        w = self._reduce(v)
        if not w.any():
            return False
        # pivot = first set bit
        nz = np.flatnonzero(w)
        first = int(nz[0])
        word = int(w[first])
        pivot = first * WORD + ((word & -word).bit_length() - 1)
        # keep existing rows reduced against the new one
        for i, (words, p) in enumerate(zip(self._rows, self._pivots)):
            if (words[pivot // WORD] >> np.uint64(pivot % WORD)) & np.uint64(1):
                self._rows[i] = words ^ w
        self._rows.append(w)
        self._pivots.append(pivot)
        return True
