import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbqec.gf2 import BinMatrix, BinVector, RowBasis


def rank_reference(a: np.ndarray) -> int:
    """Plain dense elimination, independent of the packed code path."""
    a = a.copy() % 2
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i, c]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
    return r


def random_matrix(rng, rows, cols):
    return BinMatrix.from_dense(rng.integers(0, 2, size=(rows, cols), dtype=np.uint8))


def test_rank_identity_and_zeros():
    assert BinMatrix.identity(5).rank() == 5
    assert BinMatrix.zeros(3, 4).rank() == 0


def test_rank_matches_reference_and_transpose():
    rng = np.random.default_rng(7)
    for _ in range(30):
        rows, cols = rng.integers(1, 200, size=2)
        dense = rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)
        m = BinMatrix.from_dense(dense)
        assert m.rank() == rank_reference(dense)
        assert m.rank() == m.transpose().rank()


def test_nullspace_identity_empty_and_zero_full():
    assert BinMatrix.identity(6).nullspace_basis() == []
    assert len(BinMatrix.zeros(4, 4).nullspace_basis()) == 4


def test_nullspace_vectors_annihilate():
    rng = np.random.default_rng(3)
    for _ in range(15):
        m = random_matrix(rng, *rng.integers(1, 120, size=2))
        basis = m.nullspace_basis()
        assert len(basis) == m.cols - m.rank()
        for b in basis:
            assert m.mul_vec(b).is_zero()
        # basis vectors are independent
        if basis:
            assert BinMatrix.from_rows(basis).rank() == len(basis)


def test_solve_identity_and_inconsistent():
    v = BinVector.from_bits([1, 0, 1, 1, 0])
    assert BinMatrix.identity(5).solve(v) == v
    assert BinMatrix.zeros(3, 4).solve(BinVector.from_bits([0, 1, 0])) is None


def test_solve_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = random_matrix(rng, *rng.integers(1, 100, size=2))
        x0 = BinVector.from_bits(rng.integers(0, 2, m.cols, dtype=np.uint8))
        s = m.mul_vec(x0)
        x = m.solve(s)
        assert x is not None
        assert m.mul_vec(x) == s


def test_in_rowspace_rows_zero_and_rank_characterisation():
    rng = np.random.default_rng(5)
    m = random_matrix(rng, 40, 60)
    assert m.in_rowspace(BinVector.zeros(60))
    for i in range(m.rows):
        assert m.in_rowspace(m.row(i))
    for _ in range(20):
        v = BinVector.from_bits(rng.integers(0, 2, 60, dtype=np.uint8))
        appended = m.append_row(v)
        assert m.in_rowspace(v) == (appended.rank() == m.rank())


def test_rowbasis_incremental():
    rng = np.random.default_rng(9)
    m = random_matrix(rng, 30, 50)
    rb = RowBasis(m)
    assert rb.rank == m.rank()
    comb = m.row(0) ^ m.row(7) ^ m.row(19)
    assert rb.contains(comb)


def test_sparse_and_dense_views_agree():
    rng = np.random.default_rng(13)
    m = random_matrix(rng, 25, 70)
    dense = m.to_dense()
    for i, sup in enumerate(m.row_supports()):
        assert np.array_equal(np.flatnonzero(dense[i]), sup)


def test_dump_load_round_trip(tmp_path):
    rng = np.random.default_rng(17)
    m = random_matrix(rng, 9, 33)
    path = tmp_path / "m.txt"
    path.write_text(m.dumps())
    assert BinMatrix.loads(path.read_text()) == m


def test_load_rejects_bad_row():
    with pytest.raises(ValueError):
        BinMatrix.loads("2 3\n101\n10")


def test_vector_ops():
    v = BinVector.from_support(130, [0, 63, 64, 129])
    assert v.weight == 4
    assert list(v.support) == [0, 63, 64, 129]
    w = v ^ BinVector.from_support(130, [63])
    assert w.weight == 3
    assert v.dot(BinVector.from_support(130, [129])) == 1
    assert v.dot(BinVector.from_support(130, [1])) == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60), st.integers(0, 2**32 - 1))
def test_matmul_matches_integer_arithmetic(rows, cols, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)
    b = rng.integers(0, 2, size=(cols, rows), dtype=np.uint8)
    prod = BinMatrix.from_dense(a).mul_mat(BinMatrix.from_dense(b))
    assert np.array_equal(prod.to_dense(), (a.astype(int) @ b.astype(int)) % 2)
