"""Exact linear algebra: ranks, kernels, solves, determinism, inertia."""

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from spencerdef import exactla as xla
from spencerdef.exactla import NoSolution, QMatrix, RationalTensor, Subspace


def test_rank_identity_and_zero():
    assert xla.rank(QMatrix.identity(2), modular=False) == 2
    assert xla.rank(QMatrix.zeros(3, 5), modular=False) == 0


def test_rank_dependent_rows():
    # Gaussian elimination by hand: second row is twice the first
    M = QMatrix.from_dense([[1, 2], [2, 4]])
    assert xla.rank(M, modular=False) == 1
    assert xla.rank(M, modular=True) == 1


def test_kernel_identity_empty():
    assert xla.kernel_basis(QMatrix.identity(3)).dim == 0


def test_kernel_zero_matrix():
    k = xla.kernel_basis(QMatrix.zeros(2, 3))
    assert k.dim == 3


def test_kernel_echelon_pivots():
    # direct elimination: free columns are the 2nd and 3rd (1-indexed {2,3})
    k = xla.kernel_basis(QMatrix.from_dense([[1, 1, 0]]))
    assert k.dim == 2
    assert [p + 1 for p in k.pivots] == [2, 3]
    for v in k.basis_vectors():
        assert v[0] + v[1] == 0 and len(v) == 3


def test_solve_examples():
    b = [mpq(3), mpq(-1)]
    assert xla.solve(QMatrix.identity(2), b) == b
    with pytest.raises(NoSolution):
        xla.solve(QMatrix.zeros(2, 2), [mpq(1), mpq(0)])
    assert xla.solve(QMatrix.from_dense([[2]]), [3]) == [mpq(3, 2)]


def test_common_annihilated_trivial():
    assert xla.common_annihilated([], dim=4).dim == 4
    assert xla.common_annihilated([QMatrix.identity(3)]).dim == 0


def test_common_annihilated_projections():
    # two commuting projections; intersection of kernels enumerated by hand:
    # ker P1 = span(e3, e4), ker P2 = span(e1, e4) -> span(e4)
    P1 = QMatrix.from_dense([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]])
    P2 = QMatrix.from_dense([[0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0]])
    inter = xla.common_annihilated([P1, P2])
    assert inter.dim == 1
    assert inter.contains([0, 0, 0, 1])
    assert not inter.contains([0, 0, 1, 0])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_rank_nullity(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 8)), int(rng.integers(1, 8))
    M = QMatrix.from_dense(rng.integers(-5, 6, size=(m, n)).tolist())
    assert xla.rank(M, modular=False) + xla.kernel_basis(M).dim == n


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_solve_consistent_systems(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 7)), int(rng.integers(1, 7))
    M = QMatrix.from_dense(rng.integers(-5, 6, size=(m, n)).tolist())
    x = [mpq(int(v)) for v in rng.integers(-5, 6, size=n)]
    b = M.matvec(x)
    x2 = xla.solve(M, b)
    assert M.matvec(x2) == b


def test_echelon_determinism():
    rng = np.random.default_rng(7)
    data = rng.integers(-9, 10, size=(12, 20)).tolist()
    k1 = xla.kernel_basis(QMatrix.from_dense(data))
    k2 = xla.kernel_basis(QMatrix.from_dense(data))
    assert k1.pivots == k2.pivots
    assert k1.basis == k2.basis
    assert xla.rank(QMatrix.from_dense(data)) == xla.rank(QMatrix.from_dense(data))


def test_modular_rank_agrees_with_exact():
    rng = np.random.default_rng(123)
    for _ in range(100):
        A = rng.integers(-9, 10, size=(50, 80))
        M = QMatrix.from_dense(A.tolist())
        r_exact = len(xla.rref(M)[0])
        assert xla.rank(M, modular=True) == r_exact


def test_inertia():
    assert xla.inertia_symmetric(QMatrix.from_dense([[2, 0, 0], [0, -3, 0], [0, 0, 0]])) == (1, 1, 1)
    # hyperbolic plane: zero diagonal, off-diagonal pivot handling
    assert xla.inertia_symmetric(QMatrix.from_dense([[0, 1], [1, 0]])) == (1, 1, 0)
    assert xla.inertia_symmetric(QMatrix.from_dense([[5]])) == (1, 0, 0)


def test_subspace_membership_and_intersection():
    s1 = Subspace.from_vectors(3, [[1, 0, 1], [0, 1, 0]])
    s2 = Subspace.from_vectors(3, [[1, 1, 1]])
    assert s1.contains([2, 3, 2])
    assert not s1.contains([1, 0, 0])
    inter = s1.intersect(s2)
    assert inter.dim == 1 and inter.contains([1, 1, 1])


def test_rational_tensor_sparsity():
    t = RationalTensor((2, 3))
    t[0, 1] = mpq(1, 2)
    t[0, 1] = 0
    assert t.is_zero()
    t[1, 2] = mpq(3)
    t.add_at((1, 2), mpq(-3))
    assert t.is_zero()
    with pytest.raises(IndexError):
        t[2, 0]


def test_qmatrix_json_identity_roundtrip():
    from spencerdef import serialize as ser
    M = QMatrix.from_dense([[mpq(1, 3), 0], [2, mpq(-5, 7)]])
    M2 = ser.matrix_from_json(ser.matrix_to_json(M))
    assert M == M2
