import numpy as np
import pytest
import scipy.sparse as sp

from delaylyap import DelaySystem, benchmarks, transpose_system, validate
from delaylyap.errors import InvalidSystem
from delaylyap.model import BlockVector, coerce_matrix


def test_didactic_is_valid():
    report = validate(benchmarks.didactic())
    assert report.ok
    assert report.issues == []


def test_delay_ordering_violation_reported():
    bad = DelaySystem(
        A=(np.zeros((2, 2)), np.eye(2), np.eye(2)),
        taus=(2.0, 1.0),
        B=np.eye(2),
        C=np.eye(2),
    )
    report = validate(bad)
    assert not report.ok
    assert any("increasing" in msg for msg in report.issues)


def test_rank_deficient_B_reported():
    col = np.arange(1.0, 4.0).reshape(3, 1)
    bad = DelaySystem(
        A=(-np.eye(3), np.zeros((3, 3))),
        taus=(1.0,),
        B=np.hstack([col, col]),
        C=np.ones((1, 3)),
    )
    report = validate(bad)
    assert any("rank deficient" in msg for msg in report.issues)


def test_dimension_mismatch_reported():
    bad = DelaySystem(
        A=(np.eye(3), np.zeros((2, 2))),
        taus=(1.0,),
        B=np.ones((3, 1)),
        C=np.ones((1, 4)),
    )
    issues = "\n".join(validate(bad).issues)
    assert "A1" in issues and "C" in issues


def test_nonfinite_entries_reported():
    bad = DelaySystem(
        A=(np.array([[np.nan]]), np.zeros((1, 1))),
        taus=(1.0,),
        B=[[1.0]],
        C=[[1.0]],
    )
    assert any("non-finite" in msg for msg in validate(bad).issues)


def test_transpose_scalar_didactic_is_identity():
    s = benchmarks.didactic()
    d = transpose_system(s)
    for A1, A2 in zip(s.A, d.A):
        np.testing.assert_array_equal(np.asarray(A1), np.asarray(A2))
    np.testing.assert_array_equal(d.B, s.B)
    np.testing.assert_array_equal(d.C, s.C)


def test_transpose_didactic2_shapes_and_values():
    s = benchmarks.didactic2()
    d = transpose_system(s)
    np.testing.assert_array_equal(d.A[0], np.asarray(s.A[0]).T)
    np.testing.assert_array_equal(d.A[1], np.asarray(s.A[1]).T)
    np.testing.assert_array_equal(d.B, np.array([[1.0], [0.0], [0.0]]))
    np.testing.assert_array_equal(d.C, np.array([[1.0, 1.0, 1.0]]))
    assert d.taus == s.taus


def test_transpose_is_involution():
    s = benchmarks.heat_exchanger()
    dd = transpose_system(transpose_system(s))
    for A1, A2 in zip(s.A, dd.A):
        np.testing.assert_array_equal(np.asarray(A1), np.asarray(A2))
    np.testing.assert_array_equal(dd.B, s.B)
    np.testing.assert_array_equal(dd.C, s.C)


def test_transpose_rejects_rank_deficient_C():
    s = DelaySystem(
        A=(-np.eye(2), np.zeros((2, 2))),
        taus=(1.0,),
        B=np.eye(2),
        C=np.vstack([np.ones((1, 2)), np.ones((1, 2))]),  # C^T rank 1
    )
    with pytest.raises(InvalidSystem):
        transpose_system(s)


def test_storage_policy():
    dense_small = coerce_matrix(np.eye(50))
    assert isinstance(dense_small, np.ndarray)
    big_sparse = coerce_matrix(sp.eye(500, format="csr"))
    assert sp.issparse(big_sparse)
    assert big_sparse.has_sorted_indices
    big_dense = coerce_matrix(np.ones((500, 500)))
    assert isinstance(big_dense, np.ndarray)
    # a big scipy matrix that is actually dense gets densified
    assert isinstance(coerce_matrix(sp.csr_matrix(np.ones((500, 500)))), np.ndarray)


def test_pde_generators_match_stencil():
    s = benchmarks.pde2(5)
    A0 = np.asarray(s.A[0].todense()) if sp.issparse(s.A[0]) else np.asarray(s.A[0])
    scale = (4 / np.pi) ** 2
    assert A0[1, 0] == pytest.approx(scale)
    assert A0[1, 1] == pytest.approx(-2 * scale - 2 * np.sin(np.pi / 4))
    # boundary rows carry no reaction term
    assert A0[0, 0] == pytest.approx(-2 * scale)
    A1 = np.asarray(s.A[1].todense()) if sp.issparse(s.A[1]) else np.asarray(s.A[1])
    assert A1[0, 4] == 0.0
    assert A1[1, 3] == pytest.approx(2 * np.sin(np.pi / 4))
    s1 = benchmarks.pde1(5)
    A1p = np.asarray(s1.A[1].todense()) if sp.issparse(s1.A[1]) else np.asarray(s1.A[1])
    np.testing.assert_allclose(np.diag(A1p), -0.25 * np.linspace(0, np.pi, 5))


def test_didactic2_entries():
    s = benchmarks.didactic2()
    A0 = np.asarray(s.A[0])
    A1 = np.asarray(s.A[1])
    assert A0[0, 0] == -0.08
    assert A1[2, 2] == 0.0602
    assert s.taus == (5.0,)


def test_heat_exchanger_entries():
    s = benchmarks.heat_exchanger()
    A0 = np.asarray(s.A[0])
    assert A0[1, 0] == pytest.approx(1 / 3)
    assert A0[4, 3] == -1.0
    assert s.B[0, 0] == 0.0278571429
    assert s.taus == (2.8, 6.5, 9.2, 13.0, 13.2, 18.0, 40.0)
    np.testing.assert_array_equal(s.C, np.eye(5))


def test_block_vector_basics():
    data = np.arange(12.0).reshape(6, 2)
    bv = BlockVector(data, 3)
    assert bv.active == 2 and bv.width == 2
    np.testing.assert_array_equal(bv.block(0), data[:3])
    np.testing.assert_array_equal(bv.block(5), np.zeros((3, 2)))
    padded = bv.padded(4)
    assert padded.shape == (12, 2)
    np.testing.assert_array_equal(padded[:6], data)
    np.testing.assert_array_equal(padded[6:], 0.0)
    with pytest.raises(ValueError):
        bv.padded(1)
    with pytest.raises(ValueError):
        BlockVector(np.zeros((5, 2)), 3)
