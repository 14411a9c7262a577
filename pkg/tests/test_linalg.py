import numpy as np
import pytest

from core.exceptions import SingularMatrixException
from core.math import linalg


class TestRank:
    def test_dependent_rows(self):
        assert linalg.rank([[1, 2], [2, 4]]) == 1

    def test_zero_matrix(self):
        R, pivots = linalg.rref(np.zeros((2, 3)))
        assert pivots == []
        assert not R.any()

    def test_matches_numpy_on_random_integer_matrices(self, rng):
        for _ in range(50):
            A = rng.integers(-2, 3, size=(int(rng.integers(1, 6)), int(rng.integers(1, 6))))
            assert linalg.rank(A) == np.linalg.matrix_rank(A.astype(float))

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            linalg.rref([[1.0, np.nan]])
        with pytest.raises(ValueError):
            linalg.rref([[1.0]], tol=0)


class TestNullspace:
    def test_example4_left_nullspace(self, example4):
        N = linalg.left_nullspace(example4.S)
        assert N.shape == (3, 2)
        np.testing.assert_allclose(example4.S.T @ N, 0.0, atol=1e-12)
        assert linalg.same_column_space(N, [[1, 1], [1, 2], [2, 3]])

    def test_full_rank_has_trivial_kernel(self):
        assert linalg.nullspace(np.eye(3)).shape == (3, 0)

    def test_random_kernels(self, rng):
        for _ in range(50):
            A = rng.integers(-2, 3, size=(3, 5)).astype(float)
            N = linalg.nullspace(A)
            assert N.shape[1] == 5 - np.linalg.matrix_rank(A)
            np.testing.assert_allclose(A @ N, 0.0, atol=1e-9)


class TestSolve:
    def test_inverse(self):
        np.testing.assert_allclose(linalg.inverse([[1, 2], [2, 3]]), [[-3, 2], [2, -1]], atol=1e-12)

    def test_singular(self):
        with pytest.raises(SingularMatrixException) as info:
            linalg.solve([[1, 2], [2, 4]], [1, 2])
        assert info.value.rank == 1
        assert info.value.size == 2

    def test_independent_rows_first_occurrence(self):
        assert linalg.independent_rows([[1, 0], [2, 0], [0, 1]]) == [0, 2]

    def test_column_space_mismatch(self):
        assert not linalg.same_column_space([[1], [0]], [[0], [1]])
