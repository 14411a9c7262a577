"""Tests for conservation laws, the free/non-free split and the reconstructing matrix.

The published conserved matrices are taken from the bundled certificate
files; for the others the expected rows are written out by hand.
"""
import json

import numpy as np
import pytest

from core.crn import conservation
from core.crn.conservation import (
    assemble_D,
    choose_partition,
    find_conserved_matrix,
    positive_conservation_residual,
    substitution_map,
)
from core.exceptions import PreconditionException, SingularMatrixException, ValidationException
from core.math import linalg

_KERNEL_TOL = 1e-12

PUBLISHED_LOWER_ROWS = {
    1: [[1, 1]],
    2: [[1, 1]],
    4: [[1, 1, 2], [1, 2, 3]],
    5: [[2, 2, 1, 2]],
    6: [[1, 1, 1, 1], [1, 2, 1, 2]],
}


def _published(network_dir, number):
    return json.loads((network_dir / f"example{number}_published.json").read_text(encoding="utf-8"))


class TestFindConservedMatrix:
    def test_example2(self, example2):
        structure = find_conserved_matrix(example2)
        np.testing.assert_allclose(structure.C, [[1.0], [1.0]])
        assert structure.free == (0,)
        assert structure.nonfree == (1,)

    def test_example4(self, example4):
        structure = find_conserved_matrix(example4)
        assert structure.q == 2
        assert np.all(structure.C > 0)
        assert linalg.same_column_space(structure.C, np.array(PUBLISHED_LOWER_ROWS[4]).T)
        assert structure.nonfree == (1, 2)

    def test_example5(self, example5):
        structure = find_conserved_matrix(example5)
        np.testing.assert_allclose(structure.C[:, 0], [2.0, 2.0, 1.0, 2.0])
        assert structure.nonfree == (3,)

    def test_example6(self, example6):
        structure = find_conserved_matrix(example6)
        assert structure.q == 2
        assert linalg.same_column_space(structure.C, np.array(PUBLISHED_LOWER_ROWS[6]).T)
        assert structure.nonfree == (2, 3)

    def test_example3_has_no_conservation_law(self, example3):
        structure = find_conserved_matrix(example3)
        assert structure.q == 0
        assert structure.free == (0, 1, 2)
        assert structure.bound() == (0.0, 1.0)

    def test_columns_are_conserved(self, example1, example2, example4, example5, example6):
        for net in (example1, example2, example4, example5, example6):
            structure = find_conserved_matrix(net)
            assert positive_conservation_residual(net, structure.C) < _KERNEL_TOL

    def test_q_target_zero(self, example4):
        assert find_conserved_matrix(example4, q_target=0).q == 0

    def test_q_target_too_large(self, example2):
        with pytest.raises(PreconditionException) as info:
            find_conserved_matrix(example2, q_target=2)
        assert info.value.stage == "conservation"

    def test_explicit_nonfree(self, example4):
        structure = find_conserved_matrix(example4, nonfree=[0, 2])
        assert structure.free == (1,)
        assert structure.permutation == (1, 0, 2)


class TestPublishedLowerRows:
    @pytest.mark.parametrize("number", sorted(PUBLISHED_LOWER_ROWS))
    def test_rows_lie_in_left_kernel(self, number, request):
        net = request.getfixturevalue(f"example{number}")
        C = np.array(PUBLISHED_LOWER_ROWS[number], dtype=float).T
        assert positive_conservation_residual(net, C) < _KERNEL_TOL

    def test_example3_row_is_not_conserved(self, example3):
        """X1 + X2 -> X3 changes x1 + x2 + x3, so the all-ones row cannot be a conservation law"""
        assert positive_conservation_residual(example3, [1.0, 1.0, 1.0]) == pytest.approx(1.0)


class TestChoosePartition:
    def test_ties_keep_low_indices_free(self):
        structure = choose_partition([[1.0], [1.0]])
        assert structure.nonfree == (1,)

    def test_largest_minor_wins(self):
        structure = choose_partition([[1.0], [3.0], [2.0]])
        assert structure.nonfree == (1,)

    def test_independent_of_basis(self):
        C = np.array(PUBLISHED_LOWER_ROWS[4], dtype=float).T
        mixed = C @ np.array([[2.0, 1.0], [1.0, 1.0]])
        assert choose_partition(C).nonfree == choose_partition(mixed).nonfree

    def test_elimination_fallback(self, monkeypatch):
        monkeypatch.setattr(conservation, "MAX_EXHAUSTIVE_PARTITIONS", 0)
        assert choose_partition([[1.0], [3.0], [2.0]]).nonfree == (1,)
        assert choose_partition(np.array(PUBLISHED_LOWER_ROWS[4], dtype=float).T).nonfree == (1, 2)

    def test_singular_override(self):
        C = np.array(PUBLISHED_LOWER_ROWS[6], dtype=float).T
        with pytest.raises(SingularMatrixException):
            choose_partition(C, nonfree=[0, 2])

    def test_override_needs_q_indices(self):
        with pytest.raises(ValidationException):
            choose_partition([[1.0], [1.0]], nonfree=[0, 1])

    def test_rank_deficient_C(self):
        with pytest.raises(SingularMatrixException):
            choose_partition([[1.0, 2.0], [1.0, 2.0]])


class TestReconstructingMatrix:
    def test_example4_matches_published(self, network_dir):
        published = _published(network_dir, 4)
        structure = choose_partition(published["conserved_matrix"])
        assert structure.nonfree == (1, 2)
        D = assemble_D(structure, published["reconstruction"]["d"])
        np.testing.assert_allclose(D.in_species_order(), published["D"])
        np.testing.assert_allclose(D.D @ D.Dinv, np.eye(3), atol=1e-12)
        assert D.inverse_residual < 1e-12

    def test_example2(self, example2):
        D = assemble_D(find_conserved_matrix(example2), [0.01])
        np.testing.assert_allclose(D.D, [[0.01, 0.0], [1.0, 1.0]])
        np.testing.assert_allclose(D.Dinv, [[100.0, 0.0], [-100.0, 1.0]])

    def test_column_order_follows_species(self, example4):
        structure = choose_partition(np.array(PUBLISHED_LOWER_ROWS[4], dtype=float).T, nonfree=[0, 2])
        D = assemble_D(structure, [0.5])
        assert structure.permutation == (1, 0, 2)
        np.testing.assert_allclose(D.in_species_order()[0], [0.0, 0.5, 0.0])

    def test_rejects_bad_d(self, example2):
        structure = find_conserved_matrix(example2)
        with pytest.raises(ValidationException):
            assemble_D(structure, [0.0])
        with pytest.raises(ValidationException):
            assemble_D(structure, [1.0, 1.0])

    def test_no_conservation(self, example3):
        D = assemble_D(find_conserved_matrix(example3), [1.0, 2.0, 3.0])
        np.testing.assert_allclose(D.D, np.diag([1.0, 2.0, 3.0]))


class TestSubstitution:
    def test_example2_map(self, example2):
        structure = find_conserved_matrix(example2)
        affine = substitution_map(structure, [1.0, 1.0])
        np.testing.assert_allclose(affine.constant, [2.0])
        np.testing.assert_allclose(affine.linear, [[-1.0]])
        norm, constant = structure.bound()
        assert norm == pytest.approx(1.0)
        assert constant == pytest.approx(np.sqrt(2.0))

    def test_example4_elimination(self, network_dir):
        structure = choose_partition(_published(network_dir, 4)["conserved_matrix"])
        np.testing.assert_allclose(structure.elimination_matrix(), [[-1.0], [1.0]], atol=1e-12)
        affine = substitution_map(structure, [0.5, 0.5, 0.5])
        np.testing.assert_allclose(affine.apply([0.2]), [0.2, 0.8], atol=1e-12)

    def test_totals_are_preserved(self, example5, rng):
        structure = find_conserved_matrix(example5)
        x_star = np.array([4 / 13, 0.8, 1.0, 0.6])
        affine = substitution_map(structure, x_star)
        for _ in range(10):
            free = rng.uniform(0.1, 1.0, size=3)
            x = np.empty(4)
            x[list(structure.free)] = free
            x[list(structure.nonfree)] = affine.apply(free)
            np.testing.assert_allclose(structure.totals(x), structure.totals(x_star), atol=1e-12)

    def test_nonpositive_equilibrium(self, example2):
        with pytest.raises(PreconditionException):
            substitution_map(find_conserved_matrix(example2), [1.0, 0.0])

    @pytest.mark.parametrize(
        "number, nonfree, x_star",
        [(4, [1, 2], [0.5, 0.5, 0.5]), (6, [2, 3], [1.0, 1.0, 2.0, 2.0])],
    )
    def test_map_does_not_depend_on_basis(self, request, rng, number, nonfree, x_star):
        C = np.array(PUBLISHED_LOWER_ROWS[number], dtype=float).T
        bases = [
            C,
            C @ np.array([[2.0, 1.0], [1.0, 1.0]]),
            find_conserved_matrix(request.getfixturevalue(f"example{number}")).C,
        ]
        maps = [substitution_map(choose_partition(basis, nonfree=nonfree), x_star) for basis in bases]
        n_free = len(x_star) - len(nonfree)
        for _ in range(20):
            free = rng.uniform(0.0, 2.0, size=n_free)
            reference = maps[0].apply(free)
            for affine in maps[1:]:
                np.testing.assert_allclose(affine.apply(free), reference, atol=1e-8)
