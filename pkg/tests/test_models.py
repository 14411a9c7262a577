"""Tests for the network domain types and matrix builders in models.py.

Tests cover:
- Complex, stoichiometric and Kirchhoff matrices of small networks
- The identities S = Z B and S v(x) = Z L Psi(x)
- Input validation (rates, duplicates, stoichiometry)
- Structural report: linkage classes, weak reversibility, deficiency
"""
from fractions import Fraction

import numpy as np
import pytest

from core.exceptions import DomainException, ValidationException
from models import (
    Complex,
    Reaction,
    build_matrices,
    complex_balance_residual,
    complex_centered_field,
    mass_action_rates,
    psi,
    structure_report,
    to_exact,
    vector_field,
)

_FIELD_TOL = 1e-12


def _complex(*values):
    return Complex.from_dense(list(values))


# Matrix construction

class TestBuildMatrices:
    def test_example2_dimensions(self, example2):
        """2X1 -> X1+X2, X1+X2 -> 2X1, X1+X2 -> 2X2"""
        assert (example2.n, example2.r, example2.c) == (2, 3, 3)
        columns = {tuple(example2.Z[:, k]) for k in range(example2.c)}
        assert columns == {(2.0, 0.0), (1.0, 1.0), (0.0, 2.0)}

    def test_example5_rank(self, example5):
        assert example5.r == 5
        assert structure_report(example5).rank == 3

    def test_stoichiometry_is_z_times_b(self, example4):
        assert np.array_equal(example4.S, example4.Z @ example4.B)
        assert (example4.S_exact == example4.Z_exact.dot(example4.B.astype(object))).all()

    def test_kirchhoff_columns_sum_to_zero(self, example6):
        np.testing.assert_allclose(example6.L.sum(axis=0), 0.0, atol=_FIELD_TOL)
        off = example6.L - np.diag(np.diag(example6.L))
        assert np.all(off >= 0)

    def test_rates_are_exact(self):
        net = build_matrices(["X1"], [Reaction(_complex(1), _complex(0), 0.1)])
        assert net.reactions[0].rate == Fraction(1, 10)
        assert net.L_exact[1, 0] == Fraction(1, 10)

    def test_rejects_empty_network(self):
        with pytest.raises(ValidationException):
            build_matrices(["X1"], [])

    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ValidationException):
            build_matrices(["X1"], [Reaction(_complex(1), _complex(0), 0)])

    def test_rejects_identical_complexes(self):
        with pytest.raises(ValidationException):
            build_matrices(["X1"], [Reaction(_complex(1), _complex(1), 1)])

    def test_rejects_duplicate_reactions(self):
        reaction = Reaction(_complex(1, 0), _complex(0, 1), 1)
        with pytest.raises(ValidationException, match="Duplicate"):
            build_matrices(["X1", "X2"], [reaction, Reaction(reaction.reactant, reaction.product, 2)])

    def test_rejects_fractional_coefficient_unless_generalized(self):
        reaction = Reaction(_complex(1), _complex(Fraction(1, 2)), 1)
        with pytest.raises(ValidationException):
            build_matrices(["X1"], [reaction])
        net = build_matrices(["X1"], [reaction], generalized=True)
        assert net.S[0, 0] == -0.5

    def test_rejects_undeclared_species(self):
        with pytest.raises(ValidationException):
            build_matrices(["X1"], [Reaction(_complex(1), _complex(0, 1), 1)])


class TestToExact:
    def test_float_uses_shortest_decimal(self):
        assert to_exact(0.1) == Fraction(1, 10)
        assert to_exact("2.5") == Fraction(5, 2)
        assert to_exact(3) == Fraction(3)

    def test_rejects_nan(self):
        with pytest.raises(ValidationException):
            to_exact(float("nan"))


# Rates and fields

class TestRates:
    def test_psi_at_ones(self, example2):
        np.testing.assert_array_equal(psi(example2, [1.0, 1.0]), np.ones(3))

    def test_mass_action_rates(self, example2):
        v = mass_action_rates(example2, [2.0, 3.0])
        np.testing.assert_allclose(v, [1.0 * 4.0, 2.0 * 6.0, 1.0 * 6.0])

    def test_negative_state_rejected(self, example2):
        with pytest.raises(DomainException):
            mass_action_rates(example2, [-1.0, 1.0])

    def test_wrong_shape_rejected(self, example2):
        with pytest.raises(ValidationException):
            mass_action_rates(example2, [1.0, 1.0, 1.0])

    def test_example1_vector_field(self, example1):
        """f1 = -2 x1^2 + x2"""
        f1 = vector_field(example1)[0]
        assert f1.coefficient((2, 0)) == -2.0
        assert f1.coefficient((0, 1)) == 1.0
        assert len(f1.support()) == 2

    def test_example2_equilibrium_is_not_complex_balanced(self, example2):
        x_star = [1.0, 1.0]
        np.testing.assert_allclose(example2.S @ mass_action_rates(example2, x_star), 0.0, atol=_FIELD_TOL)
        np.testing.assert_allclose(complex_balance_residual(example2, x_star), [1.0, -2.0, 1.0])

    def test_example6_not_complex_balanced(self, example6):
        residual = complex_balance_residual(example6, [1.0, 1.0, 2.0, 2.0])
        assert np.max(np.abs(residual)) > 0.5


class TestFieldIdentities:
    def test_s_equals_zb_on_random_networks(self, random_networks):
        for net in random_networks:
            assert np.array_equal(net.S, net.Z @ net.B)

    def test_reaction_and_complex_forms_agree(self, random_networks, rng):
        for net in random_networks:
            assert vector_field(net).distance(complex_centered_field(net)) < _FIELD_TOL
            x = rng.uniform(0.1, 2.0, size=net.n)
            np.testing.assert_allclose(
                net.S @ mass_action_rates(net, x),
                net.Z @ net.L @ psi(net, x),
                rtol=1e-10, atol=1e-10,
            )


# Structure

class TestStructureReport:
    def test_example6(self, example6):
        report = structure_report(example6)
        assert report.n_complexes == 6
        assert report.linkage_classes == 3
        assert report.rank == 2
        assert report.deficiency == 1
        assert not report.weakly_reversible

    def test_example2(self, example2):
        report = structure_report(example2)
        assert report.linkage_classes == 1
        assert report.deficiency == 1
        assert report.strong_components == 2
        assert not report.weakly_reversible

    def test_species_lookup(self, example4):
        assert example4.species_index("X3") == 2
        with pytest.raises(ValidationException):
            example4.species_index("Y")
