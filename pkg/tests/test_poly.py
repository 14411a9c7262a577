import numpy as np
import pytest

from core.exceptions import UnsupportedSubstitutionException
from core.math.poly import AffineMap, Polynomial, PolynomialVector


def _x(nvars=1, index=0):
    return Polynomial.variable(nvars, index)


class TestArithmetic:
    def test_power_and_evaluate(self):
        p = (_x() + Polynomial.constant(1, 1.0)).power(3)
        assert p.evaluate([2.0]) == pytest.approx(27.0)
        assert p.coefficient((2,)) == 3.0
        assert p.degree() == 3

    def test_tiny_coefficients_dropped(self):
        assert Polynomial(1, {(1,): 1e-16}).is_zero()
        assert (_x() - _x()).is_zero()

    def test_negative_exponent_rejected(self):
        with pytest.raises(ValueError):
            Polynomial(1, {(-1,): 1.0})

    def test_variable_count_checked(self):
        with pytest.raises(ValueError):
            _x(1) + _x(2)

    def test_distance(self):
        p = Polynomial(2, {(1, 0): 1.0, (0, 1): 2.0})
        q = Polynomial(2, {(1, 0): 1.5})
        assert p.distance(q) == 2.0

    def test_format(self):
        assert Polynomial.monomial((2, 0)).format(["X1", "X2"]) == "X1^2"
        assert Polynomial(1, {(2,): -2.0, (1,): 2.0}).format() == "-2*x1^2 +2*x1"


class TestSubstitution:
    def test_conservation_law_into_example2_field(self):
        """-x1^2 + x1 x2 with x2 = 2 - x1"""
        f1 = Polynomial(2, {(2, 0): -1.0, (1, 1): 1.0})
        affine = AffineMap(constant=np.array([2.0]), linear=np.array([[-1.0]]))
        g1 = f1.substitute_affine([1], affine)
        assert g1 == Polynomial(1, {(2,): -2.0, (1,): 2.0})

    def test_two_targets(self):
        """x2 x3 with x2 = x1 and x3 = 1 - x1"""
        p = Polynomial(3, {(0, 1, 1): 1.0})
        affine = AffineMap(constant=np.array([0.0, 1.0]), linear=np.array([[1.0], [-1.0]]))
        assert p.substitute_affine([1, 2], affine) == Polynomial(1, {(1,): 1.0, (2,): -1.0})

    def test_fractional_power_rejected(self):
        p = Polynomial(2, {(1, 0.5): 1.0})
        affine = AffineMap(constant=np.array([1.0]), linear=np.array([[-1.0]]))
        with pytest.raises(UnsupportedSubstitutionException):
            p.substitute_affine([1], affine)

    def test_fractional_power_on_kept_variable_is_fine(self):
        p = Polynomial(2, {(0.5, 1): 1.0})
        affine = AffineMap(constant=np.array([1.0]), linear=np.array([[0.0]]))
        assert p.substitute_affine([1], affine) == Polynomial(1, {(0.5,): 1.0})

    def test_affine_shape_checked(self):
        with pytest.raises(ValueError):
            _x(2).substitute_affine([1], AffineMap(constant=np.array([1.0]), linear=np.zeros((1, 2))))

    def test_substitution_agrees_with_evaluation(self, rng):
        for _ in range(20):
            terms = {tuple(rng.integers(0, 3, size=3)): float(rng.normal()) for _ in range(4)}
            p = Polynomial(3, terms)
            affine = AffineMap(constant=rng.normal(size=1), linear=rng.normal(size=(1, 2)))
            q = p.substitute_affine([2], affine)
            remaining = rng.uniform(0.1, 2.0, size=2)
            full = np.concatenate([remaining, affine.apply(remaining)])
            assert q.evaluate(remaining) == pytest.approx(p.evaluate(full), rel=1e-9, abs=1e-9)


class TestPolynomialVector:
    def test_scale_rows_and_support(self):
        v = PolynomialVector([_x(2, 0), _x(2, 1) * 2.0])
        scaled = v.scale_rows([0.5, 0.25])
        assert scaled[0].coefficient((1, 0)) == 0.5
        assert scaled[1].coefficient((0, 1)) == 0.5
        assert v.support() == [(0, 1), (1, 0)]

    def test_inconsistent_lengths(self):
        with pytest.raises(ValueError):
            PolynomialVector([_x(1), _x(2)])
