"""Tests for the dense two-phase simplex, with scipy's HiGHS as the oracle."""
import numpy as np
import pytest
from scipy.optimize import linprog

from core.exceptions import ValidationException
from core.math.lp import LinearProgram, LPStatus, solve_lp

_OBJECTIVE_TOL = 1e-7


class TestSolveLp:
    def test_upper_bound_binds(self):
        lp = LinearProgram.build([-1, -2], [[1, 1]], [4], upper=[np.inf, 3])
        solution = solve_lp(lp)
        assert solution.status == LPStatus.OPTIMAL
        np.testing.assert_allclose(solution.y, [1.0, 3.0], atol=1e-12)
        assert solution.objective == pytest.approx(-7.0)

    def test_infeasible(self):
        solution = solve_lp(LinearProgram.build([1, 1], [[1, 1]], [-1]))
        assert solution.status == LPStatus.INFEASIBLE
        assert solution.y is None

    def test_unbounded(self):
        solution = solve_lp(LinearProgram.build([-1, 0], [[1, -1]], [0]))
        assert solution.status == LPStatus.UNBOUNDED

    def test_free_variable(self):
        solution = solve_lp(LinearProgram.build([1], [[1]], [-2], lower=[-np.inf]))
        assert solution.is_optimal
        assert solution.y[0] == pytest.approx(-2.0)

    def test_upper_bound_only(self):
        solution = solve_lp(LinearProgram.build([-1], lower=[-np.inf], upper=[5]))
        assert solution.y[0] == pytest.approx(5.0)

    def test_redundant_rows(self):
        solution = solve_lp(LinearProgram.build([1, 0], [[1, 1], [1, 1]], [2, 2]))
        assert solution.is_optimal
        np.testing.assert_allclose(solution.y, [0.0, 2.0], atol=1e-12)

    def test_deterministic(self, rng):
        A = rng.normal(size=(3, 6))
        b = A @ rng.uniform(0.5, 1.5, size=6)
        lp = LinearProgram.build(rng.uniform(0.1, 1.0, size=6), A, b)
        first, second = solve_lp(lp), solve_lp(lp)
        assert np.array_equal(first.y, second.y)
        assert first.iterations == second.iterations

    def test_inconsistent_data(self):
        with pytest.raises(ValidationException):
            LinearProgram.build([1, 1], [[1, 1]], [1, 2])
        with pytest.raises(ValidationException):
            LinearProgram.build([1], lower=[2], upper=[1])


class TestAgainstHighs:
    def test_random_feasible_programs(self, rng):
        for _ in range(40):
            m, n = int(rng.integers(1, 5)), int(rng.integers(3, 9))
            A = rng.integers(-3, 4, size=(m, n)).astype(float)
            b = A @ rng.uniform(0.0, 2.0, size=n)
            c = rng.uniform(0.1, 2.0, size=n)
            upper = np.where(rng.random(n) < 0.3, 3.0, np.inf)
            ours = solve_lp(LinearProgram.build(c, A, b, upper=upper))
            reference = linprog(c, A_eq=A, b_eq=b, bounds=list(zip(np.zeros(n), upper)), method="highs")
            if reference.status == 2:
                assert ours.status == LPStatus.INFEASIBLE
                continue
            assert ours.is_optimal
            assert ours.objective == pytest.approx(reference.fun, rel=_OBJECTIVE_TOL, abs=_OBJECTIVE_TOL)
            np.testing.assert_allclose(A @ ours.y, b, atol=1e-7)
            assert np.all(ours.y >= -1e-12)
