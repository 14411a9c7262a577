"""Equilibria, trajectories and Lyapunov functions of mass action systems."""
import io
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from core.exceptions import (
    ConvergenceException,
    DomainException,
    IntegrationException,
    PreconditionException,
    SingularMatrixException,
    ValidationException,
)
from core.math import linalg
from models import Network, complex_balance_residual

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 100
BOUNDARY_FRACTION = 0.9
NEGATIVITY_TOL = 1e-9
DESCENT_TOL = 1e-9
PROJECTION_TOL = 1e-8
BALANCE_TOL = 1e-8


def _polynomial_field(net: Network) -> Callable[[np.ndarray], np.ndarray]:
    """x -> S v(x) without domain checks, for use inside integrator stages"""
    S, rates, Y = net.S, net.rates, net.reactant_matrix

    def f(x: np.ndarray) -> np.ndarray:
        return S @ (rates * np.prod(np.power(x[:, None], Y), axis=0))

    return f


def _rates(net: Network, x: np.ndarray) -> np.ndarray:
    return net.rates * np.prod(np.power(x[:, None], net.reactant_matrix), axis=0)


def _rate_jacobian(net: Network, x: np.ndarray) -> np.ndarray:
    """dv_j/dx_i = v_j * Y_ij / x_i on the positive orthant, r x n"""
    return _rates(net, x)[:, None] * net.reactant_matrix.T / x[None, :]


def newton_equilibrium(
    net: Network,
    x0,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> np.ndarray:
    """
    Positive equilibrium in the stoichiometric class of ``x0``.

    The system is square: independent rows of S applied to v(x), plus
    K^T (x - x0) = 0 for a basis K of Ker(S^T).
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (net.n,):
        raise ValidationException(f"Initial guess must have {net.n} entries")
    if np.any(x0 <= 0):
        raise DomainException("Newton's method needs a strictly positive starting point")

    rows = linalg.independent_rows(net.S)
    S_rows = net.S[rows]
    K = linalg.left_nullspace(net.S)
    anchor = K.T @ x0
    f = _polynomial_field(net)

    def residual(x: np.ndarray) -> np.ndarray:
        return np.concatenate([S_rows @ _rates(net, x), K.T @ x - anchor])

    x = x0.copy()
    F = residual(x)
    for iteration in range(max_iter + 1):
        field_residual = float(np.max(np.abs(f(x)))) if net.n else 0.0
        class_residual = float(np.max(np.abs(K.T @ x - anchor), initial=0.0))
        logger.debug(f"Newton {iteration}: |Sv|={field_residual:.3e}, class={class_residual:.3e}")
        if field_residual < tol and class_residual < tol:
            return x
        if iteration == max_iter:
            break

        J = np.vstack([S_rows @ _rate_jacobian(net, x), K.T])
        try:
            step = linalg.solve(J, -F, tol=1e-13)
        except SingularMatrixException as exc:
            raise ConvergenceException(
                f"Singular Jacobian at iteration {iteration}", last_iterate=x, residual=field_residual,
                stage="equilibrium",
            ) from exc

        shrinking = step < 0
        alpha = 1.0
        if np.any(shrinking):
            alpha = min(1.0, BOUNDARY_FRACTION * float(np.min(x[shrinking] / -step[shrinking])))
        norm = np.linalg.norm(F)
        for _ in range(40):
            candidate = x + alpha * step
            F_candidate = residual(candidate)
            if np.linalg.norm(F_candidate) <= (1.0 - 1e-4 * alpha) * norm:
                break
            alpha *= 0.5
        x, F = candidate, F_candidate

    raise ConvergenceException(
        f"Newton did not converge in {max_iter} iterations",
        last_iterate=x,
        residual=float(np.max(np.abs(f(x)))),
        stage="equilibrium",
    )


@dataclass(frozen=True)
class LyapunovSpec:
    """G(x) = sum_i d_i (x*_i - x_i - x_i ln(x*_i / x_i)) over ``indices``"""
    x_star: np.ndarray
    weights: np.ndarray
    indices: Tuple[int, ...]

    def __post_init__(self):
        x_star = np.asarray(self.x_star, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "x_star", x_star)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if not self.indices:
            raise ValidationException("A Lyapunov function needs at least one coordinate")
        if weights.shape != (len(self.indices),):
            raise ValidationException("One weight per coordinate is required")
        if np.any(weights <= 0):
            raise ValidationException("Lyapunov weights must be positive")
        if np.any(x_star[list(self.indices)] <= 0):
            raise ValidationException("Reference equilibrium must be positive on the weighted coordinates")

    @classmethod
    def classic(cls, x_star) -> "LyapunovSpec":
        x_star = np.asarray(x_star, dtype=float)
        return cls(x_star=x_star, weights=np.ones(x_star.size), indices=tuple(range(x_star.size)))

    @classmethod
    def weighted(cls, x_star, weights, indices: Optional[Sequence[int]] = None) -> "LyapunovSpec":
        x_star = np.asarray(x_star, dtype=float)
        indices = tuple(range(x_star.size)) if indices is None else tuple(indices)
        return cls(x_star=x_star, weights=np.asarray(weights, dtype=float), indices=indices)


def _on_subset(spec: LyapunovSpec, x) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.shape != spec.x_star.shape:
        raise ValidationException(f"State must have {spec.x_star.size} entries")
    idx = list(spec.indices)
    if np.any(x[idx] <= 0):
        raise DomainException("The pseudo-Helmholtz function needs positive concentrations")
    return x[idx], spec.x_star[idx]


def pseudo_helmholtz(spec: LyapunovSpec, x) -> float:
    xs, ref = _on_subset(spec, x)
    return float(np.sum(spec.weights * (ref - xs - xs * np.log(ref / xs))))


def pseudo_helmholtz_gradient(spec: LyapunovSpec, x) -> np.ndarray:
    xs, ref = _on_subset(spec, x)
    grad = np.zeros(spec.x_star.size)
    grad[list(spec.indices)] = spec.weights * np.log(xs / ref)
    return grad


def basin_hint(x_star, x0) -> bool:
    """G(x0) < sum(x*): the trajectory from x0 stays away from the origin"""
    spec = LyapunovSpec.classic(x_star)
    return pseudo_helmholtz(spec, x0) < float(np.sum(spec.x_star))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    conservation_residual: np.ndarray
    lyapunov: Optional[np.ndarray] = None
    species: Tuple[str, ...] = ()
    aborted: bool = False

    def __len__(self) -> int:
        return self.times.size

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def project(self, indices: Sequence[int]) -> "Trajectory":
        return replace(
            self,
            states=self.states[:, list(indices)],
            species=tuple(self.species[i] for i in indices) if self.species else (),
        )

    def sup_distance(self, other: "Trajectory") -> float:
        if self.states.shape != other.states.shape:
            raise ValidationException("Trajectories are sampled differently")
        return float(np.max(np.abs(self.states - other.states)))

    def to_csv(self, target: Union[str, TextIO, None] = None) -> Optional[str]:
        """Columns t, x1..xn, G, cons_residual; returns the text when no target is given"""
        n = self.states.shape[1]
        G = self.lyapunov if self.lyapunov is not None else np.full(self.times.size, np.nan)
        data = np.column_stack([self.times, self.states, G, self.conservation_residual])
        header = ",".join(["t"] + [f"x{i + 1}" for i in range(n)] + ["G", "cons_residual"])
        buffer = io.StringIO() if target is None else target
        if isinstance(buffer, str):
            with open(buffer, "w", encoding="utf-8") as fh:
                np.savetxt(fh, data, delimiter=",", header=header, comments="", fmt="%.17g")
            return None
        np.savetxt(buffer, data, delimiter=",", header=header, comments="", fmt="%.17g")
        return buffer.getvalue() if target is None else None


def _trajectory(times, states, conserved, lyapunov, species, aborted=False) -> Trajectory:
    states = np.asarray(states, dtype=float)
    if conserved is not None and conserved.size:
        totals = states @ conserved
        residual = np.max(np.abs(totals - totals[0]), axis=1)
    else:
        residual = np.zeros(len(times))
    G = None
    if lyapunov is not None:
        G = np.array([
            pseudo_helmholtz(lyapunov, x) if np.all(x[list(lyapunov.indices)] > 0) else np.nan
            for x in states
        ])
    return Trajectory(
        times=np.asarray(times, dtype=float),
        states=states,
        conservation_residual=residual,
        lyapunov=G,
        species=tuple(species),
        aborted=aborted,
    )


def integrate(
    net: Network,
    x0,
    t_end: float = 10.0,
    dt: float = 1e-3,
    adaptive: bool = False,
    rtol: float = 1e-8,
    conserved: Optional[np.ndarray] = None,
    lyapunov: Optional[LyapunovSpec] = None,
) -> Trajectory:
    """
    Integrate x' = S v(x) from x0 over [0, t_end].

    Fixed-step classic RK4 by default; ``adaptive`` switches to an embedded
    4(5) pair and samples on the same dt grid.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (net.n,):
        raise ValidationException(f"Initial state must have {net.n} entries")
    if np.any(x0 < 0):
        raise DomainException("Initial state must be nonnegative")
    if net.generalized and np.any(x0 <= 0):
        raise DomainException("Generalized networks are integrated from positive states only")
    if t_end <= 0 or dt <= 0:
        raise ValidationException("t_end and dt must be positive")
    C = None if conserved is None else np.asarray(conserved, dtype=float).reshape(net.n, -1)

    steps = max(1, int(np.ceil(t_end / dt - 1e-9)))
    times = np.linspace(0.0, t_end, steps + 1)
    f = _polynomial_field(net)

    if adaptive:
        solution = solve_ivp(
            lambda t, x: f(x), (0.0, t_end), x0, method="RK45",
            t_eval=times, rtol=rtol, atol=rtol * 1e-3,
        )
        states = solution.y.T
        bad = np.flatnonzero(np.any(states < -NEGATIVITY_TOL, axis=1))
        if not solution.success or bad.size:
            stop = bad[0] if bad.size else len(solution.t)
            partial = _trajectory(solution.t[:stop], states[:stop], C, None, net.species_names, aborted=True)
            raise IntegrationException(
                solution.message if not solution.success else f"State left the nonnegative orthant at t={solution.t[stop]:.6g}",
                trajectory=partial, stage="simulation",
            )
        logger.debug(f"Adaptive integration: {solution.nfev} field evaluations")
        return _trajectory(times, states, C, lyapunov, net.species_names)

    states = np.empty((steps + 1, net.n))
    states[0] = x = x0.copy()
    for k in range(steps):
        h = times[k + 1] - times[k]
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.any(x < -NEGATIVITY_TOL) or not np.all(np.isfinite(x)):
            partial = _trajectory(times[:k + 1], states[:k + 1], C, None, net.species_names, aborted=True)
            raise IntegrationException(
                f"State left the nonnegative orthant at t={times[k + 1]:.6g}",
                trajectory=partial, stage="simulation",
            )
        states[k + 1] = x
    return _trajectory(times, states, C, lyapunov, net.species_names)


@dataclass(frozen=True)
class DescentReport:
    max_increase: float
    max_derivative: float
    terminal_distance: float
    values: np.ndarray = field(repr=False)

    def passes(self, tol: float = DESCENT_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.values)))) if self.values.size else 1.0
        return self.max_derivative <= tol and self.max_increase <= tol * scale


def lyapunov_descent_check(
    net: Network,
    spec: LyapunovSpec,
    trajectory: Trajectory,
    target=None,
) -> DescentReport:
    """G along the samples, its analytic derivative grad(G) . f, and the distance to ``target`` at the end"""
    f = _polynomial_field(net)
    values = np.array([pseudo_helmholtz(spec, x) for x in trajectory.states])
    derivatives = np.array([pseudo_helmholtz_gradient(spec, x) @ f(x) for x in trajectory.states])
    increase = float(np.max(np.diff(values), initial=0.0))
    target = spec.x_star if target is None else np.asarray(target, dtype=float)
    distance = float(np.max(np.abs(trajectory.final_state - target)))
    report = DescentReport(
        max_increase=max(increase, 0.0),
        max_derivative=float(np.max(derivatives)),
        terminal_distance=distance,
        values=values,
    )
    if not report.passes():
        logger.warning(
            f"Lyapunov descent violated: dG/dt up to {report.max_derivative:.3e}, "
            f"increase up to {report.max_increase:.3e}"
        )
    return report


def class_equilibrium(recon, x_hat0, tol: float = 1e-13, max_iter: int = NEWTON_MAX_ITER) -> np.ndarray:
    """
    The equilibrium of the reconstruction's class through ``x_hat0``.

    Minimizes phi(u) = sum_i d_i (x*_i e^{u_i} - x0_i u_i) over u in
    Ker(S_hat^T), written as u = N w, by Newton's method with a Cholesky
    solve and backtracking. ``recon`` needs ``network``, ``d`` and
    ``x_hat_star``.
    """
    net: Network = recon.network
    d = np.asarray(recon.d, dtype=float)
    x_star = np.asarray(recon.x_hat_star, dtype=float)
    x0 = np.asarray(x_hat0, dtype=float)
    if x0.shape != x_star.shape or np.any(x0 <= 0):
        raise DomainException("The class anchor must be a positive state of the reconstruction")
    balance = float(np.max(np.abs(complex_balance_residual(net, x_star))))
    if balance >= BALANCE_TOL:
        raise PreconditionException(
            f"Reconstruction is not complex balanced at x_hat* (residual {balance:.3e})", stage="dynamics"
        )

    N = linalg.left_nullspace(net.S)
    if N.shape[1] == 0:
        return x_star.copy()
    N, _ = np.linalg.qr(N)

    def phi(w: np.ndarray) -> float:
        u = N @ w
        return float(np.sum(d * (x_star * np.exp(u) - x0 * u)))

    w = np.zeros(N.shape[1])
    for iteration in range(max_iter):
        e = x_star * np.exp(N @ w)
        grad = N.T @ (d * (e - x0))
        if np.max(np.abs(grad)) < tol * max(1.0, float(np.max(d * x0))):
            break
        H = N.T @ (N * (d * e)[:, None])
        try:
            factor = cho_factor(H)
        except LinAlgError as exc:
            raise ConvergenceException(
                "Hessian of the class potential is not positive definite",
                last_iterate=x_star * np.exp(N @ w), stage="dynamics",
            ) from exc
        step = -cho_solve(factor, grad)
        alpha, current = 1.0, phi(w)
        while phi(w + alpha * step) > current + 1e-4 * alpha * float(grad @ step) and alpha > 1e-12:
            alpha *= 0.5
        w = w + alpha * step
        logger.debug(f"class equilibrium {iteration}: |grad|={np.max(np.abs(grad)):.3e}")

    x_dagger = x_star * np.exp(N @ w)
    projection = float(np.max(np.abs(N @ (N.T @ (d * (x_dagger - x0))))))
    if projection >= PROJECTION_TOL:
        raise ConvergenceException(
            f"Class equilibrium not reached: projection residual {projection:.3e}",
            last_iterate=x_dagger, residual=projection, stage="dynamics",
        )
    return x_dagger
