"""Complex balanced reconstructions.

Pipeline: substitute the conservation laws into the free-species field
``g``, pick candidate complexes, solve the linear program for ``D1`` and a
Kirchhoff matrix over the candidates, then check every identity again on a
separate code path (polynomial coefficients, not LP rows) and build the
reverse reconstruction.
"""
import logging
from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.crn.conservation import (
    ConservedStructure,
    ReconstructingMatrix,
    assemble_D,
    find_conserved_matrix,
    substitution_map,
)
from core.exceptions import BaseAppException, PreconditionException, ValidationException
from core.math import linalg
from core.math.lp import LinearProgram, LPStatus, solve_lp
from core.math.poly import PolynomialVector
from models import (
    Complex,
    Network,
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

logger = logging.getLogger(__name__)

EQUILIBRIUM_TOL = 1e-8
PRUNE_TOL = 1e-9
RESIDUAL_TOL = 1e-8
MISMATCH_TOL = 1e-12
RECONSTRUCTION_SPECIES = "Xhat"

VERDICT_STABLE = "locally asymptotically stable"
VERDICT_INCONCLUSIVE = "inconclusive"

Exponent = Tuple[int, ...]


@dataclass(frozen=True)
class CandidateComplexSet:
    exponents: Tuple[Exponent, ...]

    @classmethod
    def of(cls, exponents: Iterable[Sequence[int]]) -> "CandidateComplexSet":
        unique = {tuple(int(v) for v in e) for e in exponents}
        if any(v < 0 for e in unique for v in e):
            raise ValidationException("Candidate complexes must be nonnegative")
        if len({len(e) for e in unique}) > 1:
            raise ValidationException("Candidate complexes have inconsistent lengths")
        return cls(tuple(sorted(unique, key=lambda e: (sum(e), e))))

    @property
    def nvars(self) -> int:
        return len(self.exponents[0]) if self.exponents else 0

    def __len__(self) -> int:
        return len(self.exponents)

    def __contains__(self, exponent) -> bool:
        return tuple(exponent) in self.position

    @property
    def position(self) -> Dict[Exponent, int]:
        return {e: k for k, e in enumerate(self.exponents)}

    @property
    def matrix(self) -> np.ndarray:
        """Z_C, one column per candidate complex"""
        return np.array(self.exponents, dtype=float).T.reshape(self.nvars, len(self))

    def complexes(self) -> List[Complex]:
        return [Complex.from_dense(e) for e in self.exponents]

    def missing(self, g: PolynomialVector) -> List[Exponent]:
        return [e for e in g.support() if tuple(e) not in self.position]


@dataclass(frozen=True)
class CoefficientMismatch:
    species: int
    exponent: Exponent
    expected: float
    actual: float

    @property
    def difference(self) -> float:
        return abs(self.expected - self.actual)


@dataclass(frozen=True)
class ResidualReport:
    dyn_equiv: float
    complex_balance: float
    lower_rows: float
    equilibrium: float
    reverse_field: Optional[float] = None
    mismatches: Tuple[CoefficientMismatch, ...] = ()

    def as_dict(self) -> Dict[str, Optional[float]]:
        return {
            "dyn_equiv": self.dyn_equiv,
            "complex_balance": self.complex_balance,
            "lower_rows": self.lower_rows,
            "equilibrium": self.equilibrium,
            "reverse_field": self.reverse_field,
        }

    def max_residual(self) -> float:
        return max(v for v in self.as_dict().values() if v is not None)

    def passes(self, tol: float = RESIDUAL_TOL) -> bool:
        return self.max_residual() < tol


@dataclass(frozen=True)
class ReconstructionResult:
    candidates: CandidateComplexSet
    L: np.ndarray
    d: np.ndarray
    network: Network
    x_hat_star: np.ndarray
    objective: float
    dyn_equiv_residual: float
    complex_balance_residual: float
    lp_iterations: int = 0


@dataclass(frozen=True)
class Infeasible:
    candidates: CandidateComplexSet
    status: LPStatus
    hint: str


@dataclass(frozen=True)
class ReverseReconstruction:
    network: Network
    d: np.ndarray
    stoichiometry_residual: float


@dataclass
class StabilityCertificate:
    network: Network
    equilibrium: np.ndarray
    structure: ConservedStructure
    verdict: str
    D: Optional[ReconstructingMatrix] = None
    result: Optional[Union[ReconstructionResult, Infeasible]] = None
    reverse: Optional[ReverseReconstruction] = None
    residuals: Optional[ResidualReport] = None
    flags: Dict[str, bool] = field(default_factory=dict)
    bound: Tuple[float, float] = (0.0, 1.0)
    hint: Optional[str] = None

    @property
    def is_stable(self) -> bool:
        return self.verdict == VERDICT_STABLE


def reconstruction_species(p: int) -> List[str]:
    return [f"{RECONSTRUCTION_SPECIES}{i + 1}" for i in range(p)]


def equilibrium_residual(net: Network, x_star) -> float:
    return float(np.max(np.abs(net.S @ mass_action_rates(net, x_star))))


def substituted_field(
    net: Network,
    structure: ConservedStructure,
    x_star,
    require_equilibrium: bool = True,
) -> PolynomialVector:
    """
    g = S_1 v(x) with the non-free species eliminated; one component per free
    species, as polynomials in the free species.
    """
    x_star = np.asarray(x_star, dtype=float)
    if require_equilibrium:
        residual = equilibrium_residual(net, x_star)
        if residual >= EQUILIBRIUM_TOL:
            raise PreconditionException(
                f"x* is not an equilibrium: ||S v(x*)|| = {residual:.3e}", stage="substitution"
            )
    affine = substitution_map(structure, x_star)
    f = vector_field(net).select(structure.free)
    g = f.substitute_affine(structure.nonfree, affine)
    logger.debug(f"Substituted field has {len(g.support())} monomials")
    return g


def default_candidates(
    g: PolynomialVector,
    radius: int = 1,
    extra: Iterable[Sequence[int]] = (),
) -> CandidateComplexSet:
    """Canonical closure of the monomials of g, widened by ``radius - 1`` unit steps."""
    if radius < 1:
        raise ValidationException(f"radius must be at least 1, got {radius}")
    m = g.nvars
    base = {(0,) * m}
    for i, component in enumerate(g):
        for exponent, coefficient in component.items():
            exponent = tuple(int(e) for e in exponent)
            base.add(exponent)
            shifted = list(exponent)
            if coefficient > 0:
                shifted[i] += 1
                base.add(tuple(shifted))
            elif exponent[i] > 0:
                shifted[i] -= 1
                base.add(tuple(shifted))

    frontier = set(base)
    for _ in range(radius - 1):
        grown = set()
        for exponent in frontier:
            for j, step in cartesian(range(m), (1, -1)):
                neighbour = list(exponent)
                neighbour[j] += step
                if neighbour[j] >= 0:
                    grown.add(tuple(neighbour))
        frontier = grown - base
        base |= grown
    base.update(tuple(int(v) for v in e) for e in extra)
    return CandidateComplexSet.of(base)


def _variable_layout(c: int) -> List[Tuple[int, int]]:
    """Off-diagonal Kirchhoff entries (target, source), source-major"""
    return [(rho, j) for j in range(c) for rho in range(c) if rho != j]


def _kirchhoff(c: int, layout: Sequence[Tuple[int, int]], values: np.ndarray) -> np.ndarray:
    L = np.zeros((c, c))
    for (rho, j), value in zip(layout, values):
        L[rho, j] = value
    L[np.diag_indices(c)] = -L.sum(axis=0)
    return L


def _reconstruction_network(candidates: CandidateComplexSet, L: np.ndarray, names: Sequence[str]) -> Network:
    complexes = candidates.complexes()
    reactions = []
    for j, rho in zip(*np.nonzero(L.T)):
        if rho != j:
            reactions.append(Reaction(complexes[j], complexes[rho], to_exact(L[rho, j])))
    return build_matrices(list(names), reactions, name="reconstruction")


def _field_mismatches(expected: PolynomialVector, actual: PolynomialVector) -> List[CoefficientMismatch]:
    out = []
    for i, (p, q) in enumerate(zip(expected, actual)):
        for exponent in sorted(set(p.support()) | set(q.support())):
            a, b = p.coefficient(exponent), q.coefficient(exponent)
            if abs(a - b) > MISMATCH_TOL:
                out.append(CoefficientMismatch(i, tuple(int(e) for e in exponent), a, b))
    return out


def dynamical_residual(g: PolynomialVector, d, recon: Network) -> Tuple[float, List[CoefficientMismatch]]:
    """max coefficient gap between D1 g and Z_C L_C Psi_C of the reconstruction"""
    if recon.n != g.nvars:
        raise ValidationException(
            f"Reconstruction has {recon.n} species but there are {g.nvars} free species"
        )
    expected = g.scale_rows(np.asarray(d, dtype=float))
    actual = complex_centered_field(recon)
    return expected.distance(actual), _field_mismatches(expected, actual)


def solve_P1(
    g: PolynomialVector,
    candidates: CandidateComplexSet,
    x_hat_star,
    epsilon: float = 1e-3,
    prune_tol: float = PRUNE_TOL,
) -> Union[ReconstructionResult, Infeasible]:
    """
    Minimize the sum of reconstruction rate constants subject to coefficient
    matching with D1 g, complex balance at x_hat_star, and eps <= d_i <= 1/eps.
    """
    if not 0 < epsilon < 1:
        raise ValidationException(f"epsilon must lie in (0, 1), got {epsilon}")
    missing = candidates.missing(g)
    if missing:
        raise PreconditionException(
            f"Monomials {missing} of the substituted field are not candidate complexes", stage="lp"
        )
    if all(component.is_zero() for component in g):
        raise PreconditionException("The substituted field vanishes identically", stage="lp")

    x_hat_star = np.asarray(x_hat_star, dtype=float)
    p, c = g.nvars, len(candidates)
    Z = candidates.matrix
    Psi = np.prod(np.power(x_hat_star[:, None], Z), axis=0)
    layout = _variable_layout(c)
    column = {pair: p + k for k, pair in enumerate(layout)}
    n_vars = p + len(layout)

    rows = []
    for i in range(p):
        for j, exponent in enumerate(candidates.exponents):
            row = np.zeros(n_vars)
            for rho in range(c):
                if rho != j:
                    row[column[(rho, j)]] = Z[i, rho] - Z[i, j]
            row[i] = -g[i].coefficient(exponent)
            if np.any(row):
                rows.append(row)
    for rho in range(c):
        row = np.zeros(n_vars)
        for j in range(c):
            if j != rho:
                row[column[(rho, j)]] += Psi[j]
                row[column[(j, rho)]] -= Psi[rho]
        rows.append(row)
    A = np.array(rows)
    A = A[linalg.independent_rows(A)]

    cost = np.concatenate([np.zeros(p), np.ones(len(layout))])
    lower = np.concatenate([np.full(p, epsilon), np.zeros(len(layout))])
    upper = np.concatenate([np.full(p, 1.0 / epsilon), np.full(len(layout), np.inf)])
    logger.info(f"Solving reconstruction LP: {n_vars} variables, {A.shape[0]} constraints, {c} candidates")
    solution = solve_lp(LinearProgram.build(cost, A, np.zeros(A.shape[0]), lower, upper))
    if not solution.is_optimal:
        hint = (
            f"No complex balanced reconstruction over {c} candidate complexes ({solution.status.value}); "
            f"try a larger radius or add candidate complexes. This does not show instability."
        )
        logger.info(hint)
        return Infeasible(candidates=candidates, status=solution.status, hint=hint)

    d = solution.y[:p].copy()
    values = solution.y[p:].copy()
    values[values <= prune_tol] = 0.0
    L = _kirchhoff(c, layout, values)
    recon = _reconstruction_network(candidates, L, reconstruction_species(p))
    dyn, _ = dynamical_residual(g, d, recon)
    balance = float(np.max(np.abs(complex_balance_residual(recon, x_hat_star))))
    logger.info(
        f"Reconstruction: {recon.r} reactions, objective {values.sum():.6g}, "
        f"residuals dyn={dyn:.2e} cb={balance:.2e}"
    )
    return ReconstructionResult(
        candidates=candidates,
        L=L,
        d=d,
        network=recon,
        x_hat_star=x_hat_star,
        objective=float(values.sum()),
        dyn_equiv_residual=dyn,
        complex_balance_residual=balance,
        lp_iterations=solution.iterations,
    )


def lower_rows_residual(net: Network, structure: ConservedStructure) -> float:
    """Largest coefficient of C^T f(x); zero when every column of C is conserved"""
    f = vector_field(net)
    worst = 0.0
    for k in range(structure.q):
        total = None
        for i in range(net.n):
            if structure.C[i, k] != 0:
                term = f[i].scale(float(structure.C[i, k]))
                total = term if total is None else total + term
        if total is not None:
            worst = max(worst, total.max_abs_coefficient())
    return worst


def verify_reconstruction(net: Network, D: ReconstructingMatrix, recon: Network, x_star) -> ResidualReport:
    """Recompute every defining identity of a reconstruction; thresholds are up to the caller."""
    structure = D.structure
    x_star = np.asarray(x_star, dtype=float)
    g = substituted_field(net, structure, x_star, require_equilibrium=False)
    dyn, mismatches = dynamical_residual(g, D.d, recon)
    x_hat_star = x_star[list(structure.free)]
    balance = float(np.max(np.abs(complex_balance_residual(recon, x_hat_star))))
    report = ResidualReport(
        dyn_equiv=dyn,
        complex_balance=balance,
        lower_rows=lower_rows_residual(net, structure),
        equilibrium=equilibrium_residual(net, x_star),
        mismatches=tuple(mismatches),
    )
    if not report.passes():
        logger.warning(
            f"Reconstruction does not verify: dyn_equiv={dyn:.3e}, complex_balance={balance:.3e}"
        )
    return report


def reverse_of(recon: Network, d) -> ReverseReconstruction:
    """Same reactants and rates; products moved to reactant + D1^-1 (product - reactant)."""
    d = np.asarray(d, dtype=float)
    reactions = []
    for reaction in recon.reactions:
        source = reaction.reactant.dense(recon.n)
        target = reaction.product.dense(recon.n)
        shifted = source + (target - source) / d
        reactions.append(Reaction(reaction.reactant, Complex.from_dense(list(shifted)), reaction.rate))
    reverse = build_matrices(recon.species_names, reactions, generalized=True, name="reverse reconstruction")

    expected = recon.S / d[:, None]
    residual = float(np.max(np.abs(reverse.S - expected)) / max(1.0, np.max(np.abs(expected))))
    return ReverseReconstruction(network=reverse, d=d, stoichiometry_residual=residual)


def reverse_reconstruction(recon: ReconstructionResult) -> ReverseReconstruction:
    return reverse_of(recon.network, recon.d)


def detailed_balanced(recon: Network, x_hat_star, tol: float = 1e-9) -> bool:
    """Every reaction reversed, and k_{rho pi} Psi_pi = k_{pi rho} Psi_rho at x_hat_star"""
    Psi = psi(recon, x_hat_star)
    flux = recon.L * Psi[None, :]
    np.fill_diagonal(flux, 0.0)
    scale = max(1.0, float(np.max(np.abs(flux)))) if flux.size else 1.0
    for rho, pi in zip(*np.nonzero(recon.L)):
        if rho != pi and recon.L[pi, rho] <= 0:
            return False
    return bool(np.max(np.abs(flux - flux.T), initial=0.0) <= tol * scale)


def concentration_robust(recon: Network) -> bool:
    """Ker(S_hat^T) = 0: every stoichiometric class holds the same equilibrium"""
    return linalg.rank(recon.S) == recon.n


def _free_exponent(cplx: Complex, structure: ConservedStructure) -> Exponent:
    if not cplx.is_standard:
        raise ValidationException("Candidate complexes need nonnegative integer coefficients")
    nonfree = set(structure.nonfree)
    if any(i in nonfree for i, _ in cplx.coefficients):
        raise ValidationException("Candidate complexes may only contain free species")
    return tuple(int(cplx.get(i)) for i in structure.free)


def _staged(stage: str, action, *args, **kwargs):
    try:
        return action(*args, **kwargs)
    except BaseAppException as exc:
        raise exc.with_stage(stage)


def certify(
    net: Network,
    x_star=None,
    x0=None,
    epsilon: float = 1e-3,
    radius: int = 1,
    q_target: Optional[int] = None,
    nonfree: Optional[Sequence[int]] = None,
    extra_complexes: Sequence[Complex] = (),
    prune_tol: float = PRUNE_TOL,
    residual_tol: float = RESIDUAL_TOL,
) -> StabilityCertificate:
    """Run the whole pipeline and return a certificate; infeasibility yields an inconclusive one."""
    from core.crn.dynamics import newton_equilibrium

    x_star = _staged("equilibrium", _resolve_equilibrium, net, x_star, x0, newton_equilibrium)
    structure = _staged("conservation", find_conserved_matrix, net, q_target=q_target, nonfree=nonfree)
    g = _staged("substitution", substituted_field, net, structure, x_star)
    extra = _staged("candidates", lambda: [_free_exponent(c, structure) for c in extra_complexes])
    candidates = _staged("candidates", default_candidates, g, radius=radius, extra=extra)
    x_hat_star = x_star[list(structure.free)]
    result = _staged("lp", solve_P1, g, candidates, x_hat_star, epsilon=epsilon, prune_tol=prune_tol)

    if isinstance(result, Infeasible):
        return StabilityCertificate(
            network=net, equilibrium=x_star, structure=structure, verdict=VERDICT_INCONCLUSIVE,
            result=result, bound=structure.bound(), hint=result.hint,
        )

    D = _staged("verification", assemble_D, structure, result.d)
    report = _staged("verification", verify_reconstruction, net, D, result.network, x_star)
    reverse = _staged("reverse", reverse_reconstruction, result)
    reverse_field = vector_field(reverse.network).distance(g)
    report = ResidualReport(
        dyn_equiv=report.dyn_equiv,
        complex_balance=report.complex_balance,
        lower_rows=report.lower_rows,
        equilibrium=report.equilibrium,
        reverse_field=reverse_field,
        mismatches=report.mismatches,
    )
    flags = {
        "detailed_balanced": detailed_balanced(result.network, x_hat_star),
        "concentration_robust": concentration_robust(result.network),
        "weakly_reversible": structure_report(result.network).weakly_reversible,
    }
    verdict = VERDICT_STABLE if report.passes(residual_tol) else VERDICT_INCONCLUSIVE
    logger.info(f"Certificate for {net.name or 'network'}: {verdict}")
    return StabilityCertificate(
        network=net,
        equilibrium=x_star,
        structure=structure,
        verdict=verdict,
        D=D,
        result=result,
        reverse=reverse,
        residuals=report,
        flags=flags,
        bound=structure.bound(),
    )


def _resolve_equilibrium(net: Network, x_star, x0, solver) -> np.ndarray:
    if x_star is not None:
        x_star = np.asarray(x_star, dtype=float)
        if np.all(x_star > 0) and equilibrium_residual(net, x_star) < EQUILIBRIUM_TOL:
            return x_star
        logger.warning("Supplied equilibrium does not satisfy S v(x*) = 0; refining it with Newton")
        return solver(net, x_star)
    anchor = np.ones(net.n) if x0 is None else np.asarray(x0, dtype=float)
    return solver(net, anchor)
