# services/simulation/simulation_service.py

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from core.base_service import BaseService
from core.crn.conservation import find_conserved_matrix
from core.crn.dynamics import (
    DescentReport,
    LyapunovSpec,
    Trajectory,
    basin_hint,
    class_equilibrium,
    integrate,
    lyapunov_descent_check,
    newton_equilibrium,
)
from core.crn.reconstruct import ReconstructionResult, certify
from core.exceptions import BaseAppException, PreconditionException, ValidationException
from repositories.network.network_repository import NetworkRepository
from services.simulation.simulation_service_dto import (
    DescentRead,
    SimulationRead,
    SimulationTarget,
    TrajectoryRead,
)

logger = logging.getLogger(__name__)


@dataclass
class SimulationRun:
    name: Optional[str]
    equilibrium: np.ndarray
    basin_hint: bool
    trajectories: Dict[str, Trajectory] = field(default_factory=dict)
    descent: Optional[DescentReport] = None
    class_equilibrium: Optional[np.ndarray] = None
    equivalence_gap: Optional[float] = None


def _optional(values: Optional[np.ndarray]):
    if values is None:
        return None
    return [None if math.isnan(v) else float(v) for v in values]


class SimulationService(BaseService):
    def __init__(
        self,
        network_repo: NetworkRepository,
        t_end: float = 10.0,
        dt: float = 1e-3,
        rtol: float = 1e-8,
        epsilon: float = 1e-3,
        radius: int = 1,
    ):
        super().__init__(network_repo)
        self.repository = network_repo
        self.t_end = t_end
        self.dt = dt
        self.rtol = rtol
        self.epsilon = epsilon
        self.radius = radius

    def simulate(
        self,
        text: str,
        x0: Optional[Sequence[float]] = None,
        t_end: Optional[float] = None,
        dt: Optional[float] = None,
        adaptive: bool = False,
        target: SimulationTarget = "original",
        epsilon: Optional[float] = None,
        radius: Optional[int] = None,
        q_target: Optional[int] = None,
    ) -> SimulationRun:
        """
        Integrate the network, its reverse reconstruction, or both from ``x0``.

        The reverse reconstruction starts from the free coordinates of ``x0``
        and is certified at the equilibrium of x0's stoichiometric class, with
        ``epsilon``, ``radius`` and ``q_target`` falling back to the service defaults.
        """
        net, document = self.parse(text)
        start = self.state(net, x0, "x0")
        if start is None:
            if document.x0 is None:
                raise ValidationException("An initial state is required: pass x0 or add @x0 to the file")
            start = np.asarray(document.x0, dtype=float)
        options = dict(
            t_end=self.t_end if t_end is None else t_end,
            dt=self.dt if dt is None else dt,
            adaptive=adaptive,
            rtol=self.rtol,
        )

        if target == "original":
            try:
                x_star = newton_equilibrium(net, start)
            except BaseAppException as exc:
                raise exc.with_stage("equilibrium")
            structure = find_conserved_matrix(net)
            run = SimulationRun(name=net.name, equilibrium=x_star, basin_hint=self._basin_hint(x_star, start))
            run.trajectories["original"] = integrate(
                net, start, conserved=structure.C, lyapunov=self._classic(x_star), **options
            )
            return run

        result = certify(
            net,
            x0=start,
            epsilon=self.epsilon if epsilon is None else epsilon,
            radius=self.radius if radius is None else radius,
            q_target=q_target,
        )
        if not isinstance(result.result, ReconstructionResult):
            raise PreconditionException(
                f"No complex balanced reconstruction to simulate: {result.hint}", stage="simulation"
            )
        recon = result.result
        free = list(result.structure.free)
        x_hat0 = start[free]
        if np.any(x_hat0 <= 0):
            raise ValidationException("The reverse reconstruction needs positive free coordinates", stage="simulation")

        run = SimulationRun(
            name=net.name, equilibrium=result.equilibrium, basin_hint=self._basin_hint(result.equilibrium, start)
        )
        reverse_net = result.reverse.network
        spec = LyapunovSpec.weighted(recon.x_hat_star, recon.d)
        reverse = integrate(reverse_net, x_hat0, lyapunov=spec, **options)
        run.class_equilibrium = class_equilibrium(recon, x_hat0)
        run.descent = lyapunov_descent_check(reverse_net, spec, reverse, target=run.class_equilibrium)

        if target == "both":
            original = integrate(
                net, start, conserved=result.structure.C,
                lyapunov=self._classic(result.equilibrium), **options
            )
            run.trajectories["original"] = original
            run.equivalence_gap = original.project(free).sup_distance(reverse)
            logger.info(f"Reverse reconstruction tracks the original within {run.equivalence_gap:.3e}")
        run.trajectories["reverse"] = reverse
        return run

    @staticmethod
    def _classic(x_star: np.ndarray) -> Optional[LyapunovSpec]:
        if np.any(x_star <= 0):
            return None
        return LyapunovSpec.classic(x_star)

    @staticmethod
    def _basin_hint(x_star: np.ndarray, x0: np.ndarray) -> bool:
        if np.any(x_star <= 0) or np.any(x0 <= 0):
            return False
        return basin_hint(x_star, x0)

    @staticmethod
    def to_read(run: SimulationRun) -> SimulationRead:
        trajectories = [
            TrajectoryRead(
                label=label,
                species=list(trajectory.species),
                times=trajectory.times.tolist(),
                states=trajectory.states.tolist(),
                lyapunov=_optional(trajectory.lyapunov),
                conservation_residual=trajectory.conservation_residual.tolist(),
                aborted=trajectory.aborted,
            )
            for label, trajectory in run.trajectories.items()
        ]
        descent = None
        if run.descent is not None:
            descent = DescentRead(
                max_increase=run.descent.max_increase,
                max_derivative=run.descent.max_derivative,
                terminal_distance=run.descent.terminal_distance,
                passes=run.descent.passes(),
            )
        return SimulationRead(
            name=run.name,
            equilibrium=run.equilibrium.tolist(),
            basin_hint=run.basin_hint,
            trajectories=trajectories,
            descent=descent,
            class_equilibrium=None if run.class_equilibrium is None else run.class_equilibrium.tolist(),
            equivalence_gap=run.equivalence_gap,
        )

    def export(self, run: SimulationRun, out_dir, stem: str) -> Dict[str, str]:
        """Write one CSV per trajectory as ``<stem>_<label>.csv`` under ``out_dir``"""
        written = {}
        for label, trajectory in run.trajectories.items():
            path = self.repository.save_trajectory(f"{out_dir}/{stem}_{label}.csv", trajectory)
            written[label] = str(path)
        return written
