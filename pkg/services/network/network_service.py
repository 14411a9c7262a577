# services/network/network_service.py

import logging
from typing import Optional, Sequence

import numpy as np

from core.base_service import BaseService
from core.crn.conservation import find_conserved_matrix, positive_conservation_residual
from core.crn.dynamics import newton_equilibrium
from core.crn.reconstruct import equilibrium_residual
from core.exceptions import BaseAppException
from models import complex_balance_residual, structure_report
from repositories.network.network_repository import NetworkRepository
from services.network.network_service_dto import ConservedRead, EquilibriumRead, StructureRead

logger = logging.getLogger(__name__)

COMPLEX_BALANCE_TOL = 1e-8


class NetworkService(BaseService):
    def __init__(self, network_repo: NetworkRepository, rank_tol: float = 1e-9):
        super().__init__(network_repo)
        self.repository = network_repo
        self.rank_tol = rank_tol

    def info(self, text: str) -> StructureRead:
        """Structural diagnostics, plus complex balance at @equilibrium when the file gives one"""
        net, document = self.parse(text)
        report = structure_report(net)
        residual = None
        if document.equilibrium is not None and all(v > 0 for v in document.equilibrium):
            residual = float(np.max(np.abs(complex_balance_residual(net, document.equilibrium))))
        return StructureRead(
            name=net.name,
            species=net.species_names,
            complexes=[c.format(net.species_names) for c in net.complexes],
            n_species=report.n_species,
            n_reactions=report.n_reactions,
            n_complexes=report.n_complexes,
            linkage_classes=report.linkage_classes,
            weakly_reversible=report.weakly_reversible,
            rank=report.rank,
            deficiency=report.deficiency,
            equilibrium=document.equilibrium,
            complex_balance_residual=residual,
            complex_balanced=None if residual is None else residual < COMPLEX_BALANCE_TOL,
        )

    def conserved(
        self,
        text: str,
        q_target: Optional[int] = None,
        nonfree: Optional[Sequence[str]] = None,
    ) -> ConservedRead:
        net, _ = self.parse(text)
        try:
            structure = find_conserved_matrix(
                net, q_target=q_target, nonfree=self.species_indices(net, nonfree), tol=self.rank_tol
            )
        except BaseAppException as exc:
            raise exc.with_stage("conservation")
        names = net.species_names
        norm, constant = structure.bound()
        return ConservedRead(
            species=names,
            q=structure.q,
            conserved_matrix=structure.C.tolist(),
            permutation=[names[i] for i in structure.permutation],
            free=[names[i] for i in structure.free],
            nonfree=[names[i] for i in structure.nonfree],
            C_l=structure.C_l.tolist(),
            C_r=structure.C_r.tolist(),
            kernel_residual=positive_conservation_residual(net, structure.C),
            elimination_norm=norm,
            neighbourhood_constant=constant,
        )

    def equilibrium(self, text: str, x0: Optional[Sequence[float]] = None) -> EquilibriumRead:
        """Newton from x0, else from the file's @x0, @equilibrium, or all ones"""
        net, document = self.parse(text)
        start = self.state(net, x0, "x0")
        if start is None:
            start = document.x0 or document.equilibrium or [1.0] * net.n
        try:
            x_star = newton_equilibrium(net, start)
        except BaseAppException as exc:
            raise exc.with_stage("equilibrium")
        totals = find_conserved_matrix(net, tol=self.rank_tol).totals(x_star)
        logger.info(f"Equilibrium of {net.name or 'network'}: {x_star.tolist()}")
        return EquilibriumRead(
            species=net.species_names,
            equilibrium=x_star.tolist(),
            residual=equilibrium_residual(net, x_star),
            totals=totals.tolist(),
        )
