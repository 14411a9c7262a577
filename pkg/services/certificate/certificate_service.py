# services/certificate/certificate_service.py

import logging
from typing import List, Optional, Sequence

import numpy as np

from core.base_service import BaseService
from core.crn.conservation import assemble_D, choose_partition, positive_conservation_residual
from core.crn.parser import parse_complex, serialize_network
from core.crn.reconstruct import (
    VERDICT_INCONCLUSIVE,
    VERDICT_STABLE,
    ReconstructionResult,
    StabilityCertificate,
    certify,
    concentration_robust,
    detailed_balanced,
    reverse_of,
    substituted_field,
    verify_reconstruction,
)
from core.exceptions import BaseAppException, ValidationException
from core.math.poly import Polynomial
from models import Network, Reaction, build_matrices, structure_report, to_exact, vector_field
from repositories.network.network_repository import NetworkRepository
from services.certificate.certificate_service_dto import (
    BoundRead,
    Certificate,
    FlagsRead,
    MismatchRead,
    ReactionRead,
    ReconstructionRead,
    ResidualsRead,
    ReverseReconstructionRead,
    VerificationRead,
)

logger = logging.getLogger(__name__)


def _reactions(net: Network) -> List[ReactionRead]:
    names = net.species_names
    return [
        ReactionRead(
            reactant=reaction.reactant.format(names),
            product=reaction.product.format(names),
            rate=float(reaction.rate),
        )
        for reaction in net.reactions
    ]


class CertificateService(BaseService):
    def __init__(
        self,
        network_repo: NetworkRepository,
        epsilon: float = 1e-3,
        radius: int = 1,
        q_target: Optional[int] = None,
        prune_tol: float = 1e-9,
        residual_tol: float = 1e-8,
    ):
        super().__init__(network_repo)
        self.repository = network_repo
        self.epsilon = epsilon
        self.radius = radius
        self.q_target = q_target
        self.prune_tol = prune_tol
        self.residual_tol = residual_tol

    def certify_text(
        self,
        text: str,
        epsilon: Optional[float] = None,
        radius: Optional[int] = None,
        q_target: Optional[int] = None,
        nonfree: Optional[Sequence[str]] = None,
        extra_complexes: Sequence[str] = (),
    ) -> Certificate:
        """Run the reconstruction pipeline on network text and return the certificate document"""
        net, document = self.parse(text)
        try:
            extra = [parse_complex(c, net.species_names) for c in extra_complexes]
        except BaseAppException as exc:
            raise exc.with_stage("candidates")
        result = certify(
            net,
            x_star=document.equilibrium,
            x0=document.x0,
            epsilon=self.epsilon if epsilon is None else epsilon,
            radius=self.radius if radius is None else radius,
            q_target=self.q_target if q_target is None else q_target,
            nonfree=self.species_indices(net, nonfree),
            extra_complexes=extra,
            prune_tol=self.prune_tol,
            residual_tol=self.residual_tol,
        )
        return self.to_certificate(result, text)

    def certify_file(self, path, **options) -> Certificate:
        return self.certify_text(self.repository.read_network(path), **options)

    def to_certificate(self, result: StabilityCertificate, text: str) -> Certificate:
        net = result.network
        names = net.species_names
        structure = result.structure
        norm, constant = result.bound
        certificate = Certificate(
            network=text,
            name=net.name,
            equilibrium=result.equilibrium.tolist(),
            conserved_matrix=structure.C.tolist(),
            permutation=[names[i] for i in structure.permutation],
            nonfree=[names[i] for i in structure.nonfree],
            bound=BoundRead(elimination_norm=norm, constant=constant),
            verdict=result.verdict,
            hint=result.hint,
        )
        if not isinstance(result.result, ReconstructionResult):
            return certificate

        recon = result.result
        certificate.D = result.D.in_species_order().tolist()
        certificate.reconstruction = ReconstructionRead(
            species=recon.network.species_names,
            complexes=[c.format(recon.network.species_names) for c in recon.candidates.complexes()],
            kirchhoff=recon.L.tolist(),
            reactions=_reactions(recon.network),
            d=recon.d.tolist(),
        )
        certificate.reverse_reconstruction = ReverseReconstructionRead(
            text=serialize_network(result.reverse.network),
            reactions=_reactions(result.reverse.network),
            stoichiometry_residual=result.reverse.stoichiometry_residual,
        )
        certificate.residuals = ResidualsRead(**result.residuals.as_dict())
        certificate.flags = FlagsRead(**result.flags)
        certificate.objective = recon.objective
        return certificate

    def reconstruction_network(self, certificate: Certificate) -> Network:
        section = certificate.reconstruction
        if section is None:
            raise ValidationException("Certificate has no reconstruction", stage="verify")
        species = section.species
        reactions = [
            Reaction(parse_complex(r.reactant, species), parse_complex(r.product, species), to_exact(r.rate))
            for r in section.reactions
        ]
        return build_matrices(species, reactions, name="reconstruction")

    def verify(self, certificate: Certificate, text: Optional[str] = None) -> VerificationRead:
        """Recompute every residual of ``certificate`` against the network"""
        net, _ = self.parse(text or certificate.network)
        if len(certificate.equilibrium) != net.n:
            raise ValidationException(f"Certificate equilibrium has {len(certificate.equilibrium)} entries for {net.n} species")
        try:
            recon = self.reconstruction_network(certificate)
            C = np.asarray(certificate.conserved_matrix, dtype=float).reshape(net.n, -1)
            structure = choose_partition(C, nonfree=self.species_indices(net, certificate.nonfree))
            D = assemble_D(structure, certificate.reconstruction.d)
            x_star = np.asarray(certificate.equilibrium, dtype=float)
            report = verify_reconstruction(net, D, recon, x_star)
            g = substituted_field(net, structure, x_star, require_equilibrium=False)
            reverse = reverse_of(recon, D.d)
        except BaseAppException as exc:
            raise exc.with_stage("verify")

        reverse_field = vector_field(reverse.network).distance(g)
        residuals = ResidualsRead(**{**report.as_dict(), "reverse_field": reverse_field})
        D_mismatch = None
        if certificate.D is not None:
            D_mismatch = float(np.max(np.abs(D.in_species_order() - np.asarray(certificate.D, dtype=float))))
        kernel = positive_conservation_residual(net, C)

        free_names = [net.species_names[i] for i in structure.free]
        mismatches = [
            MismatchRead(
                species=free_names[m.species],
                monomial=Polynomial.monomial(m.exponent).format(free_names),
                expected=m.expected,
                actual=m.actual,
                difference=m.difference,
            )
            for m in report.mismatches
        ]
        x_hat_star = x_star[list(structure.free)]
        checks = [max(v for v in residuals.model_dump().values() if v is not None), kernel]
        if D_mismatch is not None:
            checks.append(D_mismatch)
        verdict = VERDICT_STABLE if max(checks) < self.residual_tol else VERDICT_INCONCLUSIVE
        if verdict != VERDICT_STABLE:
            logger.warning(
                f"Certificate {certificate.name or ''} does not verify: "
                f"dyn_equiv={residuals.dyn_equiv:.3e}, complex_balance={residuals.complex_balance:.3e}"
            )
        return VerificationRead(
            name=certificate.name,
            residuals=residuals,
            mismatches=mismatches,
            D=D.in_species_order().tolist(),
            D_mismatch=D_mismatch,
            kernel_residual=kernel,
            flags=FlagsRead(
                detailed_balanced=detailed_balanced(recon, x_hat_star),
                concentration_robust=concentration_robust(recon),
                weakly_reversible=structure_report(recon).weakly_reversible,
            ),
            verdict=verdict,
        )

    def save(self, path, certificate: Certificate):
        return self.repository.save_certificate(path, certificate)
