from dependency_injector import containers, providers

from repositories.network.network_repository import NetworkRepository
from services.certificate.certificate_service import CertificateService
from services.network.network_service import NetworkService
from services.simulation.simulation_service import SimulationService
from settings import settings


class Container(containers.DeclarativeContainer):
    wiring_config = containers.WiringConfiguration(
        packages=["routers"]
    )

    # Configuration
    config = providers.Configuration()

    # Reconstruction settings
    config.epsilon.from_value(settings.epsilon)
    config.radius.from_value(settings.radius)
    config.q_target.from_value(settings.q_target)

    # Integration settings
    config.dt.from_value(settings.dt)
    config.t_end.from_value(settings.t_end)
    config.adaptive_rtol.from_value(settings.adaptive_rtol)

    # Numerical thresholds
    config.rank_tol.from_value(settings.rank_tol)
    config.prune_tol.from_value(settings.prune_tol)
    config.residual_tol.from_value(settings.residual_tol)

    config.network_dir.from_value(settings.network_dir)

    # Repositories
    network_repository = providers.Factory(
        NetworkRepository,
        base_dir=config.network_dir
    )

    # Services
    network_service = providers.Factory(
        NetworkService,
        network_repo=network_repository,
        rank_tol=config.rank_tol,
    )

    certificate_service = providers.Factory(
        CertificateService,
        network_repo=network_repository,
        epsilon=config.epsilon,
        radius=config.radius,
        q_target=config.q_target,
        prune_tol=config.prune_tol,
        residual_tol=config.residual_tol,
    )

    simulation_service = providers.Factory(
        SimulationService,
        network_repo=network_repository,
        t_end=config.t_end,
        dt=config.dt,
        rtol=config.adaptive_rtol,
        epsilon=config.epsilon,
        radius=config.radius,
    )
