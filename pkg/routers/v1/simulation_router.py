# routers/v1/simulation_router.py

from fastapi import APIRouter, Depends
from dependency_injector.wiring import inject, Provide

from core.schemas.response import SuccessResponse
from di.container import Container
from services.simulation.simulation_service import SimulationService
from services.simulation.simulation_service_dto import SimulationRead, SimulationRequest

router = APIRouter(tags=["simulations"])


@router.post("/", response_model=SuccessResponse[SimulationRead])
@inject
def simulate(
    request: SimulationRequest,
    simulation_service: SimulationService = Depends(Provide[Container.simulation_service])
):
    """Integrate the network and/or its reverse reconstruction"""
    run = simulation_service.simulate(
        request.text,
        x0=request.x0,
        t_end=request.t_end,
        dt=request.dt,
        adaptive=request.adaptive,
        target=request.target,
        epsilon=request.epsilon,
        radius=request.radius,
        q_target=request.q_target,
    )
    return SuccessResponse.create(
        data=simulation_service.to_read(run),
        message="Simulation finished"
    )
