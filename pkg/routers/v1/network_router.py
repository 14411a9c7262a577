# routers/v1/network_router.py

from fastapi import APIRouter, Depends
from dependency_injector.wiring import inject, Provide

from core.schemas.response import SuccessResponse
from di.container import Container
from services.network.network_service import NetworkService
from services.network.network_service_dto import (
    ConservedRead,
    ConservedRequest,
    EquilibriumRead,
    EquilibriumRequest,
    NetworkRequest,
    StructureRead,
)

router = APIRouter(tags=["networks"])


@router.post("/info", response_model=SuccessResponse[StructureRead])
@inject
def network_info(
    request: NetworkRequest,
    network_service: NetworkService = Depends(Provide[Container.network_service])
):
    """Structure report: complexes, linkage classes, deficiency"""
    report = network_service.info(request.text)
    return SuccessResponse.create(
        data=report,
        message="Network analysed successfully"
    )


@router.post("/conserved", response_model=SuccessResponse[ConservedRead])
@inject
def conserved_matrix(
    request: ConservedRequest,
    network_service: NetworkService = Depends(Provide[Container.network_service])
):
    """Positive conserved matrix and its free / non-free partition"""
    conserved = network_service.conserved(request.text, request.q_target, request.nonfree)
    return SuccessResponse.create(
        data=conserved,
        message=f"Found {conserved.q} conservation law(s)"
    )


@router.post("/equilibrium", response_model=SuccessResponse[EquilibriumRead])
@inject
def equilibrium(
    request: EquilibriumRequest,
    network_service: NetworkService = Depends(Provide[Container.network_service])
):
    """Positive equilibrium in the stoichiometric class of x0"""
    result = network_service.equilibrium(request.text, request.x0)
    return SuccessResponse.create(
        data=result,
        message="Equilibrium found"
    )
