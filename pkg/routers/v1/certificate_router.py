# routers/v1/certificate_router.py

from fastapi import APIRouter, Depends, status
from dependency_injector.wiring import inject, Provide

from core.schemas.response import SuccessResponse
from di.container import Container
from services.certificate.certificate_service import CertificateService
from services.certificate.certificate_service_dto import (
    Certificate,
    CertifyRequest,
    VerificationRead,
    VerifyRequest,
)

router = APIRouter(tags=["certificates"])


@router.post("/", response_model=SuccessResponse[Certificate], status_code=status.HTTP_201_CREATED)
@inject
def create_certificate(
    request: CertifyRequest,
    certificate_service: CertificateService = Depends(Provide[Container.certificate_service])
):
    """Compute a complex balanced reconstruction and its stability certificate"""
    certificate = certificate_service.certify_text(
        request.text,
        epsilon=request.epsilon,
        radius=request.radius,
        q_target=request.q_target,
        nonfree=request.nonfree,
        extra_complexes=request.extra_complexes,
    )
    return SuccessResponse.create(
        data=certificate,
        message=f"Verdict: {certificate.verdict}"
    )


@router.post("/verify", response_model=SuccessResponse[VerificationRead])
@inject
def verify_certificate(
    request: VerifyRequest,
    certificate_service: CertificateService = Depends(Provide[Container.certificate_service])
):
    """Recompute the residuals of a certificate"""
    verification = certificate_service.verify(request.certificate, request.text)
    return SuccessResponse.create(
        data=verification,
        message=f"Verdict: {verification.verdict}"
    )
