from fastapi import APIRouter

from routers.v1.certificate_router import router as router_v1

router = APIRouter(prefix="/certificates", tags=["certificates"])

router.include_router(router_v1)
