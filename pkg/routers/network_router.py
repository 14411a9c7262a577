from fastapi import APIRouter

from routers.v1.network_router import router as router_v1

router = APIRouter(prefix="/networks", tags=["networks"])

router.include_router(router_v1)
