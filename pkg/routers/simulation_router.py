from fastapi import APIRouter

from routers.v1.simulation_router import router as router_v1

router = APIRouter(prefix="/simulations", tags=["simulations"])

router.include_router(router_v1)
