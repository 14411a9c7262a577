import logging
from fastapi import FastAPI, APIRouter
from fastapi.middleware.cors import CORSMiddleware

from di.container import Container
from settings import settings
from routers import network_router, certificate_router, simulation_router
from core.middleware.error_handler import setup_exception_handlers

# Configure logging
logging.basicConfig(level=settings.log_level)
logger = logging.getLogger(__name__)


def create_app() -> FastAPI:
    app = FastAPI(
        title="CRN Reconstruct API",
        description="Stability certificates for mass action reaction networks via complex balanced reconstructions",
        version="0.1.0"
    )

    # Configure CORS
    app.add_middleware(
        CORSMiddleware,
        allow_origins=settings.allowed_origins or ["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    setup_exception_handlers(app)

    # Create and configure the DI container
    container = Container()
    app.container = container

    container.wire(
        modules=[
            "routers.v1.network_router",
            "routers.v1.certificate_router",
            "routers.v1.simulation_router",
        ]
    )

    api_v1_router = APIRouter(prefix="/api/v1")
    api_v1_router.include_router(network_router.router)
    api_v1_router.include_router(certificate_router.router)
    api_v1_router.include_router(simulation_router.router)
    app.include_router(api_v1_router)

    @app.get("/")
    def root():
        """Health check endpoint"""
        return {"status": "online", "message": "CRN Reconstruct API is running"}

    logger.info(f"API ready ({settings.environment})")
    return app


app = create_app()
