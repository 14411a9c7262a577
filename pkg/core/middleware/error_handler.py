import logging
import traceback
from typing import Callable

from fastapi import FastAPI, Request, status
from fastapi.responses import JSONResponse
from numpy.linalg import LinAlgError

from core.exceptions import BaseAppException, ParseException
from core.schemas.response import ErrorResponse

logger = logging.getLogger(__name__)


def _error_content(exc: BaseAppException) -> dict:
    errors = None
    if isinstance(exc, ParseException):
        errors = [{"line": exc.line, "column": exc.column}]
    elif getattr(exc, "errors", None):
        errors = exc.errors
    return ErrorResponse.create(message=str(exc), stage=exc.stage, errors=errors).model_dump()


async def catch_exceptions_middleware(request: Request, call_next: Callable):
    """
    Global exception catching middleware.
    Converts application and numerical errors to the error envelope.
    """
    try:
        return await call_next(request)
    except BaseAppException as exc:
        logger.warning(f"Handled error: {exc.__class__.__name__}. Details: {exc}")
        return JSONResponse(
            status_code=exc.status_code,
            content=_error_content(exc),
            headers=exc.headers,
        )
    except LinAlgError as exc:
        logger.error(f"Linear algebra error: {exc}")
        logger.debug(traceback.format_exc())
        error_response = ErrorResponse.create(message=f"Linear algebra error: {exc}")
        return JSONResponse(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            content=error_response.model_dump(),
        )
    except Exception as exc:
        error_detail = f"Unexpected error: {str(exc)}"
        logger.error(error_detail)
        logger.debug(traceback.format_exc())

        error_response = ErrorResponse.create(message=error_detail)
        return JSONResponse(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            content=error_response.model_dump(),
        )


def setup_exception_handlers(app: FastAPI) -> None:
    """
    Adds exception handlers to the FastAPI application.
    """
    app.middleware("http")(catch_exceptions_middleware)

    @app.exception_handler(BaseAppException)
    async def app_exception_handler(request: Request, exc: BaseAppException) -> JSONResponse:
        logger.warning(f"Handled error: {exc.__class__.__name__}. Details: {exc}")
        return JSONResponse(
            status_code=exc.status_code,
            content=_error_content(exc),
            headers=exc.headers,
        )

    @app.exception_handler(status.HTTP_404_NOT_FOUND)
    async def not_found_handler(request: Request, exc) -> JSONResponse:
        error_response = ErrorResponse.create(
            message=f"Requested resource not found: {request.url.path}"
        )
        return JSONResponse(
            status_code=status.HTTP_404_NOT_FOUND,
            content=error_response.model_dump()
        )

    @app.exception_handler(status.HTTP_405_METHOD_NOT_ALLOWED)
    async def method_not_allowed_handler(request: Request, exc) -> JSONResponse:
        error_response = ErrorResponse.create(
            message=f"Method '{request.method}' not allowed for the requested resource: {request.url.path}"
        )
        return JSONResponse(
            status_code=status.HTTP_405_METHOD_NOT_ALLOWED,
            content=error_response.model_dump()
        )
