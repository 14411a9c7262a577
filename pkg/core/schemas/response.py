from enum import Enum
from typing import Any, Dict, Generic, List, Optional, TypeVar

from pydantic import BaseModel, Field

T = TypeVar('T')


class ResponseStatus(str, Enum):
    SUCCESS = "success"
    ERROR = "error"


class BaseResponseModel(BaseModel, Generic[T]):
    """
    Envelope shared by every API response.

    Attributes:
        status: success or error
        message: optional human readable message
        data: payload, e.g. a certificate or a structure report
    """
    status: ResponseStatus = Field(default=ResponseStatus.SUCCESS)
    message: Optional[str] = Field(default=None, description="Optional human readable message")
    data: Optional[T] = Field(default=None, description="Response payload")


class SuccessResponse(BaseResponseModel[T]):
    @classmethod
    def create(cls, data: T = None, message: str = None) -> "SuccessResponse":
        return cls(status=ResponseStatus.SUCCESS, message=message, data=data)


class ErrorResponse(BaseResponseModel):
    """Error envelope; ``stage`` names the pipeline step that failed"""
    status: ResponseStatus = Field(default=ResponseStatus.ERROR)
    stage: Optional[str] = Field(default=None, description="Pipeline stage, e.g. parse or conservation")
    errors: Optional[List[Dict[str, Any]]] = Field(
        default=None,
        description="Error locations, e.g. line and column of a parse error"
    )

    @classmethod
    def create(
        cls,
        message: str,
        stage: Optional[str] = None,
        errors: List[Dict[str, Any]] = None
    ) -> "ErrorResponse":
        return cls(status=ResponseStatus.ERROR, message=message, stage=stage, errors=errors or None)
