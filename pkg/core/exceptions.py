from typing import Any, Dict, List, Optional

from fastapi import HTTPException, status


class BaseAppException(HTTPException):
    """
    Base application exception class. All custom application exceptions should inherit from this class.

    The same exceptions are raised by the numerical core, the CLI and the HTTP layer; the CLI maps
    them to `exit_code`, the HTTP layer to `status_code`.
    """
    status_code: int = status.HTTP_500_INTERNAL_SERVER_ERROR
    detail: str = "Unknown error occurred."
    headers: Optional[Dict[str, Any]] = None
    exit_code: int = 1
    stage: Optional[str] = None

    def __init__(
        self,
        detail: Optional[str] = None,
        headers: Optional[Dict[str, Any]] = None,
        stage: Optional[str] = None,
        **kwargs
    ):
        """
        Args:
            detail: Description about the error
            headers: HTTP response headers
            stage: Pipeline stage that failed (e.g. "conservation")
            **kwargs: Additional context information (can be added to the error message)
        """
        self.extra_info = kwargs
        if stage is not None:
            self.stage = stage

        # If detail is provided, use it instead of the class default value
        actual_detail = detail if detail is not None else self.detail

        # If there is additional info and detail is a string, enrich the detail
        if self.extra_info and isinstance(actual_detail, str):
            actual_detail = f"{actual_detail} Extra info: {self.extra_info}"

        actual_headers = headers if headers is not None else self.headers

        super().__init__(
            status_code=self.status_code,
            detail=actual_detail,
            headers=actual_headers
        )

    def __str__(self) -> str:
        if self.stage:
            return f"[{self.stage}] {self.detail}"
        return str(self.detail)

    def with_stage(self, stage: str) -> "BaseAppException":
        """Label the exception with a pipeline stage unless it already carries one"""
        if self.stage is None:
            self.stage = stage
        return self


class NotFoundException(BaseAppException):
    """Resource not found error"""
    status_code = status.HTTP_404_NOT_FOUND
    detail = "Resource not found"


class ValidationException(BaseAppException):
    """Data validation error"""
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    detail = "Validation error"

    def __init__(
        self,
        detail: Optional[str] = None,
        errors: Optional[List[Dict[str, Any]]] = None,
        **kwargs
    ):
        """
        Args:
            detail: General description about the error
            errors: List of validation errors
            **kwargs: Additional context information
        """
        self.errors = errors
        if errors:
            super().__init__(detail=detail, validation_errors=errors, **kwargs)
        else:
            super().__init__(detail=detail, **kwargs)


class ParseException(ValidationException):
    """Syntax error in a reaction network document"""
    detail = "Could not parse network"

    def __init__(self, message: str, line: int, column: int, **kwargs):
        self.line = line
        self.column = column
        super().__init__(detail=f"line {line}, column {column}: {message}", stage="parse", **kwargs)


class DomainException(BaseAppException):
    """Argument outside the domain of a rate law or Lyapunov function"""
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    detail = "Argument outside the function domain"


class SingularMatrixException(BaseAppException):
    """Linear system is singular under the rank tolerance"""
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    detail = "Matrix is singular"

    def __init__(self, rank: int, size: int, detail: Optional[str] = None, **kwargs):
        self.rank = rank
        self.size = size
        super().__init__(
            detail=detail or f"Matrix is singular: numerical rank {rank} < {size}",
            **kwargs
        )


class UnsupportedSubstitutionException(BaseAppException):
    """Affine substitution into a non-integer power"""
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    detail = "Substitution into a non-integer exponent is not supported"


class PreconditionException(BaseAppException):
    """Input violates the precondition of a pipeline stage"""
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    detail = "Precondition violated"


class ConvergenceException(BaseAppException):
    """Iterative solver did not converge"""
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    detail = "Iteration did not converge"

    def __init__(self, detail: Optional[str] = None, last_iterate=None, residual: Optional[float] = None, **kwargs):
        self.last_iterate = last_iterate
        self.residual = residual
        super().__init__(detail=detail, **kwargs)


class IntegrationException(BaseAppException):
    """Trajectory left the nonnegative orthant"""
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    detail = "Integration aborted"

    def __init__(self, detail: Optional[str] = None, trajectory=None, **kwargs):
        self.trajectory = trajectory
        super().__init__(detail=detail, **kwargs)
