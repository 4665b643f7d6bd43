from typing import Optional


class ChaosQCError(ValueError):
    """Base class for every domain error raised by the app package."""


class DimacsParseError(ChaosQCError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BoundExceededError(ChaosQCError):
    pass


class DimensionMismatchError(ChaosQCError):
    pass


class DomainError(ChaosQCError):
    pass
