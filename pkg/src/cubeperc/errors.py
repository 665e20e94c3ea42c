class CubePercError(Exception):
    pass


class GeometryMismatchError(CubePercError, ValueError):
    pass


class DegenerateLayoutError(CubePercError, ValueError):
    pass


class ResourceCapError(CubePercError):
    """A run would exceed a hard resource cap (dense storage, caps on sizes)."""


class InvariantViolation(CubePercError, AssertionError):
    """A checked structural or numerical invariant failed at runtime."""


class ConvergenceError(CubePercError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
