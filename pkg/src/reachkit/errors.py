"""Exception types shared by every reachkit module."""


class ReachKitError(Exception):
    """Base class for all reachkit errors."""


class ValidationError(ReachKitError, ValueError):
    """Invalid input. Carries a machine-readable code and the offending field."""

    def __init__(self, detail, field=None, code="invalid"):
        super().__init__(detail)
        self.code = code
        self.field = field
        self.detail = detail

    def to_dict(self):
        return {"code": self.code, "field": self.field, "detail": self.detail}


class CapabilityError(ReachKitError):
    """The request is well-formed but outside the supported envelope."""

    def __init__(self, detail, field=None):
        super().__init__(detail)
        self.code = "capability"
        self.field = field
        self.detail = detail

    def to_dict(self):
        return {"code": self.code, "field": self.field, "detail": self.detail}


class NumericError(ReachKitError, ArithmeticError):
    """Non-finite values reached a numeric kernel."""
