"""Exception hierarchy shared by every module."""

from __future__ import annotations


class PrepivotError(Exception):
    """Base class for all package errors."""


class ParameterError(PrepivotError, ValueError):
    """An argument lies outside its admissible range."""


class DomainError(PrepivotError, ValueError):
    """A probability or similar input lies outside its domain."""


class NumericError(PrepivotError, ArithmeticError):
    """A numerical routine failed to converge or produced a non-finite value."""

    def __init__(self, msg: str, diagnostics: dict | None = None) -> None:
        super().__init__(msg)
        self.diagnostics = dict(diagnostics or {})


class RankError(NumericError):
    """A cross-product block is singular or too ill-conditioned to invert."""

    def __init__(self, msg: str, block: str | None = None, cond: float | None = None) -> None:
        super().__init__(msg, {"block": block, "cond": cond})
        self.block = block
        self.cond = cond


class DegeneracyError(NumericError):
    """A variance that must be positive is not."""


class BandwidthError(NumericError):
    """A kernel window contains no design points."""


class CapabilityError(PrepivotError, NotImplementedError):
    """The requested computation is not supported for this configuration."""
