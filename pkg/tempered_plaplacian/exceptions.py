#!/usr/bin/env python
# coding: utf-8


class TemperedPLaplacianError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameter(TemperedPLaplacianError, ValueError):
    """A parameter lies outside its admissible range."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ContractViolation(TemperedPLaplacianError):
    """An operation was called on a node or radius it does not accept."""


class KernelDomainError(TemperedPLaplacianError, ValueError):
    """The kernel was asked for its value at a non-positive distance."""


class QuadratureError(TemperedPLaplacianError):
    """Adaptive quadrature did not converge within the allowed depth."""

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class NumericalAbort(TemperedPLaplacianError):
    """A time step produced non-finite values."""

    def __init__(self, message, t=None, step=None):
        super().__init__(message)
        self.t = t
        self.step = step


class SnapshotParseError(TemperedPLaplacianError):
    """A snapshot file could not be read back."""

    def __init__(self, message, line=None):
        if line is not None:
            message = 'line {}: {}'.format(line, message)
        super().__init__(message)
        self.line = line


class ConfigError(TemperedPLaplacianError):
    """A run configuration is malformed or invalid."""

    def __init__(self, message, line=None, column=None, key=None):
        location = []
        if line is not None:
            location.append('line {}'.format(line))
        if column is not None:
            location.append('column {}'.format(column))
        if location:
            message = '{}: {}'.format(', '.join(location), message)
        super().__init__(message)
        self.line = line
        self.column = column
        self.key = key


class PreconditionError(TemperedPLaplacianError):
    """The input of a diagnostic does not satisfy its precondition."""


class ResolutionError(TemperedPLaplacianError):
    """A region requested by a diagnostic contains no grid node."""
