# -*- coding: utf-8 -*-
"""
Exceptions raised by the tower laboratory.

Every numerical failure carries the quantity that triggered it so the
command line can report it without re-running anything.
"""


class LabError(Exception):
    """Base class of every error raised by this package."""


class DomainError(LabError, ValueError):
    """A point or argument lies outside the domain of a map."""


class ConvergenceError(LabError):

    def __init__(self, message, residual=None, iterations=None):
        super(ConvergenceError, self).__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConfigError(LabError):
    """Inconsistent or missing experiment configuration."""


class NotAperiodic(ConfigError):

    def __init__(self, message, cap=None):
        super(NotAperiodic, self).__init__(message)
        self.cap = cap


class SequenceExhausted(LabError):

    def __init__(self, message, length=None):
        super(SequenceExhausted, self).__init__(message)
        self.length = length


class CapExceeded(LabError):

    def __init__(self, message, cap=None, partial=None):
        super(CapExceeded, self).__init__(message)
        self.cap = cap
        self.partial = partial


class DegenerateSupport(LabError):
    """Too few distinct values inside a fitting window."""


class DegenerateWindow(LabError):
    """A log-log fit was requested on too few or non-positive points."""


class LeafMismatch(LabError):
    """Two points were expected on a common stable or unstable leaf."""


class InvalidLevel(LabError):
    """A tower point with level outside [0, R(base))."""


class MassLeak(LabError):

    def __init__(self, message, row=None, mass=None):
        super(MassLeak, self).__init__(message)
        self.row = row
        self.mass = mass


class NoConvergence(LabError):

    def __init__(self, message, history=None):
        super(NoConvergence, self).__init__(message)
        self.history = history if history is not None else []


class ShapeMismatch(LabError, ValueError):
    """Arrays handed to an estimator disagree in shape."""


class NegativeDensity(LabError):

    def __init__(self, message, cell=None, value=None):
        super(NegativeDensity, self).__init__(message)
        self.cell = cell
        self.value = value


class InsufficientSamples(LabError):
    """Sample size below a precondition, or a CI wider than requested."""


class InconclusiveResult(LabError):
    """An estimate exists but its confidence interval is too wide to judge."""


class ConvergenceWarning(UserWarning):
    """A truncated series or product has not settled to tolerance."""
