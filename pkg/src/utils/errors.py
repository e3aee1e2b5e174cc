# src/utils/errors.py

"""
Exception types raised across the toolkit.

Every error subclasses ValueError or RuntimeError, so callers that only
catch the builtin types keep working.
"""

from typing import Sequence


class DiagramSyntaxError(ValueError):
    """A line of diagram text could not be parsed."""

    def __init__(self, line_number: int, line: str, reason: str):
        self.line_number = line_number
        self.line = line
        self.reason = reason
        super().__init__(f"Line {line_number}: {reason}: {line!r}")


class DiagramCycleError(ValueError):
    """The directed part of a diagram contains a cycle."""

    def __init__(self, cycle: Sequence[str]):
        self.cycle = list(cycle)
        path = ' -> '.join(self.cycle + self.cycle[:1])
        super().__init__(f"Directed cycle: {path}")


class DuplicateEdgeError(ValueError):
    pass


class UnknownVariableError(ValueError):

    def __init__(self, names):
        self.names = sorted(names)
        super().__init__(f"Unknown variable(s): {', '.join(self.names)}")


class StateSpaceTooLargeError(ValueError):
    pass


class PositivityError(ValueError):
    """A conditional was requested on a zero-probability event."""
    pass


class SupportError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class DomainError(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    pass


class WideningError(RuntimeError):
    """Gap widening did not reach its threshold within the step budget."""
    pass


class TrainingAbortedError(RuntimeError):
    """Training produced a non-finite loss and was stopped."""

    def __init__(self, epoch: int, detail: str):
        self.epoch = epoch
        self.detail = detail
        super().__init__(f"Training aborted at epoch {epoch}: {detail}")
