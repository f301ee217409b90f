"""
Exception hierarchy for qbo-bench

Every error raised on purpose by the library derives from QBOError so the
CLI can map failures to exit codes in one place.
"""

from pathlib import Path
from typing import Optional, Union


class QBOError(Exception):
    """Base class for all library errors"""


class InvalidArgumentError(QBOError, ValueError):
    """A parameter violates an operation's precondition"""


class DegenerateScheduleError(InvalidArgumentError):
    """An annealing schedule cannot be evaluated (e.g. zero transverse field)"""


class NotFoundError(QBOError, LookupError):
    """An objective or algorithm name is not registered"""


class NonDifferentiablePointError(QBOError, ArithmeticError):
    """Gradient or Laplacian requested at a registered non-smooth locus"""


class DivergenceError(QBOError, FloatingPointError):
    """A simulated path left the finite floats"""

    def __init__(self, step: int, message: Optional[str] = None):
        self.step = step
        super().__init__(message or f"Path diverged to non-finite values at step {step}")


class OutputError(QBOError, OSError):
    """Results could not be written"""

    def __init__(self, path: Union[str, Path], reason: str = ""):
        self.path = Path(path)
        detail = f": {reason}" if reason else ""
        super().__init__(f"Cannot write to {self.path}{detail}")
