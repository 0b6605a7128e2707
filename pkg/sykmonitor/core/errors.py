"""
errors.py - Exception hierarchy for sykmonitor

Every error raised on purpose by the library derives from SykMonitorError,
so callers (and the command line) can catch one type.
"""


class SykMonitorError(Exception):
    """Base class for all sykmonitor errors"""


class PreconditionError(SykMonitorError, ValueError):
    """An argument violates a documented precondition"""


class DimensionError(PreconditionError):
    """Operands disagree on qubit count or array shape"""


class FeasibilityError(PreconditionError):
    """The requested dense object would be too large to build"""


class UnsupportedPartitionError(PreconditionError):
    """Partial traces are only supported over contiguous site ranges"""


class OutOfRangeError(PreconditionError):
    """A requested time lies outside the sampled grid"""


class AlignmentError(SykMonitorError, ValueError):
    """Runs that should share a time grid do not"""


class ConfigError(SykMonitorError, ValueError):
    """
    Invalid configuration

    Args:
        fields (list): (field, problem) pairs, one per offending field
    """

    def __init__(self, fields):
        self.fields = list(fields)
        lines = [f"{name}: {problem}" for name, problem in self.fields]
        super().__init__("invalid configuration\n  " + "\n  ".join(lines))


class NumericalDegeneracyError(SykMonitorError, ArithmeticError):
    """A quantity that must be positive came out numerically zero or negative"""


class InternalConsistencyError(SykMonitorError, RuntimeError):
    """A result failed an internal sanity check (this signals a bug)"""


class StateValidityError(SykMonitorError, RuntimeError):
    """A quantum state stopped being valid in the middle of a trajectory"""

    def __init__(self, message, time=None, event_index=None):
        self.time = time
        self.event_index = event_index
        super().__init__(f"{message} (t={time}, event={event_index})")


class ExtractionError(SykMonitorError, RuntimeError):
    """A rate could not be extracted from a series"""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = dict(diagnostics or {})
        detail = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
        super().__init__(f"{message} [{detail}]" if detail else message)
