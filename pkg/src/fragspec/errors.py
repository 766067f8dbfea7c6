"""Exception types shared across the pipeline."""


class FragspecError(Exception):
    """Base class for all package errors."""


class TableParseError(FragspecError, ValueError):
    """A potential table file could not be parsed (carries the line number)."""

    def __init__(self, path, lineno, message):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class ValidationError(FragspecError, ValueError):
    """A domain invariant failed; the message names the failed check."""


class DomainError(FragspecError, ValueError):
    """An argument is outside the domain an operation supports."""


class NotBoundError(FragspecError, RuntimeError):
    """A requested vibrational state is not bound by the effective potential."""

    def __init__(self, v, n_bound, message=None):
        self.v = v
        self.n_bound = n_bound
        super().__init__(
            message or f"state v={v} not bound: only {n_bound} bound level(s) found"
        )


class ConvergenceError(FragspecError, RuntimeError):
    """An iterative numerical procedure failed to converge."""


class NumericalBlowupError(FragspecError, RuntimeError):
    """NaN/Inf detected during propagation (carries the step index)."""

    def __init__(self, step_index, message=None):
        self.step_index = step_index
        super().__init__(message or f"numerical blow-up detected at step {step_index}")


class BoundaryContaminationError(FragspecError, RuntimeError):
    """Outgoing flux reached the grid edge with no absorbing mask active."""


class ConfigError(FragspecError, ValueError):
    """A run configuration is malformed or internally inconsistent."""
