"""Exception hierarchy shared by the library and the CLI."""


class TruncMaxError(Exception):
    """Base class for all library errors."""


class ParameterError(TruncMaxError, ValueError):
    """Invalid truncation, grid or experiment parameters."""


class GuardError(TruncMaxError):
    """A resolution or work-budget guard refused the computation."""


class ResolutionError(GuardError):
    """The grid or radius sampling is too coarse for the requested object."""


class BudgetError(GuardError):
    """The requested computation exceeds the configured work budget."""
