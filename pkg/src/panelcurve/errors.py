"""Exception hierarchy.

Each family carries the process exit code the CLI maps it to.
"""


class PanelCurveError(Exception):
    exit_code = 1


class ConfigError(PanelCurveError):
    exit_code = 2


class DataError(PanelCurveError):
    exit_code = 3


class IngestionError(DataError):
    """Malformed CSV input; the message names the offending row/column."""


class DomainError(DataError, ValueError):
    pass


class LengthError(DataError, ValueError):
    """Series too short for the requested operation."""


class SpecificationError(DataError):
    pass


class UsageError(PanelCurveError, ValueError):
    exit_code = 2


class NumericalError(PanelCurveError):
    exit_code = 4


class SingularityError(NumericalError):
    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class AnnihilationError(NumericalError):
    """A regressor is constant within every entity and vanishes under demeaning."""


class InfeasibleError(NumericalError):
    pass


class DegenerateInputError(NumericalError, ValueError):
    pass


class StageError(PanelCurveError):
    """Wraps a failure inside the analysis pipeline with stage context."""

    def __init__(self, stage, cause, context=""):
        where = f" [{context}]" if context else ""
        super().__init__(f"stage '{stage}'{where}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", None) or _foreign_code(cause)


def _foreign_code(cause):
    # errors raised by numpy/scipy rather than this package
    if type(cause).__name__ == "LinAlgError":
        return NumericalError.exit_code
    if isinstance(cause, ValueError):
        return DataError.exit_code
    return PanelCurveError.exit_code
