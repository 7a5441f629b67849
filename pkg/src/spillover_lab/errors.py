"""Exception hierarchy.

Every library error derives from SpilloverLabError and carries the process
exit code the command-line front end maps it to: 1 for usage problems, 2 for
malformed input (files, model specs, configs), 3 for numeric failures raised
while computing on well-formed input.
"""


class SpilloverLabError(Exception):
    exit_code = 3


class UsageError(SpilloverLabError):
    """Bad command-line invocation."""

    exit_code = 1


class DataError(SpilloverLabError):
    """Malformed input: files, model specifications, configurations."""

    exit_code = 2


class SchemaError(DataError):
    """A dataset is missing required columns or violates row-level integrity."""


class ParseError(DataError):
    """A cell could not be parsed; message carries row and column."""


class EmptyDataError(DataError):
    """No usable rows remain after reading a dataset."""


class ConfigError(DataError):
    """A simulation configuration is inconsistent."""


class CycleError(DataError):
    """The directed edges of a model specification contain a cycle."""


class SimultaneityError(CycleError):
    """Both directions of a reciprocal edge slot carry nonzero coefficients."""


class UnknownVariableError(DataError):
    """A name does not refer to a variable of the model."""


class NodeCapError(DataError):
    """The model exceeds the node-count cap for exhaustive path enumeration."""


class NumericError(SpilloverLabError):
    exit_code = 3


class SingularityError(NumericError):
    """The linear system for the reduced form is singular."""


class CollinearityError(NumericError):
    """Exposures are perfectly correlated; the partial regression is undefined."""


class DegenerateExposureError(NumericError):
    """An exposure has zero implied variance."""


class RankDeficiencyError(NumericError):
    """The regression design matrix is rank deficient."""


class InsufficientDataError(NumericError):
    """Fewer rows than regression parameters."""


class DimensionMismatchError(NumericError):
    """Contrast weights do not match the coefficient vector."""
