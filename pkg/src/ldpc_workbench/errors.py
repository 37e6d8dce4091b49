"""Exception hierarchy shared by every module of the workbench."""


class WorkbenchError(Exception):
    """Base class for all errors raised by ldpc_workbench."""


class InvalidDistributionError(WorkbenchError, ValueError):
    """A degree distribution is malformed (zero edges, unbalanced sockets, ...)."""


class InvalidParameterError(WorkbenchError, ValueError):
    """A scalar parameter is outside its admissible range."""


class InconsistentInputError(WorkbenchError):
    """A received word contradicts the parity checks of the code.

    Under a genuine erasure channel this cannot happen, so it signals a
    corrupted input or a bug upstream.
    """


class ConfigurationError(WorkbenchError, ValueError):
    """A simulation or CLI configuration cannot be executed."""
