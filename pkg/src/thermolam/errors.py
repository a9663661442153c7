"""Exception hierarchy shared by all thermolam modules.

The command line front end maps these onto process exit codes, so the
split matters: configuration and caller mistakes, numerical breakdowns,
regime mismatches and failed certificates must stay distinguishable.
"""


class ThermolamError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ThermolamError):
    """Model parameters or configuration values are invalid."""


class UsageError(ThermolamError):
    """An operation was called outside its contract (bad grids, wrong case)."""


class RegimeError(UsageError):
    """The requested quantity is not meaningful in the model's decay regime.

    Subclass of UsageError: asking for a decay rate of a non-decaying
    configuration is a contract violation, but the front end reports it
    under a dedicated exit code.
    """


class NumericalError(ThermolamError):
    """A numerical routine failed (solver breakdown, truncation bound violated)."""


class VerificationError(ThermolamError):
    """A certified inequality or cross-check failed at stated tolerance."""
