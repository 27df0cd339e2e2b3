"""Exception hierarchy.

Every error carries a stable ``exit_code`` so the command line front end can
map failures onto its documented exit statuses without a lookup table.
"""


class StokespecError(Exception):
    exit_code = 1


class DomainError(StokespecError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 2


class ConfigurationError(StokespecError, ValueError):
    """Grid sizes, degrees or tolerances that cannot be honoured."""

    exit_code = 2


class ConvergenceError(StokespecError, RuntimeError):
    """A root scan or refinement did not succeed.

    ``interval`` holds the scanned range when it is known.
    """

    exit_code = 3

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class IllConditionedError(StokespecError, RuntimeError):
    exit_code = 3

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class GaugeViolationError(StokespecError, ValueError):
    """A shell mean that must vanish does not."""

    exit_code = 4

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class NotSolenoidalError(StokespecError, ValueError):
    exit_code = 4

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class ParseError(StokespecError, ValueError):
    exit_code = 4

    def __init__(self, message, line=None, offset=None):
        super().__init__(message)
        self.line = line
        self.offset = offset
