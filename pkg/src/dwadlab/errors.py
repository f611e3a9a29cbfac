"""Exception categories shared by the library and the command line.

Each category carries the process exit code the CLI reports for it.
"""


class DwadError(Exception):
    """Base class for every error raised by dwadlab."""

    exit_code = 1
    category = "error"


class ConfigurationError(DwadError, ValueError):
    exit_code = 2
    category = "configuration"


class DataError(DwadError, ValueError):
    exit_code = 3
    category = "data"


class NumericalError(DwadError, ArithmeticError):
    exit_code = 4
    category = "numerical"


class AssumptionViolation(DwadError):
    exit_code = 5
    category = "assumption-violation"


class DegenerateVarianceError(NumericalError):
    """A studentizing quadratic form v'Vv is not strictly positive."""

    def __init__(self, value, kind):
        self.value = float(value)
        self.kind = kind
        super().__init__(
            f"{kind} variance is not positive in this direction (v'Vv = {self.value!r})"
        )
