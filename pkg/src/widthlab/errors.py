"""Exception hierarchy shared by all widthlab modules."""


class WidthlabError(Exception):
    """Base class for every error raised by widthlab."""


class InputError(WidthlabError, ValueError):
    """Malformed or out-of-contract input (CLI exit code 2)."""


class NumericError(WidthlabError, ArithmeticError):
    """A computation could not produce a trustworthy number (CLI exit code 3)."""


class DegenerateBodyError(NumericError):
    """Half-width fell below the full-dimensionality threshold."""


class SolverError(NumericError):
    """A monotone root solve failed to bracket or converge."""


class EvaluationError(NumericError):
    """An integrand produced a non-finite value at a quadrature node."""
