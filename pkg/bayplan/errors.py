"""
Exception hierarchy shared by both optimization stages, the pipeline and the CLI.
"""
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple


class BayplanError(Exception):
    """Base class for every error raised by bayplan."""


class InvalidInput(BayplanError, ValueError):
    """An input violates a documented precondition or type invariant."""


class ConfigError(InvalidInput):
    """A configuration file or command-line override could not be used."""


class ParseError(InvalidInput):
    """
    One or more rows of an input table could not be parsed.

    Args:
        source (str): The file (or table name) the rows came from.
        errors (Iterable[str]): One message per problem, formatted "line N, field F: message".
    """

    def __init__(self, source: str, errors: Iterable[str]):
        self.source = source
        self.errors: List[str] = list(errors)
        super().__init__(f"{source}: " + "; ".join(self.errors))


class DiminishingReturnsViolation(InvalidInput):
    """A fitted logarithmic elasticity curve has a negative slope."""

    def __init__(self, a: float, b: float):
        self.a = a
        self.b = b
        super().__init__(f"fitted curve f(y) = {a:.6g} + {b:.6g}*ln(y) has negative slope b < 0")


class ConcavityRequired(InvalidInput):
    """A solver that relies on concave value functions was handed a non-concave one."""

    def __init__(self, pog_id: str, violations: Sequence[Tuple]):
        self.pog_id = pog_id
        self.violations = list(violations)
        super().__init__(
            f"value function of pog '{pog_id}' is not concave on its grid "
            f"({len(self.violations)} violation(s), first at y={self.violations[0][1]})"
        )


class InstanceTooLarge(BayplanError):
    """An exhaustive solver or a table allocation would exceed its size guard."""


class Infeasible(BayplanError):
    """
    The minimum allocations do not fit into the available bays.

    Args:
        deficit (Fraction): How many bays are missing, Σ min - s.
        context (str, optional): Department / pog context prepended to the message.
    """

    def __init__(self, deficit: Fraction, context: Optional[str] = None):
        self.deficit = Fraction(deficit)
        self.context = context
        message = f"infeasible: minimum allocations exceed total bays by {float(self.deficit):g} bay(s)"
        if context:
            message = f"{context}: {message}"
        super().__init__(message)


def add_context(error: BayplanError, context: str) -> BayplanError:
    """
    Prefix the message of an existing error with department / pog context, keeping its class.

    Args:
        error (BayplanError): The error to annotate in place.
        context (str): Text such as "department kitchen, pog fridges".

    Returns:
        BayplanError: The same error object, so callers can write `raise add_context(err, ctx)`.
    """
    message = str(error.args[0]) if error.args else ""
    if not message.startswith(context):
        error.args = (f"{context}: {message}",) + tuple(error.args[1:])
    return error
