"""Error classes shared by the library and mapped to CLI exit codes."""


class WildformsError(Exception):
    exit_code = 1


class PreconditionError(WildformsError, ValueError):
    """Input outside the supported domain (e.g. p divides N)."""

    exit_code = 2


class InvariantBreach(WildformsError, ArithmeticError):
    """Two independent computations of the same quantity disagree."""

    exit_code = 3


class FixtureError(WildformsError, ValueError):
    exit_code = 4
