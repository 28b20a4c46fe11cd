"""Exception types raised across the package.

Each maps onto one error class of the command line contract: invalid input,
parse errors, internal construction errors and guard refusals.
"""


class InvalidInputError(ValueError):
    """A value outside the domain of an operation (bad dims, node, matching)."""


class MatchingParseError(ValueError):
    """Matching text that is malformed or violates the matching invariants."""


class ConstructionError(RuntimeError):
    """A construction produced something that is not what it promised."""


class PostconditionError(AssertionError):
    """A verification-mode postcondition did not hold."""


class GuardExceededError(ValueError):
    """An exhaustive run was requested above the desk-scale guard."""
