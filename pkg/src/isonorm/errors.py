"""Exception types.

``InputError`` subclasses signal malformed input (CLI exit 2); ``CheckFailure``
subclasses signal that a mathematical property failed on valid input (exit 1).
"""


class InputError(ValueError):
    """Malformed or inconsistent input data."""


class GroupError(InputError):
    pass


class GroupoidError(InputError):
    """A groupoid axiom is violated; ``witness`` holds the offending ids."""

    def __init__(self, message, witness=()):
        super().__init__(message)
        self.witness = tuple(witness)


class TowerError(InputError):
    pass


class StateError(InputError):
    pass


class ConvergenceError(RuntimeError):
    pass


class CheckFailure(AssertionError):
    """A verified property failed. ``prop`` names it, ``witness`` pins it down."""

    def __init__(self, prop, message, witness=()):
        super().__init__(f"{prop}: {message}")
        self.prop = prop
        self.witness = tuple(witness)
