"""Exception types shared across the package."""


class ShapeError(ValueError):
    """A vector or table has the wrong dimensions."""


class BoundsViolationError(ValueError):
    """An environment parameter vector lies outside its box bounds."""


class InvalidActionError(ValueError):
    """An action is not legal at the given state."""


class InvalidTrajectoryError(ValueError):
    """A state/action sequence is not connected under the transition function."""


class EnvironmentValidationError(ValueError):
    """An environment file or object violates a type invariant.

    The message names the failed invariant.
    """


class UndefinedBaselineError(ValueError):
    """The ground-truth return is too close to zero to normalize against."""
