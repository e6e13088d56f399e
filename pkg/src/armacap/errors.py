"""Exception types raised across the package."""


class InvalidParams(ValueError):
    """Channel or sweep parameters violate a model constraint."""


class NotStabilizable(ValueError):
    """Strategy fails detectability or stabilizability."""


class NoStabilizingRoot(RuntimeError):
    """No root of the algebraic Riccati equation has a stable closed loop."""


class OutsideRegime(ValueError):
    """Parameters fall outside the regions where the feedback formula applies."""


class NegativeDiscriminant(ArithmeticError):
    """The square-root discriminant of the minimum-power formula is negative."""


class ConsistencyFailure(RuntimeError):
    """Closed-form optimum failed its Riccati or structural verification."""


class EmptyFeasibleSet(RuntimeError):
    """No candidate strategy passed the structural checks."""


class StructuralCheckFailed(ValueError):
    """Simulation requested with a strategy that is not detectable/stabilizable."""
