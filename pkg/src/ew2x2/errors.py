"""Semantic exception hierarchy for the ew2x2 package."""


class EW2x2Error(Exception):
    """Base error for this package."""


class DegenerateGameError(EW2x2Error, ValueError):
    """Both payoff gaps are zero; every strategy tuple is an equilibrium and
    the dynamic never moves. Rejected by everything downstream of game
    construction."""


class DegenerateInitError(EW2x2Error, ValueError):
    """Initialization violates the non-degeneracy assumptions (a pure
    strategy, or both advantage functionals zero) and the caller did not
    opt in to fixed-point behavior."""


class WrongRegimeError(EW2x2Error, ValueError):
    """Operation only defined for a different sign pattern of the payoff
    gaps (e.g. flip bookkeeping outside the mixed-sign regimes)."""


class NonFiniteStateError(EW2x2Error, FloatingPointError):
    """A log-ratio coordinate left the representable window [-1e6, 1e6]."""


class InvalidParameterError(EW2x2Error, ValueError):
    """A constructor parameter violates its documented domain."""


class InvalidRangeError(EW2x2Error, ValueError):
    """An integration range is empty-reversed or outside [0, 1]."""


class ConfigError(EW2x2Error, ValueError):
    """A JSON config file fails schema validation."""
