"""Exception hierarchy shared by every module."""


class LimitConeError(Exception):
    """Base class for all library errors."""


class InvalidInput(LimitConeError):
    """Input data fails a construction invariant (bad determinant, bad shape, ...)."""


class DimensionMismatch(LimitConeError):
    """Operands live in incompatible ambient dimensions."""


class EmptyInput(LimitConeError):
    """An operation that needs a nonempty collection received an empty one."""


class NumericalFailure(LimitConeError):
    """An eigenvalue/singular-value computation failed to converge or overflowed."""


class NotProximal(LimitConeError):
    """The dominant eigenvalue modulus is not simple and strictly dominant."""


class SeparationViolated(LimitConeError):
    """A required gap between an attracting point and a repelling hyperplane is too small.

    Carries optional diagnostics: `pair` (offending indices) and `separation`
    (the full separation matrix computed so far).
    """

    def __init__(self, message, pair=None, separation=None):
        super().__init__(message)
        self.pair = pair
        self.separation = separation


class ContractionUnverified(LimitConeError):
    """Neither the analytic bound nor sampling established the contraction conditions.

    `refuted` is True when sampling exhibited an explicit violation (a genuine
    counterexample), False when the check was merely inconclusive.
    """

    def __init__(self, message, refuted=False):
        super().__init__(message)
        self.refuted = refuted


class TooFewGenerators(LimitConeError):
    """A Schottky system needs at least two generators."""


class NotReduced(LimitConeError):
    """A group word is not (very) reduced."""


class EpsilonTooLarge(LimitConeError):
    """epsilon exceeds the frame bound epsilon_f."""


class DegenerateSample(LimitConeError):
    """No sampled word survived the requested filter."""


class BudgetExceeded(LimitConeError):
    """A word-enumeration request exceeds the product budget."""


class RayNotInChamber(LimitConeError):
    """A requested cone ray is not a regular direction of the Weyl chamber."""


class MaxPowerExceeded(LimitConeError):
    """Powering generators up to max_power did not yield certificates."""


class SeparationUnachievable(LimitConeError):
    """Seeded random rotations failed to reach general position within the retry cap."""


class ConeNotInvolutionStable(LimitConeError):
    """A group forge was requested for a cone that is not opposition-involution stable."""
