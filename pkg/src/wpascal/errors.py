"""Exception hierarchy.

Validation problems derive from :class:`InvalidParameter` (a ``ValueError``)
so the CLI can map them to exit code 2 in one place.
"""


class WPascalError(Exception):
    """Base class for all package errors."""


class InvalidParameter(WPascalError, ValueError):
    pass


class NonPositiveWeight(InvalidParameter):
    def __init__(self, h, t, value, which="w"):
        self.h, self.t, self.value, self.which = h, t, value, which
        super().__init__(f"NonPositiveWeight: {which}({h},{t}) = {value} is not > 0")


class SequenceExhausted(InvalidParameter, IndexError):
    """A file-backed sequence was queried beyond its last row with no tail rule."""


class UnreachablePair(WPascalError, ValueError):
    pass


class TooLarge(WPascalError, ValueError):
    pass


class NotBalanced(WPascalError, ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"weights are not balanced; witness pair {witness}")


class NotHarmonic(WPascalError, ValueError):
    def __init__(self, point, residual):
        self.point, self.residual = point, residual
        super().__init__(f"function is not harmonic: residual {residual} at {point}")


class KernelOutOfSupport(WPascalError, ZeroDivisionError):
    pass


class LevelMismatch(WPascalError, ValueError):
    pass


class HorizonMismatch(WPascalError, ValueError):
    pass


class DivergentCase(WPascalError, ValueError):
    pass


class TruncationFailure(WPascalError, ArithmeticError):
    pass


class NotAMixture(WPascalError, ValueError):
    pass


class UnsupportedFamily(WPascalError, ValueError):
    pass


class BudgetExhausted(WPascalError, ArithmeticError):
    pass
