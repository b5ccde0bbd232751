"""Exception types shared across the package.

Input problems subclass :class:`InputError` and numerical breakdowns subclass
:class:`NumericalError`; the command line maps them to exit codes 2 and 3.
"""


class KnotCSIError(Exception):
    pass


class InputError(KnotCSIError, ValueError):
    pass


class NumericalError(KnotCSIError, ArithmeticError):
    pass


class NonGenericDirection(NumericalError):
    """Projection direction produced a tangency or a near-triple point."""


class DegenerateConfiguration(NumericalError):
    """Two endpoints of a diagram edge coincide."""


class InvalidDiagram(InputError):
    pass


class UnsupportedDegree(InputError):
    pass


class UnsupportedDiagram(InputError):
    pass


class WrongLegCount(InputError):
    pass


class InconsistentDiagram(InputError):
    pass


class ResolutionBudgetExceeded(NumericalError):
    pass
