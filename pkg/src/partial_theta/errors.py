"""Exception hierarchy shared by all modules."""


class PartialThetaError(Exception):
    """Base class for every error raised by this package."""


class DivergenceDomain(PartialThetaError, ValueError):
    """|q| is outside the region where the series is summed."""


class ToleranceUnreachable(PartialThetaError, ArithmeticError):
    """The requested tail tolerance needs more terms than allowed."""


class ResourceCap(PartialThetaError, ValueError):
    """A computation would exceed its configured work budget."""


class EmptyZeroSet(PartialThetaError, ValueError):
    pass


class TooFewZeros(PartialThetaError, ValueError):
    pass


class NewtonStall(PartialThetaError, ArithmeticError):
    """Newton iteration failed to reduce the residual below tolerance."""


class Inconclusive(PartialThetaError, ArithmeticError):
    """Sign-change counting did not stabilise under grid refinement."""


class BracketInvalid(PartialThetaError, ValueError):
    """A q-bracket does not straddle the expected real-zero count drop."""
