"""Exception hierarchy shared by all modules."""


class TTDLError(Exception):
    """Base class for every error raised by the toolkit."""


# waveguide
class WavelengthOutOfRange(TTDLError, ValueError):
    pass


class InvalidProfile(TTDLError, ValueError):
    pass


class NoGuidedMode(TTDLError):
    pass


class ConvergenceFailure(TTDLError):
    pass


class StencilOutOfRange(TTDLError, ValueError):
    pass


# hetero_design
class OutsideValidityBand(TTDLError, ValueError):
    pass


class NoSolutionInBox(TTDLError):
    pass


class SolverDivergence(TTDLError):
    pass


class DesignInfeasible(TTDLError):
    """Raised with the failing core and constraint named in the message."""

    def __init__(self, message, core=None, constraint=None):
        super().__init__(message)
        self.core = core
        self.constraint = constraint


class DegenerateCores(TTDLError, ValueError):
    pass


# fbg_device
class ChannelNotFound(TTDLError, KeyError):
    pass


class CoreNotFound(TTDLError, KeyError):
    pass


class InvalidLayout(TTDLError, ValueError):
    pass


# mwp_filter
class EmptyTapSet(TTDLError, ValueError):
    pass


class EmptyOrSingleTap(TTDLError, ValueError):
    pass


class NonUniformSpacing(TTDLError, ValueError):
    pass


class InsufficientPeaks(TTDLError):
    pass


class InvalidTapSet(TTDLError, ValueError):
    pass
