"""Exception hierarchy shared by all modules."""


class CMCError(Exception):
    """Base class for every error raised by :mod:`cmc1`."""


class ParameterError(CMCError, ValueError):
    """Invalid curve or run parameters."""


class InvalidGenusError(ParameterError):
    pass


class InvalidLambdaError(ParameterError):
    pass


class InvalidScaleError(ParameterError):
    pass


class SingularEvaluationError(CMCError, ZeroDivisionError):
    """A formula was evaluated at a branch point, pole or end of the curve."""


class PathError(CMCError, ValueError):
    """A path is discontinuous or passes too close to a singular value of z."""


class IntegrationError(CMCError, RuntimeError):
    """Transport failed: step underflow, runaway state, or determinant drift."""


class MalformedMonodromyError(CMCError):
    """A monodromy matrix does not have the shape forced by the symmetries."""


class DegenerateDenominatorError(CMCError, ZeroDivisionError):
    """h1 or h2 is undefined because its denominator vanishes."""


class NoSignChangeError(CMCError, ValueError):
    """The closing gap has the same sign at both ends of a bracket."""


class ExcludedRootError(CMCError):
    """A root of the closing gap has |h| = 1 and yields no surface."""


class SpuriousRootError(CMCError):
    """A sign change of the closing gap came from a pole, not a zero."""
