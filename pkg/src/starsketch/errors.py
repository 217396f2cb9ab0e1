"""Exception types.

Two families matter to callers (and map to CLI exit codes): input problems
(unreadable or malformed files, bad arguments) and numerical rejections
(degenerate geometry, non-star shapes, overflow risk, ties).
"""


class StarSketchError(Exception):
    """Base class for all package errors."""


class InputError(StarSketchError, ValueError):
    """Malformed input data or invalid arguments."""


class NumericalRejection(StarSketchError, ValueError):
    """Input is well-formed but outside the domain of the computation."""


class DegenerateShapeError(NumericalRejection):
    pass


class NotStarShapedError(NumericalRejection):
    pass


class OverflowRiskError(NumericalRejection):
    pass


class GeneralPositionError(NumericalRejection):
    """Raised when tied values or tied differences break a general-position precondition."""


class MismatchError(InputError):
    """Two objects that must share m (and Phi) do not."""
