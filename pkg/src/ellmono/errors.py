"""Exception types shared across the toolkit."""


class EllmonoError(Exception):
    """Base class for all toolkit errors."""


class DomainError(EllmonoError):
    """Input outside the mathematical domain (e.g. Im tau <= 0)."""


class PrecisionError(EllmonoError):
    """Requested accuracy cannot be met by the chosen truncation."""


class PoleError(EllmonoError):
    """Evaluation too close to a pole; carries the offending singularity."""

    def __init__(self, message, nearest=None):
        super().__init__(message)
        self.nearest = nearest


class DegeneracyError(EllmonoError):
    """Degenerate matrix / vanishing homogeneous data."""


class NonCommutingError(EllmonoError):
    """Pair of maps fails the commutation precondition."""


class AmbiguityError(EllmonoError):
    """Numerically ambiguous classification; carries the candidates."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class ExcludedRepresentationError(EllmonoError):
    """Representation outside the parameterized family (e.g. purely linear)."""


class ChartError(EllmonoError):
    """Point outside the validity region of the requested chart."""


class GeometryError(EllmonoError):
    """No admissible path geometry at the requested clearance."""


class PathClearanceError(GeometryError):
    """A path violates its declared pole clearance."""


class IntegrationError(EllmonoError):
    """Numerical transport failed; carries the failing interval."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class StencilError(EllmonoError):
    """A finite-difference stencil would cross a singularity."""


class CriticalPointError(EllmonoError):
    """Derivative vanishes where the operation needs it nonzero."""


class NoConvergenceError(EllmonoError):
    """Iterative solve did not converge within the iteration budget."""


class BoundaryDiagnosticWarning(UserWarning):
    """Target lies on/near the unitary torus, the affine-structure image boundary."""
