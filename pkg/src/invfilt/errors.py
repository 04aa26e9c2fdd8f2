"""Exception hierarchy shared by all invfilt modules."""


class InvFiltError(Exception):
    """Base class for all errors raised by this package."""


class InvalidMatrix(InvFiltError):
    """Matrix contains non-finite entries or is not two-dimensional."""


class InvalidDimension(InvFiltError):
    """Requested size or index is outside the valid range."""


class DimensionMismatch(InvFiltError):
    """Operands have inconsistent shapes."""


class RankDeficient(InvFiltError):
    """A full-rank precondition does not hold numerically."""


class HorizonTooShort(InvFiltError):
    """Stacking horizon is smaller than the state dimension."""


class NonSquare(InvFiltError):
    """Operation is defined only for systems with as many outputs as inputs."""


class DesignError(InvFiltError):
    """Base class for filter synthesis failures (CLI exit code 3)."""


class AssumptionViolated(DesignError):
    """System fails observability or the input/fault full-rank assumption."""


class NonOrthogonal(DesignError):
    """Supplied rotation matrix is not orthogonal."""


class Unobservable(DesignError):
    """Pole placement pair fails the eigenvector (PBH) observability test."""


class BadPoleSet(DesignError):
    """Pole list has wrong count, is not conjugate-closed, or leaves the unit disc."""


class ZeroAtOne(DesignError):
    """System has a transmission zero at z = 1; no rotation can stabilize it."""


class RetriesExhausted(DesignError):
    """No candidate rotation passed the observability screen within budget."""


class MinPhaseScope(DesignError):
    """Direct inverse filter requires a square minimum-phase system."""


class FilterRuntimeError(InvFiltError):
    """Base class for streaming-execution failures (CLI exit code 4)."""


class WindowNotReady(FilterRuntimeError):
    """Not enough samples buffered to evaluate the requested quantity."""


class Diverged(FilterRuntimeError):
    """Filter state norm exceeded the divergence guard."""


class ImproperTransferFunction(InvFiltError):
    """Numerator degree exceeds denominator degree."""


class ConfigError(InvFiltError):
    """Base class for configuration problems (CLI exit code 2)."""


class ParseError(ConfigError):
    """Configuration text is not valid JSON; message carries line and column."""


class SemanticError(ConfigError):
    """Configuration parsed but a field is missing, mistyped, or inconsistent."""
