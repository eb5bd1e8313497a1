"""Exception types raised across the package."""


class NlgpeError(Exception):
    """Base class for all package errors."""

    code = "error"


class NonOscillatoryRegime(NlgpeError, ValueError):
    """An effective frequency radicand is not strictly positive."""

    code = "non_oscillatory"


class EdgeLeak(NlgpeError):
    """The wave function does not decay at the grid edges."""

    code = "edge_leak"


class SingularFit(NlgpeError, ArithmeticError):
    code = "singular_fit"


class OverflowRisk(NlgpeError, OverflowError):
    code = "overflow_risk"


class Unstable(NlgpeError):
    """Norm drift during time stepping exceeded the abort threshold."""

    code = "unstable"


class ConfigError(NlgpeError, ValueError):
    code = "config"
