"""Shared exception types."""


class NumericalError(RuntimeError):
    """An internal numerical procedure failed (rejection cap hit,
    quadrature did not converge, truncation horizon not certifiable)."""


class ConfigError(ValueError):
    """Invalid experiment or CLI configuration."""


class DegenerateModelError(ValueError):
    """Raised when alpha == beta, where the threshold is unidentifiable
    and the limit process is identically zero."""
