"""Boundary-layer analysis toolkit for a viscously damped wave equation."""

from .core import (
    ConfigError,
    ExponentParams,
    Field,
    Grid,
    ModalSeries,
    ProblemConfig,
    mode_threshold,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ExponentParams",
    "Field",
    "Grid",
    "ModalSeries",
    "ProblemConfig",
    "mode_threshold",
    "validate_config",
    "__version__",
]
