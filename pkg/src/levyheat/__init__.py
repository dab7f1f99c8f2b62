"""Numerical validation of heat-kernel bounds for Levy processes."""

__version__ = "0.1.0"

from .measure import LevyMeasureSpec, dyadic, pure_stable, stable_log, tempered_poly  # noqa: E402
from .symbol import SymbolEvaluator, power_symbol  # noqa: E402
from .density import GridDensity, Grid, invert_density, split_semigroup, reconstruct  # noqa: E402
from .bounds import BoundEnvelope, ValidationReport  # noqa: E402

__all__ = ["__version__", "LevyMeasureSpec", "pure_stable", "stable_log", "tempered_poly", "dyadic",
           "SymbolEvaluator", "power_symbol", "Grid", "GridDensity", "invert_density", "split_semigroup",
           "reconstruct", "BoundEnvelope", "ValidationReport"]
