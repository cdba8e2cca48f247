"""Multi-objective evolutionary feature selection for network intrusion detection.

The package wraps a from-scratch classifier suite (CART, logistic regression,
random forest) in evolutionary subset search (NSGA-II, NSGA-III, MOEA/D, plain
GA) plus classic baselines (SFS, RFE, PCA), with deterministic seeded runs and
delimited result exports.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DataFormatError,
    MofsError,
    UndefinedMetricError,
)

__all__ = [
    "ConfigurationError",
    "DataFormatError",
    "MofsError",
    "UndefinedMetricError",
    "__version__",
]
