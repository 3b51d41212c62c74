"""Python front end for the nelsonium experiment driver.

The compiled extension carries the solvers; this package re-exports the
runner and the closed-form helpers.
"""

from ._core import (
    ConfigError,
    NumericalBreach,
    __version__,
    gaussian_w1,
    hartree_limit_moments,
    run_experiment,
    w1_distance,
)

__all__ = [
    "ConfigError",
    "NumericalBreach",
    "__version__",
    "gaussian_w1",
    "hartree_limit_moments",
    "run_experiment",
    "w1_distance",
]
