"""Parameter estimation for nonlinearly parameterized regressions.

The pipeline filters a regression y = Omega Theta(theta) through a dynamic
extension, mixes it twice (adjugate mixing to the selected components, then
through a user-supplied linearizing bundle) into a scalar regression
Y_theta = M theta, and runs gradient estimation laws on the result. Two
executable scenarios reproduce the reference experiments; a CLI writes CSV
time series, JSON metrics, and SVG figures.
"""

from . import drem, estimators, mapping, numkit, records, scenarios
from .cli import main

__version__ = "0.1.0"

__all__ = [
    "drem",
    "estimators",
    "main",
    "mapping",
    "numkit",
    "records",
    "scenarios",
]
