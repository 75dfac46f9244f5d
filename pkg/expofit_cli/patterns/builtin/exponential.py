"""Exponential pattern: y = a*exp(d*x) + b in least squares"""

from typing import Any, Dict, Mapping, Tuple

import numpy as np

from ..base import BasePattern, pattern


def exponential_design(d: float, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(over="ignore"):
        return np.column_stack([np.exp(d * x), np.ones_like(x)])


@pattern(
    "exponential",
    "1.0.0",
    "y = a*exp(d*x) + b; the least-squares counterpart of the minimax fit",
    nonlinear=["d"],
    linear=["a", "b"],
)
class ExponentialPattern(BasePattern):
    def design(self, theta: Mapping[str, float], x: Any) -> np.ndarray:
        return exponential_design(theta["d"], x)

    def default_ranges(self, x: Any, y: np.ndarray) -> Dict[str, Tuple[float, float]]:
        span = float(np.ptp(np.asarray(x, dtype=np.float64))) or 1.0
        return {"d": (-20.0 / span, 20.0 / span)}
