"""ExpAR(2) pattern with delay 2"""

from typing import Any, Mapping, Tuple

import numpy as np

from ...core.dataset import Dataset
from ...core.expar import expar_lags
from ...core.separable import hadamard
from ..base import BasePattern, pattern


@pattern(
    "expar",
    "1.0.0",
    "x_t = c0 + (c1 + pi1*w1)*x_{t-1} + (c2 + pi2*w2)*x_{t-2}, w_i = exp(-gamma*(x_{t-2} - z_i)^2)",
    nonlinear=["gamma", "z1", "z2"],
    linear=["c0", "c1", "pi1", "c2", "pi2"],
    default_grid={"gamma": (0.5, 2.0), "z1": (1.0, 4.0), "z2": (2.0, 5.0)},
    response="x_t",
    points=25,
)
class ExpArPattern(BasePattern):
    def prepare(self, data: Dataset) -> Tuple[Any, np.ndarray]:
        return expar_lags(data.T)

    def design(self, theta: Mapping[str, float], x: Any) -> np.ndarray:
        lag1, lag2 = x
        w1 = np.exp(-theta["gamma"] * (lag2 - theta["z1"]) ** 2)
        w2 = np.exp(-theta["gamma"] * (lag2 - theta["z2"]) ** 2)
        return np.column_stack(
            [np.ones_like(lag1), lag1, hadamard(lag1, w1), lag2, hadamard(lag2, w2)]
        )
