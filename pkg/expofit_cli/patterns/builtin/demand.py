"""Exponential demand pattern on log10 consumption"""

from typing import Any, Dict, Mapping, Tuple

import numpy as np

from ...core.dataset import Dataset
from ...core.demand import demand_from_internal
from ...core.errors import PreconditionError
from ..base import BasePattern, pattern
from .exponential import exponential_design


@pattern(
    "demand",
    "1.0.0",
    "log10 Q = log10 Q0 + k*(exp(-alpha*Q0*C) - 1) as b + a*exp(d*C)",
    nonlinear=["d"],
    linear=["a", "b"],
    default_grid={"d": (-2.0, -1e-4)},
    response="log10 Q",
)
class DemandPattern(BasePattern):
    def prepare(self, data: Dataset) -> Tuple[Any, np.ndarray]:
        if np.any(data.T <= 0):
            raise PreconditionError("demand fitting needs positive consumption values")
        return data.t, np.log10(data.T)

    def design(self, theta: Mapping[str, float], x: Any) -> np.ndarray:
        return exponential_design(theta["d"], x)

    def finalize(self, nonlinear: Mapping[str, float], linear: Mapping[str, float]) -> Dict[str, float]:
        return demand_from_internal(linear["a"], linear["b"], nonlinear["d"]).to_dict()
