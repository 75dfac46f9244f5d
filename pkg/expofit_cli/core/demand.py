"""
Exponential demand curves.

    log10 Q = log10 Q0 + k * (exp(-alpha * Q0 * C) - 1)

is the separable model b + a * exp(d * C) with a = k, b = log10 Q0 - k and
d = -alpha * Q0, fitted on log10 Q.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from ..patterns.registry import get_pattern
from .dataset import Dataset
from .errors import PreconditionError
from .separable import SeparableFit, fit_separable

logger = logging.getLogger(__name__)

PRICE_DESIGN: Tuple[float, ...] = (
    0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0, 15.0, 20.0,
)


@dataclass(frozen=True)
class DemandParams:
    """Demand intensity q0, log-range k and essential value alpha"""

    q0: float
    k: float
    alpha: float

    def __post_init__(self) -> None:
        if not self.q0 > 0:
            raise PreconditionError(f"demand intensity Q0 must be positive, got {self.q0!r}")

    def log_demand(self, prices: Any) -> np.ndarray:
        C = np.asarray(prices, dtype=np.float64)
        return math.log10(self.q0) + self.k * np.expm1(-self.alpha * self.q0 * C)

    def to_dict(self) -> Dict[str, float]:
        return {"Q0": self.q0, "k": self.k, "alpha": self.alpha}


def demand_to_internal(params: DemandParams) -> Tuple[float, float, float]:
    """(a, b, d) of the separable form"""
    return params.k, math.log10(params.q0) - params.k, -params.alpha * params.q0


def demand_from_internal(a: float, b: float, d: float) -> DemandParams:
    q0 = 10.0 ** (b + a)
    return DemandParams(q0=q0, k=a, alpha=-d / q0)


def simulate_demand(
    params: DemandParams,
    prices: Sequence[float] = PRICE_DESIGN,
    noise: float = 0.1,
    seed: Optional[int] = None,
) -> Dataset:
    """Consumption at each price with Gaussian noise of the given sd added to log10 Q"""
    if noise < 0:
        raise PreconditionError("noise must be non-negative")
    rng = np.random.default_rng(seed)
    log_q = params.log_demand(prices) + rng.normal(0.0, noise, size=len(prices))
    return Dataset(np.asarray(prices, dtype=np.float64), 10.0**log_q)


def fit_demand(
    data: Dataset,
    grid: Optional[Iterable[str]] = None,
    tol: Optional[float] = None,
    **kwargs: Any,
) -> Tuple[DemandParams, SeparableFit]:
    """Least-squares demand curve of a (price, consumption) dataset"""
    pattern = get_pattern("demand")
    x, y = pattern.prepare(data)
    result = fit_separable(pattern, x, y, grid=grid, tol=tol, **kwargs)
    params = demand_from_internal(result.linear["a"], result.linear["b"], result.nonlinear["d"])
    logger.info("Demand fit: Q0=%.6g k=%.6g alpha=%.6g mse=%.3g", params.q0, params.k, params.alpha, result.mse)
    return params, result
