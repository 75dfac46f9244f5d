"""
Exponential autoregressive series of order 2 with delay d.

    x_t = c0 + (c1 + pi1 * exp(-gamma * (x_{t-d} - z1)^2)) * x_{t-1}
             + (c2 + pi2 * exp(-gamma * (x_{t-d} - z2)^2)) * x_{t-2} + eps_t

For fixed (gamma, z1, z2) the model is linear in (c0, c1, pi1, c2, pi2),
which is how expar_fit treats it.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np

from ..patterns.registry import get_pattern
from .dataset import Dataset
from .errors import DivergenceError, PreconditionError
from .separable import SeparableFit, fit_separable

logger = logging.getLogger(__name__)

DIVERGENCE_BOUND = 1e8


@dataclass(frozen=True)
class ExpArParams:
    c0: float
    c1: float
    c2: float
    pi1: float
    pi2: float
    gamma: float
    z1: float
    z2: float
    d: int = 2
    p: int = 2

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise PreconditionError(f"gamma must be positive, got {self.gamma!r}")
        if self.p != 2:
            raise PreconditionError("only order p = 2 is supported")
        if self.d not in (1, 2):
            raise PreconditionError(f"delay d must be 1 or 2, got {self.d!r}")

    def step(self, previous: float, before: float) -> float:
        """Noise-free x_t from x_{t-1} and x_{t-2}"""
        lagged = previous if self.d == 1 else before
        w1 = math.exp(-self.gamma * (lagged - self.z1) ** 2)
        w2 = math.exp(-self.gamma * (lagged - self.z2) ** 2)
        return self.c0 + (self.c1 + self.pi1 * w1) * previous + (self.c2 + self.pi2 * w2) * before

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


REFERENCE_PARAMS = ExpArParams(
    c0=-1.49, c1=1.65, c2=0.54, pi1=-0.44, pi2=-0.84, gamma=1.3, z1=2.52, z2=3.86
)
REFERENCE_START: Tuple[float, float] = (2.75, 3.1)


def expar_generate(
    params: ExpArParams,
    x1: float,
    x2: float,
    count: int,
    noise: float = 0.0,
    seed: Optional[int] = None,
    bound: float = DIVERGENCE_BOUND,
) -> np.ndarray:
    """
    First `count` elements of the series started at (x1, x2).

    Raises:
        DivergenceError: |x_t| exceeds bound (or stops being finite)
    """
    if count < 3:
        raise PreconditionError(f"count must be at least 3, got {count}")
    if noise < 0:
        raise PreconditionError("noise must be non-negative")
    rng = np.random.default_rng(seed)
    eps = rng.normal(0.0, noise, size=count) if noise > 0 else np.zeros(count)

    series = np.empty(count, dtype=np.float64)
    series[0], series[1] = x1, x2
    for t in range(2, count):
        value = params.step(series[t - 1], series[t - 2]) + eps[t]
        if not math.isfinite(value) or abs(value) > bound:
            raise DivergenceError(t, value, bound)
        series[t] = value
    return series


def expar_lags(series: Any) -> Tuple[Tuple[np.ndarray, np.ndarray], np.ndarray]:
    """((x_{t-1}, x_{t-2}), x_t) for t = 3..n"""
    x = np.asarray(series, dtype=np.float64)
    return (x[1:-1], x[:-2]), x[2:]


def expar_fit(
    series: Any,
    grid: Optional[Iterable[str]] = None,
    tol: Optional[float] = None,
    **kwargs: Any,
) -> Tuple[ExpArParams, SeparableFit]:
    """Least-squares ExpAR(2) parameters with (gamma, z1, z2) on the refinement grid"""
    x = np.asarray(series, dtype=np.float64)
    if x.size < 10:
        raise PreconditionError(f"expar_fit needs at least 10 observations, got {x.size}")
    pattern = get_pattern("expar")
    regressors, y = pattern.prepare(Dataset(np.arange(x.size, dtype=np.float64), x))
    result = fit_separable(pattern, regressors, y, grid=grid, tol=tol, **kwargs)
    params = ExpArParams(**result.nonlinear, **result.linear)
    logger.info("ExpAR fit: rss=%.6g after %d levels", result.rss, result.iterations)
    return params, result
