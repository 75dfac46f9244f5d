"""
Test utilities for expofit testing.

Dataset builders and brute-force oracles that share no code with the
fitting engines they check.
"""

import itertools
from typing import Optional, Sequence, Tuple

import numpy as np

from expofit_cli.core.dataset import Dataset


def exponential_values(a: float, k: float, b: float, t) -> np.ndarray:
    return a * np.exp(k * np.asarray(t, dtype=float)) + b


def alternating(n: int, r: float, start: int = 1) -> np.ndarray:
    """(+r, -r, +r, ...) of length n, or starting with -r for start = -1"""
    return start * r * (-1.0) ** np.arange(n)


def levelled_error(x: Sequence[float], y: Sequence[float]) -> float:
    """|h| of the line through three points with residuals (+h, -h, +h)"""
    system = np.column_stack([x, np.ones(3), [1.0, -1.0, 1.0]])
    return abs(float(np.linalg.solve(system, np.asarray(y, dtype=float))[2]))


def triple_oracle(x: np.ndarray, y: np.ndarray) -> float:
    """Best uniform line error as the largest levelled error over all triples"""
    order = np.argsort(x)
    xs, ys = x[order], y[order]
    return max(
        levelled_error(xs[list(idx)], ys[list(idx)])
        for idx in itertools.combinations(range(xs.size), 3)
    )


def fixed_k_oracle(k: float, data: Dataset) -> float:
    """Error of the best a*exp(k*t) + b by triple enumeration on u = exp(k*t)"""
    return triple_oracle(np.exp(k * data.t), data.T)


def dense_grid_rss(x: np.ndarray, y: np.ndarray, lo: float, hi: float, points: int) -> float:
    """Smallest RSS of y ~ a*exp(d*x) + b over a dense d grid, via the normal equations"""
    best = np.inf
    for d in np.linspace(lo, hi, points):
        design = np.column_stack([np.exp(d * x), np.ones_like(x)])
        gram = design.T @ design
        coefficients = np.linalg.solve(gram, design.T @ y)
        residual = y - design @ coefficients
        best = min(best, float(residual @ residual))
    return best


def assert_alternates(residuals: np.ndarray, indices: Sequence[int], error: float, tol: float = 1e-9):
    """Certificate residuals alternate at +-error and dominate every other residual"""
    r = np.asarray(residuals, dtype=float)
    slack = tol * (1.0 + error)
    assert np.all(np.abs(r) <= error + slack)
    values = r[list(indices)]
    assert np.all(np.abs(np.abs(values) - error) <= slack)
    signs = np.sign(values)
    assert np.all(signs[1:] == -signs[:-1])


class DataFactory:
    """Random datasets with a known best approximation."""

    @staticmethod
    def abscissae(rng: np.random.Generator, n: int, low: float = 0.2, high: float = 1.0) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(rng.uniform(low, high, size=n - 1))])

    @staticmethod
    def interior(
        rng: np.random.Generator,
        n: int = 8,
        indices: Optional[Tuple[int, ...]] = None,
    ) -> Tuple[Dataset, Tuple[float, float, float], float]:
        """
        Decreasing convex exponential plus +r, -r, +r, -r at four indices.

        The generating model is the best approximation with error r.
        """
        t = DataFactory.abscissae(rng, n, 0.3, 0.6)
        a = rng.uniform(1.0, 5.0)
        k = rng.uniform(-2.0, -0.8)
        b = rng.uniform(-3.0, 3.0)
        r = 0.01 * a
        T = exponential_values(a, k, b, t)
        for position, index in enumerate(indices or (0, n // 3, (2 * n) // 3, n - 1)):
            T[index] += r * (-1.0) ** position
        return Dataset(t, T), (a, k, b), r

    @staticmethod
    def quartet(rng: np.random.Generator) -> Tuple[Dataset, Tuple[float, float, float], float]:
        t = DataFactory.abscissae(rng, 4, 0.25, 1.0)
        a = rng.uniform(0.1, 10.0)
        k = rng.uniform(-3.0, -0.05)
        b = rng.uniform(-5.0, 5.0)
        r = rng.uniform(0.0, a / 10.0) or a / 20.0
        return Dataset(t, exponential_values(a, k, b, t) + alternating(4, r)), (a, k, b), r
