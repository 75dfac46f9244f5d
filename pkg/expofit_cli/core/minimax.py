"""
Fixed-rate minimax solvers.

The best uniform approximation of (t, T) by a*exp(k*t) + b for a fixed k is
the best uniform line through (u, T) with u = exp(k*t), so everything here is
built on one discrete Chebyshev line fit. Small samples use the exhaustive
triple characterisation; larger ones take the narrowest vertical strip over
the convex hull.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from ..settings import settings
from .dataset import Dataset
from .errors import NumericalError, OverflowGuardError, PreconditionError

logger = logging.getLogger(__name__)


class ModelKind(str, Enum):
    """Shape of a fitted model"""

    EXPONENTIAL = "exponential"
    LINE = "line"
    CONSTANT = "constant"


@dataclass(frozen=True)
class ExponentialModel:
    """t -> a*exp(k*t) + b; a line stores its slope in a, a constant its value in b"""

    a: float
    k: float
    b: float
    kind: ModelKind = ModelKind.EXPONENTIAL

    def __post_init__(self) -> None:
        if self.kind is ModelKind.EXPONENTIAL and (self.k == 0 or self.a == 0):
            raise PreconditionError(
                f"an exponential model needs k != 0 and a != 0 (a={self.a!r}, k={self.k!r})"
            )

    @classmethod
    def line(cls, slope: float, intercept: float) -> "ExponentialModel":
        return cls(float(slope), 0.0, float(intercept), ModelKind.LINE)

    @classmethod
    def constant(cls, value: float) -> "ExponentialModel":
        return cls(0.0, 0.0, float(value), ModelKind.CONSTANT)

    def __call__(self, t: Any) -> np.ndarray:
        return evaluate(self, t)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "a": self.a, "k": self.k, "b": self.b}


@dataclass(frozen=True)
class LimitVector:
    """Pointwise limit of the best approximations as k -> -inf or k -> +inf"""

    values: Tuple[float, ...]
    error: float
    direction: str = "-inf"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "limit",
            "direction": self.direction,
            "values": list(self.values),
            "error": self.error,
        }


@dataclass(frozen=True)
class AlternationCertificate:
    """Extremal indices whose residuals alternate in sign starting at delta"""

    indices: Tuple[int, ...]
    delta: int
    error: float
    signs: Tuple[int, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.indices)

    def to_dict(self) -> Dict[str, Any]:
        return {"indices": list(self.indices), "delta": self.delta, "error": self.error}


Model = Union[ExponentialModel, LimitVector]


def check_overflow(k: float, t: np.ndarray, limit: Optional[float] = None) -> None:
    """Reject rates whose exponent leaves the finite double range"""
    limit = settings.minimax.overflow_limit if limit is None else limit
    if t.size == 0:
        return
    extreme = float(t[np.argmax(np.abs(t))])
    if abs(k * extreme) > limit:
        raise OverflowGuardError(k, extreme, limit)


def evaluate(model: ExponentialModel, t: Any) -> np.ndarray:
    """Coordinatewise evaluation of the model"""
    t = np.asarray(t, dtype=np.float64)
    if model.kind is ModelKind.CONSTANT:
        return np.full(t.shape, model.b, dtype=np.float64)
    if model.kind is ModelKind.LINE:
        return model.a * t + model.b
    check_overflow(model.k, np.atleast_1d(t))
    return model.a * np.exp(model.k * t) + model.b


def fitted_values(model: Model, data: Dataset) -> np.ndarray:
    if isinstance(model, LimitVector):
        return np.asarray(model.values, dtype=np.float64)
    return evaluate(model, data.t)


def max_residual(model: Model, data: Dataset) -> float:
    return float(np.max(np.abs(data.T - fitted_values(model, data))))


def extract_certificate(
    residuals: np.ndarray, error: Optional[float] = None, tol: Optional[float] = None
) -> AlternationCertificate:
    """
    Longest alternating run of extremal residuals.

    Within each run of equal-signed extremal residuals the first index is
    kept, which gives the lexicographically smallest alternating index set.
    A residual vector that is zero within tolerance certifies itself with
    every index.
    """
    r = np.asarray(residuals, dtype=np.float64)
    err = float(np.max(np.abs(r))) if error is None else float(error)
    tol = settings.minimax.certificate_tol if tol is None else tol
    slack = tol * (1.0 + err)
    if err <= slack:
        n = int(r.size)
        return AlternationCertificate(tuple(range(n)), 1, err, tuple([1] * n))

    indices = []
    signs = []
    for i in np.flatnonzero(np.abs(r) >= err - slack):
        sign = 1 if r[i] > 0 else -1
        if signs and signs[-1] == sign:
            continue
        indices.append(int(i))
        signs.append(sign)
    return AlternationCertificate(tuple(indices), signs[0], err, tuple(signs))


@lru_cache(maxsize=128)
def _triples(n: int) -> np.ndarray:
    return np.array(list(combinations(range(n), 3)), dtype=np.intp)


def exhaustive_line(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    """
    Best uniform line by enumerating every index triple i<j<m.

    Each triple fixes the line with residuals (+h, -h, +h) up to sign; the
    optimum is the feasible triple, i.e. the one whose max residual over all
    points equals its own level.

    Returns:
        (slope, intercept, error)
    """
    idx = _triples(x.size)
    i, j, m = idx[:, 0], idx[:, 1], idx[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = (y[m] - y[i]) / (x[m] - x[i])
        e = y[None, :] - slope[:, None] * x[None, :]
    rows = np.arange(idx.shape[0])
    ei = e[rows, i]
    ej = e[rows, j]
    centre = 0.5 * (ei + ej)
    level = 0.5 * np.abs(ei - ej)
    worst = np.max(np.abs(e - centre[:, None]), axis=1)

    tol = settings.minimax.certificate_tol
    feasible = np.isfinite(worst) & (worst <= level + tol * (1.0 + level))
    if not np.any(feasible):
        logger.debug("No feasible triple within tolerance, falling back to the hull method")
        return hull_line(x, y)
    best = np.min(worst[feasible])
    pick = int(np.flatnonzero(feasible & (worst <= best + tol * (1.0 + best)))[0])
    return float(slope[pick]), float(centre[pick]), float(worst[pick])


def _chain(xs: np.ndarray, ys: np.ndarray, upper: bool) -> np.ndarray:
    hull: list = []
    for p in range(xs.size):
        while len(hull) > 1:
            v0, v1 = hull[-2], hull[-1]
            cross = (xs[v1] - xs[v0]) * (ys[p] - ys[v0]) - (xs[p] - xs[v0]) * (ys[v1] - ys[v0])
            if (cross >= 0.0) if upper else (cross <= 0.0):
                hull.pop()
            else:
                break
        hull.append(p)
    return np.asarray(hull, dtype=np.intp)


def hull_line(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    """
    Best uniform line as the centre of the narrowest vertical strip.

    The strip width w(s) = max(y - s*x) - min(y - s*x) is convex and piecewise
    linear with breakpoints at hull edge slopes, so a discrete ternary search
    over those slopes finds the minimum.
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    slopes = []
    for chain in (_chain(xs, ys, upper=True), _chain(xs, ys, upper=False)):
        if chain.size > 1:
            slopes.append(np.diff(ys[chain]) / np.diff(xs[chain]))
    candidates = np.unique(np.concatenate(slopes)) if slopes else np.array([0.0])
    candidates = candidates[np.isfinite(candidates)]

    def width(s: float) -> float:
        r = ys - s * xs
        return float(r.max() - r.min())

    lo, hi = 0, candidates.size - 1
    while hi - lo > 2:
        m1 = lo + (hi - lo) // 3
        m2 = hi - (hi - lo) // 3
        w1, w2 = width(candidates[m1]), width(candidates[m2])
        if w1 < w2:
            hi = m2 - 1
        elif w1 > w2:
            lo = m1 + 1
        else:
            lo, hi = m1, m2
    slope = float(min(candidates[lo : hi + 1], key=width))
    r = ys - slope * xs
    return slope, 0.5 * float(r.max() + r.min()), 0.5 * float(r.max() - r.min())


def minimax_line(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    if x.size <= settings.minimax.exhaustive_max_n:
        return exhaustive_line(x, y)
    return hull_line(x, y)


def fit_line_minimax(data: Dataset) -> Tuple[ExponentialModel, AlternationCertificate]:
    """Unique best uniform line with its alternation certificate"""
    data.require(3)
    slope, intercept, _ = minimax_line(data.t, data.T)
    residuals = data.T - (slope * data.t + intercept)
    return ExponentialModel.line(slope, intercept), extract_certificate(residuals)


def fit_fixed_k(k: float, data: Dataset) -> Tuple[ExponentialModel, AlternationCertificate]:
    """
    Minimax (a_k, b_k) over {a*exp(k*t) + b} for a fixed rate.

    The exponentials are evaluated relative to the endpoint that keeps every
    exponent non-positive; the amplitude is rescaled afterwards.

    Raises:
        PreconditionError: k == 0 (use fit_line_minimax)
        OverflowGuardError: |k*t| beyond the overflow limit
    """
    if k == 0:
        raise PreconditionError("k = 0 has no exponential basis; use fit_line_minimax")
    data.require(3)
    check_overflow(k, data.t)
    t_ref = data.t[0] if k < 0 else data.t[-1]
    u = np.exp(k * (data.t - t_ref))
    if np.any(np.diff(u) == 0):
        raise NumericalError(
            f"exp(k*t) does not separate the abscissae at k={k!r}; the rate is too close to 0"
        )
    slope, intercept, _ = minimax_line(u, data.T)
    residuals = data.T - (slope * u + intercept)
    a = slope * float(np.exp(-k * t_ref))
    model = ExponentialModel.constant(intercept) if a == 0 else ExponentialModel(a, k, intercept)
    return model, extract_certificate(residuals)


def best_b(
    a: float, k: float, data: Dataset, kind: ModelKind = ModelKind.EXPONENTIAL
) -> Tuple[float, float]:
    """Optimal offset for fixed (a, k): midrange of T - a*exp(k*t) and half its range"""
    if kind is ModelKind.EXPONENTIAL:
        check_overflow(k, data.t)
        v = data.T - a * np.exp(k * data.t)
    elif kind is ModelKind.LINE:
        v = data.T - a * data.t
    else:
        v = np.array(data.T, dtype=np.float64)
    top, bottom = float(v.max()), float(v.min())
    return 0.5 * (top + bottom), 0.5 * (top - bottom)


def band(
    model: Model, data: Dataset, error: Optional[float] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Constant-width band fitted +/- error; every data point lies inside it"""
    fitted = fitted_values(model, data)
    r = float(np.max(np.abs(data.T - fitted))) if error is None else float(error)
    return fitted + r, fitted - r
