"""
Exact best approximation of four-point datasets.

With sigma1 = (T1 - T3)/(t3 - t1) and sigma2 = (T2 - T4)/(t4 - t2), the
condition sigma1 > sigma2 > 0 gives a unique exponential (a > 0, k < 0)
whose residuals at the four points are +r, -r, +r, -r. Its rate is log(z*)
where z* is the root in (0, 1) of

    q(z) = d13 z^s4 - d24 z^s3 - d13 z^s2 + d24,    s_i = t_i - t_1.

The other orientations reduce to this one through the symmetry transforms;
everything else is answered in closed form by the classifier.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from ..settings import settings
from .classifier import (
    IDENTITY,
    ORIENTATIONS,
    Taxonomy,
    TaxonomyTag,
    classify,
    closed_form,
    limit_vector_neg_inf,
)
from .dataset import Dataset
from .errors import BracketNotFoundError, PreconditionError
from .fit_report import FitReport
from .minimax import (
    ExponentialModel,
    Model,
    check_overflow,
    fit_line_minimax,
    max_residual,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RootProblem:
    """Transformed quartet equation in z = exp(k)"""

    s: Tuple[float, float, float]
    d13: float
    d24: float
    bracket: Optional[Tuple[float, float]] = None

    def __post_init__(self) -> None:
        s2, s3, s4 = self.s
        if not 0 < s2 < s3 < s4:
            raise PreconditionError(f"shifted exponents must satisfy 0 < s2 < s3 < s4, got {self.s}")

    @classmethod
    def from_dataset(cls, data: Dataset) -> "RootProblem":
        if data.n != 4:
            raise PreconditionError(f"a quartet needs n = 4, dataset has n = {data.n}")
        t, T = data.t, data.T
        s = (float(t[1] - t[0]), float(t[2] - t[0]), float(t[3] - t[0]))
        return cls(s, float(T[0] - T[2]), float(T[1] - T[3]))

    @property
    def scale(self) -> float:
        return abs(self.d13) + abs(self.d24)

    @property
    def p_prime_at_one(self) -> float:
        s2, s3, s4 = self.s
        return (s4 - s2) * self.d13 - s3 * self.d24

    def q(self, z: float) -> float:
        s2, s3, s4 = self.s
        return self.d13 * z**s4 - self.d24 * z**s3 - self.d13 * z**s2 + self.d24


def locate_bracket(problem: RootProblem) -> RootProblem:
    """
    Find a sign change of q on (0, 1 - eta).

    q(0) = d24 > 0 and q < 0 just below the known root z = 1 when p'(1) > 0,
    so eta is halved until q(1 - eta) turns negative.
    """
    if not (problem.d13 > 0 and problem.d24 > 0 and problem.p_prime_at_one > 0):
        raise BracketNotFoundError(
            "quartet slopes do not satisfy sigma1 > sigma2 > 0",
            {"d13": problem.d13, "d24": problem.d24, "p_prime_at_one": problem.p_prime_at_one},
        )
    cfg = settings.quartet
    eta = cfg.eta_start
    for _ in range(cfg.max_halvings + 1):
        if problem.q(1.0 - eta) < 0:
            return RootProblem(problem.s, problem.d13, problem.d24, (0.0, 1.0 - eta))
        eta *= 0.5
    raise BracketNotFoundError(
        f"no sign change of q below z = 1 after {cfg.max_halvings} halvings",
        {"eta": eta, "p_prime_at_one": problem.p_prime_at_one},
    )


def solve_rate(problem: RootProblem) -> float:
    """Rate k = log(z*) of the root of q inside (0, 1)"""
    if problem.bracket is None:
        problem = locate_bracket(problem)
    lo, hi = problem.bracket
    cfg = settings.quartet

    while hi - lo > cfg.bisect_width:
        mid = 0.5 * (lo + hi)
        value = problem.q(mid)
        if value == 0:
            return math.log(mid)
        if value > 0:
            lo = mid
        else:
            hi = mid

    z = brentq(problem.q, lo, hi, xtol=cfg.xtol, rtol=4 * np.finfo(float).eps)
    logger.debug("Quartet root z=%r in [%r, %r]", z, lo, hi)
    return math.log(z)


def slope_condition(data: Dataset) -> bool:
    t, T = data.t, data.T
    sigma1 = (T[0] - T[2]) / (t[2] - t[0])
    sigma2 = (T[1] - T[3]) / (t[3] - t[1])
    return bool(sigma1 > sigma2 > 0)


def interior_model(data: Dataset) -> Tuple[ExponentialModel, RootProblem]:
    """Alternating exponential of a quartet already satisfying slope_condition"""
    problem = locate_bracket(RootProblem.from_dataset(data))
    k = solve_rate(problem)
    check_overflow(k, data.t)
    s2, s3, _ = problem.s
    t1, T1, T2 = float(data.t[0]), float(data.T[0]), float(data.T[1])
    shifted = problem.d13 / -math.expm1(k * s3)
    a = shifted * math.exp(-k * t1)
    b = 0.5 * (T1 - shifted + T2 - shifted * math.exp(k * s2))
    return ExponentialModel(a, k, b), problem


def _limit_alternative(data: Dataset) -> Optional[Model]:
    candidates = []
    for orientation in ORIENTATIONS:
        oriented = orientation.apply(data)
        if oriented.T[0] == oriented.T.max():
            candidates.append(orientation.undo_model(limit_vector_neg_inf(oriented)))
    return min(candidates, key=lambda v: v.error) if candidates else None


def _alternatives(data: Dataset, taxonomy: Taxonomy) -> Dict[str, Dict[str, Any]]:
    line = taxonomy.line if taxonomy.line is not None else fit_line_minimax(data)[0]
    found = {"line": {**line.to_dict(), "error": max_residual(line, data)}}
    limit = _limit_alternative(data)
    if limit is not None:
        found["limit"] = limit.to_dict()
    return found


def fit_quartet(data: Dataset) -> FitReport:
    """
    Best approximation of a four-point dataset.

    Tries the orientations in order identity, t-reflect, T-negate, both; the
    first one where sigma1 > sigma2 > 0 holds is solved exactly. Otherwise
    the classifier verdict is answered in closed form and the best line and
    limit vector are attached as alternatives.
    """
    if data.n != 4:
        raise PreconditionError(f"fit_quartet needs n = 4, dataset has n = {data.n}")

    for orientation in ORIENTATIONS:
        oriented = orientation.apply(data)
        if not slope_condition(oriented):
            continue
        model, problem = interior_model(oriented)
        taxonomy = Taxonomy(TaxonomyTag.INTERIOR, orientation, (0, 1, 2, 3))
        logger.debug("Quartet solved in the %s orientation (k=%r)", orientation.label, model.k)
        return FitReport.build(
            data,
            taxonomy,
            orientation.undo_model(model),
            quartet=(0, 1, 2, 3),
            diagnostics={"p_prime_at_one": problem.p_prime_at_one, "root": math.exp(model.k)},
        )

    taxonomy = classify(data)
    model = closed_form(data, taxonomy)
    warning = None
    if model is None:
        warning = "interior verdict without a slope-ordered orientation; returning the best line"
        logger.warning(warning)
        model = taxonomy.line if taxonomy.line is not None else fit_line_minimax(data)[0]
        taxonomy = Taxonomy(TaxonomyTag.LINE, IDENTITY, taxonomy.witness, taxonomy.line)

    report = FitReport.build(
        data, taxonomy, model, warning=warning, alternatives=_alternatives(data, taxonomy)
    )
    slack = settings.minimax.certificate_tol * (1.0 + report.error)
    inside = np.flatnonzero(np.abs(report.residuals(data)) < report.error - slack)
    report.diagnostics["slack_indices"] = [int(i) for i in inside]
    return report
