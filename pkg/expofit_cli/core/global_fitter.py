"""
Global minimax fit over the rate.

The classifier answers every dataset whose best approximation is a constant,
a line or a limit vector. For interior data the canonical orientation has
a > 0, k < 0 and E(k) (the error of the best fixed-rate fit) is quasiconvex
on (-inf, 0). The fitter brackets its minimum with a geometric scan, shrinks
the bracket by golden-section steps and then recovers the exact model from
the extremal quartet of the search result.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from ..settings import settings
from .classifier import (
    Taxonomy,
    TaxonomyTag,
    classify,
    closed_form,
    limit_vector_neg_inf,
)
from .dataset import Dataset
from .errors import ExpofitError, NumericalError, OverflowGuardError
from .fit_report import FitReport
from .minimax import (
    ExponentialModel,
    Model,
    evaluate,
    fit_fixed_k,
    fit_line_minimax,
    max_residual,
)
from .quartet import fit_quartet

logger = logging.getLogger(__name__)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def error_at(k: float, data: Dataset) -> float:
    """E(k): error of the best fixed-rate fit; k = 0 is the best line"""
    if k == 0:
        return fit_line_minimax(data)[1].error
    return fit_fixed_k(k, data)[1].error


class _Objective:
    """Memoised E(k) on one dataset with an evaluation counter"""

    def __init__(self, data: Dataset, workers: int = 1):
        self.data = data
        self.workers = workers
        self.values: Dict[float, float] = {}
        self.evals = 0
        self._line_error: Optional[float] = None

    @property
    def line_error(self) -> float:
        if self._line_error is None:
            self._line_error = fit_line_minimax(self.data)[1].error
        return self._line_error

    def _compute(self, k: float) -> float:
        try:
            return fit_fixed_k(k, self.data)[1].error
        except OverflowGuardError:
            raise
        except NumericalError:
            # exp(k*t) no longer separates the abscissae: the k -> 0 limit
            return self.line_error

    def __call__(self, k: float) -> float:
        if k not in self.values:
            self.values[k] = self._compute(k)
            self.evals += 1
        return self.values[k]

    def many(self, ks: Sequence[float]) -> List[float]:
        pending = [k for k in ks if k not in self.values]
        if self.workers > 1 and len(pending) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                for k, value in zip(pending, pool.map(self._compute, pending)):
                    self.values[k] = value
            self.evals += len(pending)
        return [self(k) for k in ks]

    def trace(self) -> List[Tuple[float, float]]:
        return sorted(self.values.items())


class GlobalFitter:
    """
    Minimiser of E(k) with the classifier in front of it.

    Args:
        tol: relative bracket width at which the golden-section phase stops
        value_tol: relative spread of E across the bracket at which it stops
        k_min: smallest rate magnitude scanned (defaults to a 2^-60 fraction of 1/span)
        k_max: largest rate magnitude scanned (defaults to the overflow guard)
        workers: threads used by the geometric scan
    """

    def __init__(
        self,
        tol: Optional[float] = None,
        value_tol: Optional[float] = None,
        k_min: Optional[float] = None,
        k_max: Optional[float] = None,
        workers: Optional[int] = None,
    ):
        self.tol = settings.search.tol if tol is None else tol
        self.value_tol = settings.search.value_tol if value_tol is None else value_tol
        self.k_min = k_min
        self.k_max = k_max
        self.workers = settings.search.workers if workers is None else workers

    def fit(self, data: Dataset) -> FitReport:
        data.require(3)
        started = time.perf_counter()
        taxonomy = classify(data)
        logger.info("Dataset classified as %s", taxonomy.tag.value)

        model = closed_form(data, taxonomy)
        if model is not None:
            report = FitReport.build(data, taxonomy, model)
        elif data.n == 3:
            report = self._interpolate(data, taxonomy)
        else:
            report = self._search(data, taxonomy)
        report.diagnostics["elapsed"] = time.perf_counter() - started
        return report

    def _rate_limits(self, canonical: Dataset) -> Tuple[int, int, float]:
        """Exponent range (j_lo, j_hi) of k_j = -k0 * 2^j allowed by the bounds"""
        k0 = 1.0 / canonical.span
        guard = settings.minimax.overflow_limit / float(np.max(np.abs(canonical.t)) or 1.0)
        k_max = guard if self.k_max is None else min(abs(self.k_max), guard)
        j_hi = int(math.floor(math.log2(k_max / k0)))
        j_lo = -settings.search.max_halvings_toward_zero
        if self.k_min is not None:
            j_lo = max(j_lo, int(math.ceil(math.log2(abs(self.k_min) / k0))))
        if j_lo > j_hi:
            raise NumericalError(
                "the rate bounds leave no admissible rate",
                {"k_min": self.k_min, "k_max": self.k_max, "guard": guard},
            )
        return j_lo, j_hi, k0

    def _scan(
        self, objective: _Objective, j_lo: int, j_hi: int, k0: float
    ) -> Tuple[float, float, bool]:
        """Geometric bracket (k_lo, k_hi) of the minimiser and whether it closed on both sides"""

        def rate(j: int) -> float:
            return -k0 * 2.0**j

        start = min(max(0, j_lo), j_hi)
        best, best_value = start, objective(rate(start))
        chunk = max(1, self.workers)

        for direction, limit in ((1, j_hi), (-1, j_lo)):
            j = best
            rose = False
            while not rose and j != limit:
                steps = [j + direction * (i + 1) for i in range(chunk)]
                steps = [s for s in steps if j_lo <= s <= j_hi]
                for s, value in zip(steps, objective.many([rate(s) for s in steps])):
                    j = s
                    if value > best_value:
                        rose = True
                        break
                    best, best_value = s, value
            if best != start:
                break

        closed = j_lo < best < j_hi
        lo = rate(min(best + 1, j_hi))
        hi = rate(best - 1)
        return lo, hi, closed

    def _golden(self, objective: _Objective, lo: float, hi: float) -> Tuple[float, float]:
        """Golden-section reduction of [lo, hi]; returns (k, bracket width)"""
        c = hi - _GOLDEN * (hi - lo)
        d = lo + _GOLDEN * (hi - lo)
        fc, fd = objective(c), objective(d)
        while True:
            width = hi - lo
            centre = 0.5 * (lo + hi)
            spread = max(fc, fd, objective(lo), objective(hi)) - min(fc, fd)
            if width <= self.tol * (1.0 + abs(centre)):
                break
            if spread <= self.value_tol * (1.0 + min(fc, fd)):
                break
            if fc <= fd:
                hi, d, fd = d, c, fc
                c = hi - _GOLDEN * (hi - lo)
                fc = objective(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + _GOLDEN * (hi - lo)
                fd = objective(d)
        return (c if fc <= fd else d), hi - lo

    def _quartet(
        self, canonical: Dataset, k: float, width: float, value: float
    ) -> Tuple[Optional[ExponentialModel], Optional[Tuple[int, ...]]]:
        """Exact model of the extremal quartet whose full-data error does not exceed the search"""
        delta = max(1e3 * width, 1e-8 * (1.0 + abs(k)))
        model, certificate = fit_fixed_k(k, canonical)
        candidates = set(certificate.indices)
        for nearby in (k - delta, min(k + delta, 0.5 * k)):
            try:
                candidates.update(fit_fixed_k(nearby, canonical)[1].indices)
            except ExpofitError:
                continue

        residuals = canonical.T - evaluate(model, canonical.t)
        runs: List[int] = []
        for i in sorted(candidates):
            if runs and np.sign(residuals[runs[-1]]) == np.sign(residuals[i]):
                if abs(residuals[i]) > abs(residuals[runs[-1]]):
                    runs[-1] = i
                continue
            runs.append(i)

        best: Tuple[Optional[ExponentialModel], Optional[Tuple[int, ...]]] = (None, None)
        best_error = value * (1.0 + 1e-12) + np.finfo(float).tiny
        for start in range(len(runs) - 3):
            window = tuple(runs[start : start + 4])
            try:
                report = fit_quartet(canonical.subset(window))
            except ExpofitError as e:
                logger.debug("Quartet %s rejected: %s", window, e)
                continue
            if report.taxonomy.tag is not TaxonomyTag.INTERIOR:
                continue
            full_error = max_residual(report.model, canonical)
            if full_error <= best_error:
                best, best_error = (report.model, window), full_error
        return best

    def _search(self, data: Dataset, taxonomy: Taxonomy) -> FitReport:
        orientation = taxonomy.orientation
        canonical = orientation.apply(data)
        objective = _Objective(canonical, self.workers)

        j_lo, j_hi, k0 = self._rate_limits(canonical)
        lo, hi, closed = self._scan(objective, j_lo, j_hi, k0)
        logger.debug("Rate bracket [%r, %r] after %d evaluations", lo, hi, objective.evals)
        k_search, width = self._golden(objective, lo, hi)
        value = objective(k_search)

        warning = None
        if not closed:
            warning = "minimum of E(k) reached the rate bounds; the bracket is one-sided"

        model, quartet = self._quartet(canonical, k_search, width, value)
        diagnostics = {"k_search": k_search * (-1.0 if orientation.reflect_t else 1.0)}
        if model is not None:
            diagnostics["k_quartet"] = model.k * (-1.0 if orientation.reflect_t else 1.0)
            diagnostics["k_difference"] = abs(model.k - k_search)
            if diagnostics["k_difference"] > settings.search.agreement_rtol * (1.0 + abs(k_search)):
                logger.info("Search and quartet rates disagree; keeping the quartet model")
        else:
            logger.warning("No extremal quartet reproduced the search error at k=%r", k_search)
            model = fit_fixed_k(k_search, canonical)[0]

        fallback = self._closed_form_fallback(canonical, objective, max_residual(model, canonical))
        if fallback is not None:
            warning = "search did not beat the closed-form candidates; falling back"
            logger.warning(warning)
            model, quartet = fallback, None

        trace = objective.trace()
        if orientation.reflect_t:
            trace = sorted((-k, e) for k, e in trace)
        return FitReport.build(
            data,
            taxonomy,
            orientation.undo_model(model),
            quartet=orientation.undo_indices(quartet, data.n) if quartet else None,
            evals=objective.evals,
            k_bracket=width,
            trace=trace,
            warning=warning,
            diagnostics=diagnostics,
        )

    def _closed_form_fallback(
        self, canonical: Dataset, objective: _Objective, error: float
    ) -> Optional[Model]:
        candidates: List[Model] = [fit_line_minimax(canonical)[0]]
        if canonical.T[0] == canonical.T.max():
            candidates.append(limit_vector_neg_inf(canonical))
        values = list(objective.values.values())
        if values and max(values) - min(values) <= self.value_tol * (1.0 + min(values)):
            top, bottom = float(canonical.T.max()), float(canonical.T.min())
            candidates.append(ExponentialModel.constant(0.5 * (top + bottom)))
        best = min(candidates, key=lambda m: max_residual(m, canonical))
        return best if max_residual(best, canonical) < error else None

    def _interpolate(self, data: Dataset, taxonomy: Taxonomy) -> FitReport:
        """Three-point interior data: the exponential through all three points"""
        orientation = taxonomy.orientation
        canonical = orientation.apply(data)
        model = interpolate_three(canonical)
        return FitReport.build(data, taxonomy, orientation.undo_model(model), evals=0)


def _log_psi(k: float, t: np.ndarray) -> float:
    t1, t2, t3 = (float(x) for x in t)
    return k * (t1 - t2) + math.log(math.expm1(k * (t2 - t1)) / math.expm1(k * (t3 - t2)))


def interpolate_three(canonical: Dataset) -> ExponentialModel:
    """
    Exponential through three strictly decreasing convex points.

    The rate solves psi(k) = (T1 - T2)/(T2 - T3), found on the negative
    half-line where psi decreases from +inf to (t2 - t1)/(t3 - t2).
    """
    t, T = canonical.t, canonical.T
    target = math.log((T[0] - T[1]) / (T[1] - T[2]))
    k0 = 1.0 / canonical.span
    guard = settings.minimax.overflow_limit / float(np.max(np.abs(t)) or 1.0)

    def f(k: float) -> float:
        return _log_psi(k, t) - target

    hi = -k0 * 2.0**-30
    lo = -k0
    while f(lo) <= 0:
        lo *= 2.0
        if abs(lo) > guard:
            raise NumericalError(
                "three-point interpolation rate exceeds the overflow guard",
                {"guard": guard},
            )
    if f(hi) >= 0:
        raise NumericalError("three-point interpolation rate is too close to zero")
    k = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    shifted = (T[0] - T[2]) / -math.expm1(k * (t[2] - t[0]))
    return ExponentialModel(shifted * math.exp(-k * t[0]), k, float(T[0] - shifted))


def fit(data: Dataset, **kwargs) -> FitReport:
    """Best uniform approximation by a*exp(k*t) + b, its limits, lines or constants"""
    return GlobalFitter(**kwargs).fit(data)
