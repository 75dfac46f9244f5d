"""
Total classification of datasets by the shape of their best approximation.

Every dataset with n >= 3 gets exactly one tag:

- ConstantBest: a global extremum sits between two occurrences of the
  opposite global extremum, so a constant beats every monotone function.
- LineBest: the best line already shows four alternating extremal residuals
  (or fits exactly).
- InteriorExponential / LimitNegInf / LimitPosInf: the best line has three
  alternating residuals. Exactly one of the four orientations (identity,
  t-reflect, T-negate, both) turns the data admissible (negative slope,
  +,-,+ pattern); in that frame the spade condition decides between an
  interior exponential and the k -> -inf limit.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..settings import settings
from .dataset import Dataset
from .errors import PreconditionError
from .minimax import (
    AlternationCertificate,
    ExponentialModel,
    LimitVector,
    Model,
    ModelKind,
    extract_certificate,
    fit_line_minimax,
)

logger = logging.getLogger(__name__)


class TaxonomyTag(str, Enum):
    INTERIOR = "InteriorExponential"
    CONSTANT = "ConstantBest"
    NEG_INF = "LimitNegInf"
    POS_INF = "LimitPosInf"
    LINE = "LineBest"


@dataclass(frozen=True)
class Orientation:
    """Symmetry transforms applied to reach the canonical frame (reflect first)"""

    reflect_t: bool = False
    negate_T: bool = False

    @property
    def label(self) -> str:
        parts = [name for name, on in (("t-reflect", self.reflect_t), ("T-negate", self.negate_T)) if on]
        return "+".join(parts) or "identity"

    def apply(self, data: Dataset) -> Dataset:
        oriented = data.reflect_t() if self.reflect_t else data
        return oriented.negate_T() if self.negate_T else oriented

    def undo_model(self, model: Model) -> Model:
        if isinstance(model, LimitVector):
            direction = model.direction
            if self.reflect_t:
                direction = "+inf" if direction == "-inf" else "-inf"
            return LimitVector(tuple(self.undo_values(model.values)), model.error, direction)
        s_T = -1.0 if self.negate_T else 1.0
        s_t = -1.0 if self.reflect_t else 1.0
        if model.kind is ModelKind.CONSTANT:
            return ExponentialModel.constant(s_T * model.b)
        if model.kind is ModelKind.LINE:
            return ExponentialModel.line(s_T * s_t * model.a, s_T * model.b)
        return ExponentialModel(s_T * model.a, s_t * model.k, s_T * model.b)

    def undo_values(self, values: Sequence[float]) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        if self.negate_T:
            v = -v
        return v[::-1].copy() if self.reflect_t else v

    def undo_indices(self, indices: Sequence[int], n: int) -> Tuple[int, ...]:
        if self.reflect_t:
            return tuple(sorted(n - 1 - i for i in indices))
        return tuple(indices)


IDENTITY = Orientation()
ORIENTATIONS = (
    IDENTITY,
    Orientation(reflect_t=True),
    Orientation(negate_T=True),
    Orientation(reflect_t=True, negate_T=True),
)


@dataclass(frozen=True)
class Taxonomy:
    """Verdict with the orientation that exposed it and the indices justifying it"""

    tag: TaxonomyTag
    orientation: Orientation
    witness: Tuple[int, ...]
    line: Optional[ExponentialModel] = None
    line_certificate: Optional[AlternationCertificate] = field(default=None, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tag": self.tag.value,
            "orientation": {
                "reflect_t": self.orientation.reflect_t,
                "negate_T": self.orientation.negate_T,
            },
            "witness": list(self.witness),
        }


class PsiValue(NamedTuple):
    value: float
    is_limit: bool


def constant_witness(T: np.ndarray) -> Optional[Tuple[int, int, int]]:
    """Indices i1<i2<i3 with a max-min-max or min-max-min pattern, if any"""
    top, bottom = T.max(), T.min()
    maxima = np.flatnonzero(T == top)
    minima = np.flatnonzero(T == bottom)
    for outer, inner in ((maxima, minima), (minima, maxima)):
        if outer.size < 2:
            continue
        first, last = outer[0], outer[-1]
        between = inner[(inner > first) & (inner < last)]
        if between.size:
            middle = int(between[0])
            after = int(outer[outer > middle][0])
            before = int(outer[outer < middle][-1])
            return before, middle, after
    return None


def _run_bounds(certificate: AlternationCertificate, residuals: np.ndarray) -> Tuple[int, int, int]:
    """Admissible triple (last '+' before the '-' run, first '-', first '+' after)"""
    err = certificate.error
    slack = settings.minimax.certificate_tol * (1.0 + err)
    i_first, j, m = certificate.indices[:3]
    plus_before = [p for p in range(i_first, j) if residuals[p] >= err - slack]
    return plus_before[-1], j, m


def spade(T: np.ndarray) -> Optional[Tuple[int, int, int]]:
    """
    Spade obstruction in the canonical frame.

    Holds when T_1 is the global maximum and the last occurrence of the
    second greatest value M = max(T_2..T_n) comes after the first occurrence
    of the minimum. Returns (0, first_min, last_M) when it holds.
    """
    if T.size < 3 or T[0] != T.max():
        return None
    rest = T[1:]
    last_high = int(np.flatnonzero(rest == rest.max())[-1]) + 1
    first_low = int(np.flatnonzero(rest == rest.min())[0]) + 1
    if last_high > first_low:
        return 0, first_low, last_high
    return None


def classify(data: Dataset) -> Taxonomy:
    """Assign exactly one tag to the dataset"""
    data.require(3)
    n = data.n

    witness = constant_witness(data.T)
    if witness is not None:
        return Taxonomy(TaxonomyTag.CONSTANT, IDENTITY, witness)

    line, certificate = fit_line_minimax(data)
    residuals = data.T - (line.a * data.t + line.b)
    exact = certificate.error <= settings.minimax.certificate_tol
    if exact or len(certificate) >= 4:
        return Taxonomy(TaxonomyTag.LINE, IDENTITY, certificate.indices[:4], line, certificate)

    # a same-sign tie at the extremal level keeps the data admissible; only a fourth alternation point makes the line best
    for orientation in ORIENTATIONS:
        s_T = -1 if orientation.negate_T else 1
        s_t = -1 if orientation.reflect_t else 1
        if s_T * s_t * line.a < 0 and s_T * certificate.delta == 1:
            break
    else:
        logger.warning("No orientation makes the data admissible; treating the line as best")
        return Taxonomy(TaxonomyTag.LINE, IDENTITY, certificate.indices, line, certificate)

    canonical = orientation.apply(data)
    obstruction = spade(canonical.T)
    if obstruction is not None:
        tag = TaxonomyTag.POS_INF if orientation.reflect_t else TaxonomyTag.NEG_INF
        return Taxonomy(
            tag, orientation, orientation.undo_indices(obstruction, n), line, certificate
        )

    # the transforms are involutions, so undo_values maps residuals into the canonical frame too
    canonical_residuals = orientation.undo_values(residuals)
    canonical_certificate = extract_certificate(canonical_residuals, certificate.error)
    triple = _run_bounds(canonical_certificate, canonical_residuals)
    return Taxonomy(
        TaxonomyTag.INTERIOR, orientation, orientation.undo_indices(triple, n), line, certificate
    )


def limit_vector_neg_inf(data: Dataset) -> LimitVector:
    """Limit of the best approximations as k -> -inf; needs T_1 = max(T)"""
    T = data.T
    if T[0] != T.max():
        raise PreconditionError("limit_vector_neg_inf needs T_1 to be the maximum of T")
    rest = T[1:]
    high, low = float(rest.max()), float(rest.min())
    half = 0.5 * (high - low)
    first = float(T[0]) - half
    values = (first,) + (0.5 * (low + high),) * (data.n - 1)
    return LimitVector(values, max(abs(float(T[0]) - first), half), "-inf")


def limit_vector_pos_inf(data: Dataset) -> LimitVector:
    """Mirror of limit_vector_neg_inf; needs T_n = max(T)"""
    if data.T[-1] != data.T.max():
        raise PreconditionError("limit_vector_pos_inf needs T_n to be the maximum of T")
    mirrored = limit_vector_neg_inf(data.reflect_t())
    return LimitVector(tuple(reversed(mirrored.values)), mirrored.error, "+inf")


def closed_form(data: Dataset, taxonomy: Taxonomy) -> Optional[Model]:
    """Best approximation for every tag except InteriorExponential (returns None)"""
    if taxonomy.tag is TaxonomyTag.CONSTANT:
        return ExponentialModel.constant(0.5 * float(data.T.max() + data.T.min()))
    if taxonomy.tag is TaxonomyTag.LINE:
        return taxonomy.line if taxonomy.line is not None else fit_line_minimax(data)[0]
    if taxonomy.tag in (TaxonomyTag.NEG_INF, TaxonomyTag.POS_INF):
        canonical = taxonomy.orientation.apply(data)
        return taxonomy.orientation.undo_model(limit_vector_neg_inf(canonical))
    return None


def psi(k: float, t1: float, t2: float, t3: float) -> PsiValue:
    """
    psi(k) = (e^{k t1} - e^{k t2}) / (e^{k t2} - e^{k t3}), computed with expm1.

    At k = 0 the ratio (t1 - t2)/(t2 - t3) is returned and tagged as a limit.
    """
    if not t1 < t2 < t3:
        raise PreconditionError("psi needs t1 < t2 < t3")
    if k == 0:
        return PsiValue((t1 - t2) / (t2 - t3), True)
    value = np.exp(k * (t1 - t2)) * np.expm1(k * (t2 - t1)) / np.expm1(k * (t3 - t2))
    return PsiValue(float(value), False)


def anchored_value(
    k: float, t: float, first: Tuple[float, float], third: Tuple[float, float]
) -> float:
    """Value at t of the exponential with rate k through two anchor points (line at k = 0)"""
    (t1, T1), (t3, T3) = first, third
    if k == 0:
        ratio = (t - t1) / (t3 - t1)
    else:
        ratio = float(np.expm1(k * (t - t1)) / np.expm1(k * (t3 - t1)))
    return T1 - (T1 - T3) * ratio
