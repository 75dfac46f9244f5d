"""
Separable nonlinear least squares by grid refinement.

A pattern splits its parameters into nonlinear ones, searched on a product
grid, and linear ones, solved exactly at every grid node from the design
matrix the pattern builds. After each level the search box shrinks around
the winning node, which is carried over as a node of the next level, so the
winning RSS never increases.
"""

import itertools
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sl

from ..settings import settings
from .errors import GridSpecError, PreconditionError, RankDeficiencyError

if TYPE_CHECKING:
    from ..patterns.base import BasePattern

logger = logging.getLogger(__name__)

_GRID = re.compile(
    r"^\s*(?P<name>[A-Za-z_]\w*)\s*=\s*(?P<lo>[^:]+):(?P<hi>[^:]+)(?::(?P<points>\d+))?\s*$"
)


@dataclass(frozen=True)
class ParameterRange:
    """Search interval of one nonlinear parameter and its nodes per level"""

    name: str
    lo: float
    hi: float
    points: int

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.lo >= self.hi:
            raise GridSpecError(f"{self.name}: need finite lo < hi, got {self.lo}:{self.hi}")
        if self.points < 2:
            raise GridSpecError(f"{self.name}: need at least 2 points per level, got {self.points}")

    @classmethod
    def parse(cls, text: str, points: Optional[int] = None) -> "ParameterRange":
        """Parse 'name=lo:hi' or 'name=lo:hi:points'"""
        match = _GRID.match(text)
        if match is None:
            raise GridSpecError(f"malformed grid spec {text!r}; expected name=lo:hi[:points]")
        try:
            lo, hi = float(match["lo"]), float(match["hi"])
        except ValueError as e:
            raise GridSpecError(f"malformed bounds in grid spec {text!r}") from e
        count = int(match["points"]) if match["points"] else (points or settings.tac.points)
        return cls(match["name"], lo, hi, count)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def centre(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)

    def shrink_around(self, value: float, factor: float, box: "ParameterRange") -> "ParameterRange":
        """Interval of width/factor centred on value, shifted to stay inside box"""
        half = 0.5 * self.width / factor
        lo, hi = value - half, value + half
        if lo < box.lo:
            lo, hi = box.lo, box.lo + 2 * half
        if hi > box.hi:
            lo, hi = box.hi - 2 * half, box.hi
        return ParameterRange(self.name, lo, hi, self.points)


def parse_grid(
    specs: Iterable[str],
    names: Sequence[str],
    defaults: Mapping[str, Tuple[float, float]],
    points: Optional[int] = None,
) -> List[ParameterRange]:
    """Ranges for every nonlinear parameter, in pattern order; specs override defaults"""
    points = points or settings.tac.points
    given: Dict[str, ParameterRange] = {}
    for text in specs:
        parsed = ParameterRange.parse(text, points)
        if parsed.name not in names:
            raise GridSpecError(
                f"unknown parameter {parsed.name!r}; expected one of {', '.join(names)}"
            )
        given[parsed.name] = parsed
    ranges = []
    for name in names:
        if name in given:
            ranges.append(given[name])
        elif name in defaults:
            lo, hi = defaults[name]
            ranges.append(ParameterRange(name, float(lo), float(hi), points))
        else:
            raise GridSpecError(f"no search interval for parameter {name!r}")
    return ranges


def hadamard(u: Any, v: Any) -> np.ndarray:
    """Coordinatewise product of two vectors of equal length"""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape:
        raise PreconditionError(f"hadamard product needs equal shapes, got {a.shape} and {b.shape}")
    return a * b


@dataclass(frozen=True)
class LinearSolution:
    coefficients: np.ndarray
    rss: float
    full_rank: bool


def solve_linear(design: np.ndarray, y: np.ndarray) -> LinearSolution:
    """Least-squares coefficients by economic QR; rank-deficient designs fall back to lstsq"""
    if design.ndim != 2 or design.shape[0] != y.shape[0]:
        raise PreconditionError(f"design shape {design.shape} does not match {y.shape[0]} observations")
    if not np.all(np.isfinite(design)):
        return LinearSolution(np.full(design.shape[1], np.nan), np.inf, False)

    Q, R = sl.qr(design, mode="economic")
    diag = np.abs(np.diag(R))
    threshold = max(design.shape) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    full_rank = design.shape[0] >= design.shape[1] and bool(np.all(diag > threshold))
    if full_rank:
        coefficients = sl.solve_triangular(R, Q.T @ y)
    else:
        coefficients = sl.lstsq(design, y)[0]
    residual = y - design @ coefficients
    return LinearSolution(coefficients, float(residual @ residual), full_rank)


@dataclass
class SeparableFit:
    """Winning node of the grid refinement with its linear coefficients"""

    pattern: str
    nonlinear: Dict[str, float]
    linear: Dict[str, float]
    rss: float
    mse: float
    n: int
    iterations: int
    converged: bool
    nodes_evaluated: int
    rank_warnings: int = 0
    history: List[float] = field(default_factory=list)
    box: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    derived: Dict[str, float] = field(default_factory=dict)

    @property
    def params(self) -> Dict[str, float]:
        return {**self.nonlinear, **self.linear}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pattern": self.pattern,
            "nonlinear": self.nonlinear,
            "linear": self.linear,
            "derived": self.derived,
            "rss": self.rss,
            "mse": self.mse,
            "n": self.n,
            "iterations": self.iterations,
            "converged": self.converged,
            "nodes_evaluated": self.nodes_evaluated,
            "rank_warnings": self.rank_warnings,
            "history": self.history,
            "box": {k: list(v) for k, v in self.box.items()},
        }


class SeparableFitter:
    """Grid refinement driver for one pattern"""

    def __init__(
        self,
        pattern: "BasePattern",
        tol: Optional[float] = None,
        shrink: Optional[float] = None,
        max_iter: Optional[int] = None,
        workers: Optional[int] = None,
    ):
        self.pattern = pattern
        self.tol = settings.tac.tol if tol is None else tol
        self.shrink = settings.tac.shrink if shrink is None else shrink
        self.max_iter = settings.tac.max_iter if max_iter is None else max_iter
        self.workers = settings.tac.workers if workers is None else workers
        if self.tol <= 0:
            raise PreconditionError("tol must be positive")

    def _solve_node(self, node: Tuple[float, ...], names: Sequence[str], x: Any, y: np.ndarray) -> LinearSolution:
        theta = dict(zip(names, node))
        return solve_linear(np.asarray(self.pattern.design(theta, x), dtype=np.float64), y)

    def _evaluate(
        self, nodes: List[Tuple[float, ...]], names: Sequence[str], x: Any, y: np.ndarray
    ) -> List[LinearSolution]:
        if self.workers > 1 and len(nodes) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(lambda node: self._solve_node(node, names, x, y), nodes))
        return [self._solve_node(node, names, x, y) for node in nodes]

    def _converged(self, ranges: Sequence[ParameterRange]) -> bool:
        return all(r.width < self.tol * (1.0 + abs(r.centre)) for r in ranges)

    def fit(self, x: Any, y: Any, ranges: Sequence[ParameterRange]) -> SeparableFit:
        y = np.asarray(y, dtype=np.float64)
        metadata = self.pattern.metadata
        names = [r.name for r in ranges]
        if names != list(metadata.nonlinear):
            raise GridSpecError(
                f"grid parameters {names} do not match pattern parameters {metadata.nonlinear}"
            )
        box = {r.name: r for r in ranges}
        current = list(ranges)
        winner: Optional[Tuple[float, ...]] = None
        solution: Optional[LinearSolution] = None
        history: List[float] = []
        evaluated = 0
        rank_warnings = 0
        converged = False
        iterations = 0

        for iterations in range(1, self.max_iter + 1):
            nodes = list(itertools.product(*(r.nodes() for r in current)))
            if winner is not None and winner not in nodes:
                nodes.append(winner)
            solutions = self._evaluate(nodes, names, x, y)
            evaluated += len(nodes)

            deficient = [s for s in solutions if not s.full_rank]
            rank_warnings += len(deficient)
            usable = [i for i, s in enumerate(solutions) if s.full_rank and np.isfinite(s.rss)]
            if not usable:
                raise RankDeficiencyError(
                    f"every design matrix of level {iterations} is rank deficient",
                    {"level": iterations, "nodes": len(nodes)},
                )
            best = min(usable, key=lambda i: solutions[i].rss)
            if deficient and min(s.rss for s in deficient) < solutions[best].rss:
                logger.warning(
                    "Discarding a rank-deficient node with lower RSS at level %d", iterations
                )
            winner, solution = nodes[best], solutions[best]
            history.append(solution.rss)
            logger.debug("Level %d: rss=%r at %s", iterations, solution.rss, dict(zip(names, winner)))

            if self._converged(current):
                converged = True
                break
            current = [
                r.shrink_around(value, self.shrink, box[r.name]) for r, value in zip(current, winner)
            ]
        else:
            logger.warning("Grid refinement stopped after %d levels without converging", self.max_iter)

        nonlinear = {name: float(v) for name, v in zip(names, winner)}
        linear = {name: float(c) for name, c in zip(metadata.linear, solution.coefficients)}
        return SeparableFit(
            pattern=metadata.name,
            nonlinear=nonlinear,
            linear=linear,
            rss=solution.rss,
            mse=solution.rss / y.size,
            n=int(y.size),
            iterations=iterations,
            converged=converged,
            nodes_evaluated=evaluated,
            rank_warnings=rank_warnings,
            history=history,
            box={r.name: (r.lo, r.hi) for r in ranges},
            derived=self.pattern.finalize(nonlinear, linear),
        )


def fit_separable(
    pattern: "BasePattern",
    x: Any,
    y: Any,
    grid: Optional[Iterable[str]] = None,
    tol: Optional[float] = None,
    points: Optional[int] = None,
    **kwargs: Any,
) -> SeparableFit:
    """
    Fit a pattern to (x, y) with grid specs 'name=lo:hi[:points]' over the pattern defaults.

    Points per level come from the argument, then the pattern, then settings.
    """
    metadata = pattern.metadata
    points = points or metadata.points
    ranges = parse_grid(grid or (), metadata.nonlinear, pattern.default_ranges(x, y), points)
    return SeparableFitter(pattern, tol=tol, **kwargs).fit(x, y, ranges)
