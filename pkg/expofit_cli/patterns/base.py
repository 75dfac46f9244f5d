"""
Base pattern architecture for the separable least-squares engine

A pattern names its nonlinear parameters (searched on a grid), its linear
parameters (solved exactly), and builds the design matrix whose columns
multiply the linear parameters.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..core.dataset import Dataset


@dataclass
class PatternMetadata:
    """Metadata for a pattern"""

    name: str
    version: str
    description: str
    nonlinear: List[str] = field(default_factory=list)
    linear: List[str] = field(default_factory=list)
    default_grid: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    response: str = "y"
    points: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.nonlinear or not self.linear:
            raise ValueError(f"pattern {self.name} needs nonlinear and linear parameters")
        overlap = set(self.nonlinear) & set(self.linear)
        if overlap:
            raise ValueError(f"pattern {self.name} declares {sorted(overlap)} as both kinds")
        if self.points is not None and self.points < 2:
            raise ValueError(f"pattern {self.name} needs at least 2 points per level")


class BasePattern(ABC):
    """
    Abstract base class for separable model patterns.

    Subclasses implement design(); prepare(), default_ranges() and
    finalize() have overridable defaults.
    """

    def __init__(self) -> None:
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    @property
    @abstractmethod
    def metadata(self) -> PatternMetadata:
        """Return pattern metadata"""
        pass

    @abstractmethod
    def design(self, theta: Mapping[str, float], x: Any) -> np.ndarray:
        """
        Design matrix at one nonlinear node.

        Args:
            theta: nonlinear parameter values by name
            x: regressors as returned by prepare()

        Returns:
            np.ndarray: (observations, len(metadata.linear)) matrix
        """
        pass

    def prepare(self, data: Dataset) -> Tuple[Any, np.ndarray]:
        """Regressors and response from a dataset (default: t and T)"""
        return data.t, data.T

    def default_ranges(self, x: Any, y: np.ndarray) -> Dict[str, Tuple[float, float]]:
        return dict(self.metadata.default_grid)

    def predict(self, theta: Mapping[str, float], linear: Mapping[str, float], x: Any) -> np.ndarray:
        coefficients = np.array([linear[name] for name in self.metadata.linear])
        return self.design(theta, x) @ coefficients

    def finalize(self, nonlinear: Mapping[str, float], linear: Mapping[str, float]) -> Dict[str, float]:
        """Domain parameters derived from the fitted ones (none by default)"""
        return {}

    def get_help(self) -> str:
        meta = self.metadata
        grid = ", ".join(f"{k}=[{lo:g}, {hi:g}]" for k, (lo, hi) in meta.default_grid.items())
        return (
            f"Pattern: {meta.name} v{meta.version}\n"
            f"Description: {meta.description}\n"
            f"Nonlinear: {', '.join(meta.nonlinear)}\n"
            f"Linear: {', '.join(meta.linear)}\n"
            f"Default grid: {grid or 'derived from data'}\n"
            f"Points per level: {meta.points or 'from settings'}"
        )

    def __str__(self) -> str:
        return f"{self.metadata.name} v{self.metadata.version}"

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}({self.metadata.name})>"


def pattern(name: str, version: str, description: str, **kwargs: Any):
    """
    Decorator to mark a class as a pattern and set its metadata.

    Args:
        name: Pattern name used on the command line
        version: Pattern version
        description: One-line description
        **kwargs: Additional metadata fields (nonlinear, linear, default_grid, ...)
    """

    def decorator(cls):
        if not issubclass(cls, BasePattern):
            raise TypeError(f"Pattern class {cls.__name__} must inherit from BasePattern")

        metadata = PatternMetadata(name=name, version=version, description=description, **kwargs)
        cls.metadata = property(lambda self: metadata)
        if hasattr(cls, "__abstractmethods__"):
            cls.__abstractmethods__ = frozenset(m for m in cls.__abstractmethods__ if m != "metadata")
        return cls

    return decorator
