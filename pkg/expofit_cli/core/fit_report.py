"""Result object shared by the quartet solver and the global fitter"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .classifier import Taxonomy
from .dataset import Dataset
from .minimax import AlternationCertificate, Model, extract_certificate, fitted_values


@dataclass
class FitReport:
    """Best approximation of a dataset with its certificate and search diagnostics"""

    taxonomy: Taxonomy
    model: Model
    error: float
    certificate: AlternationCertificate
    quartet: Optional[Tuple[int, ...]] = None
    evals: int = 0
    k_bracket: Optional[float] = None
    trace: List[Tuple[float, float]] = field(default_factory=list)
    warning: Optional[str] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    alternatives: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    @classmethod
    def build(cls, data: Dataset, taxonomy: Taxonomy, model: Model, **kwargs: Any) -> "FitReport":
        """Measure the model on the full data and attach its certificate"""
        residuals = data.T - fitted_values(model, data)
        error = float(np.max(np.abs(residuals)))
        return cls(taxonomy, model, error, extract_certificate(residuals, error), **kwargs)

    def residuals(self, data: Dataset) -> np.ndarray:
        return data.T - fitted_values(self.model, data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "taxonomy": self.taxonomy.to_dict(),
            "model": self.model.to_dict(),
            "error": self.error,
            "certificate": self.certificate.to_dict(),
            "quartet": list(self.quartet) if self.quartet is not None else None,
            "evals": self.evals,
            "k_bracket": self.k_bracket,
            "trace": [[k, e] for k, e in self.trace],
            "warning": self.warning,
            "diagnostics": self.diagnostics,
            "alternatives": self.alternatives,
        }
