"""
JSON report documents and delimited plot arrays.

Field names of ReportDocument are a stable interface (see README). Timing
lives in its own field so two runs on the same inputs and seed differ only
there.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .. import __version__
from .dataset import Dataset
from .fit_report import FitReport
from .minimax import band
from .separable import SeparableFit

PLOT_COLUMNS = ("t", "T", "fitted", "lower", "upper", "residual", "relative_error", "extremal")


def _plain(value: Any) -> Any:
    """JSON-safe copy: numpy scalars and arrays unwrapped, non-finite floats as null"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class ReportDocument(BaseModel):
    """Self-contained result of one command"""

    model_config = ConfigDict(extra="forbid")

    command: str
    version: str = __version__
    inputs_digest: Optional[str] = None
    n: Optional[int] = None
    taxonomy: Optional[Dict[str, Any]] = None
    model: Optional[Dict[str, Any]] = None
    error: Optional[float] = None
    rss: Optional[float] = None
    mse: Optional[float] = None
    certificate: Optional[Dict[str, Any]] = None
    quartet: Optional[List[int]] = None
    band: Optional[Dict[str, List[float]]] = None
    parameters: Dict[str, Any] = Field(default_factory=dict)
    diagnostics: Dict[str, Any] = Field(default_factory=dict)
    warning: Optional[str] = None
    seed: Optional[int] = None
    timing: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def from_fit(
        cls, command: str, data: Dataset, report: FitReport, include_band: bool = False, **kwargs: Any
    ) -> "ReportDocument":
        body = report.to_dict()
        diagnostics = dict(body["diagnostics"])
        timing = {"elapsed": diagnostics.pop("elapsed")} if "elapsed" in diagnostics else {}
        extra = {
            "evals": body["evals"],
            "k_bracket": body["k_bracket"],
            "trace": body["trace"],
            "alternatives": body["alternatives"],
        }
        document = cls(
            command=command,
            inputs_digest=data.digest(),
            n=data.n,
            taxonomy=body["taxonomy"],
            model=body["model"],
            error=body["error"],
            certificate=body["certificate"],
            quartet=body["quartet"],
            diagnostics={**_plain(diagnostics), **_plain(extra)},
            warning=body["warning"],
            timing=timing,
            **kwargs,
        )
        if include_band:
            upper, lower = band(report.model, data, report.error)
            document.band = {"upper": _plain(upper), "lower": _plain(lower)}
        return document

    @classmethod
    def from_separable(
        cls, command: str, data: Dataset, result: SeparableFit, **kwargs: Any
    ) -> "ReportDocument":
        body = _plain(result.to_dict())
        return cls(
            command=command,
            inputs_digest=data.digest(),
            n=result.n,
            model={"pattern": body["pattern"], **body["nonlinear"], **body["linear"]},
            rss=body["rss"],
            mse=body["mse"],
            parameters=body["derived"],
            diagnostics={
                key: body[key]
                for key in ("iterations", "converged", "nodes_evaluated", "rank_warnings", "history", "box")
            },
            **kwargs,
        )

    def to_json(self) -> str:
        return json.dumps(_plain(self.model_dump()), indent=2, sort_keys=False)

    def write(self, path: Optional[Path]) -> str:
        text = self.to_json()
        if path is not None:
            Path(path).write_text(text + "\n", encoding="utf-8")
        return text


def plot_array(
    data: Dataset, fitted: np.ndarray, error: Optional[float] = None, extremal: Sequence[int] = ()
) -> np.ndarray:
    """Rows of PLOT_COLUMNS for external plotting"""
    fitted = np.asarray(fitted, dtype=np.float64)
    residual = data.T - fitted
    half_width = float(np.max(np.abs(residual))) if error is None else float(error)
    with np.errstate(divide="ignore", invalid="ignore"):
        relative = np.where(data.T != 0, np.abs(residual) / np.abs(data.T), np.nan)
    flags = np.zeros(data.n)
    flags[list(extremal)] = 1.0
    return np.column_stack(
        [data.t, data.T, fitted, fitted - half_width, fitted + half_width, residual, relative, flags]
    )


def write_plot(path: Path, rows: np.ndarray) -> None:
    np.savetxt(path, rows, delimiter=",", fmt="%.17g", header=",".join(PLOT_COLUMNS), comments="")
