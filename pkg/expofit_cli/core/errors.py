"""
Exception hierarchy for the expofit toolkit.

Input problems (bad files, violated preconditions, malformed grid specs) derive
from InputError; failures of the numerics themselves derive from NumericalError.
The CLI maps the two families to distinct exit codes.
"""

from typing import Any, Dict, Optional


class ExpofitError(Exception):
    """Base class for all expofit errors"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


class InputError(ExpofitError):
    """Raised when user supplied data or options are invalid"""

    exit_code = 2


class DatasetError(InputError):
    """Raised when a dataset cannot be parsed or violates its invariants"""

    def __init__(self, reason: str, message: str, line: Optional[int] = None):
        details: Dict[str, Any] = {"reason": reason}
        if line is not None:
            details["line"] = line
        super().__init__(message, details)
        self.reason = reason
        self.line = line


class PreconditionError(InputError):
    """Raised when an operation is called outside its domain"""

    pass


class GridSpecError(InputError):
    """Raised for malformed name=lo:hi:points grid specifications"""

    pass


class PatternNotFoundError(InputError):
    """Raised when a separable pattern name is not registered"""

    pass


class NumericalError(ExpofitError):
    """Raised when a numerical procedure cannot produce a trustworthy result"""

    exit_code = 3


class OverflowGuardError(NumericalError):
    """Raised when exp(k*t) would leave the finite double range"""

    def __init__(self, k: float, t_extreme: float, limit: float):
        product = abs(k * t_extreme)
        super().__init__(
            f"|k*t| = {product:.6g} exceeds {limit:g} (k={k:.6g}, t={t_extreme:.6g}); "
            "rescale or shift the abscissae so that |k*t| stays below the limit",
            {"k": k, "t": t_extreme, "limit": limit},
        )


class BracketNotFoundError(NumericalError):
    """Raised when a sign change or minimizer bracket cannot be established"""

    pass


class RankDeficiencyError(NumericalError):
    """Raised when every candidate design matrix is rank deficient"""

    pass


class DivergenceError(NumericalError):
    """Raised when a simulated series escapes the divergence guard"""

    def __init__(self, index: int, value: float, bound: float):
        super().__init__(
            f"series diverged at index {index}: |x| = {abs(value):.6g} > {bound:g}",
            {"index": index, "value": value, "bound": bound},
        )
        self.index = index
        self.value = value
