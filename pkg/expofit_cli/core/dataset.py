"""
Dataset ingestion, validation and the symmetry transforms.

A Dataset is an immutable pair of float64 vectors (t, T) with strictly
increasing abscissae. Text input is two delimited columns (comma or
whitespace) with an optional header line, which is recognised by a
non-numeric first row.
"""

import hashlib
import io
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .errors import DatasetError, PreconditionError

logger = logging.getLogger(__name__)

Source = Union[str, Path, IO[str]]

_SPLIT = re.compile(r"[,\s;]+")


def _frozen(values: Iterable[float]) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Dataset:
    """Validated sample (t_i, T_i), i = 0..n-1, sorted by t"""

    t: np.ndarray
    T: np.ndarray

    def __post_init__(self) -> None:
        t = _frozen(self.t)
        T = _frozen(self.T)
        if t.ndim != 1 or T.ndim != 1 or t.shape != T.shape:
            raise DatasetError("wrong-columns", "t and T must be vectors of equal length")
        if t.size < 2:
            raise DatasetError("too-few-rows", f"need at least 2 rows, got {t.size}")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(T))):
            raise DatasetError("non-finite", "dataset contains NaN or infinite values")
        steps = np.diff(t)
        if np.any(steps == 0):
            where = int(np.flatnonzero(steps == 0)[0])
            raise DatasetError(
                "duplicate-abscissa", f"duplicate abscissa t={float(t[where])!r}"
            )
        if np.any(steps < 0):
            raise DatasetError("unsorted", "abscissae must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "T", T)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, float]]) -> "Dataset":
        """Build a dataset from unsorted (t, T) pairs"""
        rows = list(pairs)
        if len(rows) < 2:
            raise DatasetError("too-few-rows", f"need at least 2 rows, got {len(rows)}")
        t = np.array([r[0] for r in rows], dtype=np.float64)
        T = np.array([r[1] for r in rows], dtype=np.float64)
        order = np.argsort(t, kind="stable")
        return cls(t[order], T[order])

    @property
    def n(self) -> int:
        return int(self.t.size)

    @property
    def span(self) -> float:
        return float(self.t[-1] - self.t[0])

    def require(self, minimum: int = 3) -> "Dataset":
        if self.n < minimum:
            raise PreconditionError(f"operation needs n >= {minimum}, dataset has n = {self.n}")
        return self

    def reflect_t(self) -> "Dataset":
        """((-t_n, ..., -t_1), (T_n, ..., T_1)); an involution"""
        return Dataset(-self.t[::-1], self.T[::-1])

    def negate_T(self) -> "Dataset":
        """(t, -T); an involution"""
        return Dataset(self.t, -self.T)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(sorted(indices), dtype=int)
        return Dataset(self.t[idx], self.T[idx])

    def serialize(self) -> str:
        """Text form accepted by load(); floats use repr so the round trip is exact"""
        lines = [f"{float(a)!r},{float(b)!r}" for a, b in zip(self.t, self.T)]
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return bool(np.array_equal(self.t, other.t) and np.array_equal(self.T, other.T))

    def __hash__(self) -> int:
        return hash(self.serialize())

    def __len__(self) -> int:
        return self.n


def _read_text(source: Source) -> str:
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            return path.read_text(encoding="utf-8")
        except OSError as e:
            raise DatasetError("unreadable", f"cannot read {path}: {e}") from e
    return source.read()


def _parse_rows(text: str, columns: Tuple[int, ...]) -> List[List[float]]:
    rows: List[List[float]] = []
    first_content_line = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cells = [c for c in _SPLIT.split(line) if c]
        try:
            values = [float(c) for c in cells]
        except ValueError:
            if first_content_line:
                logger.debug("Skipping header line %d: %r", lineno, raw)
                first_content_line = False
                continue
            raise DatasetError(
                "non-numeric", f"non-numeric cell on line {lineno}: {raw!r}", line=lineno
            )
        first_content_line = False
        if len(values) not in columns:
            raise DatasetError(
                "wrong-columns",
                f"line {lineno} has {len(values)} columns, expected {' or '.join(map(str, columns))}",
                line=lineno,
            )
        rows.append(values)
    return rows


def parse(text: str) -> Dataset:
    """Parse two-column text into a sorted Dataset"""
    rows = _parse_rows(text, (2,))
    if len(rows) < 2:
        raise DatasetError("too-few-rows", f"need at least 2 rows, got {len(rows)}")
    return Dataset.from_pairs((r[0], r[1]) for r in rows)


def load(source: Source) -> Dataset:
    """Read a dataset from a path or an open text stream"""
    dataset = parse(_read_text(source))
    logger.debug("Loaded dataset with n=%d", dataset.n, extra={"metadata": {"digest": dataset.digest()}})
    return dataset


def load_series(source: Source) -> np.ndarray:
    """Read a plain series (one value per row; with two columns the last one is used)"""
    rows = _parse_rows(_read_text(source), (1, 2))
    if len(rows) < 2:
        raise DatasetError("too-few-rows", f"need at least 2 rows, got {len(rows)}")
    series = np.array([r[-1] for r in rows], dtype=np.float64)
    if not np.all(np.isfinite(series)):
        raise DatasetError("non-finite", "series contains NaN or infinite values")
    return series


def series_text(series: Sequence[float]) -> str:
    return "".join(f"{float(x)!r}\n" for x in series)


def loads(text: str) -> Dataset:
    return load(io.StringIO(text))
