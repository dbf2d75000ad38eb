"""Two-sample containers, CSV ingestion, and design transforms.

Observations are rows of real vectors.  ``TwoSampleData`` holds the raw
groups; ``apply_h`` maps them through a transform ``h`` and pools them into
a ``DesignData`` with the sample-1 block first, which is the layout every
downstream routine assumes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    EmptyGroupError,
    InvalidArgument,
    ParseError,
)


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def _as_matrix(values, name):
    a = np.asarray(values, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise InvalidArgument(f"{name} must be a 1-D or 2-D array, got ndim={a.ndim}")
    if a.shape[0] == 0:
        raise EmptyGroupError(f"{name} has no observations")
    if a.shape[1] == 0:
        raise InvalidArgument(f"{name} has no covariate columns")
    if not np.all(np.isfinite(a)):
        raise InvalidArgument(f"{name} contains non-finite entries")
    return _frozen(a)


@dataclass(frozen=True)
class TwoSampleData:
    """Raw observations, one row per observation, same width in both groups."""

    sample1: np.ndarray
    sample2: np.ndarray

    def __post_init__(self):
        s1 = _as_matrix(self.sample1, "sample1")
        s2 = _as_matrix(self.sample2, "sample2")
        if s1.shape[1] != s2.shape[1]:
            raise DimensionError(
                f"samples have different widths: {s1.shape[1]} vs {s2.shape[1]}"
            )
        object.__setattr__(self, "sample1", s1)
        object.__setattr__(self, "sample2", s2)

    @property
    def n1(self) -> int:
        return self.sample1.shape[0]

    @property
    def n2(self) -> int:
        return self.sample2.shape[0]

    @property
    def m(self) -> int:
        return self.sample1.shape[1]


_KIND_ALIASES = {
    "identity": "identity",
    "log": "log",
    "quad": "quad",
    "quadratic-expansion": "quad",
    "cols": "cols",
    "selected-columns": "cols",
}


@dataclass(frozen=True)
class HTransform:
    """Coordinate transform applied to each observation before pooling.

    Kinds: ``identity`` (t = x), ``log`` (elementwise, positive domain),
    ``quad`` (columns of x followed by their squares), and ``cols`` (a
    subset of raw columns, ``columns`` required).  Every kind maps some
    point to the zero vector (x = 1 for ``log``, x = 0 otherwise), so the
    intercept stays identifiable for all of them.
    """

    kind: str
    columns: tuple[int, ...] | None = None

    def __post_init__(self):
        canonical = _KIND_ALIASES.get(self.kind)
        if canonical is None:
            raise InvalidArgument(
                f"unknown transform kind {self.kind!r}; "
                f"expected one of {sorted(set(_KIND_ALIASES))}"
            )
        object.__setattr__(self, "kind", canonical)
        if canonical == "cols":
            if not self.columns:
                raise InvalidArgument("cols transform requires a nonempty column tuple")
            cols = tuple(int(c) for c in self.columns)
            if any(c < 0 for c in cols):
                raise InvalidArgument("column indices must be nonnegative")
            object.__setattr__(self, "columns", cols)
        elif self.columns is not None:
            raise InvalidArgument(f"columns are only meaningful for kind='cols'")

    @classmethod
    def from_string(cls, text: str) -> "HTransform":
        """Parse a CLI-style designator: identity | log | quad | cols=0,2."""
        if text.startswith("cols="):
            try:
                cols = tuple(int(c) for c in text[5:].split(",") if c != "")
            except ValueError as exc:
                raise InvalidArgument(f"bad column list in {text!r}") from exc
            return cls("cols", cols)
        return cls(text)

    def output_dim(self, m: int) -> int:
        if self.kind == "quad":
            return 2 * m
        if self.kind == "cols":
            return len(self.columns)
        return m

    def _apply(self, x: np.ndarray, label: str) -> np.ndarray:
        if self.kind == "identity":
            return np.array(x, dtype=float)
        if self.kind == "log":
            bad = x <= 0.0
            if np.any(bad):
                i, j = np.argwhere(bad)[0]
                raise DomainError(
                    f"{label}: observation {i + 1}, column {j + 1} is "
                    f"{x[i, j]!r}, but the log transform needs positive values"
                )
            return np.log(x)
        if self.kind == "quad":
            return np.hstack([x, x * x])
        if max(self.columns) >= x.shape[1]:
            raise DimensionError(
                f"{label}: column index {max(self.columns)} out of range "
                f"for width {x.shape[1]}"
            )
        return np.array(x[:, list(self.columns)], dtype=float)

    def __call__(self, x) -> np.ndarray:
        return self._apply(_as_matrix(x, "x"), "input")


@dataclass(frozen=True)
class DesignData:
    """Pooled transformed design: sample-1 rows first, then sample-2 rows.

    ``t`` is the transformed design (n, d); ``x`` keeps the raw pooled
    observations (n, m) in the same order, which the distribution
    estimators need for indicator functions on the raw scale.  Arrays are
    read-only, so instances are safe to share across concurrent tasks.
    """

    t: np.ndarray
    x: np.ndarray
    n1: int
    n2: int

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        x = np.asarray(self.x, dtype=float)
        if t.ndim == 1:
            t = t.reshape(-1, 1)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if t.ndim != 2 or x.ndim != 2:
            raise DimensionError("t and x must be 2-D")
        if self.n1 < 1 or self.n2 < 1:
            raise EmptyGroupError("both groups need at least one observation")
        n = self.n1 + self.n2
        if t.shape[0] != n or x.shape[0] != n:
            raise DimensionError(
                f"pooled arrays must have n1 + n2 = {n} rows, "
                f"got t: {t.shape[0]}, x: {x.shape[0]}"
            )
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x))):
            raise InvalidArgument("design contains non-finite entries")
        object.__setattr__(self, "t", _frozen(t))
        object.__setattr__(self, "x", _frozen(x))

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def d(self) -> int:
        return self.t.shape[1]

    @property
    def m(self) -> int:
        return self.x.shape[1]

    @property
    def rho1(self) -> float:
        return self.n1 / self.n2

    @property
    def log_rho1(self) -> float:
        return math.log(self.n1) - math.log(self.n2)

    @property
    def group(self) -> np.ndarray:
        """Group label per pooled row: 1 for the first n1, 2 after."""
        return np.repeat(np.array([1, 2]), [self.n1, self.n2])


def apply_h(data: TwoSampleData, h: HTransform) -> DesignData:
    """Transform both samples through ``h`` and pool them."""
    t1 = h._apply(data.sample1, "sample 1")
    t2 = h._apply(data.sample2, "sample 2")
    return DesignData(
        t=np.vstack([t1, t2]),
        x=np.vstack([data.sample1, data.sample2]),
        n1=data.n1,
        n2=data.n2,
    )


def _read_text(source) -> str:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8-sig")
    if isinstance(source, bytes):
        return source.decode("utf-8-sig")
    raw = source.read()
    if isinstance(raw, bytes):
        return raw.decode("utf-8-sig")
    return raw


def load_two_sample_csv(source, sample_column: str = "sample") -> TwoSampleData:
    """Load a labeled CSV into a :class:`TwoSampleData`.

    ``source`` is a path, a byte string, or a file-like object.  The header
    must contain ``sample_column`` with values 1 or 2; every other column
    is a numeric covariate, kept in file order.  Errors name the offending
    file row (1-based, header included).
    """
    rows = list(csv.reader(io.StringIO(_read_text(source))))
    rows = [r for r in rows if any(c.strip() != "" for c in r)]
    if not rows:
        raise ParseError("empty CSV: no header row")
    header = [c.strip() for c in rows[0]]
    try:
        sample_idx = header.index(sample_column)
    except ValueError:
        raise ParseError(
            f"missing sample column {sample_column!r}; header is {header}"
        ) from None
    cov_idx = [j for j in range(len(header)) if j != sample_idx]
    if not cov_idx:
        raise ParseError("no covariate columns besides the sample column")

    groups: dict[int, list[list[float]]] = {1: [], 2: []}
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(
                f"row {line_no}: expected {len(header)} fields, got {len(row)}"
            )
        label_text = row[sample_idx].strip()
        try:
            label_value = float(label_text)
        except ValueError:
            label_value = math.nan
        if label_value not in (1.0, 2.0):
            raise ParseError(
                f"row {line_no}: sample label must be 1 or 2, got {label_text!r}"
            )
        values = []
        for j in cov_idx:
            text = row[j].strip()
            try:
                value = float(text)
            except ValueError:
                raise ParseError(
                    f"row {line_no}, column {header[j]!r}: "
                    f"non-numeric value {text!r}"
                ) from None
            if not math.isfinite(value):
                raise ParseError(
                    f"row {line_no}, column {header[j]!r}: non-finite value {text!r}"
                )
            values.append(value)
        groups[int(label_value)].append(values)

    if not groups[1]:
        raise EmptyGroupError("sample 1 has no rows")
    if not groups[2]:
        raise EmptyGroupError("sample 2 has no rows")
    return TwoSampleData(np.array(groups[1]), np.array(groups[2]))


def write_two_sample_csv(data: TwoSampleData, dest, sample_column: str = "sample") -> None:
    """Write ``data`` as CSV; floats use repr so a reload is bit-exact."""
    header = [sample_column] + [f"x{j + 1}" for j in range(data.m)]
    lines = [",".join(header)]
    for label, block in ((1, data.sample1), (2, data.sample2)):
        for row in block:
            lines.append(",".join([str(label)] + [repr(float(v)) for v in row]))
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)
