"""Payoff matrices and the query-counting oracle.

Every algorithm in this package reads matrix entries only through an
:class:`OracleHandle`, whose :class:`QueryLedger` records each distinct
``(row, col)`` coordinate that was read.  Indices are 0-based everywhere in
the Python API; :func:`to_one_based` / :func:`from_one_based` are the single
adapter used by the CLI and the serialized formats.
"""
from __future__ import annotations

import itertools
import os
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

#: absolute tolerance for equality tests in float mode
FLOAT_EPS = 1e-9

MODE_ENV_VAR = "QNASH_MODE"


def default_mode() -> str:
    mode = os.environ.get(MODE_ENV_VAR, EXACT)
    if mode not in MODES:
        raise ValueError(f"{MODE_ENV_VAR}={mode!r}; expected one of {MODES}")
    return mode


def to_one_based(index: int) -> int:
    return index + 1


def from_one_based(index: int) -> int:
    if index < 1:
        raise IndexError(f"1-based index must be >= 1, got {index}")
    return index - 1


def parse_scalar(text: str, mode: str = EXACT):
    """Parse ``"p/q"`` or a decimal literal into the scalar type of ``mode``."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse matrix entry {text!r}") from exc
    return value if mode == EXACT else float(value)


def to_scalar(value, mode: str):
    # Fraction(float) is the exact binary expansion, never a rounded decimal
    return Fraction(value) if mode == EXACT else float(value)


def format_scalar(value) -> str:
    """Rationals as ``p/q`` (or ``p``), floats with 17 significant digits."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def scalars_equal(a, b, mode: str, eps: float = FLOAT_EPS) -> bool:
    if mode == EXACT:
        return a == b
    return abs(a - b) <= eps


@dataclass
class MatrixInstance:
    """A dense payoff matrix in one arithmetic mode.

    Exact mode stores :class:`fractions.Fraction` objects in an object array;
    float mode stores a ``float64`` array.
    """

    entries: np.ndarray
    mode: str = EXACT
    eps: float = FLOAT_EPS

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown arithmetic mode {self.mode!r}")
        arr = np.asarray(self.entries)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"matrix must be a non-empty 2-d grid, got shape {arr.shape}")
        if self.mode == EXACT:
            if arr.dtype != object:
                arr = np.vectorize(Fraction, otypes=[object])(arr.tolist())
        else:
            arr = arr.astype(float)
        self.entries = arr

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], mode: str = EXACT) -> "MatrixInstance":
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise ValueError("ragged matrix rows")
        if mode == EXACT:
            data = np.empty((len(rows), widths.pop()), dtype=object)
            for i, row in enumerate(rows):
                for j, v in enumerate(row):
                    data[i, j] = to_scalar(v, EXACT)
            return cls(data, EXACT)
        return cls(np.array([[float(v) for v in r] for r in rows]), FLOAT)

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def __getitem__(self, key):
        return self.entries[key]

    def value(self, i: int, j: int):
        v = self.entries[i, j]
        return v if self.mode == EXACT else float(v)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "MatrixInstance":
        return MatrixInstance(self.entries[np.ix_(list(rows), list(cols))], self.mode, self.eps)

    def transpose(self) -> "MatrixInstance":
        return MatrixInstance(self.entries.T.copy(), self.mode, self.eps)

    def __neg__(self) -> "MatrixInstance":
        return MatrixInstance(-self.entries, self.mode, self.eps)

    def to_float(self) -> "MatrixInstance":
        return MatrixInstance(self.entries.astype(float), FLOAT, self.eps)

    def tolist(self) -> list[list]:
        return [[self.value(i, j) for j in range(self.n_cols)] for i in range(self.n_rows)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixInstance):
            return NotImplemented
        return (
            self.mode == other.mode
            and self.shape == other.shape
            and bool(np.all(self.entries == other.entries))
        )


@dataclass
class QueryLedger:
    """Distinct coordinates read so far, in first-read order.

    A dict is used as an insertion-ordered set so that two runs can be
    compared query-by-query, not only by count.
    """

    queried: dict = field(default_factory=dict)
    by_tag: Counter = field(default_factory=Counter)
    tag: str = "untagged"

    @property
    def distinct_count(self) -> int:
        return len(self.queried)

    def record(self, i: int, j: int) -> bool:
        key = (i, j)
        if key in self.queried:
            return False
        self.queried[key] = None
        self.by_tag[self.tag] += 1
        return True

    def record_block(self, rows: Iterable[int], cols: Iterable[int]) -> int:
        before = len(self.queried)
        cols = list(cols)
        for key in itertools.product(rows, cols):
            if key not in self.queried:
                self.queried[key] = None
        added = len(self.queried) - before
        if added:
            self.by_tag[self.tag] += added
        return added

    def __contains__(self, key) -> bool:
        return key in self.queried

    def sequence(self) -> list[tuple[int, int]]:
        return list(self.queried)

    def reset(self) -> None:
        self.queried.clear()
        self.by_tag.clear()

    @contextmanager
    def tagged(self, tag: str):
        """Attribute queries made inside the block to ``tag``."""
        previous, self.tag = self.tag, tag
        try:
            yield self
        finally:
            self.tag = previous


class OracleHandle:
    """A matrix hidden behind ``query_entry``; the only way to read payoffs."""

    def __init__(self, matrix: MatrixInstance):
        self.matrix = matrix
        self.ledger = QueryLedger()

    @property
    def n_rows(self) -> int:
        return self.matrix.n_rows

    @property
    def n_cols(self) -> int:
        return self.matrix.n_cols

    @property
    def mode(self) -> str:
        return self.matrix.mode

    @property
    def eps(self) -> float:
        return self.matrix.eps

    def _check(self, i: int, j: int) -> None:
        if not (0 <= i < self.n_rows and 0 <= j < self.n_cols):
            raise IndexError(
                f"entry ({i}, {j}) outside a {self.n_rows}x{self.n_cols} matrix"
            )

    def query_entry(self, i: int, j: int):
        self._check(i, j)
        self.ledger.record(i, j)
        return self.matrix.value(i, j)

    def query_block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Read the ``rows x cols`` block, recording every coordinate."""
        rows, cols = list(rows), list(cols)
        for i in rows:
            self._check(i, 0)
        for j in cols:
            self._check(0, j)
        self.ledger.record_block(rows, cols)
        return self.matrix.entries[np.ix_(rows, cols)]

    def query_row(self, i: int) -> np.ndarray:
        return self.query_block([i], range(self.n_cols))[0]

    def query_col(self, j: int) -> np.ndarray:
        return self.query_block(range(self.n_rows), [j])[:, 0]

    def distinct_query_count(self) -> int:
        return self.ledger.distinct_count

    def reset_ledger(self) -> None:
        self.ledger.reset()

    def __repr__(self) -> str:
        return (
            f"OracleHandle({self.n_rows}x{self.n_cols}, mode={self.mode}, "
            f"queries={self.distinct_query_count()})"
        )


def read_matrix(path, mode: str | None = None) -> MatrixInstance:
    """Read the plain-text matrix format.

    First line ``n_rows n_cols``, then ``n_rows`` lines of whitespace separated
    entries, each ``p/q`` or a decimal literal.
    """
    mode = mode or default_mode()
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"{path}: header must be 'n_rows n_cols'")
    try:
        n_rows, n_cols = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ValueError(f"{path}: non-integer header {lines[0]!r}") from exc
    if n_rows < 1 or n_cols < 1:
        raise ValueError(f"{path}: dimensions must be positive")
    body = lines[1:]
    if len(body) != n_rows:
        raise ValueError(f"{path}: expected {n_rows} rows, found {len(body)}")
    rows = []
    for lineno, line in enumerate(body, start=2):
        tokens = line.split()
        if len(tokens) != n_cols:
            raise ValueError(f"{path}:{lineno}: expected {n_cols} entries, found {len(tokens)}")
        rows.append([parse_scalar(t, EXACT) for t in tokens])
    matrix = MatrixInstance.from_rows(rows, EXACT)
    return matrix if mode == EXACT else matrix.to_float()


def write_matrix(path, matrix: MatrixInstance) -> None:
    lines = [f"{matrix.n_rows} {matrix.n_cols}"]
    for row in matrix.tolist():
        lines.append(" ".join(format_scalar(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
