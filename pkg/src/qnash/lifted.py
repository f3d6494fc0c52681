"""Exact Nash equilibria through the lifted game over k-subsets.

The lifted matrix has one row per k-subset of rows and one column per
k-subset of columns; its entry is the value of the corresponding k x k
submatrix.  When the true equilibrium has support size k, the lifted
matrix has a unique pure saddle point at the pair of supports, so
:func:`~qnash.psne.find_psne` can locate it.  The lifted matrix is never
materialized: each lifted read queries (through the base oracle's ledger)
only the base entries of its submatrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .minimax import (
    EquilibriumCertificate,
    MixedStrategy,
    SupportRejected,
    solve_full_support_equilibrium,
    solve_value,
    verify_equilibrium,
)
from .oracle import EXACT, MatrixInstance, OracleHandle
from .psne import find_psne, make_rng

#: largest C(n, k) for which rank sets are stored explicitly
MAX_LIFTED_SIZE = 10**6


class Exhausted(RuntimeError):
    """No support size produced a verified equilibrium."""


@dataclass(frozen=True)
class SubsetCodec:
    """Lexicographic ranking of k-subsets of ``range(n)`` (0-based ranks)."""

    n: int
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")

    @property
    def size(self) -> int:
        return math.comb(self.n, self.k)

    def unrank(self, r: int) -> tuple[int, ...]:
        if not 0 <= r < self.size:
            raise IndexError(f"rank {r} outside [0, {self.size})")
        out = []
        x = 0
        for need in range(self.k, 0, -1):
            while True:
                # subsets whose next element is x
                block = math.comb(self.n - x - 1, need - 1)
                if r < block:
                    out.append(x)
                    x += 1
                    break
                r -= block
                x += 1
        return tuple(out)

    def rank(self, subset: Sequence[int]) -> int:
        s = sorted(subset)
        if len(s) != self.k or len(set(s)) != self.k:
            raise ValueError(f"expected {self.k} distinct elements, got {subset!r}")
        if s[0] < 0 or s[-1] >= self.n:
            raise ValueError(f"elements of {subset!r} outside range({self.n})")
        r = 0
        prev = -1
        for pos, elem in enumerate(s):
            need = self.k - pos
            for x in range(prev + 1, elem):
                r += math.comb(self.n - x - 1, need - 1)
            prev = elem
        return r


class LiftedOracle:
    """Read-only view of the lifted matrix backed by a base oracle."""

    def __init__(self, base: OracleHandle, k: int):
        if base.n_rows != base.n_cols:
            raise ValueError("the lifted game is defined for square matrices")
        self.base = base
        self.codec = SubsetCodec(base.n_rows, k)
        self.value_cache: dict = {}

    @property
    def k(self) -> int:
        return self.codec.k

    @property
    def n_rows(self) -> int:
        return self.codec.size

    n_cols = n_rows

    @property
    def mode(self) -> str:
        return self.base.mode

    @property
    def ledger(self):
        return self.base.ledger

    def query_entry(self, i: int, j: int):
        key = (i, j)
        if key in self.value_cache:
            return self.value_cache[key]
        rows, cols = self.codec.unrank(i), self.codec.unrank(j)
        block = self.base.query_block(rows, cols)
        value = solve_value(MatrixInstance(block, self.base.mode, self.base.eps))
        self.value_cache[key] = value
        return value

    def query_block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Lifted entries for ``rows x cols``.

        The base entries touched are exactly the union of row subsets times the
        union of column subsets, so they are recorded as one rectangle.
        """
        rows, cols = list(rows), list(cols)
        row_sets = [self.codec.unrank(i) for i in rows]
        col_sets = [self.codec.unrank(j) for j in cols]
        base_rows = sorted({e for s in row_sets for e in s})
        base_cols = sorted({e for s in col_sets for e in s})
        self.base.ledger.record_block(base_rows, base_cols)
        if self.mode != EXACT and self.k <= 2:
            return _lifted_block_float(self.base.matrix.entries, row_sets, col_sets, self.k)
        out = np.empty((len(rows), len(cols)), dtype=object)
        for a, i in enumerate(rows):
            for b, j in enumerate(cols):
                out[a, b] = self.query_entry(i, j)
        return out


def _lifted_block_float(entries: np.ndarray, row_sets, col_sets, k: int) -> np.ndarray:
    """Vectorized lifted values for k <= 2 in float mode (closed forms).

    Callers have already recorded the base entries in the ledger.
    """
    R = np.asarray(row_sets)
    C = np.asarray(col_sets)
    if k == 1:
        return entries[np.ix_(R[:, 0], C[:, 0])]
    a = entries[np.ix_(R[:, 0], C[:, 0])]
    b = entries[np.ix_(R[:, 0], C[:, 1])]
    c = entries[np.ix_(R[:, 1], C[:, 0])]
    d = entries[np.ix_(R[:, 1], C[:, 1])]
    lower = np.maximum(np.minimum(a, b), np.minimum(c, d))
    upper = np.minimum(np.maximum(a, c), np.maximum(b, d))
    denom = a + d - b - c
    with np.errstate(divide="ignore", invalid="ignore"):
        mixed = (a * d - b * c) / denom
    return np.where(lower == upper, lower, mixed)


def materialize(lifted: LiftedOracle) -> MatrixInstance:
    """Every lifted entry; only sensible for small ``C(n, k)``."""
    size = lifted.n_rows
    return MatrixInstance(lifted.query_block(range(size), range(size)), lifted.mode)


def lifted_equilibrium(base: OracleHandle, k: int, delta: float, rng) -> EquilibriumCertificate:
    """One pass at support size ``k``: lifted saddle search, then the support
    system on the returned pair.  The result is not yet verified."""
    lifted = LiftedOracle(base, k)
    if lifted.n_rows > MAX_LIFTED_SIZE:
        raise ValueError(
            f"C({base.n_rows}, {k}) = {lifted.n_rows} exceeds {MAX_LIFTED_SIZE} subsets"
        )
    i_hat, j_hat = find_psne(lifted, delta, rng)
    rows, cols = lifted.codec.unrank(i_hat), lifted.codec.unrank(j_hat)
    with base.ledger.tagged("support"):
        block = base.query_block(rows, cols)
    core = solve_full_support_equilibrium(MatrixInstance(block, base.mode, base.eps))
    n = base.n_rows
    x = MixedStrategy.embed(n, rows, core.row_strategy.weights, base.mode)
    y = MixedStrategy.embed(n, cols, core.col_strategy.weights, base.mode)
    return EquilibriumCertificate(x, y, core.value)


def find_unique_nash(
    oracle: OracleHandle,
    delta: float,
    rng=None,
    support_size: int | None = None,
    split_delta: bool = False,
) -> EquilibriumCertificate:
    """Exact unique equilibrium of a square matrix game.

    Tries support sizes ``s = 1, 2, ...`` (or only ``support_size`` when it
    is known).  Each attempt runs the lifted saddle search at confidence
    ``delta`` (``delta / s`` with ``split_delta``), solves the support
    system and verifies the result against the full rows and columns of the
    supports.  Only verified certificates are returned.
    """
    n = oracle.n_rows
    if oracle.n_cols != n:
        raise ValueError("find_unique_nash needs a square matrix")
    rng = make_rng(rng)
    sizes = [support_size] if support_size is not None else range(1, n + 1)
    for s in sizes:
        step_delta = delta / s if split_delta else delta
        try:
            cert = lifted_equilibrium(oracle, s, step_delta, rng)
        except SupportRejected:
            continue
        with oracle.ledger.tagged("verify"):
            ok = verify_equilibrium(oracle, cert.row_strategy, cert.col_strategy)
        if ok:
            cert.verified = True
            cert.queries_used = oracle.distinct_query_count()
            cert.query_breakdown = dict(oracle.ledger.by_tag)
            return cert
    raise Exhausted(f"no verified equilibrium for support sizes {list(sizes)}")
