"""Randomized halving search for a unique pure saddle point (FindPSNE).

Each round samples ``ell`` probe rows and probe columns, picks the row with
the best worst case against the probe columns and the column with the best
worst case against the probe rows, reads that row and column, and keeps the
better half of the surviving rows and columns.  Only comparisons between
entries are used, so the number of queries never depends on payoff gaps.
"""
from __future__ import annotations

import math
from contextlib import nullcontext
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def make_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def probe_size(n: int, delta: float) -> int:
    """``ceil(2 log2(2 n^2 / delta))`` probes per side and round."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(2 * math.log2(2 * n * n / delta))


def query_bound(n: int, delta: float) -> float:
    """Distinct-query ceiling ``8 n log2(4 n^2 / delta)``."""
    return 8 * n * math.log2(4 * n * n / delta)


def sample_probe_set(pool: Sequence[int], ell: int, rng) -> list[int]:
    """``ell`` independent uniform draws from ``pool``, with replacement."""
    if not pool:
        raise ValueError("cannot sample from an empty pool")
    if ell < 1:
        raise ValueError("probe size must be positive")
    picks = make_rng(rng).integers(0, len(pool), size=ell)
    return [pool[p] for p in picks]


@dataclass
class PsneSearchState:
    iteration: int
    rows: list[int]
    cols: list[int]
    probe_rows: list[int]
    probe_cols: list[int]
    ell: int
    pivot_row: int
    pivot_col: int


def _block(oracle, rows, cols):
    if hasattr(oracle, "query_block"):
        return oracle.query_block(rows, cols)
    out = np.empty((len(rows), len(cols)), dtype=object)
    for a, i in enumerate(rows):
        for b, j in enumerate(cols):
            out[a, b] = oracle.query_entry(i, j)
    return out


def _tag(oracle, name):
    ledger = getattr(oracle, "ledger", None)
    return ledger.tagged(name) if ledger is not None else nullcontext()


def find_psne(oracle, delta: float, rng=None, trace: list | None = None) -> tuple[int, int]:
    """Return the pure saddle point of a square matrix, with probability at
    least ``1 - delta`` when that saddle point is unique.

    ``oracle`` is anything with ``n_rows``, ``n_cols`` and ``query_entry``
    (``query_block`` is used when present).  Ties are broken towards the
    lowest index.  If ``trace`` is a list, one :class:`PsneSearchState` per
    round is appended to it.
    """
    n = oracle.n_rows
    if oracle.n_cols != n:
        raise ValueError(f"FindPSNE needs a square matrix, got {n}x{oracle.n_cols}")
    rng = make_rng(rng)
    ell = probe_size(n, delta)
    rows = list(range(n))
    cols = list(range(n))
    t = 0
    while len(rows) > 1:
        t += 1
        size = len(rows)
        if ell >= size:
            probe_rows, probe_cols = list(rows), list(cols)
        else:
            probe_rows = sample_probe_set(rows, ell, rng)
            probe_cols = sample_probe_set(cols, ell, rng)
        pr, pc = sorted(set(probe_rows)), sorted(set(probe_cols))

        with _tag(oracle, "probe"):
            against_cols = _block(oracle, rows, pc)
            against_rows = _block(oracle, pr, cols)
        row_worst = np.asarray(against_cols).min(axis=1).tolist()
        col_worst = np.asarray(against_rows).max(axis=0).tolist()
        # max()/min() return the first optimum, i.e. the lowest index, since
        # rows and cols are kept sorted
        i_hat = rows[max(range(size), key=row_worst.__getitem__)]
        j_hat = cols[min(range(size), key=col_worst.__getitem__)]

        with _tag(oracle, "pivot"):
            pivot_col = np.asarray(_block(oracle, rows, [j_hat]))[:, 0].tolist()
            pivot_row = np.asarray(_block(oracle, [i_hat], cols))[0].tolist()

        keep = size // 2
        top = sorted(range(size), key=lambda a: (-pivot_col[a], rows[a]))[:keep]
        bottom = sorted(range(size), key=lambda b: (pivot_row[b], cols[b]))[:keep]
        if trace is not None:
            trace.append(
                PsneSearchState(t, rows, cols, probe_rows, probe_cols, ell, i_hat, j_hat)
            )
        rows = sorted(rows[a] for a in top)
        cols = sorted(cols[b] for b in bottom)
    return rows[0], cols[0]
