"""Deterministic pure saddle point search in at most ``3n - 2`` queries.

Phase one repeatedly compares the smallest and largest entries on the
diagonal of a shrinking board: the row of the smallest and the column of
the largest can hold no saddle point besides those two diagonal entries,
so both go to the candidate list, that row and column are dropped, and a
single new query restores a full diagonal.  Phase two thins the candidates
to at most one per row and column and eliminates them pairwise.

An entry ``(i, j)`` is *nullified* by a row witness ``A[i, l]`` and a column
witness ``A[k, j]`` when ``A[i, l] <= A[k, j]``: a strict saddle at ``(i, j)``
would need ``A[k, j] < A[i, j] < A[i, l]``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

from .oracle import OracleHandle, scalars_equal


class EmptyCandidates(RuntimeError):
    """Every candidate was eliminated; the matrix has no unique saddle point."""


class Candidate(NamedTuple):
    row: int
    col: int
    value: object


@dataclass
class SwordfishTrace:
    """Optional bookkeeping for audits: board snapshots and removed entries."""

    boards: list = field(default_factory=list)  # (live_rows, {row: col}) per round
    removed: list = field(default_factory=list)  # (row, col) proven not to be the saddle


def is_nullified(candidate, row_witness, col_witness) -> bool:
    """``row_witness = (i, l, A[i,l])`` shares the candidate's row and
    ``col_witness = (k, j, A[k,j])`` its column."""
    i, j = candidate[0], candidate[1]
    wi, wl, row_value = row_witness
    wk, wj, col_value = col_witness
    if wi != i or wj != j:
        raise ValueError("witnesses must share the candidate's row and column")
    if (wi, wl) == (wk, wj):
        raise ValueError("row and column witness must be distinct entries")
    return row_value <= col_value


def phase_one(oracle: OracleHandle, trace: SwordfishTrace | None = None) -> list[Candidate]:
    """Candidate list after ``2n - 1`` queries on a square matrix."""
    n = oracle.n_rows
    if oracle.n_cols != n:
        raise ValueError(f"Swordfish needs a square matrix, got {n}x{oracle.n_cols}")
    pairing = {i: i for i in range(n)}  # live row -> its queried "diagonal" column
    diag = {i: oracle.query_entry(i, i) for i in range(n)}
    candidates: list[Candidate] = []

    for _ in range(n - 1):
        live = sorted(pairing)
        assert len(set(pairing.values())) == len(live)
        assert all((r, c) in oracle.ledger for r, c in pairing.items())
        if trace is not None:
            trace.boards.append((live, dict(pairing)))

        low = min(live, key=lambda r: (diag[r], r))
        high = min(live, key=lambda r: (-diag[r], r))
        low_col, high_col = pairing[low], pairing[high]
        candidates.append(Candidate(low, low_col, diag[low]))
        if high != low:
            candidates.append(Candidate(high, high_col, diag[high]))

        extra = oracle.query_entry(high, low_col)
        if trace is not None:
            live_cols = set(pairing.values())
            trace.removed.extend((low, c) for c in sorted(live_cols) if c != low_col)
            trace.removed.extend((r, high_col) for r in live if r not in (low, high))

        del pairing[low]
        del diag[low]
        if high != low:
            pairing[high] = low_col
            diag[high] = extra

    (last_row, last_col), = pairing.items()
    if trace is not None:
        trace.boards.append(([last_row], dict(pairing)))
    candidates.append(Candidate(last_row, last_col, diag[last_row]))
    return candidates


def _thin(candidates, key, keep_min: bool, mode: str, eps: float, trace):
    """Keep at most one candidate per group: the unique min (or max), if any."""
    groups = defaultdict(list)
    for c in candidates:
        groups[key(c)].append(c)
    kept = []
    for group in groups.values():
        if len(group) == 1:
            kept.extend(group)
            continue
        best = min(g.value for g in group) if keep_min else max(g.value for g in group)
        winners = [g for g in group if scalars_equal(g.value, best, mode, eps)]
        survivors = winners if len(winners) == 1 else []
        kept.extend(survivors)
        if trace is not None:
            trace.removed.extend((g.row, g.col) for g in group if g not in survivors)
    return kept


def phase_two(
    oracle: OracleHandle, candidates: list[Candidate], trace: SwordfishTrace | None = None
) -> tuple[int, int]:
    """Reduce the candidate list to the saddle point with ``<= n - 1`` more queries."""
    # dict.fromkeys drops the duplicate a tied phase-one round may add
    cands = list(dict.fromkeys(candidates))
    cands = _thin(cands, lambda c: c.row, True, oracle.mode, oracle.eps, trace)
    cands = _thin(cands, lambda c: c.col, False, oracle.mode, oracle.eps, trace)
    if not cands:
        raise EmptyCandidates("no candidate survived preprocessing")
    diag = sorted(cands, key=lambda c: (c.value, c.row))
    s = len(diag)
    alive = [True] * s
    left = s
    j_hat, i_hat = 0, 1

    def drop(p):
        nonlocal left
        alive[p] = False
        left -= 1
        if trace is not None:
            trace.removed.append((diag[p].row, diag[p].col))

    while left > 1:
        if i_hat >= s:
            raise EmptyCandidates("candidate pointer ran past the list")
        a = oracle.query_entry(diag[i_hat].row, diag[j_hat].col)
        low, high = diag[j_hat].value, diag[i_hat].value
        if a < low and a <= high:
            drop(i_hat)
            i_hat += 1
        elif a >= low and a > high:
            drop(j_hat)
            j_hat, i_hat = i_hat, i_hat + 1
        elif a >= low and a <= high:
            drop(i_hat)
            drop(j_hat)
            j_hat, i_hat = i_hat + 1, i_hat + 2
        else:  # a < low <= high < a is impossible
            raise AssertionError("candidates are not sorted")
    if left == 0:
        raise EmptyCandidates("all candidates were nullified")
    winner = diag[alive.index(True)]
    return winner.row, winner.col


def swordfish(oracle: OracleHandle, trace: SwordfishTrace | None = None) -> tuple[int, int]:
    return phase_two(oracle, phase_one(oracle, trace), trace)
