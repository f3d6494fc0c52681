"""Seeded trial batches, CSV reports and plot-ready series."""
from __future__ import annotations

import csv
import hashlib
import io
import math
import statistics
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .instances import InstanceSpec, generate
from .lifted import Exhausted, find_unique_nash
from .minimax import NotUnique, brute_force_unique_nash
from .oracle import EXACT, OracleHandle, format_scalar
from .psne import find_psne, query_bound
from .swordfish import EmptyCandidates, swordfish

ALGORITHMS = ("psne", "swordfish", "nash", "brute")
CSV_COLUMNS = ("family", "n", "k", "seed", "algo", "success", "queries", "micros")
AGGREGATE_SEED = "all"


def default_algo(family: str) -> str:
    return "psne" if family in ("planted_psne", "gap") else "nash"


def bound_for(algo: str, n: int, delta: float) -> float:
    """Distinct-query ceiling plotted next to the measurements.

    ``nash`` has no explicit constant; the full matrix ``n^2`` is used as the
    reference line the sublinear-in-``n^2`` regime is measured against.
    """
    if algo == "swordfish":
        return 3 * n - 2
    if algo == "psne":
        return query_bound(n, delta)
    return n * n


def trial_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent streams for instance generation and the algorithm."""
    inst, algo = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(inst), np.random.default_rng(algo)


@dataclass
class TrialRecord:
    family: str
    n: int
    k: int
    seed: int
    algo: str
    success: bool
    queries: int
    micros: int
    digest: str

    def csv_row(self) -> list[str]:
        return [
            self.family,
            str(self.n),
            str(self.k),
            str(self.seed),
            self.algo,
            str(int(self.success)),
            str(self.queries),
            str(self.micros),
        ]


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def quantile(values, q: float) -> float:
    """Linear-interpolated quantile (numpy's default)."""
    return float(np.quantile(np.asarray(values, dtype=float), q))


@dataclass
class BatchReport:
    records: list[TrialRecord] = field(default_factory=list)
    delta: float = 0.1

    def groups(self) -> dict:
        out = defaultdict(list)
        for r in self.records:
            out[(r.family, r.algo, r.n, r.k)].append(r)
        return dict(out)

    def summary(self) -> list[dict]:
        rows = []
        for (family, algo, n, k), recs in self.groups().items():
            queries = [r.queries for r in recs]
            wins = sum(r.success for r in recs)
            lo, hi = wilson_interval(wins, len(recs))
            bound = bound_for(algo, n, self.delta)
            rows.append(
                {
                    "family": family,
                    "algo": algo,
                    "n": n,
                    "k": k,
                    "trials": len(recs),
                    "success_rate": wins / len(recs),
                    "wilson_low": lo,
                    "wilson_high": hi,
                    "median_queries": statistics.median(queries),
                    "p95_queries": quantile(queries, 0.95),
                    "max_queries": max(queries),
                    "bound": bound,
                    "bound_violations": sum(q > bound for q in queries),
                }
            )
        return rows

    @property
    def bound_violations(self) -> int:
        return sum(row["bound_violations"] for row in self.summary())

    def to_csv(self, timing: bool = False) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for (family, algo, n, k), recs in self.groups().items():
            for r in sorted(recs, key=lambda r: r.seed):
                writer.writerow(r.csv_row())
            rate = sum(r.success for r in recs) / len(recs)
            writer.writerow(
                [
                    family,
                    n,
                    k,
                    AGGREGATE_SEED,
                    algo,
                    format_scalar(rate),
                    max(r.queries for r in recs),
                    sum(r.micros for r in recs) if timing else 0,
                ]
            )
        return buf.getvalue()


def _digest(payload: str) -> str:
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def run_trial(
    family: str,
    n: int,
    k: int,
    delta: float,
    seed: int,
    algo: str,
    mode: str = EXACT,
    gap=None,
    timing: bool = False,
) -> TrialRecord:
    """One fresh instance and one fresh oracle, both derived from ``seed``."""
    inst_rng, algo_rng = trial_rngs(seed)
    spec = InstanceSpec(family, n, k=k, gap=gap, seed=seed, mode=mode)
    matrix, truth = generate(spec, inst_rng)
    oracle = OracleHandle(matrix)
    start = time.perf_counter()
    expected = truth.equilibrium
    success = False
    payload = "failed"
    try:
        if algo in ("psne", "swordfish"):
            i, j = find_psne(oracle, delta, algo_rng) if algo == "psne" else swordfish(oracle)
            payload = f"({i},{j})"
            if expected is not None:
                success = (
                    expected.row_strategy.support == {i}
                    and expected.col_strategy.support == {j}
                )
        elif algo == "nash":
            support = k if family == "planted_support" else None
            cert = find_unique_nash(oracle, delta, algo_rng, support_size=support)
            payload = cert.to_json()
            success = expected is None or _same(cert, expected, mode)
        elif algo == "brute":
            full = oracle.query_block(range(n), range(n))
            cert = brute_force_unique_nash(type(matrix)(full, matrix.mode))
            payload = cert.to_json()
            success = expected is None or _same(cert, expected, mode)
        else:
            raise ValueError(f"unknown algorithm {algo!r}")
    except (Exhausted, NotUnique, EmptyCandidates):
        success = False
    micros = int((time.perf_counter() - start) * 1e6) if timing else 0
    return TrialRecord(
        family, n, k, seed, algo, success, oracle.distinct_query_count(), micros, _digest(payload)
    )


def _same(cert, expected, mode: str) -> bool:
    if mode == EXACT:
        return cert.same_equilibrium(expected)
    a = np.array(cert.row_strategy.weights + cert.col_strategy.weights, dtype=float)
    b = np.array(expected.row_strategy.weights + expected.col_strategy.weights, dtype=float)
    return bool(np.allclose(a, b, atol=1e-9, rtol=0))


def _run_trial_args(args):
    return run_trial(*args)


def run_batch(
    family: str,
    n_list,
    k: int,
    delta: float,
    trials: int,
    seed0: int,
    algo: str,
    mode: str = EXACT,
    gap=None,
    workers: int = 1,
    timing: bool = False,
) -> BatchReport:
    """Trials with seeds ``seed0 .. seed0 + trials - 1`` for every ``n``.

    Results are merged in (n, seed) order regardless of ``workers``.
    """
    jobs = [
        (family, n, k, delta, seed0 + t, algo, mode, gap, timing)
        for n in n_list
        for t in range(trials)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial_args, jobs, chunksize=8))
    else:
        records = [_run_trial_args(job) for job in jobs]
    return BatchReport(records, delta)


# -- plot data --------------------------------------------------------------


class SchemaError(ValueError):
    pass


PLOT_COLUMNS = ("family", "algo", "n", "median_queries", "p95_queries", "bound")


def plot_series(csv_text: str, delta: float = 0.1) -> str:
    """Tab-separated ``(n, median, p95, bound)`` series per family and algorithm."""
    out = io.StringIO()
    out.write("\t".join(PLOT_COLUMNS) + "\n")
    if not csv_text.strip():
        return out.getvalue()
    reader = csv.DictReader(io.StringIO(csv_text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise SchemaError(f"expected columns {','.join(CSV_COLUMNS)}, got {reader.fieldnames}")
    groups = defaultdict(list)
    for row in reader:
        if row["seed"] == AGGREGATE_SEED:
            continue
        try:
            groups[(row["family"], row["algo"], int(row["n"]))].append(int(row["queries"]))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"malformed row {row}") from exc
    for (family, algo, n), queries in sorted(groups.items()):
        fields = [
            family,
            algo,
            str(n),
            format_scalar(float(statistics.median(queries))),
            format_scalar(quantile(queries, 0.95)),
            format_scalar(float(bound_for(algo, n, delta))),
        ]
        out.write("\t".join(fields) + "\n")
    return out.getvalue()


def write_plot_series(in_csv, out_path, delta: float = 0.1) -> None:
    Path(out_path).write_text(plot_series(Path(in_csv).read_text(), delta))
