"""Game values, equilibria of fully known matrices, and equilibrium checks.

The LP path is a dense tableau simplex with Bland's rule, run on
:class:`~fractions.Fraction` entries in exact mode and on floats (with the
matrix tolerance) in float mode.  :func:`brute_force_unique_nash` is the
support-enumeration ground truth used to audit everything else.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .oracle import (
    EXACT,
    FLOAT_EPS,
    MatrixInstance,
    OracleHandle,
    format_scalar,
    to_one_based,
)


class SupportRejected(ValueError):
    """A candidate support pair does not carry an equilibrium."""


class SingularSystem(SupportRejected):
    pass


class NegativeWeight(SupportRejected):
    pass


class NotUnique(RuntimeError):
    """The matrix violates the unique-equilibrium assumption."""


@dataclass(frozen=True)
class MixedStrategy:
    weights: tuple
    mode: str = EXACT
    eps: float = FLOAT_EPS

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))

    @classmethod
    def pure(cls, dimension: int, index: int, mode: str = EXACT) -> "MixedStrategy":
        one, zero = (Fraction(1), Fraction(0)) if mode == EXACT else (1.0, 0.0)
        return cls(tuple(one if i == index else zero for i in range(dimension)), mode)

    @classmethod
    def embed(cls, dimension: int, indices: Sequence[int], weights: Sequence, mode: str = EXACT):
        """Place ``weights`` at ``indices`` of an otherwise-zero vector."""
        full = [Fraction(0) if mode == EXACT else 0.0] * dimension
        for i, w in zip(indices, weights):
            full[i] = w
        return cls(tuple(full), mode)

    @property
    def dimension(self) -> int:
        return len(self.weights)

    @property
    def support(self) -> frozenset:
        if self.mode == EXACT:
            return frozenset(i for i, w in enumerate(self.weights) if w != 0)
        return frozenset(i for i, w in enumerate(self.weights) if abs(w) > self.eps)

    def is_distribution(self) -> bool:
        if not self.weights:
            return False
        if self.mode == EXACT:
            return all(w >= 0 for w in self.weights) and sum(self.weights) == 1
        return all(w >= -self.eps for w in self.weights) and abs(sum(self.weights) - 1) <= self.eps

    def __getitem__(self, i):
        return self.weights[i]


@dataclass
class EquilibriumCertificate:
    row_strategy: MixedStrategy
    col_strategy: MixedStrategy
    value: object
    verified: bool = False
    unique_claimed: bool = False
    queries_used: int | None = None
    query_breakdown: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        """JSON-shaped document; indices 1-based, rationals as ``p/q``."""
        doc = {
            "value": format_scalar(self.value),
            "row_strategy": [format_scalar(w) for w in self.row_strategy.weights],
            "col_strategy": [format_scalar(w) for w in self.col_strategy.weights],
            "row_support": sorted(to_one_based(i) for i in self.row_strategy.support),
            "col_support": sorted(to_one_based(j) for j in self.col_strategy.support),
            "verified": self.verified,
            "unique_claimed": self.unique_claimed,
            "queries_used": self.queries_used,
        }
        if self.query_breakdown:
            doc["query_breakdown"] = dict(sorted(self.query_breakdown.items()))
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def same_equilibrium(self, other: "EquilibriumCertificate") -> bool:
        return (
            self.row_strategy.weights == other.row_strategy.weights
            and self.col_strategy.weights == other.col_strategy.weights
        )


# -- linear programming -----------------------------------------------------


def _tableau_simplex(P: list[list], eps) -> tuple[list, list, object]:
    """Maximize ``sum(w)`` subject to ``P w <= 1, w >= 0`` for positive ``P``.

    The slack basis is feasible, so one phase suffices.  Returns the primal
    ``w``, the dual ``u`` (read off the slack reduced costs) and the optimum.
    Bland's rule: lowest-index entering column, lowest-index basic variable
    on ratio ties.
    """
    m, n = len(P), len(P[0])
    zero, one = (P[0][0] * 0, P[0][0] * 0 + 1)
    width = n + m
    rows = []
    for i in range(m):
        slack = [zero] * m
        slack[i] = one
        rows.append(list(P[i]) + slack + [one])
    cost = [one] * n + [zero] * m + [zero]  # last entry holds -objective
    basis = [n + i for i in range(m)]

    while True:
        enter = next((c for c in range(width) if cost[c] > eps), None)
        if enter is None:
            break
        best = None
        for r in range(m):
            a = rows[r][enter]
            if a > eps:
                key = (rows[r][-1] / a, basis[r])
                if best is None or key < best[0]:
                    best = (key, r)
        if best is None:  # cannot happen for P > 0: the LP is bounded
            raise ArithmeticError("unbounded LP in game value computation")
        r = best[1]
        piv = rows[r][enter]
        prow = [v / piv for v in rows[r]]
        rows[r] = prow
        for rr in range(m):
            if rr != r:
                f = rows[rr][enter]
                if f != 0:
                    rows[rr] = [a - f * b for a, b in zip(rows[rr], prow)]
        f = cost[enter]
        cost = [a - f * b for a, b in zip(cost, prow)]
        basis[r] = enter

    w = [zero] * n
    for r, var in enumerate(basis):
        if var < n:
            w[var] = rows[r][-1]
    u = [-cost[n + i] for i in range(m)]
    return w, u, -cost[-1]


@dataclass
class LPSolution:
    value: object
    row_strategy: MixedStrategy
    col_strategy: MixedStrategy


def solve_game(M: MatrixInstance) -> LPSolution:
    """Value and one optimal strategy pair of a fully known matrix game."""
    exact = M.mode == EXACT
    eps = 0 if exact else M.eps
    entries = M.entries
    low = entries.min()
    shift = (1 - low) if low <= 0 else (0 * low)
    P = [[entries[i, j] + shift for j in range(M.n_cols)] for i in range(M.n_rows)]
    if not exact:
        P = [[float(v) for v in row] for row in P]
    w, u, total = _tableau_simplex(P, eps)
    # total = 1 / (value + shift) > 0
    y = [v / total for v in w]
    x = [v / total for v in u]
    value = 1 / total - shift
    if not exact:
        value = float(value)
        x = [max(float(v), 0.0) for v in x]
        y = [max(float(v), 0.0) for v in y]
    return LPSolution(value, MixedStrategy(x, M.mode, M.eps), MixedStrategy(y, M.mode, M.eps))


def _value_2x2(a, b, c, d):
    """Closed-form value of [[a, b], [c, d]]."""
    lower = max(min(a, b), min(c, d))
    upper = min(max(a, c), max(b, d))
    if lower == upper:
        return lower
    return (a * d - b * c) / (a + d - b - c)


def solve_value(M: MatrixInstance):
    """The minimax value ``max_x min_y <x, M y>``.

    1x1 and 2x2 games use closed forms (same value as the LP, exactly);
    everything else goes through the simplex.
    """
    if M.shape == (1, 1):
        return M.value(0, 0)
    if M.shape == (2, 2):
        e = M.entries
        v = _value_2x2(e[0, 0], e[0, 1], e[1, 0], e[1, 1])
        return v if M.mode == EXACT else float(v)
    return solve_game(M).value


# -- equal-size supports ----------------------------------------------------


def _bareiss(rows: list[list[int]]) -> tuple[int, list[int]]:
    """Fraction-free Gauss-Jordan on an integer ``n x (n+1)`` augmented matrix.

    Returns ``(det, numerators)`` with solution ``numerators[i] / det``
    (``det`` up to the sign of row swaps, applied consistently).
    """
    n = len(rows)
    prev = 1
    for k in range(n):
        if rows[k][k] == 0:
            piv = next((r for r in range(k + 1, n) if rows[r][k] != 0), None)
            if piv is None:
                raise SingularSystem("support system is singular")
            rows[k], rows[piv] = rows[piv], rows[k]
        rk = rows[k]
        p = rk[k]
        for i in range(n):
            if i == k:
                continue
            ri = rows[i]
            f = ri[k]
            rows[i] = [(p * a - f * b) // prev for a, b in zip(ri, rk)]
        prev = p
    return prev, [rows[i][n] for i in range(n)]


def _integer_rows(A: list[list], b: list) -> list[list[int]]:
    out = []
    for row, rhs in zip(A, b):
        full = [Fraction(v) for v in row] + [Fraction(rhs)]
        scale = math.lcm(*(v.denominator for v in full))
        out.append([int(v * scale) for v in full])
    return out


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Exact solution of ``A z = b``; raises :class:`SingularSystem`."""
    det, num = _bareiss(_integer_rows(A, b))
    return [Fraction(v, det) for v in num]


def _solve_float(A, b, eps) -> list[float]:
    A = np.asarray(A, dtype=float)
    if np.linalg.cond(A) > 1 / eps:
        raise SingularSystem("support system is numerically singular")
    return list(np.linalg.solve(A, np.asarray(b, dtype=float)))


def _indifference(M: MatrixInstance, transpose: bool):
    """Weights making the opponent indifferent: ``M^T x = v 1`` (or ``M y``)."""
    k = M.n_rows
    e = M.entries.T if transpose else M.entries
    zero, one = (Fraction(0), Fraction(1)) if M.mode == EXACT else (0.0, 1.0)
    A = [[e[i, j] for j in range(k)] + [-one] for i in range(k)]
    A.append([one] * k + [zero])
    b = [zero] * k + [one]
    sol = _solve_exact(A, b) if M.mode == EXACT else _solve_float(A, b, M.eps)
    return sol[:k], sol[k]


def solve_full_support_equilibrium(M: MatrixInstance) -> EquilibriumCertificate:
    """Equilibrium of a square game assuming every action is in the support.

    Solves the indifference systems for both players.  Raises
    :class:`SingularSystem` when there is no unique solution and
    :class:`NegativeWeight` when the solution leaves the simplex.
    """
    if M.n_rows != M.n_cols:
        raise ValueError(f"expected a square matrix, got {M.shape}")
    x, v = _indifference(M, transpose=True)
    y, v_col = _indifference(M, transpose=False)
    tol = 0 if M.mode == EXACT else M.eps
    if any(w < -tol for w in x) or any(w < -tol for w in y):
        raise NegativeWeight("support solution has a negative weight")
    if M.mode != EXACT:
        x = [max(float(w), 0.0) for w in x]
        y = [max(float(w), 0.0) for w in y]
        v = float((v + v_col) / 2)
    return EquilibriumCertificate(
        MixedStrategy(x, M.mode, M.eps), MixedStrategy(y, M.mode, M.eps), v
    )


def _payoffs(M: MatrixInstance, x: Sequence, y: Sequence):
    """Row payoffs ``M y``, column payoffs ``x^T M`` and ``<x, M y>``."""
    e = M.entries
    row_pay = [sum(e[i, j] * y[j] for j in range(M.n_cols) if y[j] != 0) for i in range(M.n_rows)]
    col_pay = [sum(e[i, j] * x[i] for i in range(M.n_rows) if x[i] != 0) for j in range(M.n_cols)]
    value = sum(x[i] * row_pay[i] for i in range(M.n_rows) if x[i] != 0)
    return row_pay, col_pay, value


def is_equilibrium(M: MatrixInstance, x: MixedStrategy, y: MixedStrategy) -> bool:
    """Full-information check ``max_i <e_i, M y> <= <x, M y> <= min_j <x, M e_j>``."""
    row_pay, col_pay, v = _payoffs(M, x.weights, y.weights)
    tol = 0 if M.mode == EXACT else M.eps
    return max(row_pay) <= v + tol and min(col_pay) >= v - tol


def strict_complementarity(M: MatrixInstance, x: MixedStrategy, y: MixedStrategy, value) -> bool:
    """Off-support rows earn strictly less than ``value`` against ``y``, and
    off-support columns concede strictly more against ``x``; on-support
    payoffs equal ``value``."""
    row_pay, col_pay, _ = _payoffs(M, x.weights, y.weights)
    sx, sy = x.support, y.support
    if M.mode == EXACT:
        eq = lambda a: a == value  # noqa: E731
        lt = lambda a: a < value  # noqa: E731
        gt = lambda a: a > value  # noqa: E731
    else:
        tol = M.eps
        eq = lambda a: abs(a - value) <= tol  # noqa: E731
        lt = lambda a: a < value - tol  # noqa: E731
        gt = lambda a: a > value + tol  # noqa: E731
    rows_ok = all(eq(p) if i in sx else lt(p) for i, p in enumerate(row_pay))
    cols_ok = all(eq(p) if j in sy else gt(p) for j, p in enumerate(col_pay))
    return rows_ok and cols_ok


def _indifferent_weights(block: list[list[int]]) -> tuple[list[int], int, int] | None:
    """Positive weights ``y`` with ``block @ y = w 1`` and ``sum(y) = 1``.

    Returns ``(numerators, w_numerator, det)`` over a common positive
    denominator, or None when the system is singular or a weight is <= 0.
    """
    size = len(block)
    aug = [list(row) + [-1, 0] for row in block]
    aug.append([1] * size + [0, 1])
    try:
        det, num = _bareiss(aug)
    except SingularSystem:
        return None
    if det < 0:
        det, num = -det, [-v for v in num]
    if any(v <= 0 for v in num[:size]):
        return None
    return num[:size], num[size], det


def _exact_equilibria_of_size(M: MatrixInstance, size: int):
    """Equilibria whose supports are exactly an ``size x size`` pair, exact mode.

    Entries are scaled to integers so every system is solved fraction-free;
    the column player's system is tried first because most pairs fail there.
    """
    scale = math.lcm(*(Fraction(v).denominator for v in M.entries.flat))
    N = [[int(v * scale) for v in row] for row in M.entries.tolist()]
    NT = [list(col) for col in zip(*N)]
    m, n = M.shape
    for I in itertools.combinations(range(m), size):
        for J in itertools.combinations(range(n), size):
            col_side = _indifferent_weights([[N[i][j] for j in J] for i in I])
            if col_side is None:
                continue
            ynum, w, dy = col_side
            if any(sum(N[i][j] * c for j, c in zip(J, ynum)) > w for i in range(m)):
                continue
            row_side = _indifferent_weights([[NT[j][i] for i in I] for j in J])
            if row_side is None:
                continue
            xnum, wx, dx = row_side
            if any(sum(NT[j][i] * c for i, c in zip(I, xnum)) < wx for j in range(n)):
                continue
            x = MixedStrategy.embed(m, I, [Fraction(v, dx) for v in xnum])
            y = MixedStrategy.embed(n, J, [Fraction(v, dy) for v in ynum])
            yield EquilibriumCertificate(x, y, Fraction(w, dy * scale), verified=True)


def _float_equilibria_of_size(M: MatrixInstance, size: int):
    for I in itertools.combinations(range(M.n_rows), size):
        for J in itertools.combinations(range(M.n_cols), size):
            try:
                core = solve_full_support_equilibrium(M.submatrix(I, J))
            except SupportRejected:
                continue
            x = MixedStrategy.embed(M.n_rows, I, core.row_strategy.weights, M.mode)
            y = MixedStrategy.embed(M.n_cols, J, core.col_strategy.weights, M.mode)
            if x.support != frozenset(I) or y.support != frozenset(J):
                continue  # a smaller support pair covers it
            if is_equilibrium(M, x, y):
                yield EquilibriumCertificate(x, y, core.value, verified=True)


def brute_force_unique_nash(M: MatrixInstance, audit: bool = False) -> EquilibriumCertificate:
    """Support enumeration over equal-size support pairs.

    Sizes are scanned in increasing order, lexicographically within a size.
    By default the scan stops after the first size class that produced an
    equilibrium; ``audit=True`` scans every class.  The single equilibrium
    found must also satisfy strict complementarity, which together with the
    nonsingular support system certifies it is the only one.

    Raises :class:`NotUnique` otherwise.
    """
    enumerate_size = _exact_equilibria_of_size if M.mode == EXACT else _float_equilibria_of_size
    found: list[EquilibriumCertificate] = []
    for size in range(1, min(M.shape) + 1):
        hits_before = len(found)
        for cert in enumerate_size(M, size):
            if not any(cert.same_equilibrium(c) for c in found):
                found.append(cert)
        if len(found) > hits_before and not audit:
            break
    if not found:
        raise NotUnique("no equilibrium with a nonsingular square support (degenerate game)")
    if len(found) > 1:
        raise NotUnique(f"{len(found)} distinct equilibria found")
    cert = found[0]
    if not strict_complementarity(M, cert.row_strategy, cert.col_strategy, cert.value):
        raise NotUnique("equilibrium is not strictly complementary, so it is not unique")
    cert.unique_claimed = True
    return cert


# -- oracle-gated checks ----------------------------------------------------


def verify_equilibrium(oracle: OracleHandle, x: MixedStrategy, y: MixedStrategy) -> bool:
    """Check ``(x, y)`` against the hidden matrix.

    Reads the full rows in ``supp(x)`` and full columns in ``supp(y)`` only,
    i.e. at most ``2 n s`` distinct entries with ``s`` the larger support.
    """
    if x.dimension != oracle.n_rows or y.dimension != oracle.n_cols:
        raise ValueError("strategy dimensions do not match the matrix")
    if not x.is_distribution() or not y.is_distribution():
        raise ValueError("strategies must be probability vectors")
    sx, sy = sorted(x.support), sorted(y.support)
    if not sx or not sy:
        raise ValueError("empty support")

    rows_block = oracle.query_block(sx, range(oracle.n_cols))
    cols_block = oracle.query_block(range(oracle.n_rows), sy)
    xs = [x[i] for i in sx]
    ys = [y[j] for j in sy]
    row_pay = [sum(cols_block[i, b] * ys[b] for b in range(len(sy))) for i in range(oracle.n_rows)]
    col_pay = [sum(rows_block[a, j] * xs[a] for a in range(len(sx))) for j in range(oracle.n_cols)]
    value = sum(xs[a] * row_pay[i] for a, i in enumerate(sx))
    tol = 0 if oracle.mode == EXACT else oracle.eps
    return max(row_pay) <= value + tol and value - tol <= min(col_pay)


def check_unique_psne_condition(M: MatrixInstance, i_star: int, j_star: int) -> bool:
    """Strict saddle test: ``M[i, j*] < M[i*, j*] < M[i*, j]`` off the pivot."""
    e = M.entries
    pivot = e[i_star, j_star]
    col_ok = all(e[i, j_star] < pivot for i in range(M.n_rows) if i != i_star)
    row_ok = all(pivot < e[i_star, j] for j in range(M.n_cols) if j != j_star)
    return col_ok and row_ok


def certify_psne(oracle: OracleHandle, i_star: int, j_star: int) -> bool:
    """Oracle-gated strict saddle test; reads row ``i*`` and column ``j*``
    (``n + m - 1`` entries)."""
    row = oracle.query_row(i_star)
    col = oracle.query_col(j_star)
    pivot = row[j_star]
    col_ok = all(col[i] < pivot for i in range(oracle.n_rows) if i != i_star)
    row_ok = all(pivot < row[j] for j in range(oracle.n_cols) if j != j_star)
    return col_ok and row_ok
