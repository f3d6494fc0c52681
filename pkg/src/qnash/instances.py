"""Matrix families with known equilibria.

* ``thm1_lower``: the support-k lower-bound family (one entry of value two
  picks the equilibrium among ``(n - k) k`` candidates).
* ``identity_perturbed``: ``I + E_ij / 2``, full-support equilibria in
  closed form.
* ``gap``: a pure saddle point at (0, 0) with payoff gap ``gap``.
* ``planted_psne``: random entries with a strict saddle point written in.
* ``planted_support``: a random matrix with a planted support-k equilibrium.
* ``random_unique``: i.i.d. uniform entries, no ground truth.

Indices are 0-based.  Exact-mode random entries are multiples of 2**-32.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .minimax import (
    EquilibriumCertificate,
    MixedStrategy,
    NotUnique,
    brute_force_unique_nash,
    strict_complementarity,
    verify_equilibrium,
)
from .oracle import EXACT, MatrixInstance, OracleHandle
from .psne import make_rng

FAMILIES = (
    "random_unique",
    "planted_psne",
    "thm1_lower",
    "identity_perturbed",
    "gap",
    "planted_support",
)

DENOM = 2**32
#: planted instances up to this size are audited by support enumeration
BRUTE_FORCE_MAX_N = 10


@dataclass
class GroundTruth:
    equilibrium: EquilibriumCertificate | None = None
    support_size: int | None = None


@dataclass
class InstanceSpec:
    family: str
    n: int
    k: int | None = None
    row: int | None = None
    col: int | None = None
    gap: Fraction | float | None = None
    seed: int | None = None
    mode: str = EXACT

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.n < 1:
            raise ValueError("n must be positive")


def _uniform(rng: np.random.Generator, shape, mode: str) -> np.ndarray:
    if mode == EXACT:
        m = rng.integers(0, DENOM, size=shape)
        return np.vectorize(lambda v: Fraction(int(v), DENOM), otypes=[object])(m)
    return rng.random(shape)



def _pure_truth(n_rows, n_cols, i, j, value, mode) -> GroundTruth:
    cert = EquilibriumCertificate(
        MixedStrategy.pure(n_rows, i, mode),
        MixedStrategy.pure(n_cols, j, mode),
        value,
        verified=True,
        unique_claimed=True,
    )
    return GroundTruth(cert, 1)


def identity_perturbed_equilibrium(n: int, i1: int, j1: int):
    """Closed-form ``(x, y, value)`` of ``I + E_{i1 j1} / 2``."""
    if i1 != j1:
        base = 1 / (Fraction(n) - Fraction(1, 2))
        x = [base] * n
        y = [base] * n
        x[j1] = base / 2
        y[i1] = base / 2
        return x, y, base
    base = 1 / (Fraction(n) - Fraction(1, 3))
    x = [base] * n
    x[i1] = base * Fraction(2, 3)
    return x, list(x), base


def gen_identity_perturbed(n: int, i1: int, j1: int):
    if not (0 <= i1 < n and 0 <= j1 < n):
        raise ValueError(f"perturbed entry ({i1}, {j1}) outside an {n}x{n} matrix")
    rows = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    rows[i1][j1] += Fraction(1, 2)
    x, y, v = identity_perturbed_equilibrium(n, i1, j1)
    cert = EquilibriumCertificate(MixedStrategy(x), MixedStrategy(y), v, True, True)
    return MatrixInstance.from_rows(rows), GroundTruth(cert, n)


def gen_thm1_lower(n: int, k: int, i_hat: int, j_hat: int):
    """Lower-bound instance: 2 at ``(i_hat, j_hat)``, 3 on columns ``>= k``,
    1 on the first ``k`` diagonal entries, 0 elsewhere."""
    if not 1 <= k <= n // 2:
        raise ValueError(f"need 1 <= k <= n/2, got n={n}, k={k}")
    if not k <= i_hat < n:
        raise ValueError(f"i_hat must lie in [{k}, {n}), got {i_hat}")
    if not 0 <= j_hat < k:
        raise ValueError(f"j_hat must lie in [0, {k}), got {j_hat}")
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(k, n):
            rows[i][j] = Fraction(3)
    for i in range(k):
        rows[i][i] = Fraction(1)
    rows[i_hat][j_hat] = Fraction(2)

    unit = 1 / (Fraction(k) - Fraction(1, 2))
    x = [Fraction(0)] * n
    y = [Fraction(0)] * n
    for i in range(k):
        if i != j_hat:
            x[i] = unit
        y[i] = unit
    x[i_hat] = unit / 2
    y[j_hat] = unit / 2
    cert = EquilibriumCertificate(MixedStrategy(x), MixedStrategy(y), unit, True, True)
    return MatrixInstance.from_rows(rows), GroundTruth(cert, k)


def gen_gap_instance(n: int, gap, mode: str = EXACT):
    """``A[0,0] = 1``, ``1 + gap`` on the rest of row 0, ``1 - gap`` on the
    rest of column 0, 1 elsewhere."""
    gap = Fraction(gap) if mode == EXACT else float(gap)
    if not 0 < gap < 1:
        raise ValueError(f"gap must lie in (0, 1), got {gap}")
    one = Fraction(1) if mode == EXACT else 1.0
    rows = [[one] * n for _ in range(n)]
    for j in range(1, n):
        rows[0][j] = one + gap
    for i in range(1, n):
        rows[i][0] = one - gap
    return MatrixInstance.from_rows(rows, mode), _pure_truth(n, n, 0, 0, one, mode)


def gen_planted_psne(n: int, i_star: int, j_star: int, rng=None, mode: str = EXACT, margin=None):
    """Uniform entries with a strict saddle point forced at ``(i_star, j_star)``:
    the rest of its column is pushed below the pivot and the rest of its row
    above it, each by at least ``margin``."""
    if not (0 <= i_star < n and 0 <= j_star < n):
        raise ValueError("planted saddle point outside the matrix")
    if margin is None:
        margin = Fraction(1, 2**10)
    margin = Fraction(margin) if mode == EXACT else float(margin)
    if margin <= 0:
        raise ValueError("margin must be positive for a strict saddle point")
    rng = make_rng(rng)
    A = _uniform(rng, (n, n), mode)
    v = A[i_star, j_star]
    col = _uniform(rng, (n,), mode)
    row = _uniform(rng, (n,), mode)
    for i in range(n):
        if i != i_star:
            A[i, j_star] = v - margin - col[i]
    for j in range(n):
        if j != j_star:
            A[i_star, j] = v + margin + row[j]
    M = MatrixInstance(A, mode)
    return M, _pure_truth(n, n, i_star, j_star, M.value(i_star, j_star), mode)


def _audit(M: MatrixInstance, truth: GroundTruth) -> bool:
    cert = truth.equilibrium
    oracle = OracleHandle(M)
    if not verify_equilibrium(oracle, cert.row_strategy, cert.col_strategy):
        return False
    if not strict_complementarity(M, cert.row_strategy, cert.col_strategy, cert.value):
        return False
    if M.n_rows <= BRUTE_FORCE_MAX_N:
        try:
            found = brute_force_unique_nash(M)
        except NotUnique:
            return False
        return found.same_equilibrium(cert) and found.value == cert.value
    return True


def gen_planted_support(n: int, k: int, rng=None, mode: str = EXACT, max_tries: int = 20):
    """A matrix whose unique equilibrium has support size ``k`` on both sides.

    An affinely rescaled ``I + E_ij / 2`` core sits at random rows and
    columns.  Off-support rows are strictly below the value on the support
    columns and off-support columns strictly above it on the support rows,
    so every off-support action is a strictly worse reply.  The instance is
    audited before it is returned and regenerated if the audit fails.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    rng = make_rng(rng)
    for _ in range(max_tries):
        rows = np.sort(rng.choice(n, size=k, replace=False))
        cols = np.sort(rng.choice(n, size=k, replace=False))
        i1, j1 = (int(v) for v in rng.integers(0, k, size=2))
        scale = 1 + Fraction(int(rng.integers(0, DENOM)), DENOM)
        shift = Fraction(int(rng.integers(0, DENOM)), DENOM) - Fraction(1, 2)
        cx, cy, cv = identity_perturbed_equilibrium(k, i1, j1)
        value = scale * cv + shift
        margin = Fraction(1, 2**10)

        U = _uniform(rng, (n, n), EXACT)
        A = np.empty((n, n), dtype=object)
        in_rows, in_cols = set(rows.tolist()), set(cols.tolist())
        for i in range(n):
            for j in range(n):
                if i in in_rows and j in in_cols:
                    continue
                if j in in_cols:
                    A[i, j] = value - margin - U[i, j]
                elif i in in_rows:
                    A[i, j] = value + margin + U[i, j]
                else:
                    A[i, j] = value - 1 + 2 * U[i, j]
        for a, i in enumerate(rows):
            for b, j in enumerate(cols):
                core = Fraction(int(a == b)) + (Fraction(1, 2) if (a, b) == (i1, j1) else 0)
                A[i, j] = scale * core + shift

        M = MatrixInstance(A, EXACT)
        x = MixedStrategy.embed(n, rows.tolist(), cx)
        y = MixedStrategy.embed(n, cols.tolist(), cy)
        truth = GroundTruth(EquilibriumCertificate(x, y, value, True, True), k)
        if _audit(M, truth):
            if mode == EXACT:
                return M, truth
            return M.to_float(), _float_truth(truth)
    raise RuntimeError(f"planted support instance failed its audit {max_tries} times")


def _float_truth(truth: GroundTruth) -> GroundTruth:
    c = truth.equilibrium
    cert = EquilibriumCertificate(
        MixedStrategy([float(w) for w in c.row_strategy.weights], "float"),
        MixedStrategy([float(w) for w in c.col_strategy.weights], "float"),
        float(c.value),
        c.verified,
        c.unique_claimed,
    )
    return GroundTruth(cert, truth.support_size)


def gen_random_unique(n: int, rng=None, mode: str = EXACT) -> MatrixInstance:
    return MatrixInstance(_uniform(make_rng(rng), (n, n), mode), mode)


def generate(spec: InstanceSpec, rng=None):
    """Build ``(matrix, ground_truth)`` for ``spec``; missing indices are drawn
    from ``rng`` (seeded by ``spec.seed`` when ``rng`` is None)."""
    rng = make_rng(rng if rng is not None else spec.seed)
    n = spec.n
    if spec.family == "random_unique":
        return gen_random_unique(n, rng, spec.mode), GroundTruth()
    if spec.family == "gap":
        gap = spec.gap if spec.gap is not None else Fraction(1, 4)
        return gen_gap_instance(n, gap, spec.mode)
    if spec.family == "planted_psne":
        i = spec.row if spec.row is not None else int(rng.integers(0, n))
        j = spec.col if spec.col is not None else int(rng.integers(0, n))
        return gen_planted_psne(n, i, j, rng, spec.mode)
    if spec.family == "planted_support":
        return gen_planted_support(n, spec.k or 1, rng, spec.mode)
    if spec.family == "identity_perturbed":
        i = spec.row if spec.row is not None else int(rng.integers(0, n))
        j = spec.col if spec.col is not None else int(rng.integers(0, n))
        M, truth = gen_identity_perturbed(n, i, j)
    else:  # thm1_lower
        k = spec.k or 1
        i = spec.row if spec.row is not None else int(rng.integers(k, n))
        j = spec.col if spec.col is not None else int(rng.integers(0, k))
        M, truth = gen_thm1_lower(n, k, i, j)
    if spec.mode == EXACT:
        return M, truth
    return M.to_float(), _float_truth(truth)
