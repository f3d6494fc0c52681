from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from qnash.instances import gen_random_unique
from qnash.minimax import (
    MixedStrategy,
    NegativeWeight,
    NotUnique,
    SingularSystem,
    _value_2x2,
    brute_force_unique_nash,
    certify_psne,
    check_unique_psne_condition,
    is_equilibrium,
    solve_full_support_equilibrium,
    solve_game,
    solve_value,
    strict_complementarity,
    verify_equilibrium,
)
from qnash.oracle import EXACT, FLOAT, MatrixInstance, OracleHandle

from conftest import F, mat, naive_equilibrium_check


def strat(*weights):
    return MixedStrategy([Fraction(w) for w in weights])


def scipy_value(rows):
    """Float LP oracle: max v s.t. A^T x >= v, x in the simplex."""
    A = np.asarray(rows, dtype=float)
    n, m = A.shape
    c = np.zeros(n + 1)
    c[-1] = -1
    res = linprog(
        c,
        A_ub=np.hstack([-A.T, np.ones((m, 1))]),
        b_ub=np.zeros(m),
        A_eq=np.hstack([np.ones((1, n)), np.zeros((1, 1))]),
        b_eq=[1],
        bounds=[(0, None)] * n + [(None, None)],
        method="highs",
    )
    assert res.success
    return res.x[-1]


small_int_matrix = st.integers(1, 4).flatmap(
    lambda n: st.integers(1, 4).flatmap(
        lambda m: st.lists(
            st.lists(st.integers(-6, 6), min_size=m, max_size=m), min_size=n, max_size=n
        )
    )
)


# -- solve_value -------------------------------------------------------------


@pytest.mark.parametrize(
    "rows,value",
    [
        ([[5]], 5),
        ([[1, 0], [0, 2]], F("2/3")),
        ([[1, F("1/2"), 0], [0, 1, 0], [0, 0, 1]], F("2/5")),
        ([[0, 1], [1, 0]], F("1/2")),
        ([[1, -1], [-1, 1]], 0),
        ([[3, 1, 4], [1, 5, 9]], F("7/3")),  # third column dominated
    ],
)
def test_solve_value(rows, value):
    v = solve_value(mat(rows))
    assert v == value and isinstance(v, (Fraction, int))


def test_rectangular_value_matches_lp():
    rows = [[3, 1, 4], [1, 5, 9]]
    assert float(solve_value(mat(rows))) == pytest.approx(scipy_value(rows), abs=1e-9)


@given(small_int_matrix)
def test_duality(rows):
    M = mat(rows)
    assert solve_value(M) == -solve_value(-M.transpose())


@given(small_int_matrix)
def test_lp_strategies_certify_the_value(rows):
    sol = solve_game(mat(rows))
    assert sol.row_strategy.is_distribution() and sol.col_strategy.is_distribution()
    ok, v = naive_equilibrium_check(rows, sol.row_strategy.weights, sol.col_strategy.weights)
    assert ok and v == sol.value


@given(st.lists(st.integers(-9, 9), min_size=4, max_size=4))
def test_2x2_closed_form_matches_simplex(entries):
    a, b, c, d = (Fraction(v) for v in entries)
    assert _value_2x2(a, b, c, d) == solve_game(mat([[a, b], [c, d]])).value


@given(small_int_matrix)
def test_value_matches_independent_lp(rows):
    assert float(solve_value(mat(rows))) == pytest.approx(scipy_value(rows), abs=1e-7)


@given(small_int_matrix)
def test_float_mode_value(rows):
    assert solve_value(mat(rows, FLOAT)) == pytest.approx(float(solve_value(mat(rows))), abs=1e-9)


# -- full-support systems -------------------------------------------------------


@pytest.mark.parametrize(
    "rows,x,y,v",
    [
        ([[1, F("1/2")], [0, 1]], ("2/3", "1/3"), ("1/3", "2/3"), F("2/3")),
        ([[7]], ("1",), ("1",), 7),
        ([[1, 0], [0, 1]], ("1/2", "1/2"), ("1/2", "1/2"), F("1/2")),
    ],
)
def test_full_support(rows, x, y, v):
    cert = solve_full_support_equilibrium(mat(rows))
    assert cert.row_strategy.weights == tuple(F(w) for w in x)
    assert cert.col_strategy.weights == tuple(F(w) for w in y)
    assert cert.value == v


def test_full_support_singular():
    with pytest.raises(SingularSystem):
        solve_full_support_equilibrium(mat([[1, 1], [1, 1]]))


def test_full_support_negative_weight():
    # saddle point at (1, 1); mixing would need a negative weight
    with pytest.raises(NegativeWeight):
        solve_full_support_equilibrium(mat([[2, 3], [1, 4]]))


def test_full_support_float():
    cert = solve_full_support_equilibrium(mat([[1, 0.5], [0, 1]], FLOAT))
    assert cert.row_strategy.weights == pytest.approx((2 / 3, 1 / 3))
    assert cert.value == pytest.approx(2 / 3)


def test_full_support_needs_square():
    with pytest.raises(ValueError):
        solve_full_support_equilibrium(mat([[1, 2, 3], [4, 5, 6]]))


# -- brute force ----------------------------------------------------------------


def test_brute_force_gap(gap3):
    cert = brute_force_unique_nash(gap3)
    assert cert.row_strategy == strat(1, 0, 0)
    assert cert.col_strategy == strat(1, 0, 0)
    assert cert.value == 1 and cert.unique_claimed


def test_brute_force_identity_perturbed(ip3):
    cert = brute_force_unique_nash(ip3, audit=True)
    assert cert.row_strategy == strat(F("2/5"), F("1/5"), F("2/5"))
    assert cert.col_strategy == strat(F("1/5"), F("2/5"), F("2/5"))
    assert cert.value == F("2/5")


def test_brute_force_matching_pennies():
    cert = brute_force_unique_nash(mat([[0, 1], [1, 0]]), audit=True)
    assert cert.row_strategy == cert.col_strategy == strat(F("1/2"), F("1/2"))
    assert cert.value == F("1/2")


@pytest.mark.parametrize(
    "rows",
    [
        [[1, 1], [1, 1]],
        [[1, 0], [1, 0]],  # weakly dominated row: a continuum of equilibria
        [[0, 0, 1], [0, 0, 1], [1, 1, 0]],
    ],
)
def test_brute_force_rejects_non_unique(rows):
    with pytest.raises(NotUnique):
        brute_force_unique_nash(mat(rows), audit=True)


@pytest.mark.parametrize("seed", range(12))
def test_brute_force_agrees_with_lp_and_verifier(seed):
    n = 2 + seed % 4
    M = gen_random_unique(n, seed)
    cert = brute_force_unique_nash(M, audit=True)
    assert cert.value == solve_value(M)
    ok, v = naive_equilibrium_check(M.tolist(), cert.row_strategy.weights, cert.col_strategy.weights)
    assert ok and v == cert.value
    assert len(cert.row_strategy.support) == len(cert.col_strategy.support)
    o = OracleHandle(M)
    assert verify_equilibrium(o, cert.row_strategy, cert.col_strategy)


@pytest.mark.parametrize("seed", range(6))
def test_float_brute_force_agrees_with_exact(seed):
    M = gen_random_unique(5, seed)
    exact = brute_force_unique_nash(M)
    approx = brute_force_unique_nash(M.to_float())
    assert approx.row_strategy.support == exact.row_strategy.support
    assert approx.value == pytest.approx(float(exact.value), abs=1e-9)


def test_fast_path_stops_at_first_size_class():
    # pure saddle point; the fast path never looks at 2x2 supports
    M = mat([[2, 3], [1, 4]])
    assert brute_force_unique_nash(M).value == 2
    assert brute_force_unique_nash(M, audit=True).value == 2


# -- verification ---------------------------------------------------------------


def test_verify_identity_perturbed(ip3):
    o = OracleHandle(ip3)
    ok = verify_equilibrium(o, strat(F("2/5"), F("1/5"), F("2/5")), strat(F("1/5"), F("2/5"), F("2/5")))
    assert ok and o.distinct_query_count() <= 2 * 3 * 3


@pytest.mark.parametrize("x,y,expected", [((1, 0, 0), (1, 0, 0), True), ((0, 1, 0), (1, 0, 0), False)])
def test_verify_gap(gap3, x, y, expected):
    assert verify_equilibrium(OracleHandle(gap3), strat(*x), strat(*y)) is expected


@pytest.mark.parametrize(
    "x,y",
    [
        ((F("1/2"), F("1/4"), 0), (1, 0, 0)),  # does not sum to one
        ((1, 0, 0), (2, -1, 0)),  # negative weight
        ((1, 0), (1, 0, 0)),  # wrong dimension
        ((), (1, 0, 0)),
    ],
)
def test_verify_rejects_degenerate_input_without_queries(gap3, x, y):
    o = OracleHandle(gap3)
    with pytest.raises(ValueError):
        verify_equilibrium(o, strat(*x), strat(*y))
    assert o.distinct_query_count() == 0


@given(st.integers(0, 2**32 - 1), st.integers(2, 7))
def test_verify_reads_only_support_rows_and_columns(seed, n):
    rng = np.random.default_rng(seed)
    M = gen_random_unique(n, rng)
    x = MixedStrategy(rng.dirichlet(np.ones(n)) * (rng.random(n) < 0.5), FLOAT)
    x = MixedStrategy.pure(n, int(rng.integers(n))) if not x.support else x
    x = MixedStrategy([Fraction(w).limit_denominator(10**6) for w in x.weights])
    x = MixedStrategy([w / sum(x.weights) for w in x.weights])
    j = int(rng.integers(n))
    y = MixedStrategy.pure(n, j)
    o = OracleHandle(M)
    verify_equilibrium(o, x, y)
    allowed = {(i, c) for i in x.support for c in range(n)} | {(r, j) for r in range(n)}
    assert set(o.ledger.sequence()) <= allowed
    s = max(len(x.support), len(y.support))
    assert o.distinct_query_count() <= 2 * n * s


# -- strict saddle test ------------------------------------------------------------


@pytest.mark.parametrize(
    "rows,pair,expected",
    [
        ("gap", (0, 0), True),
        ("gap", (1, 1), False),
        ([[1, 2], [0, 3]], (0, 0), True),
        ([[1, 2], [0, 3]], (1, 1), False),
        ([[1, 1], [0, 3]], (0, 0), False),
    ],
)
def test_unique_psne_condition(gap3, rows, pair, expected):
    M = gap3 if rows == "gap" else mat(rows)
    assert check_unique_psne_condition(M, *pair) is expected
    o = OracleHandle(M)
    assert certify_psne(o, *pair) is expected
    assert o.distinct_query_count() == M.n_rows + M.n_cols - 1


def test_psne_condition_agrees_with_brute_force():
    M = mat([[1, 2], [0, 3]])
    cert = brute_force_unique_nash(M, audit=True)
    assert cert.row_strategy.support == {0} and cert.col_strategy.support == {0}


def test_strict_complementarity_and_is_equilibrium(ip3):
    x, y = strat(F("2/5"), F("1/5"), F("2/5")), strat(F("1/5"), F("2/5"), F("2/5"))
    assert is_equilibrium(ip3, x, y)
    assert strict_complementarity(ip3, x, y, F("2/5"))
    assert not is_equilibrium(ip3, strat(1, 0, 0), y)


def test_certificate_document(ip3):
    doc = brute_force_unique_nash(ip3).to_dict()
    assert doc["value"] == "2/5"
    assert doc["row_strategy"] == ["2/5", "1/5", "2/5"]
    assert doc["row_support"] == [1, 2, 3]
    assert doc["unique_claimed"] is True
