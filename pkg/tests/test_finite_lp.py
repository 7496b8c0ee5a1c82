from fractions import Fraction

import pytest

from oblivious_ranking.finite_lp import (
    EXACT_LIMIT,
    build_lp,
    lp_duality_gap,
    lp_value_series,
    solve,
    to_lp_format,
)

from oracles import scipy_lp_value

BOUND = 0.5231664


def test_lp2_rows():
    m = build_lp(2)
    assert [r.name for r in m.rows] == ["eq1", "mono_2", "evol_2", "bound"]
    assert m.row("evol_2").coeffs == (Fraction(1), Fraction(1, 2))
    assert m.row("bound").coeffs == (Fraction(3, 4), Fraction(7, 4))
    assert m.objective == (Fraction(1, 2),) * 2


def test_lp2_exact_optimum():
    sol = solve(build_lp(2), exact=True)
    assert sol.objective == Fraction(4, 7)
    assert sol.x == (Fraction(1), Fraction(1, 7))


# exact rational optima from the Fraction simplex, cross-checked against HiGHS below
@pytest.mark.parametrize("n,value", [(2, Fraction(4, 7)), (5, Fraction(7, 13)), (10, Fraction(62, 117))])
def test_exact_values_frozen(n, value):
    assert solve(build_lp(n), exact=True).objective == value
    assert float(value) == pytest.approx(scipy_lp_value(n), abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5, 10, 25, 50, 100])
def test_float_matches_highs(n):
    sol = solve(build_lp(n))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(scipy_lp_value(n), abs=1e-9)
    assert lp_duality_gap(build_lp(n), sol) <= 1e-9
    assert max(build_lp(n).residuals(sol.x)) <= 1e-9


def test_values_decrease_and_stay_above_bound():
    rows = lp_value_series([2, 3, 5, 10, 25, 50])
    values = [r.value for r in rows]
    assert values == sorted(values, reverse=True)
    assert all(v >= BOUND - 1e-7 for v in values)
    assert rows[-1].running_inf == values[-1]


def test_series_worker_independent():
    assert lp_value_series([4, 7], workers=2) == lp_value_series([4, 7])


def test_optimum_is_nonincreasing_vector():
    x = solve(build_lp(25)).x
    assert x[0] == pytest.approx(1)
    assert all(a >= b - 1e-12 for a, b in zip(x, x[1:]))


def test_limits():
    with pytest.raises(ValueError):
        build_lp(1)
    with pytest.raises(ValueError):
        solve(build_lp(EXACT_LIMIT + 1), exact=True)


def test_lp_format_export():
    text = to_lp_format(build_lp(3))
    assert text.startswith("\\")
    assert "Minimize" in text and "Subject To" in text and text.rstrip().endswith("End")
    assert " eq1: 1.0 x1 = 1.0" in text
    assert " mono_2: 1.0 x1 - 1.0 x2 >= 0.0" in text
    assert text.count(">=") == 2 + 2 + 1 + 3
