import math
from fractions import Fraction

import numpy as np
import pytest

from oblivious_ranking.continuous_lp import (
    ContinuousLpSpec,
    DualTriple,
    InfeasibleError,
    PrimalFunction,
    central_difference,
    check_complementary_slackness,
    check_dual_feasibility,
    check_primal_feasibility,
    closed_form,
    closed_form_mu,
    constant_primal,
    duality_gap,
    embed_step,
    interchange_sides,
    lp_infinity_spec,
    optimal_value,
    verify_pair,
    zero_dual,
)
from oblivious_ranking.finite_lp import build_lp, solve
from oblivious_ranking.quadrature import Piecewise

SPEC = lp_infinity_spec()
GRID = 2000


def _scaled(dual: DualTriple, c: float) -> DualTriple:
    def scale(f: Piecewise) -> Piecewise:
        return Piecewise(f.knots, tuple((lambda t, p=p: c * p(t)) for p in f.pieces),
                         tuple((lambda t, p=p: c * p(t)) for p in f.slopes))

    return DualTriple(scale(dual.w), scale(dual.y), c * dual.gamma)


def _linear_primal() -> PrimalFunction:
    return PrimalFunction(Piecewise.smooth(lambda t: 1 - t, lambda t: -np.ones_like(t)))


def test_spec_values():
    t = np.array([0.25])
    assert SPEC.B(t)[0] == 0.75
    assert SPEC.D(np.array([0.1, 0.9]), np.array([0.7, 0.2])).tolist() == [2.0, 2.0]
    assert SPEC.F(np.array([0.3]))[0] == 1.5
    assert (SPEC.K, SPEC.L) == (1.0, 1.0)


def test_negative_kernel_rejected():
    bad = ContinuousLpSpec(1, 1, SPEC.A, SPEC.B, SPEC.C, lambda t, s: t - s, SPEC.F)
    with pytest.raises(ValueError):
        check_primal_feasibility(bad, constant_primal(), grid=10)


def test_mu_is_the_root_in_unit_interval():
    mu = closed_form_mu()
    assert mu == pytest.approx(0.7847495, abs=1e-7)
    assert abs(3 * mu * mu - 10 * mu + 6) <= 1e-12
    assert (5 + math.sqrt(7)) / 3 > 1


def test_closed_form_constants():
    z, dual, sol = closed_form()
    # 30-digit mpmath evaluation of 2(1 - mu)/(5 - 3 mu) = 0.16271403598769703...
    assert sol.gamma == pytest.approx(0.1627140360, abs=1e-10)
    assert dual.y(np.array([1.0]))[0] == pytest.approx(sol.gamma, abs=1e-15)
    assert z(np.array([0.0]))[0] == 1.0
    assert z(np.array([1.0]))[0] == pytest.approx(1 - sol.mu)


def test_optimal_value():
    mu = closed_form_mu()
    assert optimal_value() == pytest.approx(0.5231664, abs=1e-7)
    assert abs(optimal_value() - (1 - mu + mu * mu / 2)) <= 1e-12


def test_closed_form_pair_is_optimal():
    z, dual, _ = closed_form()
    pair = verify_pair(SPEC, z, dual)
    assert pair.primal.ok and pair.dual.ok and pair.slackness.ok
    assert abs(pair.gap) <= 1e-9
    assert pair.primal_value == pytest.approx(optimal_value(), abs=1e-12)
    assert len(pair.slackness.families) == 5


def test_standalone_checks_agree_with_verify_pair():
    z, dual, _ = closed_form()
    pair = verify_pair(SPEC, z, dual, GRID)
    assert check_primal_feasibility(SPEC, z, GRID).ok
    assert check_dual_feasibility(SPEC, dual, GRID).ok
    cs = check_complementary_slackness(SPEC, z, dual, GRID)
    assert [f.max_violation for f in cs.families] == [f.max_violation for f in pair.slackness.families]
    assert duality_gap(SPEC, z, dual, GRID) == pytest.approx(pair.gap, abs=1e-15)


def test_constant_one_is_feasible():
    assert check_primal_feasibility(SPEC, constant_primal(), GRID).ok


def test_linear_primal_fails_only_the_boundary():
    rep = check_primal_feasibility(SPEC, _linear_primal(), GRID)
    assert not rep.ok
    assert [f.family for f in rep.families if not f.passed] == ["boundary"]
    assert rep["boundary"].max_violation == pytest.approx(0.25, abs=1e-12)


def test_increasing_primal_fails_monotone():
    up = PrimalFunction(Piecewise.step([0, 0.5, 1], [1.0, 1.2]))
    rep = check_primal_feasibility(SPEC, up, GRID)
    assert not rep["monotone"].passed
    assert rep["monotone"].theta == 0.5


def test_zero_dual_is_feasible():
    assert check_dual_feasibility(SPEC, zero_dual(), GRID).ok


def test_gamma_without_y_fails_terminal():
    zero = zero_dual()
    rep = check_dual_feasibility(SPEC, DualTriple(zero.w, zero.y, 1.0), GRID)
    assert not rep["terminal"].passed
    assert rep["terminal"].max_violation == 1.0


def test_gap_examples():
    _, dual, _ = closed_form()
    assert duality_gap(SPEC, constant_primal(), zero_dual(), GRID) == pytest.approx(1.0, abs=1e-12)
    assert duality_gap(SPEC, constant_primal(), dual, GRID) == pytest.approx(1 - 0.5231664, abs=1e-7)


def test_gap_rejects_infeasible_pair():
    with pytest.raises(InfeasibleError, match="boundary"):
        duality_gap(SPEC, _linear_primal(), zero_dual(), GRID)


def test_slackness_fails_for_constant_primal():
    _, dual, sol = closed_form()
    rep = check_complementary_slackness(SPEC, constant_primal(), dual, GRID)
    bad = rep["row_slack_times_w"]
    assert not bad.passed and bad.theta <= sol.mu


def test_zero_dual_slackness_trivial_products():
    rep = check_complementary_slackness(SPEC, constant_primal(), zero_dual(), GRID)
    for family in ("slope_times_y", "row_slack_times_w", "boundary_slack_times_gamma", "terminal_times_z"):
        assert rep[family].passed


def test_embed_examples():
    assert embed_step([1, 1]).integral() == 1
    z = embed_step([1, Fraction(1, 7)])
    assert z.integral() == Fraction(4, 7)
    assert z(np.array([0.0, 0.5, 0.51, 1.0])).tolist() == [1.0, 1.0, 1 / 7, 1 / 7]


@pytest.mark.parametrize(
    "x,message",
    [([0.9, 0.5], "x_1"), ([1, 0.5, 0.6], "nonincreasing"), ([1, -0.1], "nonnegative"), ([], "empty")],
)
def test_embed_rejects(x, message):
    with pytest.raises(ValueError, match=message):
        embed_step(x)


@pytest.mark.parametrize("n", [2, 5, 10])
def test_embedded_lp_optimum_is_feasible(n):
    sol = solve(build_lp(n))
    z = embed_step(sol.x)
    assert check_primal_feasibility(SPEC, z, GRID).ok
    assert abs(float(z.integral()) - sol.objective) <= 1e-12


def test_report_csv():
    rep = check_primal_feasibility(SPEC, _linear_primal(), 10)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "check,family,max_violation,theta,status"
    assert "primal,boundary,2.500000e-01,1,fail" in lines


def test_grid_validated():
    with pytest.raises(ValueError):
        check_primal_feasibility(SPEC, constant_primal(), grid=1)


def test_weak_duality_over_feasible_pairs():
    z_opt, d_opt, _ = closed_form()
    primals = [z_opt, constant_primal()] + [embed_step(solve(build_lp(n)).x) for n in (2, 5)]
    duals = [zero_dual(), d_opt, _scaled(d_opt, 0.5)]
    for z in primals:
        for d in duals:
            assert duality_gap(SPEC, z, d, GRID) >= -1e-9


def test_interchange_identity():
    z, dual, _ = closed_form()
    a, b = interchange_sides(SPEC, z, dual)
    assert a == pytest.approx(b, abs=1e-9)
    z5 = embed_step(solve(build_lp(5)).x)
    a, b = interchange_sides(SPEC, z5, _scaled(dual, 0.3))
    assert a == pytest.approx(b, abs=1e-9)


def test_analytic_derivatives_match_central_differences():
    z, dual, sol = closed_form()
    th = np.linspace(0.01, 0.99, 99)
    th = th[np.abs(th - sol.mu) > 1e-3]
    for f in (z.z, dual.w, dual.y):
        assert np.allclose(f.derivative(th), central_difference(f, th, 1e-6), atol=1e-4)
