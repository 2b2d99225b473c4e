import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Polynomial as Poly
from numpy.polynomial import chebyshev as npcheb
from scipy import integrate, optimize

from klslab import geometry as g
from klslab.onedim import IntervalSet, random_interval_set
from klslab.polydist import (EmpiricalDistribution, ExactDistribution, ExpSum, MultiPoly, Row, aplus_aminus_row,
                             bmo_check, bmo_mean_deviation, chebyshev_T, estimate_aplus_aminus, interval_max,
                             inverse_holder, log_average_deviation, log_average_deviation_1d, lq_norms,
                             moment_chain, random_body, random_expsum, remez_check, remez_sharpness, rows_to_csv,
                             sigma_observation, tail_average_bound, turan_check, verify_comparison,
                             verify_distribution_inequalities)

X = Poly([0, 1])
E1 = math.e


# -- Chebyshev ---------------------------------------------------------------


def test_chebyshev_values():
    assert all(chebyshev_T(d, 1.0) == pytest.approx(1.0, abs=1e-14) for d in range(11))
    assert chebyshev_T(2, 3.0) == pytest.approx(17, rel=1e-14)
    assert chebyshev_T(3, 2.0) == pytest.approx(26, rel=1e-14)
    assert chebyshev_T(3, -2.0) == pytest.approx(-26, rel=1e-14)


@pytest.mark.parametrize("d", range(0, 9))
def test_chebyshev_continuous_at_one(d):
    assert abs(chebyshev_T(d, 1 + 1e-13) - chebyshev_T(d, 1 - 1e-13)) <= 1e-10


@settings(max_examples=200)
@given(d=st.integers(0, 12), x=st.floats(-6, 6))
def test_chebyshev_matches_series_evaluation(d, x):
    want = npcheb.chebval(x, [0] * d + [1])
    assert chebyshev_T(d, x) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_chebyshev_rejects_negative_degree():
    with pytest.raises(ValueError):
        chebyshev_T(-1, 0.5)


# -- Remez and Turan ---------------------------------------------------------


def test_interval_max_finds_interior_critical_point():
    p = Poly([-0.3, -1.0, 0.0, 1.0])  # x^3 - x - 0.3, critical point 1/sqrt(3)
    c = 1 / math.sqrt(3)
    assert interval_max(p, 0.0, 1.0) == pytest.approx(abs(p(c)), rel=1e-14)


def test_remez_chebyshev_example():
    r = remez_check(Poly([-1, 0, 2]), (-1, 1), IntervalSet([(-1, 0)]))
    assert (r.maxJ, r.supE, r.bound) == (pytest.approx(1.0), pytest.approx(1.0), pytest.approx(64.0))
    assert r.holds


def test_remez_constant():
    r = remez_check(Poly([2.5]), (0, 3), IntervalSet([(1, 1.2)]), A=1.0)
    assert r.maxJ == r.supE == 2.5 and r.holds


def test_remez_rejects_bad_E():
    with pytest.raises(ValueError):
        remez_check(X, (0, 1), IntervalSet([]))
    with pytest.raises(ValueError):
        remez_check(X, (0, 1), IntervalSet([(0.5, 1.5)]))


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_remez_random(seed):
    rng = np.random.default_rng(seed)
    p = Poly(rng.normal(size=int(rng.integers(1, 10))))
    E = random_interval_set(rng, (-1.0, 1.0))
    if E.measure < 0.1:
        return
    assert remez_check(p, (-1.0, 1.0), E).holds


@pytest.mark.parametrize("d,rho,want", [(1, 2.0, 3.0), (3, 2.0, 99.0), (4, 1.0, 1.0)])
def test_remez_sharpness_examples(d, rho, want):
    s = remez_sharpness(d, rho)
    assert s.extremal_ratio == pytest.approx(want, rel=1e-9)
    assert s.rel_gap <= 1e-6


def test_remez_sharpness_rejects_small_rho():
    with pytest.raises(ValueError):
        remez_sharpness(2, 0.5)


def test_sharp_constant_is_attained():
    # with A = 4 the loose bound exceeds the sharp one; the Chebyshev witness
    # meets the sharp one with equality
    for d in range(1, 7):
        for rho in (1.5, 2.0, 4.0):
            s = remez_sharpness(d, rho)
            assert s.extremal_ratio <= (4 * rho) ** d


def test_turan_single_term_constant_modulus():
    s = ExpSum([2 - 1j], [7.0])
    r = turan_check(s, (0, 3), IntervalSet([(1, 1.1)]))
    assert r.maxJ == pytest.approx(abs(2 - 1j)) and r.supE == pytest.approx(abs(2 - 1j)) and r.holds


def test_turan_cosine_half():
    s = ExpSum([0.5, 0.5], [3.0, -3.0])  # cos(3t)
    r = turan_check(s, (0, 2), IntervalSet([(0, 1)]))
    assert r.maxJ == pytest.approx(1.0, abs=1e-12) and r.holds


def test_turan_random_sums():
    rng = np.random.default_rng(5)
    for _ in range(20):
        E = random_interval_set(rng, (0.0, 1.0))
        if E.measure >= 0.05:
            assert turan_check(random_expsum(rng), (0.0, 1.0), E).holds


def test_expsum_json_and_order():
    s = ExpSum([1, 1j], [[1.0, 0.0], [0.0, 2.0]])
    assert s.order == 2 and s.dim == 2
    assert len(json.loads(s.to_json())["coeffs"]) == 2
    with pytest.raises(ValueError):
        turan_check(s, (0, 1), IntervalSet([(0, 1)]))


# -- MultiPoly ---------------------------------------------------------------


def test_multipoly_basics():
    P = MultiPoly([((1, 1), 1.0), ((0, 2), -2.0), ((0, 0), 0.5)])
    assert P.dim == 2 and P.degree == 2
    assert P([[2.0, 3.0]])[0] == pytest.approx(6 - 18 + 0.5)
    Q = MultiPoly.from_json(P.to_json())
    assert np.array_equal(Q.exps, P.exps) and np.array_equal(Q.coefs, P.coefs)


def test_multipoly_rejects_duplicates():
    with pytest.raises(ValueError):
        MultiPoly([((1, 0), 1.0), ((1, 0), 2.0)])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_multipoly_restriction_is_degree_d(seed):
    rng = np.random.default_rng(seed)
    P = MultiPoly.random(rng, 3, 3)
    assert P.check_restriction(rng.normal(size=3), rng.normal(size=3))


# -- distributions -----------------------------------------------------------


def test_median_level_linear_and_square():
    assert ExactDistribution(X).median_level() == pytest.approx(1 - 1 / E1, abs=1e-13)
    assert ExactDistribution(X * X).median_level() == pytest.approx((1 - 1 / E1) ** 2, abs=1e-13)


def test_median_level_product_monte_carlo():
    # area{xy >= M} = 1 - M + M log M; root frozen from a separate solve
    M_exact = 0.27663033146916927
    assert optimize.brentq(lambda M: 1 - M + M * math.log(M) - 1 / E1, 1e-6, 1) == pytest.approx(M_exact)
    D = EmpiricalDistribution.sample(MultiPoly([((1, 1), 1.0)]), g.unit_square(), 1_000_000, 11)
    # quantile CI: 2.576 sqrt(p(1-p)/n) divided by the density -log M
    ci = 2.576 * math.sqrt((1 / E1) * (1 - 1 / E1) / 1e6) / -math.log(M_exact)
    assert abs(D.median_level() - M_exact) <= 3 * ci


def test_median_level_rejects_constant():
    with pytest.raises(ValueError):
        ExactDistribution(Poly([3.0])).median_level()
    with pytest.raises(ValueError):
        EmpiricalDistribution(np.ones(100)).median_level()


def test_median_level_monotone_in_sample():
    rng = np.random.default_rng(0)
    v = rng.random(10_000)
    assert EmpiricalDistribution(v).median_level() <= EmpiricalDistribution(v + 0.01).median_level()


def test_tails_non_increasing():
    D = EmpiricalDistribution.sample(MultiPoly.random(np.random.default_rng(1), 2, 2), g.unit_square(), 20_000, 2)
    levels = np.linspace(0, D.values[-1], 50)
    t = [D.tail(c) for c in levels]
    assert all(a >= b for a, b in zip(t, t[1:]))


@pytest.mark.parametrize("coef", [[0.1, -1.0, 0.0, 1.0], [0.0, 0.0, 0.0, 1.0], [-0.2, 0.3, 1.0]])
def test_sampled_tails_agree_with_exact(coef):
    p = Poly(coef)
    ex = ExactDistribution(p, (-1.0, 1.0))
    x = np.random.default_rng(3).uniform(-1, 1, 200_000)
    em = EmpiricalDistribution(p(x), 3)
    for c in np.linspace(0.01, ex.top * 0.99, 15):
        assert abs(em.tail(c) - ex.tail(c)) <= 3 * em.prob_ci(ex.tail(c)) + 1e-12


def test_exact_tail_by_hand():
    ex = ExactDistribution(Poly([-0.5, 1.0]), (0.0, 1.0))  # |x - 1/2|
    assert ex.tail(0.25) == pytest.approx(0.5, abs=1e-15)
    assert ex.below(0.1) == pytest.approx(0.2, abs=1e-15)


def test_comparison_linear_example():
    r = verify_comparison(ExactDistribution(X), 1, 0.1, 2.0)
    assert r.value == pytest.approx(0.2) and r.bound == pytest.approx(0.81) and r.holds


def test_comparison_lambda_one_and_full_tail():
    D = ExactDistribution(X * X - 0.3 * X)
    assert verify_comparison(D, 2, 0.05, 1.0).holds
    D2 = ExactDistribution(X + 1.0)
    assert verify_comparison(D2, 1, 0.5, 3.0).bound == 1.0


def test_distribution_linear_example():
    D = ExactDistribution(X)
    rows = verify_distribution_inequalities(D, 1, D.median_level(), [2.0])
    assert rows[0].value == 0.0 and all(r.holds for r in rows)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_distribution_monomials_both_forms(d):
    D = ExactDistribution(X**d)
    M = D.median_level()
    lams = [1.01, 1.1, 1.3, 1.5, 2.0, 4.0, 10.0]
    rows = verify_distribution_inequalities(D, d, M, lams) + verify_distribution_inequalities(D, d, M, lams, True)
    assert all(r.holds for r in rows)


def test_distribution_rejects_lambda_one():
    with pytest.raises(ValueError):
        verify_distribution_inequalities(ExactDistribution(X), 1, 0.5, [1.0])


# -- averages from distribution functions -------------------------------------


def test_tail_average_zero_tail():
    assert tail_average_bound(lambda l: 0.0, lambda l: 2 * l, lambda l: 2.0, 1.5) == 3.0


def test_tail_average_exponential():
    assert tail_average_bound(lambda l: math.exp(-l), lambda l: l, lambda l: 1.0, 0.0) == pytest.approx(1.0)


def test_tail_average_divergent():
    with pytest.raises(ValueError):
        tail_average_bound(lambda l: 1 / l, lambda l: l, lambda l: 1.0, 1.0)


@pytest.mark.parametrize("sigma,lhs", [(1.0, 2.0), (2.0, 3.0)])
def test_sigma_small(sigma, lhs):
    r = sigma_observation(sigma)
    assert r.lhs == pytest.approx(lhs, rel=1e-10) and r.holds


@pytest.mark.parametrize("sigma", [1.5, 5.0, 10.0])
def test_sigma_quadrature_matches_gamma(sigma):
    r = sigma_observation(sigma)
    assert r.lhs == pytest.approx(r.gamma_form, rel=1e-9) and r.holds


@pytest.mark.parametrize("sigma", [1.0, 2.0, 3.5, 8.0])
def test_moment_chain(sigma):
    assert moment_chain(sigma).holds


# -- norms ---------------------------------------------------------------------


def test_lq_linear_values():
    D = ExactDistribution(X)
    M = D.median_level()
    rows = {r.quantity: r for r in lq_norms(D, 1, M, [-0.4, 0, 1])}
    assert rows["L^q q=1"].value == pytest.approx(0.5, abs=1e-12)
    assert rows["L^0 lower"].value == pytest.approx(1 / E1, abs=1e-12)
    assert rows["L^-q q=0.4"].value == pytest.approx(0.6**2.5, abs=1e-12)
    assert all(r.holds for r in rows.values())


def test_lq_rejects_out_of_range():
    with pytest.raises(ValueError):
        lq_norms(ExactDistribution(X * X), 2, 0.3, [-0.6])


def test_geometric_mean_row_is_exp_mean_log():
    v = np.random.default_rng(4).random(10_000) + 0.1
    D = EmpiricalDistribution(v)
    assert D.norm(0)[0] == pytest.approx(math.exp(np.mean(np.log(v))), rel=1e-12)


def test_norms_monotone_in_q():
    D = EmpiricalDistribution.sample(MultiPoly.random(np.random.default_rng(6), 2, 2), g.unit_square(), 50_000, 6)
    qs = [-0.4, -0.2, -0.05, 0.0, 0.1, 0.5, 1, 2, 4]
    vals = [D.norm(q)[0] for q in qs]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


def test_inverse_holder_linear_exact():
    r = inverse_holder(ExactDistribution(X), 1, 1.0, 0.4)
    assert r.value == pytest.approx(0.5 * 0.6**-2.5, rel=1e-10)
    assert r.bound == pytest.approx(12 / 0.6**2.5) and r.holds


def test_inverse_holder_zero_r_limit():
    D = ExactDistribution(X * X - 0.1)
    r0 = inverse_holder(D, 2, 1.0, 0.0)
    r1 = inverse_holder(D, 2, 1.0, 1e-6)
    assert r0.value == pytest.approx(r1.value, rel=1e-5) and r0.bound == pytest.approx(r1.bound, rel=1e-5)


def test_inverse_holder_range():
    with pytest.raises(ValueError):
        inverse_holder(ExactDistribution(X), 1, 1.0, 1.0)


def test_aplus_aminus_linear():
    D = ExactDistribution(X)
    c = estimate_aplus_aminus(D, 1, D.median_level())
    assert c.A_plus == pytest.approx(1.0, rel=1e-9)
    assert c.A_minus == pytest.approx(1 - 1 / E1, rel=1e-9)
    assert aplus_aminus_row(D, 1, D.median_level()).holds


# -- BMO and averages over subsets -----------------------------------------------


def test_bmo_constant_polynomial_zero():
    r = bmo_check(MultiPoly([((0, 0), 3.0)]), [g.unit_square()], 0, 1000)
    assert r.sup_over_bodies == 0.0 and r.holds


def test_bmo_linear_on_square_matches_integral():
    # min_C mean |log x - C| over x in [1, 2], C the median log 1.5
    C = math.log(1.5)
    want = integrate.quad(lambda x: abs(math.log(x) - C), 1, 2, points=[1.5])[0]
    v, ci = bmo_mean_deviation(MultiPoly([((1, 0), 1.0)]), g.rectangle(1, 0, 2, 1), 200_000, 1)
    assert abs(v - want) <= 3 * ci


def test_bmo_random_cubics():
    rng = np.random.default_rng(8)
    bodies = [random_body(rng) for _ in range(10)]
    assert all(b.area == pytest.approx(1.0) for b in bodies)
    r = bmo_check(MultiPoly.random(rng, 2, 3), bodies, 8, 5000)
    assert r.bound == pytest.approx((4 + math.log(4)) / 2 * 3) and r.holds


def test_log_average_full_set():
    P = MultiPoly([((1, 0), 1.0), ((0, 0), 0.2)])
    r = log_average_deviation(P, g.unit_square(), g.Plane(), 0, 50_000)
    assert r.deviation == 0.0 and r.holds


def test_log_average_linear_exact():
    r = log_average_deviation_1d(X, (0.0, 1.0), IntervalSet([(0.5, 1.0)]))
    assert r.devE == pytest.approx(math.log(2) - 1, abs=1e-12)
    assert r.devF == pytest.approx(-1.0, abs=1e-12)
    assert r.bound == pytest.approx(math.log(2 * E1**2 * 4)) and r.holds


def test_log_average_rejects_empty():
    with pytest.raises(ValueError):
        log_average_deviation(MultiPoly([((1, 0), 1.0)]), g.unit_square(), g.Nowhere(), 0, 1000)


def test_rows_csv_columns():
    text = rows_to_csv([Row("x", 1.0, 0.0, 2.0), Row("y", 3.0, 0.1, 2.0, "ge", "montecarlo", 5)])
    lines = text.splitlines()
    assert lines[0] == "quantity,value,ci,bound,margin,backend,seed,holds"
    assert lines[1] == "x,1.0,0.0,2.0,1.0,exact,,true"
    assert lines[2] == "y,3.0,0.1,2.0,1.0,montecarlo,5,true"
