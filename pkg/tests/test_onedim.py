import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from klslab.onedim import (
    HypothesisViolation,
    IntervalSet,
    LogLinearWeight,
    check_observation,
    classify_complement,
    core_set_1d,
    decreasing_rearrangement,
    exponential_identity,
    integrate,
    random_interval_set,
    random_observation,
    random_weight,
    superlevel_length,
    verify_lemma,
)
from oracles import core_grid_pairwise, core_grid_sweep, grid_disagreements, riemann

UNIT = (0.0, 1.0)
lambdas = st.sampled_from([1.1, 1.5, 2.0, 3.0, 5.0, 12.0])
seeds = st.integers(0, 2**32 - 1)


# -- types -------------------------------------------------------------------

def test_interval_set_merges_and_clips():
    S = IntervalSet([(0.5, 0.7), (0.1, 0.2), (0.15, 0.3), (0.9, 2.0)], host=UNIT)
    assert S.intervals == ((0.1, 0.3), (0.5, 0.7), (0.9, 1.0))
    assert S.measure == pytest.approx(0.5)
    assert IntervalSet.from_json(S.to_json()) == S


def test_interval_set_rejects_reversed():
    with pytest.raises(ValueError):
        IntervalSet([(0.3, 0.1)])


def test_weight_rejects_convex_log():
    with pytest.raises(ValueError, match="concave"):
        LogLinearWeight([0, 0.5, 1], [0, -1, 0])


def test_weight_json_roundtrip():
    f = LogLinearWeight([0, 0.3, 1], [0, 1, -2])
    g = LogLinearWeight.from_json(f.to_json())
    assert np.array_equal(f.breakpoints, g.breakpoints) and np.array_equal(f.values, g.values)


# -- integrate ---------------------------------------------------------------

def test_integrate_constant():
    f = LogLinearWeight([0, 1], [0, 0])
    assert integrate(f, IntervalSet([(0, 0.3)])) == pytest.approx(0.3, rel=1e-15)


def test_integrate_exponential():
    f = LogLinearWeight([0, 1], [0, -1])
    assert integrate(f, IntervalSet([UNIT])) == pytest.approx(1 - math.exp(-1), rel=1e-14)


def test_integrate_tiny_slope_is_stable():
    f = LogLinearWeight([0, 1], [0, 1e-14])
    assert f.total == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_integrate_matches_riemann(seed):
    rng = np.random.default_rng(seed)
    f = random_weight(rng)
    S = random_interval_set(rng)
    ref = sum(riemann(f, a, b) for a, b in S)
    assert integrate(f, S) == pytest.approx(ref, rel=1e-6)


# -- core_set_1d -------------------------------------------------------------

def test_core_full_set_is_everything():
    assert core_set_1d(IntervalSet([UNIT]), UNIT, 3.0).intervals == (UNIT,)


def test_core_half_is_a_point():
    C = core_set_1d(IntervalSet([(0, 0.5)]), UNIT, 2.0)
    assert C.intervals == ((0.0, 0.0),)
    assert C.measure == 0.0
    x, mask, _ = core_grid_pairwise(IntervalSet([(0, 0.5)]), UNIT, 2.0)
    assert not mask.any()


def test_core_wide_gap_is_empty():
    E = IntervalSet([(0, 0.4), (0.6, 1)])
    assert core_set_1d(E, UNIT, 4.0).is_empty
    _, mask, _ = core_grid_pairwise(E, UNIT, 4.0)
    assert not mask.any()


def test_core_narrow_gap_hand_solution():
    # [x, 0.52] must satisfy (0.48 - x) >= 0.75 (0.52 - x), so x <= 0.36
    E = IntervalSet([(0, 0.48), (0.52, 1)])
    C = core_set_1d(E, UNIT, 4.0)
    assert len(C) == 2
    assert C.intervals[0][0] == 0.0 and C.intervals[0][1] == pytest.approx(0.36, abs=1e-14)
    assert C.intervals[1][0] == pytest.approx(0.64, abs=1e-14) and C.intervals[1][1] == 1.0
    x, mask, h = core_grid_pairwise(E, UNIT, 4.0)
    assert len(grid_disagreements(C, E, x, mask, h)) == 0


@pytest.mark.parametrize("seed", range(3))
def test_core_matches_pairwise_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    E = random_interval_set(rng)
    lam = float(rng.choice([1.5, 2.0, 3.0, 5.0]))
    C = core_set_1d(E, UNIT, lam)
    x, mask, h = core_grid_pairwise(E, UNIT, lam, n=4000)
    assert len(grid_disagreements(C, E, x, mask, h)) == 0


@pytest.mark.parametrize("seed", range(3))
def test_sweep_oracle_matches_pairwise_oracle(seed):
    rng = np.random.default_rng(200 + seed)
    E = random_interval_set(rng)
    _, a, _ = core_grid_pairwise(E, UNIT, 2.0, n=3000)
    _, b, _ = core_grid_sweep(E, UNIT, 2.0, n=3000)
    assert np.array_equal(a, b)


def test_core_rejects_bad_lambda():
    with pytest.raises(ValueError, match="lambda > 1"):
        core_set_1d(IntervalSet([UNIT]), UNIT, 1.0)


@settings(max_examples=150, deadline=None)
@given(seed=seeds, lam1=lambdas, lam2=lambdas)
def test_core_shrinks_with_lambda(seed, lam1, lam2):
    lam1, lam2 = sorted((lam1, lam2))
    E = random_interval_set(np.random.default_rng(seed))
    assert core_set_1d(E, UNIT, lam2).is_subset(core_set_1d(E, UNIT, lam1))


@settings(max_examples=150, deadline=None)
@given(seed=seeds, lam=lambdas)
def test_core_inside_e(seed, lam):
    E = random_interval_set(np.random.default_rng(seed))
    assert core_set_1d(E, UNIT, lam).is_subset(E)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, lam=lambdas)
def test_core_agrees_with_sweep_oracle(seed, lam):
    E = random_interval_set(np.random.default_rng(seed))
    C = core_set_1d(E, UNIT, lam)
    x, mask, h = core_grid_sweep(E, UNIT, lam, n=5000)
    assert len(grid_disagreements(C, E, x, mask, h)) == 0


# -- verify_lemma ------------------------------------------------------------

def test_lemma_full_set_equality():
    f = LogLinearWeight([0, 0.5, 1], [0, 1, 0])
    r = verify_lemma(f, IntervalSet([UNIT]), 2.0)
    assert r.lhs == pytest.approx(1.0) and r.rhs == pytest.approx(1.0) and r.holds


def test_lemma_empty_core():
    f = LogLinearWeight([0, 1], [0, -2])
    r = verify_lemma(f, IntervalSet([(0, 0.4), (0.6, 1)]), 4.0)
    assert r.lhs == 0.0 and r.holds and r.margin > 0


@settings(max_examples=300, deadline=None)
@given(seed=seeds, lam=lambdas)
def test_lemma_holds_on_random_instances(seed, lam):
    rng = np.random.default_rng(seed)
    r = verify_lemma(random_weight(rng), random_interval_set(rng), lam)
    assert r.holds, r


# -- classify_complement -----------------------------------------------------

def test_classify_decreasing_from_left_end_is_exceptional():
    f = LogLinearWeight([0, 1], [0, -3])
    pieces = classify_complement(IntervalSet([(0.0, 0.0)]), f)
    assert [p.kind for p in pieces] == ["exceptional"]
    assert pieces[0].interval == (0.0, 1.0)


def test_classify_gap_over_the_peak_is_exceptional():
    f = LogLinearWeight([0, 0.5, 1], [0, 2, 0])
    core = IntervalSet([(0, 0.3), (0.7, 1)])
    assert [p.kind for p in classify_complement(core, f)] == ["exceptional"]


def test_classify_regular_with_bound():
    f = LogLinearWeight([0, 1], [0, -1])
    E = IntervalSet([(0, 0.48), (0.52, 1)])
    core = core_set_1d(E, UNIT, 4.0)
    pieces = classify_complement(core, f, E=E, lam=4.0)
    assert [p.kind for p in pieces] == ["regular"]
    assert pieces[0].bound_ok


def test_classify_empty_core_errors():
    with pytest.raises(ValueError):
        classify_complement(IntervalSet(), LogLinearWeight([0, 1], [0, 0]))


@settings(max_examples=200, deadline=None)
@given(seed=seeds, lam=lambdas)
def test_classify_at_most_one_exceptional(seed, lam):
    rng = np.random.default_rng(seed)
    f, E = random_weight(rng), random_interval_set(rng)
    core = core_set_1d(E, UNIT, lam)
    if core.is_empty:
        return
    pieces = classify_complement(core, f, E=E, lam=lam)
    assert sum(p.kind == "exceptional" for p in pieces) <= 1
    assert all(p.bound_ok for p in pieces if p.kind == "regular")


# -- decreasing_rearrangement ------------------------------------------------

def test_rearrangement_of_decreasing_is_identity():
    f = LogLinearWeight([0, 0.2, 1], [0, -0.5, -3])
    g = decreasing_rearrangement(f)
    assert np.allclose(g.breakpoints, f.breakpoints) and np.allclose(g.values, f.values)


def test_rearrangement_of_constant():
    g = decreasing_rearrangement(LogLinearWeight([2, 5], [1, 1]))
    assert g.interval == (0.0, 3.0)
    assert np.allclose(g.values, 1.0)


def test_rearrangement_of_symmetric_hat():
    f = LogLinearWeight([0, 0.5, 1], [0, 1, 0])
    g = decreasing_rearrangement(f)
    assert np.allclose(g.breakpoints, [0, 1]) and np.allclose(g.values, [1, 0])
    for y in np.linspace(-0.1, 1.1, 25):
        assert superlevel_length(g, y) == pytest.approx(superlevel_length(f, y), abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(seed=seeds)
def test_rearrangement_equimeasurable(seed):
    f = random_weight(np.random.default_rng(seed))
    g = decreasing_rearrangement(f)
    assert np.all(np.diff(g.values) <= 1e-12)
    assert g.total == pytest.approx(f.total, rel=1e-9)
    for y in np.linspace(f.values.min(), f.values.max(), 40):
        assert abs(superlevel_length(g, y) - superlevel_length(f, y)) <= 1e-9


# -- observations ------------------------------------------------------------

def test_observation1_identity_at_zero():
    lam = 2.0
    assert check_observation(1, X=1.0, Y=0.0, lam=lam)
    # Y = 0 is an equality for every X and lambda
    assert check_observation(1, X=3.7, Y=0.0, lam=4.2)


def test_observation1_arithmetic():
    # 4 >= 1 * (1 + 2) = 3
    assert check_observation(1, X=1.0, Y=1.0, lam=2.0)


def test_observation3_dense_sampling():
    for x in np.linspace(0, 1, 100):
        assert check_observation(3, X=1.0, Y=1.0, Z=1.0, lam=2.0, x=x)


def test_observation_hypothesis_violation():
    with pytest.raises(HypothesisViolation):
        check_observation(3, X=1.0, Y=0.01, Z=5.0, lam=3.0)


def test_observation_unknown():
    with pytest.raises(ValueError):
        check_observation(5, X=1.0, lam=2.0)


# -- exponential identity ----------------------------------------------------

@pytest.mark.parametrize("a,m,lam", [(1.0, 0.7, 2.5), (3.0, 0.2, 2.0)])
def test_exponential_identity_examples(a, m, lam):
    r = exponential_identity(a, m, lam)
    assert r.rel_gap <= 1e-12
    assert r.lhs == pytest.approx(math.exp(-a * m * lam) / a**lam, rel=1e-13)


@settings(max_examples=200)
@given(a=st.floats(0.01, 50), m=st.floats(0.01, 5), lam=st.floats(1.001, 20))
def test_exponential_identity_property(a, m, lam):
    r = exponential_identity(a, m, lam)
    if r.lhs > 1e-300:
        assert r.rel_gap <= 1e-12


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_random_observation_premise_and_conclusion(k):
    rng = np.random.default_rng(100 + k)
    for _ in range(500):
        assert check_observation(k, **random_observation(k, rng))
