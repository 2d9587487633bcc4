import logging
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dsc.benchmark import IllustrativeModel, NormalTheta, analytic_probability
from dsc.core import (
    CountingModel,
    DesignSample,
    FunctionModel,
    KnowledgeSpace,
    Status,
    UncertaintySet,
    feasibility_probability,
    feasibility_probability_bounded,
    indicator,
)
from dsc.errors import ModelError, NonFiniteConstraintError


# -- indicator ---------------------------------------------------------------

@pytest.mark.parametrize("g, expected", [
    ((-1.0, 0.0), 1),
    ((0.001, -5.0), 0),
    ((-0.3,), 1),
    ((0.0,), 1),
    ((1e-300,), 0),
])
def test_indicator_examples(g, expected):
    assert indicator(g) == expected


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_indicator_rejects_non_finite(bad):
    with pytest.raises(NonFiniteConstraintError, match="non-finite constraint value") as info:
        indicator((-1.0, bad), d=(0.1, 0.2), theta=(3.0,))
    assert "0.1" in str(info.value) and "3.0" in str(info.value)


def test_indicator_empty_vector():
    with pytest.raises(ModelError):
        indicator(())


# -- domain types ------------------------------------------------------------

def test_knowledge_space_validation():
    with pytest.raises(ValueError, match=r"lower\[1\]"):
        KnowledgeSpace([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        KnowledgeSpace([], [])
    K = KnowledgeSpace([-2.0, 0.0], [2.0, 1.0])
    assert K.ndim == 2
    assert K.contains([2.0, 0.0]) and not K.contains([2.1, 0.5])
    np.testing.assert_allclose(K.from_unit([0.5, 0.5]), [0.0, 0.5])
    np.testing.assert_allclose(K.to_canonical([2.0, 0.0]), [1.0, -1.0])
    with pytest.raises(AttributeError):
        K.lower = np.zeros(2)


def test_uncertainty_set_normalizes_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        U = UncertaintySet([[0.0], [1.0]], [2.0, 2.0])
    assert "normalizing" in caplog.text
    assert math.fsum(U.weights) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(U.weights, [0.5, 0.5])


def test_uncertainty_set_quiet_when_nearly_normalized(caplog):
    with caplog.at_level(logging.WARNING):
        UncertaintySet([[0.0], [1.0]], [0.5, 0.5 + 1e-9])
    assert caplog.text == ""


@pytest.mark.parametrize("weights", [[0.5, 0.0], [1.0, -0.1], [math.nan, 1.0]])
def test_uncertainty_set_rejects_bad_weights(weights):
    with pytest.raises(ValueError):
        UncertaintySet([[0.0], [1.0]], weights)


def test_uncertainty_order_descending_weight_then_index():
    U = UncertaintySet([[0.0], [1.0], [2.0], [3.0]], [0.1, 0.4, 0.1, 0.4])
    assert list(U.order) == [1, 3, 0, 2]


def test_uncertainty_csv_round_trip(tmp_path):
    U = UncertaintySet([[0.1, 2.0], [0.3, -1.0], [1e-17, 5.0]], [0.2, 0.3, 0.5])
    path = tmp_path / "thetas.csv"
    U.to_csv(path)
    assert path.read_text().splitlines()[0] == "theta_1,theta_2,weight"
    V = UncertaintySet.from_csv(path)
    np.testing.assert_array_equal(U.thetas, V.thetas)
    np.testing.assert_array_equal(U.weights, V.weights)


def test_uncertainty_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,weight\n1,1\n")
    with pytest.raises(ValueError, match="theta_1"):
        UncertaintySet.from_csv(path)


def test_design_sample_probability_range():
    DesignSample((0.0, 0.0), None, Status.LIVE)
    with pytest.raises(ValueError):
        DesignSample((0.0, 0.0), 1.5)


# -- feasibility_probability ---------------------------------------------------

def test_two_scenario_example(model):
    U = UncertaintySet([[0.0], [2.0]], [0.5, 0.5])
    assert feasibility_probability(model, (1.0, 0.3), U) == 0.5


def test_deterministic_point_is_certain(model):
    U = UncertaintySet(np.random.default_rng(3).normal(size=(50, 1)))
    assert feasibility_probability(model, (0.0, 0.5), U) == 1.0


def test_large_sample_matches_closed_form(model):
    # 10^6 equal-weight draws; closed form gives erf(0.275/sqrt(2)) ~ 0.2167
    U = UncertaintySet(np.random.default_rng(2024).standard_normal((1_000_000, 1)))
    p = feasibility_probability(model, (1.0, 0.475), U)
    assert abs(p - 0.217) <= 0.002
    assert abs(p - analytic_probability((1.0, 0.475), NormalTheta(0.0, 1.0))) < 0.002


def test_exactly_n_theta_evaluations(model):
    counter = CountingModel(model)
    U = UncertaintySet(np.linspace(-2, 2, 37)[:, None])
    feasibility_probability(counter, (0.3, 0.1), U)
    assert counter.count == 37


def test_scalar_only_model_supported():
    m = FunctionModel(lambda d, th: (th[0] - d[0],), 1)
    U = UncertaintySet(np.arange(10.0)[:, None])
    assert feasibility_probability(m, (4.5,), U) == pytest.approx(0.5)


def test_non_finite_model_output_raises():
    m = FunctionModel(lambda d, th: (math.nan if th[0] > 1 else -1.0,), 1)
    U = UncertaintySet([[0.0], [2.0]])
    with pytest.raises(NonFiniteConstraintError, match="theta"):
        feasibility_probability(m, (0.0,), U)
    with pytest.raises(NonFiniteConstraintError):
        feasibility_probability_bounded(m, (0.0,), U, 0.0)


def test_wrong_constraint_count_raises():
    m = FunctionModel(lambda d, th: (-1.0, -1.0, -1.0), 2)
    with pytest.raises(ModelError):
        feasibility_probability(m, (0.0,), UncertaintySet([[0.0]]))


# -- bounded estimator ---------------------------------------------------------

def _threshold_model(feasible_indices):
    feasible = set(feasible_indices)
    return CountingModel(FunctionModel(lambda d, th: (-1.0 if int(th[0]) in feasible else 1.0,), 1))


def test_bounded_interrupts_nine_of_fifty():
    m = _threshold_model(range(9))
    U = UncertaintySet(np.arange(100.0)[:, None], np.full(100, 0.01))
    r = feasibility_probability_bounded(m, (0.0,), U, 0.6)
    assert r.rejected
    assert r.evaluations <= 51 and m.count == r.evaluations


def test_bounded_continues_at_exact_floor():
    # 10 feasible among the first 50: 0.10 + 0.50 == 0.60 is not below the floor
    m = _threshold_model(range(10))
    U = UncertaintySet(np.arange(100.0)[:, None], np.full(100, 0.01))
    r = feasibility_probability_bounded(m, (0.0,), U, 0.6)
    assert r.evaluations > 50
    # the remaining 50 are infeasible, so it stops once 0.10 + remaining < 0.6
    assert r.rejected


def test_bounded_full_pass_when_mass_reaches_floor():
    m = _threshold_model(list(range(10)) + list(range(50, 100)))
    U = UncertaintySet(np.arange(100.0)[:, None], np.full(100, 0.01))
    r = feasibility_probability_bounded(m, (0.0,), U, 0.6)
    assert not r.rejected and r.evaluations == 100
    assert r.value == feasibility_probability(m, (0.0,), U)


def test_bounded_floor_zero_never_interrupts(model):
    U = UncertaintySet(np.random.default_rng(1).normal(size=(200, 1)))
    for d in [(1.0, 0.9), (0.7, 0.1), (1.0, -1.0)]:
        r = feasibility_probability_bounded(model, d, U, 0.0)
        assert r.evaluations == 200
        assert r.value == feasibility_probability(model, d, U)


def test_bounded_rejects_bad_floor(model):
    with pytest.raises(ValueError):
        feasibility_probability_bounded(model, (0, 0), UncertaintySet([[0.0]]), 1.5)


# -- properties ----------------------------------------------------------------

weights_st = st.lists(st.integers(1, 20), min_size=1, max_size=30)


@settings(max_examples=150, deadline=None)
@given(weights_st, st.data())
def test_probability_is_feasible_mass_exactly(ints, data):
    n = len(ints)
    feasible = data.draw(st.lists(st.booleans(), min_size=n, max_size=n))
    total = sum(ints)
    m = FunctionModel(lambda d, th: (-1.0 if feasible[int(th[0])] else 1.0,), 1)
    U = UncertaintySet(np.arange(float(n))[:, None], np.array(ints, float) / total)
    p = feasibility_probability(m, (0.0,), U)
    exact = Fraction(sum(i for i, f in zip(ints, feasible) if f), total)
    assert 0.0 <= p <= 1.0
    assert abs(Fraction(p) - exact) <= Fraction(n + 2, 2 ** 52)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=1, max_size=40),
       st.floats(-1, 1), st.floats(-1, 1), st.floats(0.0, 1.0), st.randoms(use_true_random=False))
def test_bounded_soundness_and_bit_identity(ws, d1, d2, floor, rnd):
    n = len(ws)
    thetas = np.array([rnd.gauss(0.0, 1.0) for _ in range(n)])[:, None]
    U = UncertaintySet(thetas, ws)
    m = CountingModel(IllustrativeModel())
    exact = feasibility_probability(IllustrativeModel(), (d1, d2), U)
    r = feasibility_probability_bounded(m, (d1, d2), U, floor)
    assert r.evaluations <= n and m.count == r.evaluations
    if r.rejected:
        assert exact < floor
    else:
        assert r.value == exact


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(0.01, 5.0)), min_size=1, max_size=40),
       st.floats(-1, 1), st.floats(-1, 1), st.randoms(use_true_random=False))
def test_permutation_invariance(rows, d1, d2, rnd):
    perm = list(range(len(rows)))
    rnd.shuffle(perm)
    U = UncertaintySet([[t] for t, _ in rows], [w for _, w in rows])
    V = UncertaintySet([[rows[i][0]] for i in perm], [rows[i][1] for i in perm])
    model = IllustrativeModel()
    assert feasibility_probability(model, (d1, d2), U) == feasibility_probability(model, (d1, d2), V)
