import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from dsc.benchmark import (
    IllustrativeModel,
    NormalTheta,
    analytic_probability,
    analytic_robust_member,
    nominal_member,
)
from dsc.core import UncertaintySet, feasibility_probability

STD = NormalTheta(0.0, 1.0)
NARROW = NormalTheta(1.0, math.sqrt(0.3))


def _oracle(d, prior, lo=0.2, hi=0.75):
    # independent closed form through the normal CDF
    q = d[0] ** 2
    if q == 0:
        return float(lo <= d[1] <= hi)
    return norm.cdf((hi - d[1]) / q, prior.mu, prior.sigma) - norm.cdf((lo - d[1]) / q, prior.mu, prior.sigma)


def test_model_interface():
    m = IllustrativeModel()
    assert m.n_constraints == 2
    assert m.evaluate((0.5, 0.3), (1.0,)) == pytest.approx((0.2 - 0.55, 0.55 - 0.75))
    thetas = np.random.default_rng(0).normal(size=(64, 1))
    batch = m.evaluate_batch((0.37, -0.2), thetas)
    scalar = np.array([m.evaluate((0.37, -0.2), t) for t in thetas])
    np.testing.assert_array_equal(batch, scalar)


def test_normal_theta_requires_positive_sigma():
    with pytest.raises(ValueError):
        NormalTheta(0.0, 0.0)


@pytest.mark.parametrize("prior", [STD, NARROW, NormalTheta(-3.0, 0.1)])
def test_origin_column_is_certain(prior):
    assert analytic_probability((0.0, 0.5), prior) == 1.0
    assert analytic_probability((0.0, 0.9), prior) == 0.0


def test_worked_values():
    assert analytic_probability((1.0, 0.475), STD) == pytest.approx(0.2167, abs=5e-5)
    assert analytic_probability((1.0, 0.475), STD) == pytest.approx(math.erf(0.275 / math.sqrt(2)), abs=1e-14)
    assert analytic_probability((1.0, 0.2), NARROW) == pytest.approx(0.172, abs=5e-4)


def test_monte_carlo_oracle_agrees():
    U = UncertaintySet(np.random.default_rng(11).normal(1.0, math.sqrt(0.3), size=(400_000, 1)))
    p = feasibility_probability(IllustrativeModel(), (1.0, 0.2), U)
    assert abs(p - analytic_probability((1.0, 0.2), NARROW)) < 4 * math.sqrt(0.172 * 0.828 / 4e5)


@settings(max_examples=300, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.sampled_from([STD, NARROW]))
def test_against_normal_cdf(d1, d2, prior):
    assert analytic_probability((d1, d2), prior) == pytest.approx(_oracle((d1, d2), prior), abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.sampled_from([STD, NARROW]))
def test_symmetry_in_first_coordinate(d1, d2, prior):
    assert analytic_probability((d1, d2), prior) == analytic_probability((-d1, d2), prior)


def test_robust_member_examples():
    for alpha in (0.1, 0.5, 0.95):
        assert analytic_robust_member((0.0, 0.5), NARROW, alpha) == 1
    assert analytic_robust_member((1.0, 0.0), NARROW, 0.5) == 0
    with pytest.raises(ValueError):
        analytic_robust_member((0.0, 0.5), STD, 1.0)


@pytest.mark.parametrize("prior", [STD, NARROW])
@pytest.mark.parametrize("alpha", [0.5, 0.7, 0.95])
def test_robust_member_is_conservative(prior, alpha):
    grid = np.linspace(-1.0, 1.0, 100)
    members = 0
    for d1 in grid:
        for d2 in grid:
            if analytic_robust_member((d1, d2), prior, alpha):
                members += 1
                assert analytic_probability((d1, d2), prior) >= alpha
    assert members > 0


@pytest.mark.parametrize("d, expected", [((0.5, 0.3), 1), ((1.0, 0.9), 0), ((0.0, 0.2), 1), ((0.0, 0.75), 1)])
def test_nominal_member(d, expected):
    assert nominal_member(d) == expected
