import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eprsim.errors import ValidationError
from eprsim.lhv import qm_correlation
from eprsim.montecarlo import RandomSeed
from eprsim.sequential import (
    MalusParams,
    PairSample,
    canonical_angle,
    malus_product_average,
    malus_same_reading_prob,
    pair_marginals,
    sequential_correlation_closed_form,
    sequential_correlation_mc,
    simulate_pair,
    simulate_pairs,
)
from eprsim.state import UnitVector3

from strategies import unit_vectors

D = UnitVector3.from_degrees


def test_malus_same_reading():
    assert malus_same_reading_prob(0) == 1.0
    assert malus_same_reading_prob(math.pi) == pytest.approx(0.0, abs=1e-30)
    assert malus_same_reading_prob(math.pi / 2) == pytest.approx(0.5, abs=1e-15)


def test_malus_product_average():
    assert malus_product_average(0) == 1.0
    assert malus_product_average(math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    assert malus_product_average(math.pi / 3) == pytest.approx(0.5, abs=1e-15)


@given(st.floats(0, math.pi))
def test_malus_relation(theta):
    assert abs(malus_product_average(theta) - (2 * malus_same_reading_prob(theta) - 1)) <= 1e-15


def test_closed_form_values():
    assert sequential_correlation_closed_form(0) == -1.0
    assert sequential_correlation_closed_form(math.pi) == pytest.approx(1.0, abs=1e-15)
    assert sequential_correlation_closed_form(math.pi / 3) == pytest.approx(-0.5, abs=1e-15)


@given(unit_vectors(), unit_vectors())
def test_closed_form_equals_qm(a, b):
    assert abs(sequential_correlation_closed_form(a.angle_to(b)) - qm_correlation()(a, b)) <= 1e-15


@given(st.floats(-50, 50))
def test_canonical_angle_range(theta):
    t = canonical_angle(theta)
    assert 0 <= t <= math.pi
    assert math.cos(t) == pytest.approx(math.cos(theta), abs=1e-12)
    assert MalusParams(theta).theta == t


def test_canonical_angle_rejects_nan():
    with pytest.raises(ValidationError):
        canonical_angle(float("nan"))


def test_pair_sample_validation():
    with pytest.raises(ValidationError):
        PairSample(0, 1)


def test_equal_axes_always_opposite():
    a = UnitVector3.normalized(1, 2, 2)
    se, sp = simulate_pairs(a, a, np.random.default_rng(0), 10_000)
    assert np.all(se == -sp)


def test_simulate_pair_consumes_two_uniforms_in_order():
    a, b = D(0), D(100)
    g = np.random.default_rng(1)
    singles = [simulate_pair(a, b, g) for _ in range(50)]
    se, sp = simulate_pairs(a, b, np.random.default_rng(1), 50)
    assert [s.s_e for s in singles] == se.tolist()
    assert [s.s_p for s in singles] == sp.tolist()
    g1, g2 = np.random.default_rng(2), np.random.default_rng(2)
    simulate_pair(a, b, g1)
    g2.random(2)
    assert g1.random() == g2.random()
    # first variate decides the electron, second the Malus step
    u1, u2 = np.random.default_rng(3).random(2)
    s = simulate_pair(a, b, np.random.default_rng(3))
    assert s.s_e == (1 if u1 < 0.5 else -1)
    assert s.s_p == (-s.s_e if u2 < malus_same_reading_prob(a.angle_to(b)) else s.s_e)


@pytest.mark.parametrize("deg,expected", [(90, 0.0), (60, -0.5)])
def test_mc_mean(deg, expected):
    est = sequential_correlation_mc(D(0), D(deg), 100_000, RandomSeed(deg))
    assert est.contains(expected, 3)


def test_mc_parallel_matches_serial():
    a, b = D(0), D(37)
    assert sequential_correlation_mc(a, b, 300_000, RandomSeed(1)) == sequential_correlation_mc(
        a, b, 300_000, RandomSeed(1), workers=3
    )


def test_marginals_are_fair():
    me, mp = pair_marginals(D(0), D(75), 100_000, RandomSeed(9))
    assert me.contains(0.0, 3) and mp.contains(0.0, 3)
