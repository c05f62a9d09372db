import math
from fractions import Fraction

import numpy as np
import pytest

import _oracles as O
from anticonc.concentration import (
    WeightVector,
    WeightedSum,
    esseen_upper_q,
    exact_q_1d,
    exact_q_multid,
    exact_q_of_distribution,
    mc_q,
    regularity_check,
    weighted_sum_char_fn,
    weighted_sum_distribution,
)
from anticonc.distributions import DiscreteDistribution
from anticonc.errors import CapacityError, DomainError

RAD = DiscreteDistribution.rademacher()
U3 = DiscreteDistribution.from_shorthand("uniform{-1,0,1}")
B3 = DiscreteDistribution.from_shorthand("bernoulli(0.3)")

_ORACLE_LAWS = {
    "rademacher": (RAD, O.RADEMACHER),
    "uniform3": (U3, O.UNIFORM3),
    "bernoulli": (B3, O.bernoulli(0.3)),
}


def test_weight_vector_basics():
    a = WeightVector([[3.0], [4.0]])
    assert a.n == 2 and a.dim == 1
    assert a.norm() == 5.0
    mat, det = a.gram()
    assert mat.shape == (1, 1) and abs(det - 25.0) < 1e-12
    b = WeightVector([[1.0, 0.0], [0.0, 2.0]])
    assert b.coordinate(1).rows[:, 0].tolist() == [0.0, 2.0]
    back = WeightVector.from_json_obj(b.to_json_obj())
    np.testing.assert_array_equal(back.rows, b.rows)


def test_gram_det_clamped_nonnegative():
    a = WeightVector([[1.0, 1.0], [2.0, 2.0]])
    _, det = a.gram()
    assert det == 0.0


def test_exact_q_1d_random_instances_match_oracle():
    rng = np.random.default_rng(42)
    for trial in range(40):
        name = ("rademacher", "uniform3", "bernoulli")[trial % 3]
        x, (sup, pr) = _ORACLE_LAWS[name]
        n = int(rng.integers(2, 8))
        w = rng.integers(-5, 6, size=n)
        w[w == 0] = 1
        tau = float(rng.choice([0.0, 0.5, 1.0, 2.0, 3.3]))
        got = exact_q_1d(x, WeightVector(w[:, None].astype(float)), tau).value
        want = float(O.oracle_q_1d(sup, pr, [float(v) for v in w], tau))
        assert abs(got - want) < 1e-12, (name, w.tolist(), tau)


def test_exact_q_2d_random_instances_match_oracle():
    rng = np.random.default_rng(7)
    for trial in range(20):
        n = int(rng.integers(2, 6))
        rows = rng.integers(-2, 3, size=(n, 2)).astype(float)
        rows[np.all(rows == 0, axis=1)] = [1.0, 0.0]
        tau = float(rng.choice([0.0, 1.0, 2.0]))
        got = exact_q_multid(RAD, WeightVector(rows), tau).value
        want = O.oracle_q_ball(*O.RADEMACHER, rows, tau)
        assert abs(got - want) < 1e-12, (rows.tolist(), tau)


def test_exact_q_3d_matches_oracle():
    rows = np.array(
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]]
    )
    for tau in (0.0, 1.0, 2.0):
        got = exact_q_multid(RAD, WeightVector(rows), tau).value
        want = O.oracle_q_ball(*O.RADEMACHER, rows, tau)
        assert abs(got - want) < 1e-12


def test_exact_q_capacity_error():
    # generic weights never merge, so the support doubles every step
    rng = np.random.default_rng(0)
    a = WeightVector(rng.normal(size=(40, 1)))
    with pytest.raises(CapacityError):
        exact_q_1d(RAD, a, 0.0, budget=10_000)


def test_window_is_closed_interval():
    # atoms at -1 and 1; a window of length exactly 2 captures both
    a = WeightVector([[1.0]])
    assert exact_q_1d(RAD, a, 2.0).value == 1.0
    assert exact_q_1d(RAD, a, 1.999).value == 0.5


def test_weighted_sum_distribution_merges():
    dist = weighted_sum_distribution(RAD, WeightVector([[1.0], [1.0]]))
    assert dist.n_atoms == 3
    assert abs(dist.total_mass - 1.0) < 1e-12


def test_mc_q_agrees_with_exact_and_is_seeded():
    a = WeightVector(np.ones((10, 1)))
    exact = exact_q_1d(RAD, a, 2.0).value
    est1 = mc_q(WeightedSum(RAD, a), 2.0, 50_000, 3)
    est2 = mc_q(WeightedSum(RAD, a), 2.0, 50_000, 3)
    assert est1.value == est2.value
    assert est1.stderr > 0.0
    assert abs(est1.value - exact) <= 5.0 * est1.stderr
    with pytest.raises(DomainError):
        mc_q(WeightedSum(RAD, a), 2.0, 10, 3)


def test_mc_q_multid_is_a_lower_bound_heuristic():
    a = WeightVector([[1.0, 0.0], [0.0, 1.0]])
    exact = exact_q_multid(RAD, a, 2.0).value
    est = mc_q(WeightedSum(RAD, a), 2.0, 20_000, 11)
    assert est.value <= exact + 3.0 * est.stderr


def test_esseen_dominates_exact_on_the_line():
    for w in ([1.0] * 6, [1.0, 2.0, 3.0, 4.0], [1.0, 1.0, 5.0]):
        a = WeightVector(np.asarray(w)[:, None])
        for tau in (0.5, 1.0, 2.0):
            exact = exact_q_1d(RAD, a, tau).value
            ess = esseen_upper_q(weighted_sum_char_fn(RAD, a), tau, 1).value
            assert ess >= exact - 1e-9, (w, tau, exact, ess)


def test_esseen_quadrature_identities():
    # constant integrand: the integral is the volume of the dual ball
    one_d = esseen_upper_q(lambda t: np.ones_like(t, dtype=complex), 2.0, 1)
    assert abs(one_d.value - 2.0 * 1.0) < 1e-9  # tau * (2/tau)
    two_d = esseen_upper_q(
        lambda ts: np.ones(len(ts), dtype=complex), 2.0, 2
    )
    assert abs(two_d.value - 4.0 * math.pi * 0.25) < 1e-6
    three_d = esseen_upper_q(
        lambda ts: np.ones(len(ts), dtype=complex), 2.0, 3
    )
    assert abs(three_d.value - 8.0 * (4.0 / 3.0) * math.pi * 0.125) < 1e-5
    with pytest.raises(DomainError):
        esseen_upper_q(lambda t: t, 0.0, 1)
    with pytest.raises(DomainError):
        esseen_upper_q(lambda t: t, 1.0, 4)


def test_weighted_sum_char_fn_values():
    a = WeightVector([[1.0], [2.0]])
    f = weighted_sum_char_fn(RAD, a)
    ts = np.array([0.0, 0.7, -1.3])
    want = np.cos(ts * 1.0) * np.cos(ts * 2.0)
    np.testing.assert_allclose(f(ts), want, atol=1e-14)
    assert np.all(np.abs(f(ts)) <= 1.0 + 1e-15)


def test_regularity_random_instances():
    rng = np.random.default_rng(19)
    for _ in range(50):
        k = int(rng.integers(2, 7))
        d = int(rng.integers(1, 3))
        atoms = rng.normal(size=(k, d)) * rng.uniform(0.5, 3.0)
        w = rng.random(k)
        f = DiscreteDistribution(atoms, w / w.sum())
        lam = float(rng.uniform(0.1, 2.0))
        mu = lam * float(rng.uniform(1.0, 4.0))
        rc = regularity_check(f, mu, lam)
        assert rc.holds
        assert rc.factor == (1.0 + math.floor(mu / lam)) ** d


def test_exact_q_of_distribution_guards():
    f = DiscreteDistribution([[0.0]], [0.5], normalized=False)
    with pytest.raises(DomainError):
        exact_q_of_distribution(f, 1.0)
    with pytest.raises(DomainError):
        exact_q_of_distribution(DiscreteDistribution([[0.0]], [1.0]), -1.0)
