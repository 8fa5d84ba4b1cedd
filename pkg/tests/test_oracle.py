"""One-step enumeration oracle: exact distributions, Z bookkeeping, and
the finite-difference cross-check of the analytic Jacobian."""
import math

import numpy as np
import pytest

from pecking.competing import (CompetingParams, CompetingState, z_statistic,
                               zero_competing_state)
from pecking.graphs import build_family, random_connected_graph
from pecking.meanfield import meanfield_agent_map
from pecking.oracle import (OracleError, all_fightable_pairs_equal,
                            empirical_vs_exact, enumerate_competing_step,
                            expected_z_increment, finite_difference_jacobian,
                            pathwise_z_identity, sample_reachable_states,
                            state_hash)
from pecking.spectral import build_jacobian

from conftest import make_rng


def state_of(h, ell, t=0):
    return CompetingState(np.array(h, dtype=np.int64), ell, t)


def test_triangle_zero_state_enumeration():
    g = build_family("complete", 3)
    s = zero_competing_state(3, 1)
    dist = enumerate_competing_step(s, g, CompetingParams(ell=1))
    # 3 edges x 2 outcomes, all distinct next states, each 1/6
    assert len(dist.branches) == 6
    assert dist.p_fight == pytest.approx(1.0, abs=1e-15)
    for _, prob in dist.branches:
        assert prob == pytest.approx(1 / 6, abs=1e-15)


def test_single_edge_absorbed_is_pure_noop():
    g = build_family("path", 2)
    dist = enumerate_competing_step(state_of([1, -1], 1), g, CompetingParams(ell=1))
    assert dist.p_fight == 0.0
    assert dist.branches == (((1, -1), 1.0),)


def test_path3_one_absorbed_endpoint():
    g = build_family("path", 3)
    dist = enumerate_competing_step(state_of([-1, 1, 0], 1), g, CompetingParams(ell=1))
    # edge (0,1) is a no-op with probability 1/2; edge (1,2) fights
    assert dist.p_fight == pytest.approx(0.5, abs=1e-15)
    assert dist.probability_of((-1, 1, 0)) == pytest.approx(0.5, abs=1e-15)


def test_probabilities_follow_fermi_weights():
    g = build_family("path", 2)
    s = state_of([1, -1], 2)
    dist = enumerate_competing_step(s, g, CompetingParams(ell=2))
    q = 1 / (1 + math.exp(-2.0))     # eta=1, gap 2
    # agent 0 wins via either role assignment: (1/2) q + (1/2) q
    assert dist.probability_of((2, -2)) == pytest.approx(q, abs=1e-12)
    assert dist.probability_of((0, 0)) == pytest.approx(1 - q, abs=1e-12)


def test_fightable_mode_enumeration():
    g = build_family("path", 3)
    p = CompetingParams(ell=1, selection="fightable")
    dist = enumerate_competing_step(state_of([-1, 1, 0], 1), g, p)
    # only edge (1,2) is in the pool, so a fight is certain
    assert dist.p_fight == pytest.approx(1.0, abs=1e-15)


def test_expected_z_equality_at_equal_powers():
    g = build_family("complete", 4)
    s = zero_competing_state(4, 2)
    e_dz, bound = expected_z_increment(s, g, CompetingParams(ell=2))
    assert bound == pytest.approx(4 * 4, abs=1e-15)    # P(fight) = 1
    assert e_dz == pytest.approx(bound, abs=1e-12)
    assert all_fightable_pairs_equal(s, g)


def test_expected_z_strict_when_powers_differ():
    g = build_family("path", 2)
    s = state_of([1, -1], 3)
    e_dz, bound = expected_z_increment(s, g, CompetingParams(ell=3))
    assert not all_fightable_pairs_equal(s, g)
    assert e_dz > bound + 1e-6


def test_expected_z_via_independent_fraction_arithmetic():
    """Recompute E[dZ] for a 2-agent state with exact rationals built from
    the single fight probability, then compare."""
    g = build_family("path", 2)
    s = state_of([2, -2], 3)
    p = CompetingParams(ell=3)
    q = 1 / (1 + math.exp(-4.0))
    z0 = z_statistic(s)
    up = z_statistic(state_of([3, -3], 3)) - z0      # stronger wins
    down = z_statistic(state_of([1, -1], 3)) - z0
    expect = q * up + (1 - q) * down
    e_dz, bound = expected_z_increment(s, g, p)
    assert e_dz == pytest.approx(expect, rel=1e-12)
    assert bound == pytest.approx(8.0, abs=1e-15)


def test_pathwise_identity_on_reachable_states():
    rng = make_rng(61)
    g = build_family("star", 5)
    p = CompetingParams(ell=2)
    for s in sample_reachable_states(g, p, 200, rng):
        assert pathwise_z_identity(s, g, p)


def test_negative_control_breaks_identity():
    """A 'loser loses 2' variant violates the quadratic bookkeeping, and
    the checker must notice."""
    rng = make_rng(62)
    g = build_family("complete", 4)
    p = CompetingParams(ell=3)
    broken = 0
    for s in sample_reachable_states(g, p, 50, rng):
        if not pathwise_z_identity(s, g, p, loser_delta=-2):
            broken += 1
    assert broken > 0


def test_expected_z_margin_over_many_reachable_states():
    rng = make_rng(63)
    checked = 0
    for _ in range(6):
        n = int(rng.integers(3, 9))
        g = random_connected_graph(n, int(rng.integers(0, n)), rng)
        p = CompetingParams(ell=int(rng.integers(1, 4)))
        for s in sample_reachable_states(g, p, 60, rng):
            e_dz, bound = expected_z_increment(s, g, p)
            assert e_dz >= bound - 1e-12
            if all_fightable_pairs_equal(s, g):
                assert abs(e_dz - bound) < 1e-12
            else:
                assert e_dz > bound
            checked += 1
    assert checked == 360


def test_branch_probabilities_sum_to_one(rng):
    g = random_connected_graph(6, 3, rng)
    p = CompetingParams(ell=2)
    for s in sample_reachable_states(g, p, 40, rng):
        dist = enumerate_competing_step(s, g, p)
        total = math.fsum(prob for _, prob in dist.branches)
        assert abs(total - 1.0) < 1e-12


def test_sample_reachable_states_properties(rng):
    g = build_family("path", 4)
    p = CompetingParams(ell=1)
    states = sample_reachable_states(g, p, 100, rng)
    assert len(states) == 100
    # every snapshot respects conservation and the absorbing floor
    for s in states:
        assert int(s.h.sum()) == 0
        assert int(s.h.min()) >= -1


def test_empirical_distribution_matches_enumeration(rng):
    g = build_family("complete", 3)
    p = CompetingParams(ell=2)
    s = state_of([1, 0, -1], 2)
    tv = empirical_vs_exact(s, g, p, 10 ** 4, rng)
    assert tv < 5 / math.sqrt(10 ** 4)
    with pytest.raises(OracleError):
        empirical_vs_exact(s, g, p, 100, rng)


def test_enumeration_size_guard():
    g = build_family("complete", 13)
    with pytest.raises(OracleError):
        enumerate_competing_step(zero_competing_state(13, 1), g,
                                 CompetingParams(ell=1))


def test_state_hash_is_stable_and_sensitive():
    g = build_family("path", 3)
    a = state_hash(state_of([0, 0, 0], 1), g)
    b = state_hash(state_of([1, -1, 0], 1), g)
    assert len(a) == 12 and a != b
    assert a == state_hash(state_of([0, 0, 0], 1), g)


def test_finite_difference_jacobian_matches_analytic():
    rng = make_rng(64)
    for _ in range(8):
        n = int(rng.integers(3, 12))
        g = random_connected_graph(n, int(rng.integers(0, 5)), rng)
        mu = float(rng.uniform(0.1, 0.9))
        eta = float(rng.uniform(0.5, 2.0))
        big_f = float(rng.uniform(1.0, 3.0))
        fd = finite_difference_jacobian(
            lambda h: meanfield_agent_map(h, g, mu, eta, big_f),
            np.zeros(n), 1e-5)
        assert np.max(np.abs(fd - build_jacobian(g, mu, eta, big_f))) < 1e-6


def test_finite_difference_eps_guard():
    with pytest.raises(OracleError):
        finite_difference_jacobian(lambda h: h, np.zeros(3), 1e-12)
    with pytest.raises(OracleError):
        finite_difference_jacobian(lambda h: h, np.zeros(3), 1e-2)
