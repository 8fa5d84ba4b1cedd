import math

import numpy as np
import pytest

from pecking.bonabeau import fight_probability
from pecking.graphs import build_family, random_connected_graph
from pecking.meanfield import (MeanfieldConfig, MeanfieldError,
                               mean_closed_form, mean_limit, mean_step,
                               meanfield_agent_map)

from conftest import make_rng


def test_config_validation():
    MeanfieldConfig(mu=0.3, F=1.0, n=5)
    with pytest.raises(MeanfieldError):
        MeanfieldConfig(mu=0.0, F=1.0, n=5)
    with pytest.raises(MeanfieldError):
        MeanfieldConfig(mu=0.3, F=0.5, n=5)
    with pytest.raises(MeanfieldError):
        MeanfieldConfig(mu=0.3, F=1.0, n=0)


def test_mean_step_and_drift():
    cfg = MeanfieldConfig(mu=0.2, F=3.0, n=4)
    # one step from 0: (1-mu)(1-F)/n = 0.8 * (-2) / 4
    assert mean_step(0.0, cfg) == pytest.approx(-0.4, abs=1e-15)
    assert cfg.drift_const == pytest.approx(-0.4, abs=1e-15)
    # F=1 is drift-free
    assert mean_step(0.0, MeanfieldConfig(mu=0.2, F=1.0, n=4)) == 0.0


def test_closed_form_matches_iteration():
    cfg = MeanfieldConfig(mu=0.35, F=2.0, n=7)
    hbar = 0.6
    for t in range(1, 60):
        hbar = mean_step(hbar, cfg)
        assert mean_closed_form(0.6, t, cfg) == pytest.approx(hbar, abs=1e-13)


def test_limit_is_the_fixed_point():
    for mu, big_f, n in ((0.1, 1.5, 3), (0.5, 3.0, 10), (0.9, 1.0, 2)):
        cfg = MeanfieldConfig(mu=mu, F=big_f, n=n)
        lim = mean_limit(cfg)
        assert mean_step(lim, cfg) == pytest.approx(lim, abs=1e-12)
        assert lim == pytest.approx((1 - mu) * (1 - big_f) / (mu * n), abs=1e-15)


def test_iteration_converges_to_limit():
    cfg = MeanfieldConfig(mu=0.25, F=2.5, n=5)
    hbar = 1.0
    for _ in range(int(200 / cfg.mu)):
        hbar = mean_step(hbar, cfg)
    assert abs(hbar - mean_limit(cfg)) < 1e-10


def test_agent_map_at_uniform_state():
    """At h = c1 every Q is 1/2 and the map has the hand-computable form
    (1-mu)(c + d_i (1-F) / (2|E|))."""
    g = build_family("path", 3)
    mu, eta, big_f, c = 0.2, 1.3, 2.0, 0.7
    out = meanfield_agent_map(np.full(3, c), g, mu, eta, big_f)
    for i, d in enumerate((1, 2, 1)):
        assert out[i] == pytest.approx(0.8 * (c + d * (1 - big_f) / 4), abs=1e-14)


def test_agent_map_against_direct_formula(rng):
    g = random_connected_graph(9, 4, rng)
    mu, eta, big_f = 0.3, 0.9, 1.5
    h = rng.normal(size=9)
    out = meanfield_agent_map(h, g, mu, eta, big_f)
    m = g.edge_count
    for i in range(9):
        acc = h[i]
        for j in g.adjacency[i]:
            q = fight_probability(h[i], h[j], eta)
            acc += ((1 + big_f) * q - big_f) / m
        assert out[i] == pytest.approx((1 - mu) * acc, abs=1e-12)


def test_aggregate_identity_random_vectors():
    rng = make_rng(51)
    for _ in range(20):
        g = random_connected_graph(int(rng.integers(2, 25)), 3, rng)
        mu = float(rng.uniform(0.05, 0.95))
        big_f = float(rng.uniform(1.0, 4.0))
        for _ in range(5):
            h = rng.uniform(-2, 2, size=g.n)
            mapped = meanfield_agent_map(h, g, mu, 1.1, big_f)
            lhs = math.fsum(mapped.tolist())
            rhs = (1 - mu) * (math.fsum(h.tolist()) + 1 - big_f)
            assert abs(lhs - rhs) < 1e-12


def test_agent_map_input_validation():
    g = build_family("path", 3)
    with pytest.raises(MeanfieldError):
        meanfield_agent_map(np.zeros(4), g, 0.3, 1.0, 1.0)
    with pytest.raises(MeanfieldError):
        meanfield_agent_map(np.zeros(3), g, 1.5, 1.0, 1.0)
