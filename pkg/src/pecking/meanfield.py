"""Mean-field recursion for the average power and the per-agent map.

The average power obeys h_{t+1} = (1-mu) h_t + drift_const with
drift_const = (1-mu)(1-F)/n, converging geometrically to
(1-mu)(1-F)/(mu n). The per-agent deterministic map underlying it is

    h_i* = (1 - d_i/|E|)(1-mu) h_i
           + (1-mu)/|E| * sum_{j in N_i} [h_i + (1+F) Q_ij - F]

whose aggregate satisfies sum h* = (1-mu)(sum h + 1 - F) for every h,
not only uniform ones. Its Jacobian at the uniform state is the matrix
built by spectral.build_jacobian.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bonabeau import fight_probability
from .graphs import SiteGraph


class MeanfieldError(ValueError):
    pass


@dataclass(frozen=True)
class MeanfieldConfig:
    mu: float
    F: float
    n: int

    def __post_init__(self):
        if not (0 < self.mu < 1):
            raise MeanfieldError("mu must lie in (0,1)")
        if not (self.F >= 1):
            raise MeanfieldError("F must be >= 1")
        if self.n < 1:
            raise MeanfieldError("n must be >= 1")

    @property
    def drift_const(self) -> float:
        # <= 0 for F >= 1, zero exactly at F = 1
        return (1.0 - self.mu) * (1.0 - self.F) / self.n


def mean_step(hbar: float, cfg: MeanfieldConfig) -> float:
    """One recursion step: (1-mu) hbar + drift_const."""
    return (1.0 - cfg.mu) * hbar + cfg.drift_const


def mean_limit(cfg: MeanfieldConfig) -> float:
    """Fixed point (1-mu)(1-F)/(mu n); the recursion converges to it at rate (1-mu)."""
    return (1.0 - cfg.mu) * (1.0 - cfg.F) / (cfg.mu * cfg.n)


def mean_closed_form(h0: float, t: int, cfg: MeanfieldConfig) -> float:
    """Value after t steps: (1-mu)^t h0 + drift_const (1 - (1-mu)^t)/mu."""
    if t < 0:
        raise MeanfieldError("t must be >= 0")
    decay = (1.0 - cfg.mu) ** t
    return decay * h0 + cfg.drift_const * (1.0 - decay) / cfg.mu


def meanfield_agent_map(h, g: SiteGraph, mu: float, eta: float, F: float) -> np.ndarray:
    """Apply the per-agent expected-update map once."""
    if g.edge_count < 1:
        raise MeanfieldError("graph needs at least one edge")
    if not (0 < mu < 1):
        raise MeanfieldError("mu must lie in (0,1)")
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (g.n,):
        raise MeanfieldError("h length must match vertex count")
    m = g.edge_count
    relax = 1.0 - mu
    out = np.empty(g.n, dtype=np.float64)
    for i in range(g.n):
        di = g.degree(i)
        acc = 0.0
        for j in g.adjacency[i]:
            q = fight_probability(float(h[i]), float(h[j]), eta)
            acc += h[i] + (1.0 + F) * q - F
        out[i] = (1.0 - di / m) * relax * h[i] + relax * acc / m
    return out
