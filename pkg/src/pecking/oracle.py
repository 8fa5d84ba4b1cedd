"""Exact small-instance oracles.

One-step enumeration of the competing model gives the exact next-state
distribution, the exact expected increment of Z, and its lower bound
4 n P(fight). The per-fight Z increment is checked as an integer
identity against the closed form 4n[(h_p* - h_p)(h_p - h_q) + 1].
A central-difference Jacobian validates the analytic linearization of
the mean-field map.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bonabeau import fight_probability
from .competing import (CompetingParams, CompetingState, fightable_edges,
                        is_terminal, step_competing, z_statistic,
                        zero_competing_state)
from .graphs import SiteGraph
from .seeds import fnv1a64

ENUMERATION_LIMIT = 12
PROB_SUM_TOL = 1e-12


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class Branch:
    """One raw outcome branch of a single step."""

    probability: float
    next_h: tuple[int, ...]
    fight: bool
    attacker: int = -1
    defender: int = -1
    winner: int = -1


@dataclass(frozen=True)
class StepDistribution:
    """Merged next-state distribution: distinct states with probabilities
    summing to 1, plus the marginal fight probability P(A_t)."""

    branches: tuple[tuple[tuple[int, ...], float], ...]
    p_fight: float

    def __post_init__(self):
        total = math.fsum(p for _, p in self.branches)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise OracleError(f"branch probabilities sum to {total!r}, not 1")
        states = [s for s, _ in self.branches]
        if len(set(states)) != len(states):
            raise OracleError("next states must be distinct")

    def probability_of(self, h: tuple[int, ...]) -> float:
        for s, p in self.branches:
            if s == h:
                return p
        return 0.0


def _raw_branches(state: CompetingState, g: SiteGraph, p: CompetingParams,
                  loser_delta: int = -1) -> list[Branch]:
    """Every (edge, role, outcome) branch with its exact probability.

    loser_delta is a negative-control hook: the model's update is -1;
    passing another value deliberately corrupts the update rule.
    """
    if state.n > ENUMERATION_LIMIT:
        raise OracleError(f"enumeration limited to n <= {ENUMERATION_LIMIT}")
    if g.edge_count == 0:
        raise OracleError("graph has no edges")
    eta_t = p.eta_schedule.eta_at(state.t)
    h = [int(x) for x in state.h]
    alive = [x > -p.ell for x in h]
    if p.selection == "all":
        pool = list(g.edges)
    else:
        pool = [(u, v) for u, v in g.edges if alive[u] and alive[v]]
        if not pool:
            return [Branch(1.0, tuple(h), False)]
    edge_p = 1.0 / len(pool)
    out: list[Branch] = []
    for u, v in pool:
        if not (alive[u] and alive[v]):
            out.append(Branch(edge_p, tuple(h), False))
            continue
        for attacker, defender in ((u, v), (v, u)):
            q = fight_probability(float(h[attacker]), float(h[defender]), eta_t)
            for winner, win_p in ((attacker, q), (defender, 1.0 - q)):
                loser = defender if winner == attacker else attacker
                nxt = list(h)
                nxt[winner] += 1
                nxt[loser] += loser_delta
                out.append(Branch(edge_p * 0.5 * win_p, tuple(nxt), True,
                                  attacker, defender, winner))
    return out


def enumerate_competing_step(state: CompetingState, g: SiteGraph,
                             p: CompetingParams) -> StepDistribution:
    """Exact next-state distribution of one step from `state`."""
    merged: dict[tuple[int, ...], list] = {}
    fight_terms = []
    for br in _raw_branches(state, g, p):
        merged.setdefault(br.next_h, []).append(br.probability)
        if br.fight:
            fight_terms.append(br.probability)
    branches = tuple(sorted((h, math.fsum(ps)) for h, ps in merged.items()))
    return StepDistribution(branches=branches, p_fight=math.fsum(fight_terms))


def expected_z_increment(state: CompetingState, g: SiteGraph,
                         p: CompetingParams) -> tuple[float, float]:
    """Exact (E[Z_{t+1} - Z_t], 4 n P(A_t)); the first dominates the second."""
    z0 = z_statistic(state)
    terms = []
    fight_terms = []
    for br in _raw_branches(state, g, p):
        dz = _z_of(br.next_h) - z0
        terms.append(br.probability * dz)
        if br.fight:
            fight_terms.append(br.probability)
    return math.fsum(terms), 4.0 * state.n * math.fsum(fight_terms)


def _z_of(h: tuple[int, ...]) -> int:
    n = len(h)
    total = sum(h)
    return 2 * n * sum(x * x for x in h) - 2 * total * total


def pathwise_z_identity(state: CompetingState, g: SiteGraph, p: CompetingParams,
                        loser_delta: int = -1) -> bool:
    """Check ΔZ = 4n[(h_p* - h_p)(h_p - h_q) + 1] on every fight branch.

    Exact integer comparison; p is the attacker, q the defender. With the
    model's update (loser_delta = -1) this holds on every branch; the
    negative-control hook makes it fail.
    """
    z0 = z_statistic(state)
    n = state.n
    h = [int(x) for x in state.h]
    for br in _raw_branches(state, g, p, loser_delta=loser_delta):
        if not br.fight:
            continue
        dz = _z_of(br.next_h) - z0
        hp_star = br.next_h[br.attacker]
        closed = 4 * n * ((hp_star - h[br.attacker]) * (h[br.attacker] - h[br.defender]) + 1)
        if dz != closed:
            return False
    return True


def all_fightable_pairs_equal(state: CompetingState, g: SiteGraph) -> bool:
    return all(state.h[u] == state.h[v] for u, v in fightable_edges(state, g))


def finite_difference_jacobian(map_fn, point, eps: float) -> np.ndarray:
    """Central-difference Jacobian of a vector map around `point`."""
    if not (1e-8 <= eps <= 1e-4):
        raise OracleError("eps must lie in [1e-8, 1e-4]")
    point = np.asarray(point, dtype=np.float64)
    n = point.size
    jac = np.empty((n, n), dtype=np.float64)
    for k in range(n):
        hi = point.copy()
        lo = point.copy()
        hi[k] += eps
        lo[k] -= eps
        jac[:, k] = (np.asarray(map_fn(hi)) - np.asarray(map_fn(lo))) / (2.0 * eps)
    return jac


def empirical_vs_exact(state: CompetingState, g: SiteGraph, p: CompetingParams,
                       samples: int, rng: np.random.Generator) -> float:
    """Total-variation distance between sampled and enumerated next states."""
    if samples < 10 ** 4:
        raise OracleError("samples must be >= 1e4")
    dist = enumerate_competing_step(state, g, p)
    counts: dict[tuple[int, ...], int] = {}
    for _ in range(samples):
        nxt, _ = step_competing(state, g, p, rng)
        key = tuple(int(x) for x in nxt.h)
        counts[key] = counts.get(key, 0) + 1
    keys = set(counts) | {s for s, _ in dist.branches}
    return 0.5 * sum(abs(counts.get(k, 0) / samples - dist.probability_of(k))
                     for k in keys)


def sample_reachable_states(g: SiteGraph, p: CompetingParams, count: int,
                            rng: np.random.Generator,
                            restart_cap: int = 10 ** 4) -> list[CompetingState]:
    """Engine-visited states: run trajectories from zero, snapshot after
    every fight (plus the start), restarting on termination.

    Sampling through the engine keeps every state consistent with the
    conservation and bound invariants; arbitrary integer vectors would not be.
    """
    if count < 1:
        raise OracleError("count must be >= 1")
    out: list[CompetingState] = []
    while len(out) < count:
        state = zero_competing_state(g.n, p.ell)
        out.append(state)
        for _ in range(restart_cap):
            if len(out) >= count:
                break
            if is_terminal(state, g):
                break
            state, event = step_competing(state, g, p, rng)
            if event is not None:
                out.append(state)
    return out[:count]


def state_hash(state: CompetingState, g: SiteGraph) -> str:
    """Short stable identifier for report rows."""
    text = f"{g.graph_id}|ell={state.ell}|t={state.t}|" + ",".join(str(int(x)) for x in state.h)
    return format(fnv1a64(text.encode("utf-8")), "016x")[:12]
