"""Stochastic dominance-hierarchy dynamics on site graphs.

Two modes. Fully occupied: every vertex holds one agent; each step picks
an edge uniformly, assigns attacker/defender by fair coin, resolves the
fight by the Fermi probability, then multiplies every agent's power by
(1 - mu). Lattice: agents at density rho move on a square lattice and
fight the occupant when stepping onto an occupied site.

Per-step functions are the reference semantics and draw lazily from the
caller's Generator. ``run_fully_occupied`` is the fast path: a compiled
kernel consuming block-drawn uniforms (see seeds module).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import csvout, seeds
from ._kernels import bonabeau_chunk
from .graphs import SiteGraph, build_family


class EngineError(ValueError):
    pass


@dataclass(frozen=True)
class BonabeauParams:
    """Model constants: Fermi steepness eta > 0, loss F >= 1, relaxation mu in (0,1)."""

    eta: float
    F: float
    mu: float

    def __post_init__(self):
        if not (self.eta > 0):
            raise EngineError("eta must be > 0")
        if not (self.F >= 1):
            raise EngineError("F must be >= 1")
        if not (0 < self.mu < 1):
            raise EngineError("mu must lie in (0,1)")


@dataclass(frozen=True)
class PowerState:
    """Power vector h (one entry per agent) and step counter t."""

    h: np.ndarray
    t: int = 0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.float64)
        object.__setattr__(self, "h", h)
        if h.ndim != 1 or h.size < 1:
            raise EngineError("h must be a nonempty vector")
        if not np.all(np.isfinite(h)):
            raise EngineError("h entries must be finite")
        if self.t < 0:
            raise EngineError("t must be >= 0")

    @property
    def n(self) -> int:
        return self.h.size

    @property
    def mean(self) -> float:
        return float(self.h.mean())


@dataclass(frozen=True)
class FightEvent:
    t: int
    attacker: int
    defender: int
    attacker_won: bool

    def __post_init__(self):
        if self.attacker == self.defender:
            raise EngineError("attacker and defender must differ")

    @property
    def winner(self) -> int:
        return self.attacker if self.attacker_won else self.defender

    @property
    def loser(self) -> int:
        return self.defender if self.attacker_won else self.attacker


def zero_state(n: int) -> PowerState:
    """The egalitarian start: everyone at power 0."""
    return PowerState(np.zeros(n), 0)


def sigma(state: PowerState) -> float:
    """Population standard deviation sqrt((1/n) sum (h_i - hbar)^2)."""
    return float(np.asarray(state.h, dtype=np.float64).std())


def fight_probability(hi: float, hj: float, eta: float) -> float:
    """Fermi win probability Q_ij = 1/(1 + exp(-eta (h_i - h_j))).

    Evaluated on the overflow-safe branch so the result is monotone in
    h_i - h_j and never NaN; Q_ij + Q_ji = 1 to machine precision.
    """
    if not (eta > 0):
        raise EngineError("eta must be > 0")
    if not (math.isfinite(hi) and math.isfinite(hj)):
        raise EngineError("powers must be finite")
    x = eta * (hi - hj)
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def step_fully_occupied(state: PowerState, g: SiteGraph, p: BonabeauParams,
                        rng: np.random.Generator) -> tuple[PowerState, FightEvent]:
    """One selection event: uniform edge, fair-coin roles, fight, relax all.

    Draw order from rng: edge index, role coin, win uniform.
    """
    m = g.edge_count
    if m == 0:
        raise EngineError("graph has no edges")
    if g.n != state.n:
        raise EngineError("state length does not match vertex count")
    u, v = g.edges[int(rng.integers(0, m))]
    attacker, defender = (u, v) if int(rng.integers(0, 2)) == 0 else (v, u)
    q = fight_probability(state.h[attacker], state.h[defender], p.eta)
    attacker_won = bool(rng.random() < q)
    h = state.h.copy()
    w = attacker if attacker_won else defender
    l = defender if attacker_won else attacker
    h[w] += 1.0
    h[l] -= p.F
    h *= 1.0 - p.mu
    return (PowerState(h, state.t + 1),
            FightEvent(state.t, attacker, defender, attacker_won))


def relax_only_step(state: PowerState, p: BonabeauParams) -> PowerState:
    """Test hook: relaxation with fights disabled, h(t+1) = (1-mu) h(t)."""
    return PowerState(state.h * (1.0 - p.mu), state.t + 1)


# ---------------------------------------------------------------------------
# lattice mode

@dataclass(frozen=True)
class LatticeWorld:
    """Agents on a square lattice: occupant per site (-1 = vacant), site per agent."""

    lattice: SiteGraph
    occupant: np.ndarray
    position: np.ndarray
    rho: float

    def __post_init__(self):
        occ = np.asarray(self.occupant, dtype=np.int64)
        pos = np.asarray(self.position, dtype=np.int64)
        object.__setattr__(self, "occupant", occ)
        object.__setattr__(self, "position", pos)
        if pos.size < 1:
            raise EngineError("at least one agent required")
        if occ.size != self.lattice.n:
            raise EngineError("occupant array must cover every site")
        filled = occ[occ >= 0]
        if len(set(filled.tolist())) != filled.size or filled.size != pos.size:
            raise EngineError("occupant/position must be mutually inverse")
        for agent, site in enumerate(pos.tolist()):
            if occ[site] != agent:
                raise EngineError("occupant/position must be mutually inverse")

    @property
    def agent_count(self) -> int:
        return int(self.position.size)


def make_lattice_world(side: int, rho: float, rng: np.random.Generator,
                       boundary: str = "periodic") -> LatticeWorld:
    """Place round(rho * side^2) agents (at least 1) on distinct sites."""
    if not (0 < rho <= 1):
        raise EngineError("rho must lie in (0,1]")
    lattice = build_family("lattice2d", side * side, boundary)
    k = max(1, int(round(rho * side * side)))
    sites = rng.permutation(lattice.n)[:k]
    occupant = np.full(lattice.n, -1, dtype=np.int64)
    position = np.empty(k, dtype=np.int64)
    for agent, site in enumerate(sites.tolist()):
        occupant[site] = agent
        position[agent] = site
    return LatticeWorld(lattice=lattice, occupant=occupant, position=position, rho=rho)


def step_lattice(world: LatticeWorld, state: PowerState, p: BonabeauParams,
                 rng: np.random.Generator, relax_on_move: bool = True
                 ) -> tuple[LatticeWorld, PowerState, FightEvent | None]:
    """One lattice event: uniform agent, uniform neighboring site.

    Vacant target: the agent moves, no fight. Occupied target: the mover
    attacks the occupant; on a win they switch sites. Relaxation applies
    every step unless relax_on_move is False, which restricts it to
    fight steps (sensitivity hook; the model text applies it always).
    """
    k = world.agent_count
    if state.n != k:
        raise EngineError("state length does not match agent count")
    a = int(rng.integers(0, k))
    site = int(world.position[a])
    nbrs = world.lattice.adjacency[site]
    target = nbrs[int(rng.integers(0, len(nbrs)))]
    occ_t = int(world.occupant[target])
    relax = 1.0 - p.mu
    if occ_t < 0:
        occupant = world.occupant.copy()
        position = world.position.copy()
        occupant[site] = -1
        occupant[target] = a
        position[a] = target
        h = state.h * relax if relax_on_move else state.h.copy()
        return (LatticeWorld(world.lattice, occupant, position, world.rho),
                PowerState(h, state.t + 1), None)
    b = occ_t
    q = fight_probability(state.h[a], state.h[b], p.eta)
    attacker_won = bool(rng.random() < q)
    h = state.h.copy()
    if attacker_won:
        h[a] += 1.0
        h[b] -= p.F
        occupant = world.occupant.copy()
        position = world.position.copy()
        occupant[site], occupant[target] = b, a
        position[a], position[b] = target, site
        new_world = LatticeWorld(world.lattice, occupant, position, world.rho)
    else:
        h[b] += 1.0
        h[a] -= p.F
        new_world = world
    h *= relax
    return new_world, PowerState(h, state.t + 1), FightEvent(state.t, a, b, attacker_won)


def make_full_stepper(g: SiteGraph, p: BonabeauParams):
    def stepper(state, rng):
        return step_fully_occupied(state, g, p, rng)
    return stepper


def make_lattice_stepper(world: LatticeWorld, p: BonabeauParams,
                         relax_on_move: bool = True):
    box = [world]

    def stepper(state, rng):
        box[0], new_state, event = step_lattice(box[0], state, p, rng, relax_on_move)
        return new_state, event

    stepper.world = box
    return stepper


# ---------------------------------------------------------------------------
# trajectory drivers

@dataclass(frozen=True)
class Monitors:
    """Sampling plan: record sigma/mean/fight-rate at post-step indices s
    with s % stride == 0 and s > window_start."""

    stride: int = 100
    window_start: int = 0

    def __post_init__(self):
        if self.stride < 1:
            raise EngineError("stride must be >= 1")
        if self.window_start < 0:
            raise EngineError("window_start must be >= 0")


@dataclass(frozen=True)
class TrajectoryStats:
    final_state: PowerState
    sample_t: np.ndarray
    sample_sigma: np.ndarray
    sample_mean: np.ndarray
    sample_fight_rate: np.ndarray
    steps: int
    fights: int
    events: tuple[FightEvent, ...] = field(default=())
    max_conservation_resid: float = 0.0

    @property
    def time_avg_sigma(self) -> float:
        if self.sample_sigma.size == 0:
            return float("nan")
        return float(self.sample_sigma.mean())

    @property
    def sd_sigma(self) -> float:
        if self.sample_sigma.size == 0:
            return float("nan")
        return float(self.sample_sigma.std())

    @property
    def fight_rate(self) -> float:
        return self.fights / self.steps if self.steps else 0.0


def run(initial: PowerState, stepper, steps: int, rng: np.random.Generator,
        monitors: Monitors = Monitors(), collect_events: bool = False) -> TrajectoryStats:
    """Apply `stepper` repeatedly, sampling monitors at the configured stride.

    steps=0 returns the initial state with empty samples. Deterministic
    given the rng seed.
    """
    if steps < 0:
        raise EngineError("steps must be >= 0")
    state = initial
    fights = 0
    ts, sigs, means, rates = [], [], [], []
    events: list[FightEvent] = []
    for _ in range(steps):
        state, event = stepper(state, rng)
        if event is not None:
            fights += 1
            if collect_events:
                events.append(event)
        s = state.t
        if s > monitors.window_start and s % monitors.stride == 0:
            ts.append(s)
            sigs.append(sigma(state))
            means.append(state.mean)
            rates.append(fights / (s - initial.t))
    return TrajectoryStats(
        final_state=state,
        sample_t=np.asarray(ts, dtype=np.int64),
        sample_sigma=np.asarray(sigs, dtype=np.float64),
        sample_mean=np.asarray(means, dtype=np.float64),
        sample_fight_rate=np.asarray(rates, dtype=np.float64),
        steps=steps,
        fights=fights,
        events=tuple(events),
    )


def run_fully_occupied(g: SiteGraph, p: BonabeauParams, steps: int,
                       seed: int | None = None, rng: np.random.Generator | None = None,
                       measure_window: int | None = None, stride: int = 100,
                       check_conservation: bool = False) -> TrajectoryStats:
    """Fast fully-occupied trajectory from the egalitarian start.

    Consumes block-drawn uniforms chunk by chunk (seeds.CHUNK per block)
    so results are reproducible from the seed alone regardless of chunk
    boundaries or thread count. measure_window defaults to the whole run.
    """
    if g.edge_count == 0:
        raise EngineError("graph has no edges")
    if steps < 0:
        raise EngineError("steps must be >= 0")
    if rng is None:
        if seed is None:
            raise EngineError("need seed or rng")
        rng = seeds.generator(seed)
    window = steps if measure_window is None else int(measure_window)
    if not (0 <= window <= steps):
        raise EngineError("measure_window must lie in [0, steps]")
    window_start = steps - window
    eu, ev = g.edge_arrays()
    h = np.zeros(g.n, dtype=np.float64)
    cap = window // stride + 1
    sig_out = np.empty(cap, dtype=np.float64)
    mean_out = np.empty(cap, dtype=np.float64)
    t_out = np.empty(cap, dtype=np.int64)
    n_samples = 0
    max_resid = 0.0
    done = 0
    while done < steps:
        k = min(seeds.CHUNK, steps - done)
        u_edge, u_coin, u_win = seeds.uniform_blocks(rng, k)
        n_samples, resid = bonabeau_chunk(
            eu, ev, h, p.eta, p.F, p.mu, done, u_edge, u_coin, u_win,
            window_start, stride, sig_out, mean_out, t_out, n_samples,
            check_conservation)
        max_resid = max(max_resid, resid)
        done += k
    ts = t_out[:n_samples].copy()
    return TrajectoryStats(
        final_state=PowerState(h, steps),
        sample_t=ts,
        sample_sigma=sig_out[:n_samples].copy(),
        sample_mean=mean_out[:n_samples].copy(),
        sample_fight_rate=np.ones(n_samples, dtype=np.float64),
        steps=steps,
        fights=steps,
        max_conservation_resid=max_resid,
    )


def fight_log_csv(events) -> str:
    """FightLog document: t, attacker, defender, winner."""
    rows = [[e.t, e.attacker, e.defender, e.winner] for e in events]
    return csvout.document(["t", "attacker", "defender", "winner"], rows)


def trajectory_csv(stats: TrajectoryStats) -> str:
    """Trajectory document: t, sigma, mean_power, fight_rate."""
    rows = [[int(t), float(s), float(m), float(r)]
            for t, s, m, r in zip(stats.sample_t, stats.sample_sigma,
                                  stats.sample_mean, stats.sample_fight_rate)]
    return csvout.document(["t", "sigma", "mean_power", "fight_rate"], rows)
