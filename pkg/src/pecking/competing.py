"""The terminating competing model: F = 1, no relaxation, integer powers.

Powers start at 0 and move by +1/-1 per fight, so the total is conserved
at 0 exactly. An agent whose power reaches the absorbing value -ell is
out of every future fight. The Fermi steepness may vary with time as a
piecewise-constant schedule eta_t. The process is terminal once the
non-absorbed agents form an independent set: no edge can ever host a
fight again.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import seeds
from ._kernels import competing_chunk
from .bonabeau import EngineError, FightEvent, fight_probability
from .graphs import SiteGraph

SELECTION_MODES = ("all", "fightable")


@dataclass(frozen=True)
class EtaSchedule:
    """Piecewise-constant t -> eta_t; segment i applies for t >= starts[i]."""

    starts: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.starts) != len(self.values) or not self.starts:
            raise EngineError("schedule needs matching nonempty starts/values")
        if self.starts[0] != 0:
            raise EngineError("schedule must start at t=0")
        if any(b <= a for a, b in zip(self.starts, self.starts[1:])):
            raise EngineError("schedule starts must be strictly increasing")
        if any(not (v > 0) for v in self.values):
            raise EngineError("eta_t must be > 0 for all segments")

    @classmethod
    def constant(cls, eta: float) -> "EtaSchedule":
        return cls((0,), (float(eta),))

    @classmethod
    def from_table(cls, table) -> "EtaSchedule":
        rows = sorted((int(t), float(v)) for t, v in table)
        return cls(tuple(t for t, _ in rows), tuple(v for _, v in rows))

    def eta_at(self, t: int) -> float:
        i = 0
        while i + 1 < len(self.starts) and self.starts[i + 1] <= t:
            i += 1
        return self.values[i]

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.asarray(self.starts, dtype=np.int64),
                np.asarray(self.values, dtype=np.float64))


@dataclass(frozen=True)
class CompetingParams:
    """Absorbing depth ell >= 1, eta schedule, and edge-selection mode.

    selection="all" picks among all edges (absorbed endpoints make the
    step a no-op); "fightable" restricts the pick to edges whose both
    endpoints are still in the game.
    """

    ell: int
    eta_schedule: EtaSchedule = field(default_factory=lambda: EtaSchedule.constant(1.0))
    selection: str = "all"

    def __post_init__(self):
        if not (isinstance(self.ell, int) and self.ell >= 1):
            raise EngineError("ell must be a positive integer")
        if self.selection not in SELECTION_MODES:
            raise EngineError(f"selection must be one of {SELECTION_MODES}")


@dataclass(frozen=True)
class CompetingState:
    """Integer power vector with its absorbing depth and step counter.

    Enforces the reachable-state invariants: sum h = 0 and
    -ell <= h_i <= (n-1) ell.
    """

    h: np.ndarray
    ell: int
    t: int = 0

    def __post_init__(self):
        h = np.asarray(self.h)
        if not np.issubdtype(h.dtype, np.integer):
            raise EngineError("competing powers must be integers")
        h = h.astype(np.int64)
        object.__setattr__(self, "h", h)
        if h.ndim != 1 or h.size < 1:
            raise EngineError("h must be a nonempty vector")
        if self.ell < 1:
            raise EngineError("ell must be >= 1")
        if int(h.sum()) != 0:
            raise EngineError("total power must be 0 (conservation)")
        n = h.size
        if h.min() < -self.ell or h.max() > (n - 1) * self.ell:
            raise EngineError("powers must lie in [-ell, (n-1) ell]")
        if self.t < 0:
            raise EngineError("t must be >= 0")

    @property
    def n(self) -> int:
        return self.h.size

    @property
    def absorbed(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.h == -self.ell).tolist())

    def alive_mask(self) -> np.ndarray:
        return self.h > -self.ell


def zero_competing_state(n: int, ell: int) -> CompetingState:
    return CompetingState(np.zeros(n, dtype=np.int64), ell, 0)


def sigma(state: CompetingState) -> float:
    return float(state.h.astype(np.float64).std())


def z_statistic(state: CompetingState) -> int:
    """Z = sum over ordered pairs (i,j) of (h_i - h_j)^2, exact integer.

    Expands to 2 n sum(h^2) - 2 (sum h)^2.
    """
    hs = [int(x) for x in state.h]
    n = len(hs)
    total = sum(hs)
    return 2 * n * sum(x * x for x in hs) - 2 * total * total


def fightable_edges(state: CompetingState, g: SiteGraph) -> list[tuple[int, int]]:
    alive = state.alive_mask()
    return [(u, v) for u, v in g.edges if alive[u] and alive[v]]


def is_terminal(state: CompetingState, g: SiteGraph) -> bool:
    """True iff the non-absorbed agents form an independent set in g."""
    return not fightable_edges(state, g)


def step_competing(state: CompetingState, g: SiteGraph, p: CompetingParams,
                   rng: np.random.Generator) -> tuple[CompetingState, FightEvent | None]:
    """One selection event under the configured edge-selection mode.

    "all": uniform edge; absorbed endpoint makes a no-op step (t still
    increments, no event). "fightable": uniform among fightable edges;
    with none left the step is a draw-free no-op.
    """
    if g.edge_count == 0:
        raise EngineError("graph has no edges")
    if g.n != state.n:
        raise EngineError("state length does not match vertex count")
    if p.ell != state.ell:
        raise EngineError("params.ell does not match state.ell")
    if p.selection == "all":
        u, v = g.edges[int(rng.integers(0, g.edge_count))]
        if state.h[u] == -p.ell or state.h[v] == -p.ell:
            return CompetingState(state.h, state.ell, state.t + 1), None
    else:
        pool = fightable_edges(state, g)
        if not pool:
            return CompetingState(state.h, state.ell, state.t + 1), None
        u, v = pool[int(rng.integers(0, len(pool)))]
    attacker, defender = (u, v) if int(rng.integers(0, 2)) == 0 else (v, u)
    eta_t = p.eta_schedule.eta_at(state.t)
    q = fight_probability(float(state.h[attacker]), float(state.h[defender]), eta_t)
    attacker_won = bool(rng.random() < q)
    h = state.h.copy()
    w = attacker if attacker_won else defender
    l = defender if attacker_won else attacker
    h[w] += 1
    h[l] -= 1
    return (CompetingState(h, state.ell, state.t + 1),
            FightEvent(state.t, attacker, defender, attacker_won))


@dataclass(frozen=True)
class CompetingRunResult:
    final_state: CompetingState
    steps: int
    fights: int
    z_trace: np.ndarray
    z_t: np.ndarray
    terminal: bool
    exact_invariants_ok: bool

    @property
    def final_z(self) -> int:
        return int(self.z_trace[-1]) if self.z_trace.size else 0

    @property
    def final_sigma(self) -> float:
        return sigma(self.final_state)


def run_to_termination(g: SiteGraph, p: CompetingParams,
                       rng: np.random.Generator | None = None,
                       step_cap: int = 10 ** 7,
                       seed: int | None = None) -> CompetingRunResult:
    """Iterate from the all-zero start until terminal or step_cap.

    Cap-hit is reported honestly via the terminal flag. Z is recorded at
    every fight. exact_invariants_ok confirms integer conservation
    (sum h == 0) and the h >= -ell floor held after every fight.
    """
    if step_cap < 1:
        raise EngineError("step_cap must be >= 1")
    if g.edge_count == 0:
        raise EngineError("graph has no edges")
    if rng is None:
        if seed is None:
            raise EngineError("need seed or rng")
        rng = seeds.generator(seed)
    eu, ev = g.edge_arrays()
    starts, values = p.eta_schedule.as_arrays()
    h = np.zeros(g.n, dtype=np.int64)
    state0 = CompetingState(h.copy(), p.ell, 0)
    if is_terminal(state0, g):
        return CompetingRunResult(state0, 0, 0, np.empty(0, np.int64),
                                  np.empty(0, np.int64), True, True)
    fightable_only = p.selection == "fightable"
    z = 0
    fights = 0
    done = 0
    terminal = False
    ok_all = True
    traces: list[np.ndarray] = []
    trace_ts: list[np.ndarray] = []
    while done < step_cap and not terminal:
        k = min(seeds.CHUNK, step_cap - done)
        u_edge, u_coin, u_win = seeds.uniform_blocks(rng, k)
        z_out = np.empty(k, dtype=np.int64)
        zt_out = np.empty(k, dtype=np.int64)
        steps_done, fights, z, terminal, ok, nz = competing_chunk(
            eu, ev, h, p.ell, starts, values, fightable_only,
            done, u_edge, u_coin, u_win, z, fights, z_out, zt_out)
        ok_all = ok_all and bool(ok)
        done += steps_done
        if nz:
            traces.append(z_out[:nz].copy())
            trace_ts.append(zt_out[:nz].copy())
    z_trace = np.concatenate(traces) if traces else np.empty(0, np.int64)
    z_t = np.concatenate(trace_ts) if trace_ts else np.empty(0, np.int64)
    final = CompetingState(h.copy(), p.ell, done)
    return CompetingRunResult(final, done, fights, z_trace, z_t, bool(terminal), ok_all)
