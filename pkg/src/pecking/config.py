"""Experiment configuration: a flat JSON document with dotted namespaces.

Example:

    {
      "model": "bonabeau_full",
      "graph.family": "star",
      "graph.n": 100,
      "eta": 1.0, "F": 1.0, "mu": 0.2,
      "steps": 1000000,
      "seed": 42,
      "sweep.mu": [0.1, 0.2, 0.3]
    }

Unknown keys are rejected. Defaults: measure_window = last 20% of steps,
warmup = steps - measure_window, sample_stride 100, replicates 1,
seed 0, threads 1, step_cap 1e7, selection "all", boundary "periodic".
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .competing import EtaSchedule
from .graphs import GraphError, SiteGraph, build_family, from_edge_list

MODELS = ("bonabeau_full", "bonabeau_lattice", "competing")

_INT_KEYS = {"graph.n", "steps", "warmup", "measure_window", "sample_stride",
             "replicates", "seed", "ell", "step_cap", "threads",
             "verify.states", "verify.samples", "verify.graphs"}
_FLOAT_KEYS = {"eta", "F", "mu", "rho", "verify.eps"}
_STR_KEYS = {"model", "graph.family", "graph.boundary", "graph.edge_list",
             "selection"}
_BOOL_KEYS = {"lattice.relax_on_move"}
_LIST_KEYS = {"sweep.mu", "sweep.F", "sweep.eta", "eta_schedule"}

KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _BOOL_KEYS | _LIST_KEYS

SWEEP_AXES = ("F", "eta", "mu")  # canonical cell-enumeration order


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    graph: SiteGraph
    model: str | None = None
    eta: float | None = None
    F: float | None = None
    mu: float | None = None
    ell: int | None = None
    eta_schedule: EtaSchedule | None = None
    rho: float | None = None
    steps: int = 0
    warmup: int = 0
    measure_window: int = 0
    sample_stride: int = 100
    replicates: int = 1
    seed: int = 0
    sweep: dict = field(default_factory=dict)
    step_cap: int = 10 ** 7
    selection: str = "all"
    threads: int = 1
    relax_on_move: bool = True
    verify_states: int = 200
    verify_samples: int = 20000
    verify_graphs: int = 5
    verify_eps: float = 1e-5

    def axis_values(self, axis: str) -> list[float]:
        """Grid for one sweep axis; falls back to the base value."""
        if axis in self.sweep:
            return list(self.sweep[axis])
        base = getattr(self, axis)
        if base is None:
            raise ConfigError(f"{axis} missing: set '{axis}' or 'sweep.{axis}'")
        return [base]

    def cells(self) -> list[dict]:
        """Cartesian product of sweep axes, F outermost and mu innermost."""
        out = []
        for f_val in self.axis_values("F"):
            for eta_val in self.axis_values("eta"):
                for mu_val in self.axis_values("mu"):
                    out.append({"F": f_val, "eta": eta_val, "mu": mu_val})
        return out


def _require_type(key: str, value):
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
        return value
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number")
        return float(value)
    if key in _STR_KEYS:
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string")
        return value
    if key in _BOOL_KEYS:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be a boolean")
        return value
    if key in _LIST_KEYS:
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{key} must be a nonempty list")
        return value
    raise ConfigError(f"unknown config key '{key}'")


def parse_config(document) -> ExperimentConfig:
    """Validate a config document (dict or JSON text) and apply defaults.

    Every diagnostic names the offending key.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from None
    if not isinstance(document, dict):
        raise ConfigError("config must be a JSON object")
    values = {}
    for key, raw in document.items():
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key '{key}'")
        if raw is None:
            continue        # JSON null means "unset"
        values[key] = _require_type(key, raw)

    model = values.get("model")
    if model is not None and model not in MODELS:
        raise ConfigError(f"model must be one of {MODELS}, got '{model}'")

    graph = _build_graph(values, model)

    eta = values.get("eta")
    if eta is not None and not (eta > 0):
        raise ConfigError("eta must be > 0")
    big_f = values.get("F")
    if big_f is not None and not (big_f >= 1):
        raise ConfigError("F must be >= 1")
    mu = values.get("mu")
    if mu is not None and not (0 < mu < 1):
        raise ConfigError("mu must lie in (0,1)")
    rho = values.get("rho")
    if rho is not None and not (0 < rho <= 1):
        raise ConfigError("rho must lie in (0,1]")
    ell = values.get("ell")
    if ell is not None and ell < 1:
        raise ConfigError("ell must be >= 1")

    schedule = None
    if "eta_schedule" in values:
        try:
            schedule = EtaSchedule.from_table(values["eta_schedule"])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"eta_schedule invalid: {e}") from None
    elif eta is not None:
        schedule = EtaSchedule.constant(eta)

    steps = values.get("steps", 0)
    if steps < 0:
        raise ConfigError("steps must be >= 0")
    window = values.get("measure_window")
    if window is None:
        window = max(1, steps // 5) if steps > 0 else 0
    elif not (1 <= window <= steps):
        raise ConfigError("measure_window must lie in [1, steps]")
    warmup = values.get("warmup")
    if warmup is None:
        warmup = steps - window
    elif warmup < 0:
        raise ConfigError("warmup must be >= 0")
    if warmup + window > steps:
        raise ConfigError("warmup + measure_window exceeds steps")

    stride = values.get("sample_stride", 100)
    if stride < 1:
        raise ConfigError("sample_stride must be >= 1")
    # at least one multiple of stride must land inside the measure window
    if steps > 0 and steps // stride == (steps - window) // stride:
        raise ConfigError("sample_stride leaves no samples in the measure window")
    replicates = values.get("replicates", 1)
    if replicates < 1:
        raise ConfigError("replicates must be >= 1")
    seed = values.get("seed", 0)
    if not (0 <= seed < 2 ** 64):
        raise ConfigError("seed must fit in 64 bits")
    step_cap = values.get("step_cap", 10 ** 7)
    if step_cap < 1:
        raise ConfigError("step_cap must be >= 1")
    selection = values.get("selection", "all")
    if selection not in ("all", "fightable"):
        raise ConfigError("selection must be 'all' or 'fightable'")
    threads = values.get("threads", 1)
    if threads < 1:
        raise ConfigError("threads must be >= 1")

    sweep = {}
    for axis in SWEEP_AXES:
        key = f"sweep.{axis}"
        if key in values:
            grid = values[key]
            for v in grid:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ConfigError(f"{key} entries must be numbers")
            grid = [float(v) for v in grid]
            if axis == "mu" and any(not (0 < v < 1) for v in grid):
                raise ConfigError("sweep.mu values must lie in (0,1)")
            if axis == "eta" and any(not (v > 0) for v in grid):
                raise ConfigError("sweep.eta values must be > 0")
            if axis == "F" and any(not (v >= 1) for v in grid):
                raise ConfigError("sweep.F values must be >= 1")
            if values.get(axis) is not None:
                raise ConfigError(f"set either '{axis}' or 'sweep.{axis}', not both")
            sweep[axis] = grid

    verify_states = values.get("verify.states", 200)
    if verify_states < 1:
        raise ConfigError("verify.states must be >= 1")
    verify_samples = values.get("verify.samples", 20000)
    if verify_samples < 10 ** 4:
        raise ConfigError("verify.samples must be >= 10000")
    verify_graphs = values.get("verify.graphs", 5)
    if verify_graphs < 1:
        raise ConfigError("verify.graphs must be >= 1")
    verify_eps = values.get("verify.eps", 1e-5)
    if not (1e-8 <= verify_eps <= 1e-4):
        raise ConfigError("verify.eps must lie in [1e-8, 1e-4]")

    return ExperimentConfig(
        graph=graph, model=model, eta=eta, F=big_f, mu=mu, ell=ell,
        eta_schedule=schedule, rho=rho, steps=steps, warmup=warmup,
        measure_window=window, sample_stride=stride, replicates=replicates,
        seed=seed, sweep=sweep, step_cap=step_cap, selection=selection,
        threads=threads, relax_on_move=values.get("lattice.relax_on_move", True),
        verify_states=verify_states, verify_samples=verify_samples,
        verify_graphs=verify_graphs, verify_eps=verify_eps)


def _build_graph(values: dict, model: str | None) -> SiteGraph:
    family = values.get("graph.family")
    edge_list = values.get("graph.edge_list")
    if family is None and edge_list is None:
        raise ConfigError("missing graph spec: set 'graph.family' or 'graph.edge_list'")
    if family is not None and edge_list is not None:
        raise ConfigError("set only one of 'graph.family' and 'graph.edge_list'")
    try:
        if family is not None:
            if "graph.n" not in values:
                raise ConfigError("graph.n is required with graph.family")
            boundary = values.get("graph.boundary", "periodic")
            g = build_family(family, values["graph.n"], boundary)
        else:
            g = from_edge_list(edge_list)
    except GraphError as e:
        raise ConfigError(f"graph spec invalid: {e}") from None
    if model == "bonabeau_lattice" and not g.graph_id.startswith("lattice2d"):
        raise ConfigError("model bonabeau_lattice requires graph.family 'lattice2d'")
    return g
