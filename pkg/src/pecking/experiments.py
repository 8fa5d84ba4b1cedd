"""Config-driven experiment commands shared by the service and the CLI.

Every command returns plain data (CSV text plus structured rows) so the
HTTP layer stays a thin wrapper. Sweep cells and replicates may run on a
thread pool; replicate seeds are derived from (master_seed, cell_key,
replicate_index) and aggregation sorts by cell and replicate, so output
bytes do not depend on the thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import csvout, seeds
from .bonabeau import (BonabeauParams, Monitors, make_lattice_stepper,
                       make_lattice_world, run, run_fully_occupied, zero_state)
from .competing import CompetingParams, run_to_termination
from .config import ConfigError, ExperimentConfig
from .graphs import laplacian, random_connected_graph
from .meanfield import MeanfieldConfig, mean_closed_form, mean_limit, mean_step, meanfield_agent_map
from .oracle import (all_fightable_pairs_equal, empirical_vs_exact,
                     expected_z_increment, finite_difference_jacobian,
                     pathwise_z_identity, sample_reachable_states, state_hash)
from .spectral import (STABILITY_CSV_HEADER, build_jacobian, classify,
                       jacobian_eig_from_laplacian, stability_report,
                       symmetric_eigenvalues, theorem1_threshold)

SWEEP_CSV_HEADER = ["graph_id", "model", "n", "eta", "F", "mu", "rho", "steps",
                    "warmup", "measure_window", "sample_stride", "replicates",
                    "master_seed", "cell_id", "mean_sigma", "sd_sigma",
                    "fight_rate", "predicted_classification"]

TERMINATION_CSV_HEADER = ["graph_id", "n", "ell", "seed", "terminal", "steps",
                          "fights", "final_Z", "final_sigma"]

MEANFIELD_CSV_HEADER = ["mu", "F", "n", "t", "mean_recursion", "closed_form"]


@dataclass(frozen=True)
class SweepRow:
    graph_id: str
    model: str
    n: int
    eta: float
    F: float
    mu: float
    rho: float | None
    steps: int
    warmup: int
    measure_window: int
    sample_stride: int
    replicates: int
    master_seed: int
    cell_id: str
    mean_sigma: float
    sd_sigma: float
    fight_rate: float
    predicted_classification: str

    def csv_row(self) -> list:
        return [self.graph_id, self.model, self.n, self.eta, self.F, self.mu,
                self.rho, self.steps, self.warmup, self.measure_window,
                self.sample_stride, self.replicates, self.master_seed,
                self.cell_id, self.mean_sigma, self.sd_sigma, self.fight_rate,
                self.predicted_classification]


def _cell_identity(cfg: ExperimentConfig, cell: dict, extra: dict | None = None) -> int:
    params = {"graph": cfg.graph.graph_id, "model": cfg.model or "",
              "steps": cfg.steps, "measure_window": cfg.measure_window,
              "sample_stride": cfg.sample_stride}
    params.update(cell)
    if extra:
        params.update(extra)
    return seeds.cell_key(params)


def cmd_stability(cfg: ExperimentConfig) -> tuple[str, list[dict]]:
    """Stability table over the sweep grid; one row per (mu, eta, F) cell."""
    if cfg.model not in (None, "bonabeau_full"):
        raise ConfigError("stability analysis applies to the fully occupied model")
    g = cfg.graph
    # lambda1 is a property of the graph alone; solve once for the grid
    lam1 = float(symmetric_eigenvalues(laplacian(g))[-1])
    first = stability_report(g, cfg.cells()[0]["mu"], cfg.cells()[0]["eta"],
                             cfg.cells()[0]["F"])
    assert abs(first.lambda1 - lam1) < 1e-9
    rows = []
    for cell in cfg.cells():
        mu, eta, big_f = cell["mu"], cell["eta"], cell["F"]
        indicator = jacobian_eig_from_laplacian(lam1, mu, eta, big_f, g.edge_count)
        rows.append({
            "graph_id": g.graph_id, "n": g.n, "edge_count": g.edge_count,
            "lambda1": lam1, "mu": mu, "eta": eta, "F": big_f,
            "indicator": indicator, "classification": classify(indicator),
            "critical_coupling": 4.0 * mu * g.edge_count / (lam1 * (1.0 - mu)),
            "theorem1_threshold": theorem1_threshold(mu),
        })
    header = STABILITY_CSV_HEADER + ["theorem1_threshold"]
    csv = csvout.document(header, [[r[k] for k in header] for r in rows])
    return csv, rows


def _sweep_replicate(cfg: ExperimentConfig, cell: dict, seed: int) -> tuple[float, float]:
    """One trajectory for one cell; returns (time-averaged sigma, fight rate)."""
    p = BonabeauParams(eta=cell["eta"], F=cell["F"], mu=cell["mu"])
    if cfg.model == "bonabeau_lattice":
        side = int(round(math.sqrt(cfg.graph.n)))
        rng = seeds.generator(seed)
        world = make_lattice_world(side, cfg.rho, rng)
        stepper = make_lattice_stepper(world, p, cfg.relax_on_move)
        monitors = Monitors(stride=cfg.sample_stride,
                            window_start=cfg.steps - cfg.measure_window)
        stats = run(zero_state(world.agent_count), stepper, cfg.steps, rng, monitors)
        return stats.time_avg_sigma, stats.fight_rate
    stats = run_fully_occupied(cfg.graph, p, cfg.steps, seed=seed,
                               measure_window=cfg.measure_window,
                               stride=cfg.sample_stride)
    return stats.time_avg_sigma, stats.fight_rate


def cmd_sweep(cfg: ExperimentConfig) -> tuple[str, list[dict]]:
    """Monte Carlo sweep over the grid; one aggregated row per cell."""
    if cfg.model not in ("bonabeau_full", "bonabeau_lattice"):
        raise ConfigError("model must be bonabeau_full or bonabeau_lattice for sweep")
    if cfg.steps < 1:
        raise ConfigError("steps must be >= 1 for sweep")
    if cfg.model == "bonabeau_lattice" and cfg.rho is None:
        raise ConfigError("rho is required for the lattice model")
    cells = cfg.cells()
    lam1 = None
    if cfg.model == "bonabeau_full":
        lam1 = float(symmetric_eigenvalues(laplacian(cfg.graph))[-1])
    jobs = []
    for ci, cell in enumerate(cells):
        key = _cell_identity(cfg, cell, {"rho": cfg.rho} if cfg.rho else None)
        for ri in range(cfg.replicates):
            jobs.append((ci, ri, cell, seeds.replicate_seed(cfg.seed, key, ri)))
    results: dict[tuple[int, int], tuple[float, float]] = {}
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = {pool.submit(_sweep_replicate, cfg, cell, s): (ci, ri)
                       for ci, ri, cell, s in jobs}
            for fut, key in futures.items():
                results[key] = fut.result()
    else:
        for ci, ri, cell, s in jobs:
            results[(ci, ri)] = _sweep_replicate(cfg, cell, s)
    rows = []
    for ci, cell in enumerate(cells):
        sigmas = np.array([results[(ci, ri)][0] for ri in range(cfg.replicates)])
        rates = np.array([results[(ci, ri)][1] for ri in range(cfg.replicates)])
        if cfg.model == "bonabeau_full":
            ind = jacobian_eig_from_laplacian(lam1, cell["mu"], cell["eta"],
                                              cell["F"], cfg.graph.edge_count)
            predicted = classify(ind)
        else:
            predicted = ""
        key = _cell_identity(cfg, cell, {"rho": cfg.rho} if cfg.rho else None)
        rows.append(SweepRow(
            graph_id=cfg.graph.graph_id, model=cfg.model, n=cfg.graph.n,
            eta=cell["eta"], F=cell["F"], mu=cell["mu"], rho=cfg.rho,
            steps=cfg.steps, warmup=cfg.warmup,
            measure_window=cfg.measure_window, sample_stride=cfg.sample_stride,
            replicates=cfg.replicates, master_seed=cfg.seed,
            cell_id=format(key, "016x"), mean_sigma=float(sigmas.mean()),
            sd_sigma=float(sigmas.std()), fight_rate=float(rates.mean()),
            predicted_classification=predicted))
    csv = csvout.document(SWEEP_CSV_HEADER, [r.csv_row() for r in rows])
    return csv, [asdict(r) for r in rows]


def cmd_competing(cfg: ExperimentConfig) -> tuple[str, list[dict], dict]:
    """Seeded termination study; one row per replicate plus fight quantiles."""
    if cfg.model != "competing":
        raise ConfigError("model must be competing for the competing command")
    if cfg.ell is None:
        raise ConfigError("ell is required for the competing model")
    if cfg.eta_schedule is None:
        raise ConfigError("eta (or eta_schedule) is required for the competing model")
    if cfg.sweep:
        raise ConfigError("sweep axes are not supported by the competing command")
    params = CompetingParams(ell=cfg.ell, eta_schedule=cfg.eta_schedule,
                             selection=cfg.selection)
    cell = {"ell": cfg.ell, "selection": cfg.selection,
            "schedule": ";".join(f"{t}:{format(v, '.17g')}"
                                 for t, v in zip(cfg.eta_schedule.starts,
                                                 cfg.eta_schedule.values)),
            "step_cap": cfg.step_cap}
    key = _cell_identity(cfg, cell)
    run_seeds = [seeds.replicate_seed(cfg.seed, key, ri)
                 for ri in range(cfg.replicates)]

    def one(seed):
        return run_to_termination(cfg.graph, params, seed=seed,
                                  step_cap=cfg.step_cap)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(one, run_seeds))
    else:
        outcomes = [one(s) for s in run_seeds]
    rows = []
    for seed, res in zip(run_seeds, outcomes):
        rows.append({
            "graph_id": cfg.graph.graph_id, "n": cfg.graph.n, "ell": cfg.ell,
            "seed": seed, "terminal": res.terminal, "steps": res.steps,
            "fights": res.fights, "final_Z": res.final_z,
            "final_sigma": res.final_sigma,
        })
    fights = np.array([r["fights"] for r in rows], dtype=np.float64)
    quart = np.percentile(fights, [0, 25, 50, 75, 100]) if rows else [0] * 5
    summary = {
        "runs": len(rows),
        "all_terminal": bool(all(r["terminal"] for r in rows)),
        "fights_min": float(quart[0]), "fights_q25": float(quart[1]),
        "fights_median": float(quart[2]), "fights_q75": float(quart[3]),
        "fights_max": float(quart[4]),
    }
    csv = csvout.document(TERMINATION_CSV_HEADER,
                          [[r[k] for k in TERMINATION_CSV_HEADER] for r in rows])
    return csv, rows, summary


def cmd_meanfield(cfg: ExperimentConfig) -> tuple[str, list[dict], dict]:
    """Mean recursion trace plus the aggregate-identity check on the graph."""
    for name in ("mu", "F", "eta"):
        if getattr(cfg, name) is None:
            raise ConfigError(f"{name} is required for the meanfield command")
    mf = MeanfieldConfig(mu=cfg.mu, F=cfg.F, n=cfg.graph.n)
    iterations = cfg.steps if cfg.steps > 0 else int(math.ceil(200.0 / cfg.mu))
    hbar = 0.0
    rows = [{"mu": cfg.mu, "F": cfg.F, "n": mf.n, "t": 0,
             "mean_recursion": hbar, "closed_form": mean_closed_form(0.0, 0, mf)}]
    for t in range(1, iterations + 1):
        hbar = mean_step(hbar, mf)
        if t % cfg.sample_stride == 0 or t == iterations:
            rows.append({"mu": cfg.mu, "F": cfg.F, "n": mf.n, "t": t,
                         "mean_recursion": hbar,
                         "closed_form": mean_closed_form(0.0, t, mf)})
    rng = seeds.generator(seeds.mix(cfg.seed, seeds.fnv1a64(b"meanfield-identity")))
    worst = 0.0
    for _ in range(20):
        h = rng.uniform(-1.0, 1.0, size=cfg.graph.n)
        mapped = meanfield_agent_map(h, cfg.graph, cfg.mu, cfg.eta, cfg.F)
        lhs = math.fsum(mapped.tolist())
        rhs = (1.0 - cfg.mu) * (math.fsum(h.tolist()) + 1.0 - cfg.F)
        worst = max(worst, abs(lhs - rhs))
    extras = {
        "drift_const": mf.drift_const,
        "limit": mean_limit(mf),
        "iterations": iterations,
        "final_mean": hbar,
        "limit_abs_err": abs(hbar - mean_limit(mf)),
        "identity_max_abs_err": worst,
    }
    csv = csvout.document(MEANFIELD_CSV_HEADER,
                          [[r[k] for k in MEANFIELD_CSV_HEADER] for r in rows])
    return csv, rows, extras


def cmd_verify(cfg: ExperimentConfig) -> tuple[str, bool, dict]:
    """Submartingale, pathwise-identity, Jacobian-FD, and engine-vs-oracle
    suites on seeded random instances. Returns (report, passed, counts)."""
    rng = seeds.generator(seeds.mix(cfg.seed, seeds.fnv1a64(b"verify")))
    lines = []
    counts: dict[str, dict] = {}
    all_ok = True

    # one-step submartingale oracle + pathwise identity on reachable states
    lines.append("submartingale one-step oracle")
    lines.append(f"{'state':14} {'E[dZ]':>22} {'bound':>22} {'margin':>12} pass")
    sub_fail = path_fail = eq_fail = 0
    n_states = 0
    per_graph = max(1, cfg.verify_states // cfg.verify_graphs)
    shown = 0
    for gi in range(cfg.verify_graphs):
        n = int(rng.integers(3, 9))
        g = random_connected_graph(n, int(rng.integers(0, n)), rng)
        ell = 1 + gi % 3
        params = CompetingParams(ell=ell)
        for state in sample_reachable_states(g, params, per_graph, rng):
            n_states += 1
            e_dz, bound = expected_z_increment(state, g, params)
            margin = e_dz - bound
            ok = margin >= -1e-12
            if all_fightable_pairs_equal(state, g):
                ok = ok and abs(margin) <= 1e-12
            else:
                ok = ok and margin > 1e-9
            if not ok:
                sub_fail += 1
                eq_fail += 1
            if not pathwise_z_identity(state, g, params):
                path_fail += 1
                ok = False
            if shown < 12 or not ok:
                lines.append(f"{state_hash(state, g):14} {e_dz:>22.15g} "
                             f"{bound:>22.15g} {margin:>12.3e} {'yes' if ok else 'NO'}")
                shown += 1
    lines.append(f"states checked: {n_states}, submartingale failures: {sub_fail}, "
                 f"pathwise failures: {path_fail}")
    counts["submartingale"] = {"states": n_states, "failures": sub_fail,
                               "pathwise_failures": path_fail}
    all_ok = all_ok and sub_fail == 0 and path_fail == 0

    # finite-difference validation of the analytic Jacobian
    lines.append("")
    lines.append(f"jacobian finite-difference (eps={cfg.verify_eps:g})")
    lines.append(f"{'graph':16} {'max_entry_dev':>14} {'sym_dev':>10} "
                 f"{'off_neigh':>10} pass")
    fd_fail = 0
    for _ in range(cfg.verify_graphs):
        n = int(rng.integers(3, 11))
        g = random_connected_graph(n, int(rng.integers(0, n)), rng)
        mu = float(rng.uniform(0.1, 0.9))
        eta = float(rng.uniform(0.3, 2.0))
        big_f = float(rng.uniform(1.0, 3.0))
        fd = finite_difference_jacobian(
            lambda h: meanfield_agent_map(h, g, mu, eta, big_f),
            np.zeros(g.n), cfg.verify_eps)
        analytic = build_jacobian(g, mu, eta, big_f)
        dev = float(np.max(np.abs(fd - analytic)))
        sym = float(np.max(np.abs(fd - fd.T)))
        mask = (analytic == 0.0)
        off = float(np.max(np.abs(fd[mask]))) if mask.any() else 0.0
        ok = dev < 1e-6 and sym < 1e-6 and off < 1e-8
        if not ok:
            fd_fail += 1
        lines.append(f"{g.graph_id:16} {dev:>14.3e} {sym:>10.2e} "
                     f"{off:>10.2e} {'yes' if ok else 'NO'}")
    counts["jacobian_fd"] = {"graphs": cfg.verify_graphs, "failures": fd_fail}
    all_ok = all_ok and fd_fail == 0

    # sampled engine against enumerated distribution
    lines.append("")
    lines.append("engine vs oracle total variation")
    lines.append(f"{'state':14} {'tv':>10} {'limit':>10} pass")
    tv_fail = 0
    tv_limit = 5.0 / math.sqrt(cfg.verify_samples)
    g = random_connected_graph(5, 2, rng)
    params = CompetingParams(ell=2)
    probes = sample_reachable_states(g, params, 3, rng)
    for state in probes:
        tv = empirical_vs_exact(state, g, params, cfg.verify_samples, rng)
        ok = tv < tv_limit
        if not ok:
            tv_fail += 1
        lines.append(f"{state_hash(state, g):14} {tv:>10.4f} {tv_limit:>10.4f} "
                     f"{'yes' if ok else 'NO'}")
    counts["engine_vs_oracle"] = {"states": len(probes), "failures": tv_fail}
    all_ok = all_ok and tv_fail == 0

    lines.append("")
    lines.append(f"overall: {'PASS' if all_ok else 'FAIL'}")
    return "\n".join(lines) + "\n", all_ok, counts
