"""Hierarchy formation on graphs: stochastic fight dynamics, their
mean-field linearization, and the spectral stability analysis, plus a
seeded experiment layer with CSV/SVG output."""

__version__ = "0.1.0"

from .bonabeau import (BonabeauParams, FightEvent, Monitors, PowerState,
                       fight_probability, make_full_stepper,
                       make_lattice_stepper, make_lattice_world, run,
                       run_fully_occupied, sigma, step_fully_occupied,
                       step_lattice, zero_state)
from .competing import (CompetingParams, CompetingState, EtaSchedule,
                        fightable_edges, is_terminal, run_to_termination,
                        step_competing, z_statistic, zero_competing_state)
from .config import ConfigError, ExperimentConfig, parse_config
from .graphs import (GraphError, SiteGraph, build_family, from_edge_list,
                     edge_list_text, laplacian, random_connected_graph,
                     random_tree)
from .meanfield import (MeanfieldConfig, mean_closed_form, mean_limit,
                        mean_step, meanfield_agent_map)
from .oracle import (enumerate_competing_step, expected_z_increment,
                     finite_difference_jacobian, pathwise_z_identity,
                     sample_reachable_states)
from .spectral import (critical_mu, das_bound, jacobian_eig_from_laplacian,
                       build_jacobian, stability_report, star_critical_mu,
                       limit_critical_mu, symmetric_eigenvalues,
                       theorem1_threshold)

__all__ = [
    "__version__",
    "BonabeauParams", "FightEvent", "Monitors", "PowerState",
    "fight_probability", "make_full_stepper", "make_lattice_stepper",
    "make_lattice_world", "run", "run_fully_occupied", "sigma",
    "step_fully_occupied", "step_lattice", "zero_state",
    "CompetingParams", "CompetingState", "EtaSchedule", "fightable_edges",
    "is_terminal", "run_to_termination", "step_competing", "z_statistic",
    "zero_competing_state",
    "ConfigError", "ExperimentConfig", "parse_config",
    "GraphError", "SiteGraph", "build_family", "from_edge_list",
    "edge_list_text", "laplacian", "random_connected_graph", "random_tree",
    "MeanfieldConfig", "mean_closed_form", "mean_limit", "mean_step",
    "meanfield_agent_map",
    "enumerate_competing_step", "expected_z_increment",
    "finite_difference_jacobian", "pathwise_z_identity",
    "sample_reachable_states",
    "critical_mu", "das_bound", "jacobian_eig_from_laplacian",
    "build_jacobian", "stability_report", "star_critical_mu",
    "limit_critical_mu", "symmetric_eigenvalues", "theorem1_threshold",
]
