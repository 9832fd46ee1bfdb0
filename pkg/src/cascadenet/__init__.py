"""Vulnerability of interdependent infrastructure networks.

Intra-infrastructure cascades are modeled with a dynamic fault tree whose
gates are evaluated in closed form; inter-infrastructure failure spreads
along geo-proximity interdependency edges under best, worst or average
supply scenarios.
"""
from .cascade import (
    Scenario,
    SimConfig,
    VulnerabilityReport,
    calculate_vulnerability,
    combine,
    induced_vulnerability,
    mix_importance,
    run_iteration,
    scenario_aggregate,
    sweep_gamma,
)
from .dft import DftNode, GateKind, build_dft, intra_model, render_dft
from .errors import CascadeNetError, ConfigError, ContractError, ValidationError
from .gates import (
    FailureCurve,
    effective_rate,
    eval_and,
    eval_or,
    eval_pand_numeric,
    eval_voting,
    eval_wsp,
    eval_wsp_fold,
)
from .interdep import GeoGrid, InterdepEdge, InterdepGraph, cell_of, create_network, edge_strength
from .model import (
    ComponentId,
    DependencyRule,
    ImportanceMatrix,
    InfrastructureNetwork,
    Model,
    load_model,
    read_model,
    sample_rates,
    topological_levels,
)

__version__ = "0.1.0"
