"""Deployment planning for UAV-carried emergency base stations."""

from .channel import LinkBudget, LinkGeometry, LinkModel, total_rate
from .coalition import GameResult, init_partition, run_coalition_game, transfer_utility
from .fleet import Association, FleetState, UNASSOCIATED, equal_split_powers
from .fleet_init import InfeasibleDeploymentError, initial_fleet, kmeans_cluster
from .scenario import (
    AreaSpec,
    ChannelParams,
    Obstacle,
    Scenario,
    ScenarioError,
    ScenarioParseError,
    ScenarioValidationError,
    SystemParams,
    UePoint,
    generate_clustered_scenario,
    generate_random_scenario,
    load_scenario,
    save_scenario,
)
from .vforce import OptimizationResult, TraceRow, VirtualForceField, run_vf_optimization
from .baselines import GaConfig, PsoConfig, run_ga_pud, run_pso_pud, run_vf_d, run_vf_pd

__version__ = "0.1.0"
