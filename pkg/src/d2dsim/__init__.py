"""Seeded system-level simulator for D2D communication under a tri-sectored
cell: sector-based RB allocation with cross-iteration reuse, an HMM
allocation baseline, and a CSV experiment harness."""

from d2dsim.config import ConfigError, RadioConfig, SimulationPlan, load_config, parse_config, serialize_config
from d2dsim.kernels import BACKEND as KERNEL_BACKEND
from d2dsim.metrics import IterationResult, ScenarioReport, mos, pair_throughput
from d2dsim.sbrra import (
    AllocationDecision,
    Application,
    allocate_iteration,
    initial_state,
    rank_partners,
    rb_demand,
    run_scenario,
    with_deployment,
)
from d2dsim.scenario import (
    D2DPair,
    Deployment,
    SectorGeometry,
    UserLocation,
    deploy_users,
    distance,
    form_pairs,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationDecision",
    "Application",
    "ConfigError",
    "D2DPair",
    "Deployment",
    "IterationResult",
    "KERNEL_BACKEND",
    "RadioConfig",
    "ScenarioReport",
    "SectorGeometry",
    "SimulationPlan",
    "UserLocation",
    "allocate_iteration",
    "deploy_users",
    "distance",
    "form_pairs",
    "initial_state",
    "load_config",
    "mos",
    "pair_throughput",
    "parse_config",
    "rank_partners",
    "rb_demand",
    "run_scenario",
    "serialize_config",
    "with_deployment",
    "__version__",
]
