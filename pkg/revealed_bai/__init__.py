"""
Revealed-Preference Best Arm Identification

This package simulates a recommender that must identify the best arm while
observing only the accept/reject decisions of an explorative user, and
compares the BAIR algorithm against uniform exploration, EXP3 and
Track-and-Stop.
"""

__version__ = "0.1.0"

# bair and track_and_stop are imported from their submodules, which share
# the function names.

from .bandit_instance import BanditInstance, generate_instance_batch, hardness, make_instance
from .bair import default_m, default_n1, phase1_sweep, phase2_eliminate
from .baselines import exp3, uniform_explore
from .harness import ExperimentCell, MetricsSummary, run_cell, run_replication, run_shared_phase1_cell
from .lowerbound_probe import hard_instance_pair, indistinguishability_probe, n0
from .reporting import emit_results
from .session import RecommendationSession
from .user_model import ExplorativeUser, UserParams, UserState, decide, gamma

__all__ = [
    "BanditInstance",
    "make_instance",
    "hardness",
    "generate_instance_batch",
    "UserParams",
    "UserState",
    "ExplorativeUser",
    "gamma",
    "decide",
    "RecommendationSession",
    "phase1_sweep",
    "phase2_eliminate",
    "default_n1",
    "default_m",
    "uniform_explore",
    "exp3",
    "ExperimentCell",
    "MetricsSummary",
    "run_replication",
    "run_cell",
    "run_shared_phase1_cell",
    "emit_results",
    "n0",
    "hard_instance_pair",
    "indistinguishability_probe",
]
