"""
Outcomes

Result records shared by BAIR and the baselines.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple


class Termination(Enum):
    IDENTIFIED = "identified"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass
class AlgorithmOutcome:
    """
    What a system policy returns.

    Attributes:
        chosen_arm: Arm the policy commits to
        total_steps: Recommendations made by this run (stopping time)
        total_rejections: Rejections received during this run
        per_arm_accepts: Acceptances per arm during this run
        termination: Why the run stopped
        phase_boundary: Step count at the end of BAIR's Phase-1, if any
    """

    chosen_arm: int
    total_steps: int
    total_rejections: int
    per_arm_accepts: Tuple[int, ...]
    termination: Termination = Termination.IDENTIFIED
    phase_boundary: Optional[int] = None

    @property
    def rejection_rate(self) -> float:
        return self.total_rejections / self.total_steps if self.total_steps else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "chosen_arm": self.chosen_arm,
            "total_steps": self.total_steps,
            "total_rejections": self.total_rejections,
            "per_arm_accepts": list(self.per_arm_accepts),
            "termination": self.termination.value,
            "phase_boundary": self.phase_boundary,
        }


@dataclass(frozen=True)
class RoundRecord:
    """
    Bookkeeping of one completed Phase-1 main-loop round.

    Attributes:
        start_step: Step count when the candidate set was reset
        end_step: Step count at the round's last rejection
        start_max_empirical_mean: Highest user empirical mean at start_step
        end_max_empirical_mean: Highest user empirical mean at end_step
        min_gamma_in_round: Smallest width driver over the round's decisions
        acceptances_at_end: n(t) at end_step
    """

    start_step: int
    end_step: int
    start_max_empirical_mean: float
    end_max_empirical_mean: float
    min_gamma_in_round: float
    acceptances_at_end: int

    @property
    def required_decrease(self) -> float:
        return 2.0 * math.sqrt(self.min_gamma_in_round / self.acceptances_at_end)

    def decrease_holds(self, tolerance: float = 1e-9) -> bool:
        """Whether the highest empirical mean fell by at least the required amount."""
        bound = self.start_max_empirical_mean - self.required_decrease
        return self.end_max_empirical_mean <= bound + tolerance * max(1.0, abs(bound))


@dataclass
class Phase1Output:
    """
    Result of the sweeping phase.

    Attributes:
        accept_counts: Acceptances per arm seen by the system
        reject_counts: Rejections per arm
        rounds: One record per completed main-loop round
        total_steps: Recommendations made in the phase
        init_reject_counts: Rejections per arm during initialization
    """

    accept_counts: List[int]
    reject_counts: List[int]
    rounds: List[RoundRecord] = field(default_factory=list)
    total_steps: int = 0
    init_reject_counts: List[int] = field(default_factory=list)

    @property
    def total_acceptances(self) -> int:
        return sum(self.accept_counts)
