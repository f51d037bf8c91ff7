"""
Bandit Instance

Problem instances, reward sampling, gap/hardness computation and the
seeded instance-batch generator used by every experiment.

Arms are indexed from 0; the best arm of an instance is the index of its
unique strict maximum mean.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .exceptions import ArmOutOfRange, ConfigurationError, DuplicateMax, InvalidBudget, InvalidGap, TooFewArms
from .seeding import batch_generator


class RewardFamily:
    """Unit-variance sub-Gaussian noise law added to an arm mean."""

    name = "abstract"

    def draw(self, mean: float, rng: np.random.Generator) -> float:
        raise NotImplementedError


class GaussianRewards(RewardFamily):
    """Normal(mean, 1); used by every reproduced experiment."""

    name = "gaussian"

    def draw(self, mean: float, rng: np.random.Generator) -> float:
        return mean + float(rng.standard_normal())


class RademacherRewards(RewardFamily):
    """mean +/- 1 with equal probability (variance 1, 1-sub-Gaussian)."""

    name = "rademacher"

    def draw(self, mean: float, rng: np.random.Generator) -> float:
        return mean + (1.0 if rng.random() < 0.5 else -1.0)


REWARD_FAMILIES: Dict[str, RewardFamily] = {
    GaussianRewards.name: GaussianRewards(),
    RademacherRewards.name: RademacherRewards(),
}


@dataclass(frozen=True)
class BanditInstance:
    """
    Immutable stochastic bandit instance.

    Attributes:
        arm_means: Mean utility of each arm
        best_arm: Index of the unique maximum
        reward_family: Noise law of realized rewards
    """

    arm_means: Tuple[float, ...]
    best_arm: int
    reward_family: RewardFamily = field(default=REWARD_FAMILIES["gaussian"], compare=False, repr=False)

    @property
    def n_arms(self) -> int:
        """Number of arms K."""
        return len(self.arm_means)

    def check_arm(self, arm: int) -> None:
        """Raise ArmOutOfRange unless 0 <= arm < K."""
        if not 0 <= arm < self.n_arms:
            raise ArmOutOfRange(f"arm {arm} outside [0, {self.n_arms})")

    def to_dict(self) -> Dict[str, object]:
        return {"means": list(self.arm_means), "best_arm": self.best_arm}


@dataclass(frozen=True)
class GapProfile:
    """
    Per-arm gaps and the hardness constant.

    Attributes:
        gaps: Best-minus-second for the best arm, best-minus-mean otherwise
        hardness: Sum of 1/gap^2 over all arms
    """

    gaps: Tuple[float, ...]
    hardness: float


def make_instance(means: Sequence[float], reward_family: str = "gaussian") -> BanditInstance:
    """
    Build an instance from arm means.

    Args:
        means: Arm means, at least two
        reward_family: Key of REWARD_FAMILIES

    Returns:
        BanditInstance with best_arm set to the index of the strict maximum

    Raises:
        TooFewArms: fewer than two means
        DuplicateMax: the maximum is attained more than once
    """
    values = tuple(float(mean) for mean in means)
    if len(values) < 2:
        raise TooFewArms(f"need at least 2 arms, got {len(values)}")
    top = max(values)
    if values.count(top) > 1:
        raise DuplicateMax(f"maximum mean {top} is not unique")
    try:
        family = REWARD_FAMILIES[reward_family]
    except KeyError:
        raise ConfigurationError(f"unknown reward family {reward_family!r}") from None
    return BanditInstance(arm_means=values, best_arm=values.index(top), reward_family=family)


def hardness(instance: BanditInstance) -> GapProfile:
    """
    Compute the gap profile of an instance.

    Args:
        instance: A valid instance

    Returns:
        GapProfile with H = sum of 1/gap^2
    """
    means = instance.arm_means
    top = means[instance.best_arm]
    runner_up = max(mean for arm, mean in enumerate(means) if arm != instance.best_arm)
    gaps = tuple(
        top - runner_up if arm == instance.best_arm else top - mean
        for arm, mean in enumerate(means)
    )
    return GapProfile(gaps=gaps, hardness=math.fsum(1.0 / gap ** 2 for gap in gaps))


def sample_reward(instance: BanditInstance, arm: int, rng: np.random.Generator) -> float:
    """
    Draw one realized reward of an arm.

    Args:
        instance: Bandit instance
        arm: Arm index
        rng: Stream the noise is drawn from

    Returns:
        Realized reward

    Raises:
        ArmOutOfRange: arm outside [0, K)
    """
    instance.check_arm(arm)
    return instance.reward_family.draw(instance.arm_means[arm], rng)


def _place_above(runner_up: float, gap: float) -> float:
    """Float b closest to runner_up + gap such that b - runner_up == gap when one exists nearby."""
    candidate = runner_up + gap
    if candidate - runner_up == gap:
        return candidate
    below = candidate
    above = candidate
    for _ in range(4):
        below = float(np.nextafter(below, -np.inf))
        above = float(np.nextafter(above, np.inf))
        for option in (below, above):
            if option - runner_up == gap:
                return option
    return candidate


def generate_instance_batch(
    n_arms: int,
    gap: float,
    count: int,
    master_seed: int,
    reward_family: str = "gaussian",
) -> List[BanditInstance]:
    """
    Draw a seeded batch of instances with a prescribed top gap.

    Each mean is drawn from Normal(0, 1); the sampled maximum is then moved
    to (second largest sample) + gap. All other means keep their values.

    Args:
        n_arms: K >= 2
        gap: Best-minus-second-best gap, > 0
        count: Number of instances, >= 1
        master_seed: Seed; the batch is a pure function of the arguments

    Returns:
        List of instances

    Raises:
        TooFewArms, InvalidGap, InvalidBudget
    """
    if n_arms < 2:
        raise TooFewArms(f"need at least 2 arms, got {n_arms}")
    if not gap > 0:
        raise InvalidGap(f"gap must be positive, got {gap}")
    if count < 1:
        raise InvalidBudget(f"batch size must be >= 1, got {count}")

    rng = batch_generator(master_seed)
    batch = []
    for _ in range(count):
        means = rng.standard_normal(n_arms)
        order = np.argsort(means)
        top, runner_up = int(order[-1]), float(means[order[-2]])
        means[top] = _place_above(runner_up, gap)
        batch.append(make_instance(means.tolist(), reward_family=reward_family))
    return batch


def batch_to_json(instances: Sequence[BanditInstance]) -> str:
    """Serialize a batch as a JSON array of {means, best_arm}."""
    return json.dumps([instance.to_dict() for instance in instances])


def batch_from_json(text: str, reward_family: str = "gaussian") -> List[BanditInstance]:
    """Rebuild a batch written by batch_to_json()."""
    entries = json.loads(text)
    instances = [make_instance(entry["means"], reward_family=reward_family) for entry in entries]
    for entry, instance in zip(entries, instances):
        if entry.get("best_arm", instance.best_arm) != instance.best_arm:
            raise DuplicateMax(f"stored best_arm {entry['best_arm']} disagrees with means")
    return instances
