"""
Fixed-Horizon Baselines

Uniform exploration and EXP3. Both read an acceptance as reward 1 and a
rejection as reward 0, run for exactly T recommendations, and output the
arm with the most acceptances (lowest index on ties).
"""

import math
from typing import Optional

import numpy as np

from .exceptions import BudgetTooSmall, InvalidBudget
from .outcomes import AlgorithmOutcome, Termination
from .session import RecommendationSession

UNI_SCHEDULES = ("random", "round_robin")


def _outcome(session: RecommendationSession, accepts: np.ndarray, steps: int, rejections: int) -> AlgorithmOutcome:
    return AlgorithmOutcome(
        chosen_arm=int(np.argmax(accepts)),
        total_steps=steps,
        total_rejections=rejections,
        per_arm_accepts=tuple(int(count) for count in accepts),
        termination=Termination.BUDGET_EXHAUSTED,
    )


def uniform_explore(session: RecommendationSession, horizon: int, schedule: str = "random") -> AlgorithmOutcome:
    """
    UNI: recommend arms uniformly for exactly `horizon` steps.

    Args:
        session: Interaction session
        horizon: Number of recommendations T >= 1
        schedule: 'random' (i.i.d. uniform arm each step) or 'round_robin'

    Returns:
        AlgorithmOutcome with the argmax-acceptance arm

    Raises:
        InvalidBudget
    """
    if horizon < 1:
        raise InvalidBudget(f"horizon must be >= 1, got {horizon}")
    if schedule not in UNI_SCHEDULES:
        raise InvalidBudget(f"unknown UNI schedule {schedule!r}; expected one of {UNI_SCHEDULES}")

    n_arms = session.n_arms
    accepts = np.zeros(n_arms, dtype=np.int64)
    rejections = 0
    if schedule == "random":
        arms = session.rng.integers(n_arms, size=horizon)
    else:
        arms = np.arange(horizon) % n_arms
    for arm in arms:
        arm = int(arm)
        if session.recommend(arm):
            accepts[arm] += 1
        else:
            rejections += 1
    return _outcome(session, accepts, horizon, rejections)


def exp3_defaults(n_arms: int, horizon: int) -> tuple:
    """Default (gamma, eps) = (sqrt(ln K / (K T)), min{1, sqrt(K ln K / T)})."""
    log_k = math.log(n_arms)
    return math.sqrt(log_k / (n_arms * horizon)), min(1.0, math.sqrt(n_arms * log_k / horizon))


def exp3_distribution(log_weights: np.ndarray, eps: float) -> np.ndarray:
    """Sampling law (1 - eps) w / sum(w) + eps / K, from log-weights."""
    weights = np.exp(log_weights - log_weights.max())
    return (1.0 - eps) * weights / weights.sum() + eps / len(log_weights)


def exp3(
    session: RecommendationSession,
    horizon: int,
    gamma: Optional[float] = None,
    eps: Optional[float] = None,
) -> AlgorithmOutcome:
    """
    EXP3 with uniform mixing on binary feedback.

    Args:
        session: Interaction session
        horizon: Number of recommendations T, must exceed K ln K
        gamma: Learning rate (default sqrt(ln K / (K T)))
        eps: Uniform mixing weight (default min{1, sqrt(K ln K / T)})

    Returns:
        AlgorithmOutcome with the argmax-acceptance arm

    Raises:
        BudgetTooSmall: T <= K ln K
    """
    n_arms = session.n_arms
    if horizon <= n_arms * math.log(n_arms):
        raise BudgetTooSmall(f"EXP3 needs T > K ln K = {n_arms * math.log(n_arms):.3f}, got {horizon}")
    default_gamma, default_eps = exp3_defaults(n_arms, horizon)
    gamma = default_gamma if gamma is None else gamma
    eps = default_eps if eps is None else min(1.0, eps)

    log_weights = np.zeros(n_arms)
    accepts = np.zeros(n_arms, dtype=np.int64)
    rejections = 0
    for _ in range(horizon):
        probabilities = exp3_distribution(log_weights, eps)
        arm = int(session.rng.choice(n_arms, p=probabilities))
        if session.recommend(arm):
            accepts[arm] += 1
            # importance-weighted reward 1 / p on the played arm
            log_weights[arm] += gamma / probabilities[arm]
        else:
            rejections += 1
    return _outcome(session, accepts, horizon, rejections)
