"""
Track-and-Stop

Fixed-confidence best arm identification for Bernoulli arms, applied to
the user's binary responses (accept = 1, reject = 0): D-tracking of the
optimal allocation with forced exploration, and a Chernoff generalized
likelihood ratio stopping rule.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect

from .bair import default_n1
from .exceptions import InvalidBudget, InvalidDelta
from .outcomes import AlgorithmOutcome, Termination
from .session import RecommendationSession

logger = logging.getLogger(__name__)

MEAN_CLAMP = 1e-6
BISECTION_RTOL = 1e-6
_MAX_BISECTION_STEPS = 200


def kl_bernoulli(x, y):
    """Bernoulli KL divergence d(x, y), arguments clamped to [1e-6, 1 - 1e-6]."""
    x = np.clip(x, MEAN_CLAMP, 1.0 - MEAN_CLAMP)
    y = np.clip(y, MEAN_CLAMP, 1.0 - MEAN_CLAMP)
    return x * np.log(x / y) + (1.0 - x) * np.log((1.0 - x) / (1.0 - y))


def _mixture(best: float, others: np.ndarray, ratio: np.ndarray) -> np.ndarray:
    return (best + ratio * others) / (1.0 + ratio)


def _g(best: float, others: np.ndarray, ratio: np.ndarray) -> np.ndarray:
    mix = _mixture(best, others, ratio)
    return kl_bernoulli(best, mix) + ratio * kl_bernoulli(others, mix)


def _invert_g(best: float, others: np.ndarray, level: float) -> np.ndarray:
    """Vectorized bisection for x_a with g_a(x_a) = level, to relative tolerance 1e-6."""
    low = np.zeros_like(others)
    high = np.ones_like(others)
    for _ in range(_MAX_BISECTION_STEPS):
        short = _g(best, others, high) < level
        if not short.any():
            break
        high = np.where(short, 2.0 * high, high)
    for _ in range(_MAX_BISECTION_STEPS):
        middle = 0.5 * (low + high)
        below = _g(best, others, middle) < level
        low = np.where(below, middle, low)
        high = np.where(below, high, middle)
        if np.all(high - low <= BISECTION_RTOL * high):
            break
    return 0.5 * (low + high)


def optimal_weights(means: np.ndarray) -> np.ndarray:
    """
    Optimal sampling proportions of the Bernoulli pure-exploration program.

    Solves for y in sum_a d(mu_b, m_a) / d(mu_a, m_a) = 1, where x_a(y)
    inverts g_a(x) = d(mu_b, m_a(x)) + x d(mu_a, m_a(x)) and
    m_a(x) = (mu_b + x mu_a) / (1 + x), b being the empirical best arm.

    Args:
        means: Clamped empirical means

    Returns:
        Weight vector summing to 1; uniform when the best arm is tied
    """
    means = np.clip(np.asarray(means, dtype=float), MEAN_CLAMP, 1.0 - MEAN_CLAMP)
    n_arms = len(means)
    best = int(np.argmax(means))
    mask = np.arange(n_arms) != best
    others = means[mask]
    top = float(means[best])
    ceilings = kl_bernoulli(top, others)
    y_max = float(ceilings.min())
    if not y_max > 0:
        return np.full(n_arms, 1.0 / n_arms)

    def excess(level: float) -> float:
        ratios = _invert_g(top, others, level)
        mix = _mixture(top, others, ratios)
        return float(np.sum(kl_bernoulli(top, mix) / kl_bernoulli(others, mix))) - 1.0

    upper = y_max * (1.0 - 1e-9)
    try:
        level = bisect(excess, 0.0, upper, rtol=BISECTION_RTOL, maxiter=_MAX_BISECTION_STEPS)
    except ValueError:
        # no sign change at floating precision: the root sits at the upper end
        level = upper
    ratios = _invert_g(top, others, level)
    weights = np.empty(n_arms)
    weights[best] = 1.0 / (1.0 + ratios.sum())
    weights[mask] = ratios * weights[best]
    return weights


def glr_statistic(counts: np.ndarray, means: np.ndarray) -> Tuple[int, float]:
    """
    Chernoff statistic Z(t) = min over challengers of the pairwise GLR.

    Returns:
        (empirical best arm, Z)
    """
    means = np.clip(means, MEAN_CLAMP, 1.0 - MEAN_CLAMP)
    best = int(np.argmax(means))
    mask = np.arange(len(means)) != best
    n_best, n_other = counts[best], counts[mask]
    pooled = (n_best * means[best] + n_other * means[mask]) / (n_best + n_other)
    pairwise = n_best * kl_bernoulli(means[best], pooled) + n_other * kl_bernoulli(means[mask], pooled)
    return best, float(pairwise.min())


def glr_threshold(t: int, n_arms: int, delta: float) -> float:
    """beta(t, delta) = ln(2 t (K - 1) / delta)."""
    return math.log(2.0 * t * (n_arms - 1) / delta)


def track_and_stop(
    session: RecommendationSession,
    delta: float,
    t_max: Optional[int] = None,
    refresh_every: int = 10,
    prior_counts: Optional[Sequence[int]] = None,
    prior_successes: Optional[Sequence[int]] = None,
) -> AlgorithmOutcome:
    """
    Track-and-Stop on accept/reject feedback.

    Prior counts warm-start the Bernoulli statistics; they enter the
    tracking, forced exploration and stopping rule but not the returned
    step and acceptance counts.

    Args:
        session: Interaction session
        delta: Confidence parameter in (0, 1)
        t_max: Step bound (default 200 x default_n1(K, delta, 1, rho0))
        refresh_every: Steps between recomputations of the optimal weights
        prior_counts: Earlier recommendations per arm
        prior_successes: Earlier acceptances per arm, at most prior_counts

    Returns:
        AlgorithmOutcome; Identified on a GLR stop, BudgetExhausted at t_max

    Raises:
        InvalidDelta, InvalidBudget
    """
    if not 0.0 < delta < 1.0:
        raise InvalidDelta(f"delta must lie in (0, 1), got {delta}")
    n_arms = session.n_arms
    if t_max is None:
        t_max = 200 * default_n1(n_arms, delta, 1.0, session.user.params.rho0)
    if t_max < n_arms or refresh_every < 1:
        raise InvalidBudget(f"need t_max >= K and refresh_every >= 1, got {t_max}, {refresh_every}")

    counts = np.zeros(n_arms) if prior_counts is None else np.array(prior_counts, dtype=float)
    successes = np.zeros(n_arms) if prior_successes is None else np.array(prior_successes, dtype=float)
    if counts.shape != (n_arms,) or successes.shape != (n_arms,) or (successes < 0).any() or (successes > counts).any():
        raise InvalidBudget("prior counts need K entries with 0 <= successes <= counts")
    offset = int(counts.sum())
    run_accepts = np.zeros(n_arms, dtype=int)
    rejections = 0
    weights = np.full(n_arms, 1.0 / n_arms)
    next_refresh = 0
    t = 0
    termination = Termination.BUDGET_EXHAUSTED
    chosen = None
    while t < t_max:
        total = offset + t
        if counts.min() == 0:
            arm = int(np.argmin(counts))
        else:
            means = successes / counts
            if t >= next_refresh:
                weights = optimal_weights(means)
                next_refresh = t + refresh_every
            starved = counts < math.sqrt(total) - n_arms / 2.0
            if starved.any():
                arm = int(np.argmin(np.where(starved, counts, np.inf)))
            else:
                arm = int(np.argmax(total * weights - counts))
        accepted = session.recommend(arm)
        t += 1
        counts[arm] += 1
        if accepted:
            successes[arm] += 1
            run_accepts[arm] += 1
        else:
            rejections += 1
        if counts.min() > 0:
            best, statistic = glr_statistic(counts, successes / counts)
            if statistic >= glr_threshold(offset + t, n_arms, delta):
                termination = Termination.IDENTIFIED
                chosen = best
                break

    if chosen is None:
        chosen = int(np.argmax(successes))
        logger.info("Track-and-Stop hit t_max=%d without stopping", t_max)
    return AlgorithmOutcome(
        chosen_arm=chosen,
        total_steps=t,
        total_rejections=rejections,
        per_arm_accepts=tuple(int(count) for count in run_accepts),
        termination=termination,
    )
