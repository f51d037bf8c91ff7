"""
User Model

The explorative user: keeps a confidence interval per arm built from the
rewards of accepted recommendations and rejects a recommendation exactly
when some other arm's lower bound reaches the recommended arm's upper bound.

With probability noise_p a decision is instead a fair coin flip.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from .exceptions import ArmOutOfRange, ConfigurationError, RewardMissing, RewardUnexpected


def gamma(n_total: int, rho_t: float, alpha: float) -> float:
    """
    Confidence width driver max{0, 2 alpha ln(rho_t n_total)}.

    Args:
        n_total: Acceptances so far, n(t)
        rho_t: Trust multiplier at the current step
        alpha: Exploration tendency

    Returns:
        Non-negative width driver; 0 when n_total is 0
    """
    if n_total <= 0:
        return 0.0
    return max(0.0, 2.0 * alpha * math.log(rho_t * n_total))


def rho_linear(t: int, n_total: int) -> float:
    """rho_t = 1 + n(t)/t, always in [1, 2]."""
    return 1.0 + n_total / t


class RhoPolicy:
    """Maps (step index t, acceptances n(t)) to the trust multiplier rho_t."""

    kind = "abstract"
    lower = 1.0
    upper = 1.0

    def __call__(self, t: int, n_total: int) -> float:
        raise NotImplementedError

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind}

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RhoPolicy) and self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.to_dict().items())))


class ConstantRho(RhoPolicy):
    """rho_t fixed at a single value."""

    kind = "constant"

    def __init__(self, value: float = 1.0):
        if not value > 0:
            raise ConfigurationError(f"constant rho must be positive, got {value}")
        self.value = float(value)
        self.lower = self.upper = self.value

    def __call__(self, t: int, n_total: int) -> float:
        return self.value

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "value": self.value}

    def __repr__(self) -> str:
        return f"ConstantRho({self.value})"


class LinearAcceptanceRho(RhoPolicy):
    """rho_t = 1 + n(t)/t, i.e. one plus the acceptance rate so far."""

    kind = "linear_acceptance"
    lower = 1.0
    upper = 2.0

    def __call__(self, t: int, n_total: int) -> float:
        return rho_linear(t, n_total)

    def __repr__(self) -> str:
        return "LinearAcceptanceRho()"


def rho_policy_from_spec(spec: Union[str, Dict[str, Any], RhoPolicy]) -> RhoPolicy:
    """
    Build a rho policy from its config or flag form.

    Accepted forms: a RhoPolicy, {"kind": "constant", "value": v},
    {"kind": "linear_acceptance"}, "linear", "constant:<v>".
    """
    if isinstance(spec, RhoPolicy):
        return spec
    if isinstance(spec, str):
        kind, _, value = spec.partition(":")
        try:
            spec = {"kind": kind, "value": float(value) if value else 1.0}
        except ValueError:
            raise ConfigurationError(f"invalid rho value in {spec!r}") from None
    kind = spec.get("kind")
    if kind in ("linear", "linear_acceptance"):
        return LinearAcceptanceRho()
    if kind == "constant":
        try:
            value = float(spec.get("value", 1.0))
        except (TypeError, ValueError):
            raise ConfigurationError(f"invalid rho value in {spec!r}") from None
        return ConstantRho(value)
    raise ConfigurationError(f"unknown rho policy {kind!r}; expected 'constant' or 'linear_acceptance'")


@dataclass(frozen=True)
class UserParams:
    """
    Behaviour parameters of the explorative user.

    Attributes:
        alpha: Exploration tendency, > 0
        rho_policy: Trust multiplier policy with range [rho0, rho1]
        noise_p: Probability of a random decision, in [0, 1)
    """

    alpha: float = 1.0
    rho_policy: RhoPolicy = LinearAcceptanceRho()
    noise_p: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.rho0 <= self.rho1 < math.inf:
            raise ConfigurationError(f"need 0 < rho0 <= rho1 < inf, got [{self.rho0}, {self.rho1}]")
        if not 0.0 <= self.noise_p < 1.0:
            raise ConfigurationError(f"noise_p must lie in [0, 1), got {self.noise_p}")

    @property
    def rho0(self) -> float:
        return self.rho_policy.lower

    @property
    def rho1(self) -> float:
        return self.rho_policy.upper


@dataclass
class UserState:
    """
    Running statistics of the user.

    Attributes:
        t: Interactions so far, accepted or rejected
        accept_counts: Acceptances per arm
        reward_sums: Sum of realized rewards per arm
        n_total: Total acceptances
    """

    t: int
    accept_counts: np.ndarray
    reward_sums: np.ndarray
    n_total: int = 0

    @classmethod
    def fresh(cls, n_arms: int) -> "UserState":
        return cls(t=0, accept_counts=np.zeros(n_arms, dtype=np.int64), reward_sums=np.zeros(n_arms))

    @property
    def n_arms(self) -> int:
        return len(self.accept_counts)

    def empirical_means(self) -> np.ndarray:
        """Empirical mean per arm; nan for arms never accepted."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.accept_counts > 0, self.reward_sums / np.maximum(self.accept_counts, 1), np.nan)

    def max_empirical_mean(self) -> float:
        """Highest empirical mean among accepted arms; -inf when none."""
        means = self.empirical_means()
        visited = self.accept_counts > 0
        return float(means[visited].max()) if visited.any() else -math.inf

    def copy(self) -> "UserState":
        return UserState(
            t=self.t,
            accept_counts=self.accept_counts.copy(),
            reward_sums=self.reward_sums.copy(),
            n_total=self.n_total,
        )

    def to_dict(self) -> Dict[str, Any]:
        """JSON snapshot {t, accept_counts, reward_sums}."""
        return {
            "t": self.t,
            "accept_counts": [int(count) for count in self.accept_counts],
            "reward_sums": [float(total) for total in self.reward_sums],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "UserState":
        counts = np.asarray(data["accept_counts"], dtype=np.int64)
        return cls(
            t=int(data["t"]),
            accept_counts=counts,
            reward_sums=np.asarray(data["reward_sums"], dtype=float),
            n_total=int(counts.sum()),
        )


class Verdict(Enum):
    ACCEPT = "A"
    REJECT = "R"


@dataclass(frozen=True)
class Decision:
    """
    Outcome of one recommendation.

    Attributes:
        verdict: Accept or Reject
        via_noise: True when the verdict came from the random-decision branch
        gamma: Width driver in force when the decision was taken
    """

    verdict: Verdict
    via_noise: bool = False
    gamma: float = 0.0

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT


def _check_arm(state: UserState, arm: int) -> None:
    if not 0 <= arm < state.n_arms:
        raise ArmOutOfRange(f"arm {arm} outside [0, {state.n_arms})")


def current_gamma(state: UserState, params: UserParams) -> float:
    """Gamma for the pending interaction: rho at step t+1 with counts before it."""
    rho_t = params.rho_policy(state.t + 1, state.n_total)
    return gamma(state.n_total, rho_t, params.alpha)


def confidence_bounds(state: UserState, params: UserParams, width_driver: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lower and upper confidence bounds of every arm.

    Unvisited arms get (-inf, +inf).
    """
    driver = current_gamma(state, params) if width_driver is None else width_driver
    counts = state.accept_counts
    visited = counts > 0
    safe_counts = np.maximum(counts, 1)
    means = state.reward_sums / safe_counts
    widths = np.sqrt(driver / safe_counts)
    lcb = np.where(visited, means - widths, -np.inf)
    ucb = np.where(visited, means + widths, np.inf)
    return lcb, ucb


def confidence_interval(state: UserState, params: UserParams, arm: int) -> Tuple[float, float]:
    """
    Confidence interval of one arm.

    Args:
        state: User state
        params: User parameters
        arm: Arm index

    Returns:
        (lcb, ucb); (-inf, +inf) when the arm was never accepted

    Raises:
        ArmOutOfRange
    """
    _check_arm(state, arm)
    count = int(state.accept_counts[arm])
    if count == 0:
        return -math.inf, math.inf
    mean = state.reward_sums[arm] / count
    width = math.sqrt(current_gamma(state, params) / count)
    return float(mean - width), float(mean + width)


def decide(state: UserState, params: UserParams, arm: int) -> Decision:
    """
    Deterministic accept/reject rule.

    Reject iff some other arm j has lcb_j >= ucb_arm.

    Raises:
        ArmOutOfRange
    """
    _check_arm(state, arm)
    driver = current_gamma(state, params)
    lcb, ucb = confidence_bounds(state, params, driver)
    others = lcb.copy()
    others[arm] = -np.inf
    verdict = Verdict.REJECT if others.max() >= ucb[arm] else Verdict.ACCEPT
    return Decision(verdict=verdict, via_noise=False, gamma=driver)


def decide_noisy(state: UserState, params: UserParams, arm: int, rng: np.random.Generator) -> Decision:
    """
    Decision rule with click noise.

    With probability noise_p the verdict is a fair coin flip, otherwise
    decide() is followed. One uniform draw is always consumed, and a second
    one only on the noise branch.

    Raises:
        ArmOutOfRange
    """
    rule = decide(state, params, arm)
    if params.noise_p <= 0.0:
        return rule
    if rng.random() < params.noise_p:
        verdict = Verdict.ACCEPT if rng.random() < 0.5 else Verdict.REJECT
        return Decision(verdict=verdict, via_noise=True, gamma=rule.gamma)
    return rule


def record_interaction(state: UserState, arm: int, decision: Decision, reward: Optional[float] = None) -> UserState:
    """
    Apply one interaction to the state in place.

    Args:
        state: User state (mutated and returned)
        arm: Recommended arm
        decision: The user's decision
        reward: Realized reward, required iff accepted

    Returns:
        The updated state

    Raises:
        RewardMissing, RewardUnexpected, ArmOutOfRange
    """
    _check_arm(state, arm)
    if decision.accepted and reward is None:
        raise RewardMissing(f"acceptance of arm {arm} recorded without a reward")
    if not decision.accepted and reward is not None:
        raise RewardUnexpected(f"rejection of arm {arm} recorded with a reward")
    state.t += 1
    if decision.accepted:
        state.accept_counts[arm] += 1
        state.reward_sums[arm] += reward
        state.n_total += 1
    return state


class ExplorativeUser:
    """Stateful wrapper owning the user's parameters, state and decision stream."""

    def __init__(self, params: UserParams, n_arms: int, rng: Optional[np.random.Generator] = None):
        """
        Initialize a user with no experience.

        Args:
            params: Behaviour parameters
            n_arms: Number of arms K
            rng: Decision-noise stream (required when noise_p > 0)
        """
        if params.noise_p > 0 and rng is None:
            raise ConfigurationError("a noisy user needs a decision stream")
        self.params = params
        self.state = UserState.fresh(n_arms)
        self.rng = rng

    def confidence_interval(self, arm: int) -> Tuple[float, float]:
        return confidence_interval(self.state, self.params, arm)

    def decide(self, arm: int) -> Decision:
        if self.params.noise_p > 0:
            return decide_noisy(self.state, self.params, arm, self.rng)
        return decide(self.state, self.params, arm)

    def record(self, arm: int, decision: Decision, reward: Optional[float] = None) -> None:
        record_interaction(self.state, arm, decision, reward)

    def get_state_snapshot(self) -> Dict[str, Any]:
        return self.state.to_dict()

    def restore(self, state: UserState) -> None:
        self.state = state.copy()
