"""
Lower-Bound Probe

Builds the adversarial instance pair behind the delta^(-1/alpha) lower
bound and measures, by simulation, how often a policy cannot tell the two
instances apart within the first N0 acceptances.

Arm 0 is the arm whose mean differs between the two instances; arm 1 is the
common runner-up that is best on nu.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from scipy.stats import norm

from .bair import bair, ceil_count
from .bandit_instance import BanditInstance, make_instance
from .baselines import exp3, uniform_explore
from .exceptions import (
    BudgetBelowK,
    ConfigurationError,
    DegenerateConstruction,
    InvalidBudget,
    InvalidC,
    InvalidDelta,
    SessionHalted,
    UnknownAlgorithm,
)
from .seeding import ALGORITHM_IDS, SessionStreams, replication_seed
from .session import RecommendationSession
from .harness import parallel_map
from .track_and_stop import track_and_stop
from .user_model import LinearAcceptanceRho, RhoPolicy, UserParams, rho_policy_from_spec

logger = logging.getLogger(__name__)

PROBE_POLICIES = ("bair", "uni", "exp3", "ts")
MIN_PROBE_REPS = 100
# arm that stays best on nu and may be accepted repeatedly under the event
RUNNER_UP = 1


def n0(delta: float, alpha: float = 1.0, c: float = 0.25, rho0: float = 1.0, gap: float = 0.5) -> int:
    """
    Acceptance horizon N0 = max{delta^(-1/alpha + c) / rho0, (2 / gap^2) ln(1 / (4 delta))}, rounded up.

    Raises:
        InvalidC: c outside (0, 1/2)
        InvalidDelta: delta outside (0, 1/4)
    """
    if not 0.0 < c < 0.5:
        raise InvalidC(f"c must lie in (0, 1/2), got {c}")
    if not 0.0 < delta < 0.25:
        raise InvalidDelta(f"delta must lie in (0, 1/4), got {delta}")
    if not alpha > 0 or not rho0 > 0 or not gap > 0:
        raise ConfigurationError("alpha, rho0 and gap must be positive")
    acceptance_term = delta ** (-1.0 / alpha + c) / rho0
    concentration_term = (2.0 / gap ** 2) * math.log(1.0 / (4.0 * delta))
    return ceil_count(max(acceptance_term, concentration_term))


@dataclass(frozen=True)
class HardInstancePair:
    """
    Two instances that differ only in arm 0's mean.

    Attributes:
        nu: Instance with arm 0 at 1 + eps - d (arm 1 best)
        nu_prime: Instance with arm 0 at 1 + eps (arm 0 best)
        n0: Acceptance horizon N0
        d: Mean shift of arm 0 between the instances
        eps: Margin of arm 0 over arm 1 on nu_prime
        params: Construction parameters
    """

    nu: BanditInstance
    nu_prime: BanditInstance
    n0: int
    d: float
    eps: float
    params: Dict[str, float] = field(default_factory=dict)

    @property
    def n_arms(self) -> int:
        return self.nu.n_arms

    def to_dict(self) -> Dict[str, Any]:
        return {
            "nu": list(self.nu.arm_means),
            "nu_prime": list(self.nu_prime.arm_means),
            "n0": self.n0,
            "d": self.d,
            "eps": self.eps,
            "params": dict(self.params),
        }


def hard_instance_pair(
    n_arms: int,
    delta: float,
    alpha: float = 1.0,
    c: float = 0.25,
    rho0: float = 1.0,
    rho1: float = 2.0,
    gap: float = 0.5,
) -> HardInstancePair:
    """
    Build nu = (1 + eps - d, 1, -1/delta, ...) and nu' = (1 + eps, 1, -1/delta, ...).

    With M = N0 - K + 1:
        d = sqrt(2 alpha ln(rho1 N0)) (1 + 2 / sqrt(M)) + 2 sqrt(ln(2 M) / M)
        eps = sqrt(2 alpha ln(rho0 N0) / M)

    Raises:
        InvalidC, InvalidDelta
        BudgetBelowK: N0 <= K
        DegenerateConstruction: d <= eps, so both instances share a best arm
    """
    if n_arms < 2:
        raise ConfigurationError(f"K must be >= 2, got {n_arms}")
    if not 0 < rho0 <= rho1:
        raise ConfigurationError(f"need 0 < rho0 <= rho1, got [{rho0}, {rho1}]")
    horizon = n0(delta, alpha, c, rho0, gap)
    if horizon <= n_arms:
        raise BudgetBelowK(f"N0={horizon} does not exceed K={n_arms}; use a smaller delta")
    spare = horizon - n_arms + 1
    d = math.sqrt(2.0 * alpha * math.log(rho1 * horizon)) * (1.0 + 2.0 / math.sqrt(spare)) + 2.0 * math.sqrt(
        math.log(2.0 * spare) / spare
    )
    eps = math.sqrt(2.0 * alpha * math.log(rho0 * horizon) / spare)
    if not d > eps:
        raise DegenerateConstruction(f"d={d:.6g} <= eps={eps:.6g}; delta too large for the construction")

    tail = [-1.0 / delta] * (n_arms - 2)
    return HardInstancePair(
        nu=make_instance([1.0 + eps - d, 1.0] + tail),
        nu_prime=make_instance([1.0 + eps, 1.0] + tail),
        n0=horizon,
        d=d,
        eps=eps,
        params={"K": n_arms, "delta": delta, "alpha": alpha, "c": c, "rho0": rho0, "rho1": rho1, "gap": gap},
    )


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise InvalidBudget("Wilson interval needs at least one trial")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    share = successes / trials
    denominator = 1.0 + z * z / trials
    centre = (share + z * z / (2.0 * trials)) / denominator
    half = z * math.sqrt(share * (1.0 - share) / trials + z * z / (4.0 * trials * trials)) / denominator
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class ProbeRun:
    """
    One truncated run on nu and on nu' from the same seed.

    Attributes:
        seed: Replication seed shared by both runs
        event_nu: Only arm 1 accepted more than once on nu
        event_nu_prime: Same on nu'
        identical: Binary transcripts coincide
        first_reward_nu: Arm 0's first realized reward on nu (user-private)
        first_reward_nu_prime: Arm 0's first realized reward on nu'
        first_visits_accepted: Every arm's first recommendation was accepted in both runs
        coupled: Event held on both instances and arm 0's first reward fell
            below its mean on nu in both runs
    """

    seed: int
    event_nu: bool
    event_nu_prime: bool
    identical: bool
    first_reward_nu: Optional[float]
    first_reward_nu_prime: Optional[float]
    first_visits_accepted: bool
    coupled: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class ProbeStats:
    """Aggregate of a probe over its runs."""

    n0: int
    d: float
    eps: float
    reps: int
    freq_nu: float
    freq_nu_prime: float
    ci_nu: Tuple[float, float]
    ci_nu_prime: Tuple[float, float]
    identical_transcripts: int
    policy: str = "bair"
    coupled_runs: int = 0
    coupled_identical: int = 0
    runs: List[ProbeRun] = field(default_factory=list, repr=False)

    def to_dict(self, diagnostics: bool = False) -> Dict[str, Any]:
        data = {
            "n0": self.n0,
            "d": self.d,
            "eps": self.eps,
            "freq_nu": self.freq_nu,
            "freq_nu_prime": self.freq_nu_prime,
            "ci_nu": list(self.ci_nu),
            "ci_nu_prime": list(self.ci_nu_prime),
            "identical_transcripts": self.identical_transcripts,
            "coupled_runs": self.coupled_runs,
            "coupled_identical": self.coupled_identical,
            "reps": self.reps,
            "policy": self.policy,
        }
        if diagnostics:
            data["runs"] = [run.to_dict() for run in self.runs]
        return data


def _run_truncated(
    instance: BanditInstance,
    params: UserParams,
    seed: int,
    pair: HardInstancePair,
    policy: str,
) -> RecommendationSession:
    session = RecommendationSession(instance, params, SessionStreams.from_seed(seed, instance.n_arms), acceptance_cap=pair.n0)
    # the acceptance cap normally ends the run; the horizon only bounds the fixed-horizon policies
    horizon = max(100 * pair.n0, int(instance.n_arms * math.log(instance.n_arms)) + 1)
    try:
        if policy == "bair":
            bair(session, pair.params["delta"], assert_rounds=False)
        elif policy == "uni":
            uniform_explore(session, horizon)
        elif policy == "exp3":
            exp3(session, horizon)
        else:
            track_and_stop(session, pair.params["delta"])
    except SessionHalted:
        pass
    return session


def _event(session: RecommendationSession) -> bool:
    return all(count <= 1 for arm, count in enumerate(session.accepts_seen) if arm != RUNNER_UP)


def _first_visits_accepted(session: RecommendationSession) -> bool:
    seen = set()
    for entry in session.transcript:
        if entry.arm not in seen:
            if not entry.accepted:
                return False
            seen.add(entry.arm)
    return True


def probe_run(pair: HardInstancePair, params: UserParams, seed: int, policy: str = "bair") -> ProbeRun:
    """Run the policy on nu and on nu' with the same streams, truncated at N0 acceptances."""
    on_nu = _run_truncated(pair.nu, params, seed, pair, policy)
    on_nu_prime = _run_truncated(pair.nu_prime, params, seed, pair, policy)
    event_nu, event_nu_prime = _event(on_nu), _event(on_nu_prime)
    reward_nu = on_nu.first_rewards.get(0)
    reward_nu_prime = on_nu_prime.first_rewards.get(0)
    low = pair.nu.arm_means[0]
    return ProbeRun(
        seed=seed,
        event_nu=event_nu,
        event_nu_prime=event_nu_prime,
        identical=on_nu.transcript.binary_signature() == on_nu_prime.transcript.binary_signature(),
        first_reward_nu=reward_nu,
        first_reward_nu_prime=reward_nu_prime,
        first_visits_accepted=_first_visits_accepted(on_nu) and _first_visits_accepted(on_nu_prime),
        coupled=(
            event_nu
            and event_nu_prime
            and reward_nu is not None
            and reward_nu_prime is not None
            and reward_nu < low
            and reward_nu_prime < low
        ),
    )


def _probe_job(job: Tuple[HardInstancePair, UserParams, int, str]) -> ProbeRun:
    pair, params, seed, policy = job
    return probe_run(pair, params, seed, policy)


def indistinguishability_probe(
    pair: HardInstancePair,
    policy: str = "bair",
    reps: int = 10000,
    seed: int = 0,
    rho_policy: Any = None,
    noise_p: float = 0.0,
    workers: Optional[int] = None,
    progress: bool = False,
) -> ProbeStats:
    """
    Estimate how often only arm 1 is accepted more than once within N0 acceptances.

    Both instances are run from the same replication seed, so every arm
    draws the same noise sequence on nu and nu'.

    Args:
        pair: Instance pair from hard_instance_pair()
        policy: Probed system policy, one of PROBE_POLICIES
        reps: Number of paired runs, >= 100
        seed: Master seed
        rho_policy: User trust policy; its range must lie within [rho0, rho1]
        noise_p: User click noise
        workers: Worker processes (1: inline)
        progress: Show a tqdm progress bar

    Returns:
        ProbeStats with Wilson 95% intervals

    Raises:
        InvalidBudget: reps < 100
        UnknownAlgorithm, ConfigurationError
    """
    if reps < MIN_PROBE_REPS:
        raise InvalidBudget(f"probe needs reps >= {MIN_PROBE_REPS}, got {reps}")
    if policy not in PROBE_POLICIES:
        raise UnknownAlgorithm(f"unknown policy {policy!r}; valid names: {', '.join(PROBE_POLICIES)}")
    rho: RhoPolicy = LinearAcceptanceRho() if rho_policy is None else rho_policy_from_spec(rho_policy)
    if rho.lower < pair.params["rho0"] or rho.upper > pair.params["rho1"]:
        raise ConfigurationError(
            f"rho policy range [{rho.lower}, {rho.upper}] exceeds construction range "
            f"[{pair.params['rho0']}, {pair.params['rho1']}]"
        )
    params = UserParams(alpha=pair.params["alpha"], rho_policy=rho, noise_p=noise_p)
    jobs = [(pair, params, replication_seed(seed, 0, rep, ALGORITHM_IDS["probe"]), policy) for rep in range(reps)]
    runs: List[ProbeRun] = parallel_map(_probe_job, jobs, workers=workers, progress=progress, description="lower-bound probe")

    hits_nu = sum(run.event_nu for run in runs)
    hits_nu_prime = sum(run.event_nu_prime for run in runs)
    stats = ProbeStats(
        n0=pair.n0,
        d=pair.d,
        eps=pair.eps,
        reps=reps,
        freq_nu=hits_nu / reps,
        freq_nu_prime=hits_nu_prime / reps,
        ci_nu=wilson_interval(hits_nu, reps),
        ci_nu_prime=wilson_interval(hits_nu_prime, reps),
        identical_transcripts=sum(run.identical for run in runs),
        policy=policy,
        coupled_runs=sum(run.coupled for run in runs),
        coupled_identical=sum(run.coupled and run.identical for run in runs),
        runs=runs,
    )
    logger.info(
        "probe: freq_nu=%.4g freq_nu_prime=%.4g identical=%d/%d coupled=%d (identical %d)",
        stats.freq_nu, stats.freq_nu_prime, stats.identical_transcripts, reps,
        stats.coupled_runs, stats.coupled_identical,
    )
    return stats
