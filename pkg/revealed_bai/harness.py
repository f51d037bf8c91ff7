"""
Experiment Harness

Seeded replication runs, budget matching for the fixed-horizon baselines,
the shared-Phase-1 ablation and metric aggregation.

Replications run in a process pool. Records are always reduced in
(instance, replication) order, so results do not depend on the worker count.
"""

import logging
import math
import multiprocessing
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .bair import PHASE1_STOP_RULES, bair, default_m, default_n1, phase1_sweep, phase2_eliminate
from .bandit_instance import REWARD_FAMILIES, BanditInstance, generate_instance_batch
from .baselines import UNI_SCHEDULES, exp3, uniform_explore
from .exceptions import (
    ConfigurationError,
    EmptyAlgorithmList,
    InstanceMismatch,
    InvalidBudget,
    InvalidDelta,
    InvalidGap,
    InvariantViolation,
    UnknownAlgorithm,
)
from .outcomes import AlgorithmOutcome, Termination
from .seeding import ALGORITHM_IDS, SessionStreams, replication_seed
from .session import RecommendationSession
from .track_and_stop import track_and_stop
from .user_model import LinearAcceptanceRho, RhoPolicy, UserParams, rho_policy_from_spec

logger = logging.getLogger(__name__)

ALGORITHMS = ("bair", "uni", "exp3", "ts")
FIXED_HORIZON = ("uni", "exp3")
BUDGET_MATCHING = ("instance", "cell")


@dataclass(frozen=True)
class ExperimentCell:
    """
    One (delta, K, gap) configuration of an experiment grid.

    Attributes:
        delta: Confidence parameter
        n_arms: Number of arms K
        gap: Best-minus-second-best gap of generated instances
        alpha: User exploration tendency
        rho_policy: User trust multiplier policy
        noise_p: User click-noise probability
        algorithms: Policies to compare, subset of ALGORITHMS
        replications: Number of generated problem instances
        master_seed: Seed of the instance batch and every replication
        n1_override: Phase-1 budget for BAIR (default: default_n1)
        m_override: Phase-2 elimination threshold (default: default_m)
        runs_per_instance: Replications on each instance
        phase1_stop: 'acceptances' or 'steps' reading of the Phase-1 budget
        uni_schedule: 'random' or 'round_robin'
        budget_matching: 'instance' or 'cell' mean of BAIR stopping times
        coupled: Share random streams across algorithms on an instance
        reward_family: Reward noise law
        ts_refresh_every: Steps between Track-and-Stop weight refreshes
        ts_warm_start: In the shared-Phase-1 ablation, seed Track-and-Stop
            with the Phase-1 accept/reject counts
        max_steps: Step cap on BAIR runs (None: uncapped)
        shared_phase1: Run the shared-Phase-1 ablation instead of the comparison
        label: Free-form tag carried into reports
    """

    delta: float
    n_arms: int
    gap: float = 0.5
    alpha: float = 1.0
    rho_policy: RhoPolicy = LinearAcceptanceRho()
    noise_p: float = 0.0
    algorithms: Tuple[str, ...] = ALGORITHMS
    replications: int = 1000
    master_seed: int = 0
    n1_override: Optional[int] = None
    m_override: Optional[int] = None
    runs_per_instance: int = 1
    phase1_stop: str = "acceptances"
    uni_schedule: str = "random"
    budget_matching: str = "instance"
    coupled: bool = False
    reward_family: str = "gaussian"
    ts_refresh_every: int = 10
    ts_warm_start: bool = False
    max_steps: Optional[int] = None
    shared_phase1: bool = False
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rho_policy", rho_policy_from_spec(self.rho_policy))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not 0.0 < self.delta < 1.0:
            raise InvalidDelta(f"delta must lie in (0, 1), got {self.delta}")
        if self.n_arms < 2:
            raise ConfigurationError(f"K must be >= 2, got {self.n_arms}")
        if not self.gap > 0:
            raise InvalidGap(f"gap must be positive, got {self.gap}")
        if not self.algorithms:
            raise EmptyAlgorithmList("cell lists no algorithms")
        unknown = [name for name in self.algorithms if name not in ALGORITHMS]
        if unknown:
            raise UnknownAlgorithm(f"unknown algorithm(s) {unknown}; valid names: {', '.join(ALGORITHMS)}")
        if self.replications < 1 or self.runs_per_instance < 1:
            raise InvalidBudget("replications and runs_per_instance must be >= 1")
        if self.phase1_stop not in PHASE1_STOP_RULES:
            raise ConfigurationError(f"phase1_stop must be one of {PHASE1_STOP_RULES}")
        if self.uni_schedule not in UNI_SCHEDULES:
            raise ConfigurationError(f"uni_schedule must be one of {UNI_SCHEDULES}")
        if self.budget_matching not in BUDGET_MATCHING:
            raise ConfigurationError(f"budget_matching must be one of {BUDGET_MATCHING}")
        if self.max_steps is not None and self.max_steps < 1:
            raise InvalidBudget(f"max_steps must be >= 1, got {self.max_steps}")
        if self.reward_family not in REWARD_FAMILIES:
            raise ConfigurationError(f"reward_family must be one of {sorted(REWARD_FAMILIES)}")
        # validates alpha, rho range and noise_p
        self.user_params

    @property
    def user_params(self) -> UserParams:
        return UserParams(alpha=self.alpha, rho_policy=self.rho_policy, noise_p=self.noise_p)

    @property
    def n1(self) -> int:
        if self.n1_override is not None:
            return self.n1_override
        return default_n1(self.n_arms, self.delta, self.alpha, self.user_params.rho0)

    @property
    def m(self) -> int:
        return self.m_override if self.m_override is not None else default_m(self.n_arms, self.delta, self.noise_p)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["rho_policy"] = self.rho_policy.to_dict()
        data["algorithms"] = list(self.algorithms)
        data["n1"] = self.n1
        data["m"] = self.m
        return data


@dataclass(frozen=True)
class ReplicationRecord:
    """
    One policy run on one instance.

    prefix_steps and prefix_rejections cover interaction that happened before
    the policy took over (the shared Phase-1); they count toward the
    rejection rate but not toward the stopping time.
    """

    instance_index: int
    replication_index: int
    algorithm: str
    seed: int
    outcome: AlgorithmOutcome
    success: bool
    horizon: Optional[int] = None
    prefix_steps: int = 0
    prefix_rejections: int = 0

    @property
    def rejection_rate(self) -> float:
        steps = self.outcome.total_steps + self.prefix_steps
        return (self.outcome.total_rejections + self.prefix_rejections) / steps if steps else 0.0


@dataclass(frozen=True)
class AlgorithmSummary:
    """Aggregated metrics of one algorithm in one cell."""

    algorithm: str
    replications: int
    success_rate: float
    failure_ratio: float
    mean_stop_time: float
    stop_time_se: float
    mean_rejection_rate: float


@dataclass
class MetricsSummary:
    """Per-algorithm metrics of a cell, in the cell's algorithm order."""

    cell: ExperimentCell
    rows: List[AlgorithmSummary] = field(default_factory=list)
    shared_phase1: bool = False

    def row(self, algorithm: str) -> AlgorithmSummary:
        for row in self.rows:
            if row.algorithm == algorithm:
                return row
        raise KeyError(algorithm)


def _seed(cell: ExperimentCell, instance_index: int, replication_index: int, algorithm: str) -> int:
    algorithm_id = 0 if cell.coupled else ALGORITHM_IDS[algorithm]
    return replication_seed(cell.master_seed, instance_index, replication_index, algorithm_id)


def _session(
    cell: ExperimentCell, instance: BanditInstance, seed: int, step_cap: Optional[int] = None
) -> RecommendationSession:
    streams = SessionStreams.from_seed(seed, instance.n_arms)
    return RecommendationSession(instance, cell.user_params, streams, step_cap=step_cap, record_transcript=False)


def admissible_horizon(algorithm: str, n_arms: int, horizon: int) -> int:
    """Raise an EXP3 horizon to the smallest T above K ln K; others pass through."""
    horizon = max(1, int(horizon))
    if algorithm == "exp3":
        horizon = max(horizon, int(math.floor(n_arms * math.log(n_arms))) + 1)
    return horizon


def run_policy(
    session: RecommendationSession,
    cell: ExperimentCell,
    algorithm: str,
    horizon: Optional[int],
    ts_prior: Optional[Tuple[Sequence[int], Sequence[int]]] = None,
) -> AlgorithmOutcome:
    if algorithm == "bair":
        return bair(session, cell.delta, n1=cell.n1, m=cell.m, phase1_stop=cell.phase1_stop)
    if algorithm == "ts":
        prior_counts, prior_successes = ts_prior if ts_prior is not None else (None, None)
        return track_and_stop(
            session, cell.delta, refresh_every=cell.ts_refresh_every,
            prior_counts=prior_counts, prior_successes=prior_successes,
        )
    if horizon is None:
        raise InvalidBudget(f"{algorithm} needs a horizon")
    horizon = admissible_horizon(algorithm, session.n_arms, horizon)
    if algorithm == "uni":
        return uniform_explore(session, horizon, schedule=cell.uni_schedule)
    return exp3(session, horizon)


def run_replication(
    cell: ExperimentCell,
    instance: BanditInstance,
    algorithm: str,
    seed: int,
    horizon: Optional[int] = None,
    instance_index: int = 0,
    replication_index: int = 0,
) -> ReplicationRecord:
    """
    Run one policy on one instance against a fresh explorative user.

    Args:
        cell: Experiment cell supplying user and algorithm parameters
        instance: Problem instance
        algorithm: One of ALGORITHMS
        seed: Replication seed
        horizon: T for the fixed-horizon baselines
        instance_index: Stored in the record
        replication_index: Stored in the record

    Returns:
        ReplicationRecord with the success flag filled in

    Raises:
        InstanceMismatch: instance K differs from the cell's
        UnknownAlgorithm
    """
    if instance.n_arms != cell.n_arms:
        raise InstanceMismatch(f"cell has K={cell.n_arms} but instance has K={instance.n_arms}")
    if algorithm not in ALGORITHMS:
        raise UnknownAlgorithm(f"unknown algorithm {algorithm!r}; valid names: {', '.join(ALGORITHMS)}")
    step_cap = cell.max_steps if algorithm == "bair" else None
    outcome = run_policy(_session(cell, instance, seed, step_cap), cell, algorithm, horizon)
    return ReplicationRecord(
        instance_index=instance_index,
        replication_index=replication_index,
        algorithm=algorithm,
        seed=seed,
        outcome=outcome,
        success=outcome.chosen_arm == instance.best_arm,
        horizon=horizon,
    )


def parallel_map(
    worker: Callable[[Any], Any],
    jobs: Sequence[Any],
    workers: Optional[int] = None,
    progress: bool = False,
    description: str = "",
) -> List[Any]:
    """
    Map a module-level worker over jobs in a process pool.

    Results come back in job order. workers=1 (or a single job) runs inline;
    None uses every core.
    """
    bar = tqdm(total=len(jobs), desc=description, disable=not progress, leave=False)
    try:
        if workers == 1 or len(jobs) < 2:
            results = []
            for job in jobs:
                results.append(worker(job))
                bar.update()
            return results
        processes = workers or os.cpu_count() or 1
        chunksize = max(1, len(jobs) // (4 * processes))
        with multiprocessing.Pool(processes=processes) as pool:
            results = []
            for result in pool.imap(worker, jobs, chunksize=chunksize):
                results.append(result)
                bar.update()
            return results
    finally:
        bar.close()


def _replication_job(job: Tuple[ExperimentCell, BanditInstance, str, int, int, Optional[int]]) -> ReplicationRecord:
    cell, instance, algorithm, index, rep, horizon = job
    return run_replication(
        cell, instance, algorithm, _seed(cell, index, rep, algorithm),
        horizon=horizon, instance_index=index, replication_index=rep,
    )


def summarize(algorithm: str, records: Sequence[ReplicationRecord], delta: float) -> AlgorithmSummary:
    """Aggregate records of one algorithm; records must already be in reduction order."""
    steps = np.array([record.outcome.total_steps for record in records], dtype=float)
    rates = np.array([record.rejection_rate for record in records], dtype=float)
    success_rate = float(np.mean([record.success for record in records]))
    stop_se = float(steps.std(ddof=1) / math.sqrt(len(steps))) if len(steps) > 1 else 0.0
    return AlgorithmSummary(
        algorithm=algorithm,
        replications=len(records),
        success_rate=success_rate,
        failure_ratio=(1.0 - success_rate) / delta,
        mean_stop_time=float(steps.mean()),
        stop_time_se=stop_se,
        mean_rejection_rate=float(rates.mean()),
    )


def _ordered(records: Sequence[ReplicationRecord]) -> List[ReplicationRecord]:
    return sorted(records, key=lambda record: (record.instance_index, record.replication_index))


def matched_horizons(cell: ExperimentCell, bair_records: Sequence[ReplicationRecord]) -> Dict[int, int]:
    """
    Horizon T per instance for the fixed-horizon baselines.

    'instance' matching uses the mean BAIR stopping time on that instance,
    'cell' matching the mean over the whole cell.
    """
    by_instance: Dict[int, List[int]] = {}
    for record in _ordered(bair_records):
        by_instance.setdefault(record.instance_index, []).append(record.outcome.total_steps)
    if cell.budget_matching == "cell":
        overall = int(round(np.mean([step for steps in by_instance.values() for step in steps])))
        return {index: max(1, overall) for index in by_instance}
    return {index: max(1, int(round(np.mean(steps)))) for index, steps in by_instance.items()}


def run_cell(cell: ExperimentCell, workers: Optional[int] = None, progress: bool = False) -> MetricsSummary:
    """
    Run every algorithm of a cell over its instance batch.

    Pass 1 runs BAIR and Track-and-Stop, which stop on their own. Pass 2
    runs UNI and EXP3 with the horizon matched to BAIR's stopping time.
    BAIR runs whenever a fixed-horizon baseline needs its horizon, even
    when it is not itself reported.

    Args:
        cell: Experiment cell
        workers: Worker processes (None: every core, 1: inline)
        progress: Show tqdm progress bars

    Returns:
        MetricsSummary in the cell's algorithm order
    """
    instances = generate_instance_batch(cell.n_arms, cell.gap, cell.replications, cell.master_seed, cell.reward_family)
    keys = [(index, rep) for index in range(len(instances)) for rep in range(cell.runs_per_instance)]
    needs_bair = "bair" in cell.algorithms or any(name in FIXED_HORIZON for name in cell.algorithms)
    first_pass = ["bair"] if needs_bair else []
    if "ts" in cell.algorithms:
        first_pass.append("ts")

    jobs = [(cell, instances[index], name, index, rep, None) for name in first_pass for index, rep in keys]
    records = parallel_map(_replication_job, jobs, workers, progress, f"K={cell.n_arms} delta={cell.delta} pass 1")
    by_algorithm: Dict[str, List[ReplicationRecord]] = {}
    for record in records:
        by_algorithm.setdefault(record.algorithm, []).append(record)

    second_pass = [name for name in cell.algorithms if name in FIXED_HORIZON]
    if second_pass:
        horizons = matched_horizons(cell, by_algorithm["bair"])
        jobs = [(cell, instances[index], name, index, rep, horizons[index]) for name in second_pass for index, rep in keys]
        for record in parallel_map(_replication_job, jobs, workers, progress, f"K={cell.n_arms} delta={cell.delta} pass 2"):
            by_algorithm.setdefault(record.algorithm, []).append(record)

    summary = MetricsSummary(cell=cell)
    for name in cell.algorithms:
        summary.rows.append(summarize(name, _ordered(by_algorithm[name]), cell.delta))
    logger.info("cell K=%d delta=%g done", cell.n_arms, cell.delta)
    return summary


def _shared_phase1_replication(cell: ExperimentCell, instance: BanditInstance, index: int, rep: int) -> List[ReplicationRecord]:
    """One shared-Phase-1 replication: BAIR Phase-2 plus each contender from the same user state."""
    seed = _seed(cell, index, rep, "bair")
    session = _session(cell, instance, seed)
    phase1, _ = phase1_sweep(session, cell.n1, stop_on=cell.phase1_stop)
    snapshot = session.snapshot()
    boundary = session.steps
    prefix = {"prefix_steps": snapshot.steps, "prefix_rejections": snapshot.rejections}
    chosen, _ = phase2_eliminate(session, phase1.accept_counts, cell.m)
    phase2_accepts = session.accepts_seen - np.asarray(snapshot.accepts_seen)
    bair_outcome = AlgorithmOutcome(
        chosen_arm=chosen,
        total_steps=session.steps - boundary,
        total_rejections=session.rejections - snapshot.rejections,
        per_arm_accepts=tuple(int(count) for count in phase2_accepts),
        termination=Termination.IDENTIFIED,
        phase_boundary=boundary,
    )
    records = []
    if "bair" in cell.algorithms:
        records.append(ReplicationRecord(index, rep, "bair", seed, bair_outcome, chosen == instance.best_arm, **prefix))

    horizon = bair_outcome.total_steps
    ts_prior = None
    if cell.ts_warm_start:
        pulls = [accepts + rejects for accepts, rejects in zip(phase1.accept_counts, phase1.reject_counts)]
        ts_prior = (pulls, list(phase1.accept_counts))
    for algorithm in cell.algorithms:
        if algorithm == "bair":
            continue
        contender = _session(cell, instance, seed)
        contender.restore(snapshot)
        if contender.user.state.to_dict() != snapshot.user_state.to_dict():
            raise InvariantViolation("restored user state differs from the Phase-1 snapshot")
        contender.streams = contender.streams.with_policy_stream(_seed(cell, index, rep, algorithm))
        outcome = run_policy(contender, cell, algorithm, horizon, ts_prior=ts_prior)
        records.append(
            ReplicationRecord(
                index, rep, algorithm, seed, outcome, outcome.chosen_arm == instance.best_arm,
                horizon=horizon if algorithm in FIXED_HORIZON else None, **prefix,
            )
        )
    return records


def _shared_phase1_job(job: Tuple[ExperimentCell, BanditInstance, int, int]) -> List[ReplicationRecord]:
    cell, instance, index, rep = job
    return _shared_phase1_replication(cell, instance, index, rep)


def run_shared_phase1_cell(cell: ExperimentCell, workers: Optional[int] = None, progress: bool = False) -> MetricsSummary:
    """
    Shared-Phase-1 ablation.

    Each replication runs Phase-1 once, continues with BAIR's Phase-2, and
    replays every other algorithm from the identical post-Phase-1 user
    state. UNI and EXP3 get BAIR's Phase-2 stopping time as horizon.
    Contenders start without Phase-1 statistics unless ts_warm_start hands
    Track-and-Stop the Phase-1 accept/reject counts. Stop times cover
    Phase-2 only; rejection rates cover the whole run, Phase-1 included.

    Args:
        cell: Experiment cell
        workers: Worker processes
        progress: Show tqdm progress bars

    Returns:
        MetricsSummary with shared_phase1 set
    """
    instances = generate_instance_batch(cell.n_arms, cell.gap, cell.replications, cell.master_seed, cell.reward_family)
    jobs = [(cell, instances[index], index, rep) for index in range(len(instances)) for rep in range(cell.runs_per_instance)]
    batches = parallel_map(
        _shared_phase1_job, jobs, workers, progress, f"K={cell.n_arms} delta={cell.delta} shared phase 1",
    )
    by_algorithm: Dict[str, List[ReplicationRecord]] = {}
    for batch in batches:
        for record in batch:
            by_algorithm.setdefault(record.algorithm, []).append(record)
    summary = MetricsSummary(cell=cell, shared_phase1=True)
    for name in cell.algorithms:
        summary.rows.append(summarize(name, _ordered(by_algorithm[name]), cell.delta))
    return summary


def run_experiment(cell: ExperimentCell, workers: Optional[int] = None, progress: bool = False) -> MetricsSummary:
    """Run a cell in the mode it asks for."""
    runner = run_shared_phase1_cell if cell.shared_phase1 else run_cell
    return runner(cell, workers=workers, progress=progress)
