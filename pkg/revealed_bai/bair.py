"""
BAIR

Best arm identification from revealed preferences: a sweeping phase that
lets the user accumulate enough accepted experience, followed by an
elimination phase driven by the user's rejections.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

from .exceptions import InvalidBudget, InvalidDelta, InvariantViolation, SessionHalted
from .outcomes import AlgorithmOutcome, Phase1Output, RoundRecord, Termination
from .session import RecommendationSession, Transcript

logger = logging.getLogger(__name__)

PHASE1_STOP_RULES = ("acceptances", "steps")


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise InvalidDelta(f"delta must lie in (0, 1), got {delta}")


def ceil_count(value: float) -> int:
    """Round up, ignoring relative representation error below 1e-12."""
    # Absorbs representation error such as 4 / 0.1 landing just above 40.
    return int(math.ceil(value * (1.0 - 1e-12)))


def default_n1(n_arms: int, delta: float, alpha: float = 1.0, rho0: float = 1.0) -> int:
    """
    Phase-1 acceptance budget (1/rho0) (2K/delta)^(1/alpha), rounded up.

    Args:
        n_arms: K >= 2
        delta: Confidence parameter in (0, 1)
        alpha: User exploration tendency
        rho0: Lower bound of the user's trust multiplier

    Returns:
        Positive integer, at least K

    Raises:
        InvalidDelta
    """
    _check_delta(delta)
    budget = (2.0 * n_arms / delta) ** (1.0 / alpha) / rho0
    return max(n_arms, ceil_count(budget))


def default_m(n_arms: int, delta: float, noise_p: float = 0.0) -> int:
    """
    Rejections needed to eliminate an arm in Phase-2.

    Returns 1 for a noiseless user, otherwise ceil(2 ln(K/delta)).

    Raises:
        InvalidDelta
    """
    _check_delta(delta)
    if noise_p <= 0.0:
        return 1
    return ceil_count(2.0 * math.log(n_arms / delta))


def _phase_transcript(session: RecommendationSession, first_step: int) -> Transcript:
    return Transcript([entry for entry in session.transcript if entry.step > first_step])


def phase1_sweep(
    session: RecommendationSession,
    n1: int,
    stop_on: str = "acceptances",
    assert_rounds: bool = True,
) -> Tuple[Phase1Output, Transcript]:
    """
    Sweeping phase.

    Initialization sweeps the candidate set, recommending each member once
    and dropping rejected arms, until the set is empty. The main loop then
    resets the candidate set to all arms each round and recommends every
    arm until it is rejected. The phase stops as soon as the budget is met,
    possibly mid-round.

    Args:
        session: Interaction session
        n1: Budget, counted in acceptances (default) or in steps
        stop_on: 'acceptances' or 'steps'
        assert_rounds: Check the per-round decrease of the user's highest
            empirical mean on every completed round (noiseless users only)

    Returns:
        (Phase1Output, transcript of the phase)

    Raises:
        InvalidBudget: n1 < 1 or unknown stop rule
        InvariantViolation: a completed round failed the decrease check
    """
    if n1 < 1:
        raise InvalidBudget(f"N1 must be >= 1, got {n1}")
    if stop_on not in PHASE1_STOP_RULES:
        raise InvalidBudget(f"unknown Phase-1 stop rule {stop_on!r}; expected one of {PHASE1_STOP_RULES}")

    n_arms = session.n_arms
    first_step = session.steps
    output = Phase1Output(accept_counts=[0] * n_arms, reject_counts=[0] * n_arms, init_reject_counts=[0] * n_arms)
    check = assert_rounds and session.user.params.noise_p == 0.0

    def reached() -> bool:
        used = output.total_acceptances if stop_on == "acceptances" else session.steps - first_step
        return used >= n1

    def visit(arm: int) -> bool:
        accepted = session.recommend(arm)
        if accepted:
            output.accept_counts[arm] += 1
        else:
            output.reject_counts[arm] += 1
        return accepted

    candidates = list(range(n_arms))
    while candidates and not reached():
        kept = []
        for arm in candidates:
            if visit(arm):
                kept.append(arm)
            else:
                output.init_reject_counts[arm] += 1
            if reached():
                break
        candidates = kept

    while not reached():
        start_step = session.steps
        start_max = session.user.state.max_empirical_mean()
        min_gamma = math.inf
        completed = True
        for arm in range(n_arms):
            while True:
                accepted = visit(arm)
                min_gamma = min(min_gamma, session.last_decision.gamma)
                if not accepted or reached():
                    break
            if reached() and (accepted or arm < n_arms - 1):
                completed = False
                break
        if not completed:
            break
        record = RoundRecord(
            start_step=start_step,
            end_step=session.steps,
            start_max_empirical_mean=start_max,
            end_max_empirical_mean=session.user.state.max_empirical_mean(),
            min_gamma_in_round=min_gamma,
            acceptances_at_end=session.user.state.n_total,
        )
        output.rounds.append(record)
        if check and record.min_gamma_in_round > 0 and not record.decrease_holds():
            raise InvariantViolation(
                f"round {len(output.rounds)}: highest empirical mean went "
                f"{record.start_max_empirical_mean:.6g} -> {record.end_max_empirical_mean:.6g}, "
                f"required decrease {record.required_decrease:.6g}"
            )

    output.total_steps = session.steps - first_step
    logger.debug(
        "phase 1 done: %d steps, %d acceptances, %d rounds",
        output.total_steps, output.total_acceptances, len(output.rounds),
    )
    return output, _phase_transcript(session, first_step)


def phase2_eliminate(
    session: RecommendationSession,
    phase1_counts: Sequence[int],
    m: int = 1,
) -> Tuple[int, Transcript]:
    """
    Elimination phase.

    Recommends the surviving arm with the fewest acceptances (lowest index
    on ties) and drops an arm after m rejections in a row. An acceptance
    clears the arm's strike count.

    Args:
        session: Interaction session
        phase1_counts: Acceptances per arm from Phase-1
        m: Consecutive rejections needed to eliminate an arm

    Returns:
        (surviving arm, transcript of the phase)

    Raises:
        InvalidBudget: m < 1 or phase1_counts of the wrong length
    """
    if m < 1:
        raise InvalidBudget(f"m must be >= 1, got {m}")
    if len(phase1_counts) != session.n_arms:
        raise InvalidBudget(f"expected {session.n_arms} Phase-1 counts, got {len(phase1_counts)}")

    first_step = session.steps
    counts = list(phase1_counts)
    strikes = [0] * session.n_arms
    survivors: List[int] = list(range(session.n_arms))
    while len(survivors) > 1:
        arm = min(survivors, key=lambda candidate: (counts[candidate], candidate))
        if session.recommend(arm):
            counts[arm] += 1
            strikes[arm] = 0
        else:
            strikes[arm] += 1
            if strikes[arm] >= m:
                survivors.remove(arm)
    return survivors[0], _phase_transcript(session, first_step)


def bair(
    session: RecommendationSession,
    delta: float,
    n1: Optional[int] = None,
    m: Optional[int] = None,
    phase1_stop: str = "acceptances",
    assert_rounds: bool = True,
) -> AlgorithmOutcome:
    """
    Run both phases of BAIR.

    Args:
        session: Interaction session; its step cap, if any, bounds the run
        delta: Confidence parameter in (0, 1)
        n1: Phase-1 budget override (default: default_n1)
        m: Elimination threshold override (default: default_m)
        phase1_stop: 'acceptances' or 'steps' reading of the Phase-1 budget
        assert_rounds: See phase1_sweep()

    Returns:
        AlgorithmOutcome; BudgetExhausted when the session's step cap hit

    Raises:
        InvalidDelta, InvalidBudget, InvariantViolation
    """
    _check_delta(delta)
    params = session.user.params
    n1 = default_n1(session.n_arms, delta, params.alpha, params.rho0) if n1 is None else n1
    m = default_m(session.n_arms, delta, params.noise_p) if m is None else m
    first_step = session.steps
    first_rejections = session.rejections
    first_accepts = session.accepts_seen.copy()
    boundary = None
    try:
        phase1, _ = phase1_sweep(session, n1, stop_on=phase1_stop, assert_rounds=assert_rounds)
        boundary = session.steps - first_step
        chosen, _ = phase2_eliminate(session, phase1.accept_counts, m)
        termination = Termination.IDENTIFIED
    except SessionHalted:
        accepts = session.accepts_seen - first_accepts
        chosen = int(accepts.argmax())
        termination = Termination.BUDGET_EXHAUSTED
        logger.info("BAIR stopped by step cap at %d steps", session.steps - first_step)

    return AlgorithmOutcome(
        chosen_arm=chosen,
        total_steps=session.steps - first_step,
        total_rejections=session.rejections - first_rejections,
        per_arm_accepts=tuple(int(count) for count in session.accepts_seen - first_accepts),
        termination=termination,
        phase_boundary=boundary,
    )
