"""
Recommendation Session

Runs the three-party interaction loop: the system recommends an arm, the
user decides, the environment discloses the realized reward to the user on
acceptance, and the system sees only the binary response.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional

import numpy as np

from .bandit_instance import BanditInstance, sample_reward
from .exceptions import SessionHalted
from .seeding import SessionStreams
from .user_model import ExplorativeUser, UserParams, UserState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TranscriptEntry:
    """One interaction as seen by the system."""

    step: int
    arm: int
    accepted: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"t": self.step, "arm": self.arm, "decision": "A" if self.accepted else "R"}


@dataclass
class Transcript:
    """Ordered interaction records; steps increase by one from 1."""

    entries: List[TranscriptEntry] = field(default_factory=list)

    def append(self, step: int, arm: int, accepted: bool) -> None:
        self.entries.append(TranscriptEntry(step, arm, accepted))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[TranscriptEntry]:
        return iter(self.entries)

    def binary_signature(self) -> List[tuple]:
        """(arm, accepted) pairs, used to compare transcripts across instances."""
        return [(entry.arm, entry.accepted) for entry in self.entries]

    def to_jsonl(self) -> str:
        """JSON lines {"t", "arm", "decision"}."""
        return "\n".join(json.dumps(entry.to_dict()) for entry in self.entries)

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        transcript = cls()
        for line in text.splitlines():
            if line.strip():
                record = json.loads(line)
                transcript.append(int(record["t"]), int(record["arm"]), record["decision"] == "A")
        return transcript


@dataclass(frozen=True)
class SessionSnapshot:
    """Everything needed to resume a session bit-exactly."""

    user_state: UserState
    stream_state: Dict[str, Any]
    steps: int
    rejections: int
    accepts_seen: tuple

    def user_state_json(self) -> str:
        return json.dumps(self.user_state.to_dict(), sort_keys=True)


class RecommendationSession:
    """Drives system recommendations through the explorative user."""

    def __init__(
        self,
        instance: BanditInstance,
        user_params: UserParams,
        streams: SessionStreams,
        acceptance_cap: Optional[int] = None,
        step_cap: Optional[int] = None,
        record_transcript: bool = True,
    ):
        """
        Initialize a session with a user that has no experience yet.

        Args:
            instance: Environment the user draws rewards from
            user_params: Behaviour parameters of the user
            streams: Random streams owned by this session
            acceptance_cap: Halt once the user has accepted this many times
            step_cap: Halt once this many recommendations were made
            record_transcript: Keep the per-step transcript
        """
        self.instance = instance
        self.streams = streams
        self.user = ExplorativeUser(user_params, instance.n_arms, rng=streams.decision_stream)
        self.acceptance_cap = acceptance_cap
        self.step_cap = step_cap
        self.record_transcript = record_transcript
        self.transcript = Transcript()
        self.steps = 0
        self.rejections = 0
        self.accepts_seen = np.zeros(instance.n_arms, dtype=np.int64)
        self.last_decision = None
        self.first_rewards: Dict[int, float] = {}

    @property
    def n_arms(self) -> int:
        return self.instance.n_arms

    @property
    def rng(self) -> np.random.Generator:
        """The policy's own randomness."""
        return self.streams.policy_stream

    @property
    def acceptances(self) -> int:
        return int(self.accepts_seen.sum())

    def recommend(self, arm: int) -> bool:
        """
        Recommend an arm and observe the user's binary response.

        Args:
            arm: Arm index

        Returns:
            True if the user accepted

        Raises:
            SessionHalted: a cap was already reached
            ArmOutOfRange
        """
        self._check_caps()
        self.instance.check_arm(arm)
        decision = self.user.decide(arm)
        reward = None
        if decision.accepted:
            reward = sample_reward(self.instance, arm, self.streams.reward_streams[arm])
            self.first_rewards.setdefault(arm, reward)
            self.accepts_seen[arm] += 1
        else:
            self.rejections += 1
        self.user.record(arm, decision, reward)
        self.steps += 1
        self.last_decision = decision
        if self.record_transcript:
            self.transcript.append(self.steps, arm, decision.accepted)
        return decision.accepted

    def _check_caps(self) -> None:
        if self.acceptance_cap is not None and self.acceptances >= self.acceptance_cap:
            raise SessionHalted("acceptances")
        if self.step_cap is not None and self.steps >= self.step_cap:
            raise SessionHalted("steps")

    def snapshot(self) -> SessionSnapshot:
        return SessionSnapshot(
            user_state=self.user.state.copy(),
            stream_state=self.streams.get_state(),
            steps=self.steps,
            rejections=self.rejections,
            accepts_seen=tuple(int(count) for count in self.accepts_seen),
        )

    def restore(self, snapshot: SessionSnapshot) -> None:
        """
        Resume from a snapshot.

        The transcript is cleared; entries recorded afterwards keep the
        global step numbering.
        """
        self.user.restore(snapshot.user_state)
        self.streams.set_state(snapshot.stream_state)
        self.steps = snapshot.steps
        self.rejections = snapshot.rejections
        self.accepts_seen = np.asarray(snapshot.accepts_seen, dtype=np.int64)
        self.transcript = Transcript()
        self.last_decision = None
        logger.debug("session restored at step %d", self.steps)
