"""
Seeding

Derives independent, order-free random streams for every replication.
A stream is a pure function of (master_seed, instance_index,
replication_index, algorithm_id), so executing replications in any order
or on any number of threads gives the same draws.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

# Stable integer ids used in seed derivation. Never renumber.
ALGORITHM_IDS = {
    "bair": 0,
    "uni": 1,
    "exp3": 2,
    "ts": 3,
    "probe": 4,
}

# Spawn-key prefix separating instance batches from replication streams.
_BATCH_DOMAIN = 0
_REPLICATION_DOMAIN = 1


def replication_seed(
    master_seed: int,
    instance_index: int,
    replication_index: int,
    algorithm_id: int,
) -> int:
    """
    Derive the 64-bit seed of one replication.

    Args:
        master_seed: Cell master seed
        instance_index: Index of the problem instance in its batch
        replication_index: Index of the run on that instance
        algorithm_id: Entry of ALGORITHM_IDS

    Returns:
        A non-negative 64-bit integer seed
    """
    sequence = np.random.SeedSequence(
        entropy=int(master_seed),
        spawn_key=(_REPLICATION_DOMAIN, int(instance_index), int(replication_index), int(algorithm_id)),
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def batch_generator(master_seed: int) -> np.random.Generator:
    """Generator used to draw an instance batch."""
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(_BATCH_DOMAIN,))
    return np.random.default_rng(sequence)


@dataclass
class SessionStreams:
    """
    The random streams owned by one simulated interaction.

    Attributes:
        reward_streams: One generator per arm for realized-reward noise
        decision_stream: Generator for the user's random decisions
        policy_stream: Generator for the system policy's own randomness
        seed: Seed the streams were derived from
    """

    reward_streams: List[np.random.Generator]
    decision_stream: np.random.Generator
    policy_stream: np.random.Generator
    seed: int

    @classmethod
    def from_seed(cls, seed: int, n_arms: int) -> "SessionStreams":
        """
        Build the streams of a session.

        Arm i's noise comes from child i of the seed sequence, so two
        sessions built from the same seed share per-arm noise even when
        they pull arms in different orders or on different instances.
        """
        children = np.random.SeedSequence(int(seed)).spawn(n_arms + 2)
        return cls(
            reward_streams=[np.random.default_rng(child) for child in children[:n_arms]],
            decision_stream=np.random.default_rng(children[n_arms]),
            policy_stream=np.random.default_rng(children[n_arms + 1]),
            seed=int(seed),
        )

    def with_policy_stream(self, seed: int) -> "SessionStreams":
        """Copy sharing the environment and user streams but with a fresh policy stream."""
        return SessionStreams(
            reward_streams=self.reward_streams,
            decision_stream=self.decision_stream,
            policy_stream=np.random.default_rng(np.random.SeedSequence(int(seed))),
            seed=self.seed,
        )

    def get_state(self) -> dict:
        """Bit-generator states of every stream, for snapshot/restore."""
        return {
            "reward": [rng.bit_generator.state for rng in self.reward_streams],
            "decision": self.decision_stream.bit_generator.state,
            "policy": self.policy_stream.bit_generator.state,
        }

    def set_state(self, state: dict) -> None:
        """Restore states captured by get_state()."""
        for rng, rng_state in zip(self.reward_streams, state["reward"]):
            rng.bit_generator.state = rng_state
        self.decision_stream.bit_generator.state = state["decision"]
        self.policy_stream.bit_generator.state = state["policy"]
