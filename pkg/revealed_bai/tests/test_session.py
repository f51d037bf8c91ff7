"""
Tests for RecommendationSession and transcripts
"""

import json

import pytest

from revealed_bai.exceptions import ArmOutOfRange, SessionHalted
from revealed_bai.session import Transcript

from .helpers import make_session


class TestRecommendationSession:
    """Test suite for the interaction loop."""

    def test_initialization(self, two_arm_session):
        """Test a session starts empty."""
        assert two_arm_session.steps == 0
        assert two_arm_session.acceptances == 0
        assert len(two_arm_session.transcript) == 0

    def test_first_recommendation_accepted(self, two_arm_session):
        """Test the very first recommendation is accepted and logged."""
        assert two_arm_session.recommend(1)
        entry = two_arm_session.transcript.entries[0]
        assert (entry.step, entry.arm, entry.accepted) == (1, 1, True)
        assert two_arm_session.user.state.accept_counts.tolist() == [0, 1]
        assert 1 in two_arm_session.first_rewards

    def test_step_accounting(self):
        """Test steps equal acceptances plus rejections."""
        session = make_session((1.0, 0.0, -0.5), seed=2)
        for step in range(60):
            session.recommend(step % 3)
        assert session.steps == 60
        assert session.acceptances + session.rejections == 60

    def test_acceptance_cap(self):
        """Test the session halts once the acceptance cap is reached."""
        session = make_session((1.0, 0.5), acceptance_cap=2)
        session.recommend(0)
        session.recommend(1)
        with pytest.raises(SessionHalted) as caught:
            session.recommend(0)
        assert caught.value.reason == "acceptances"

    def test_step_cap(self):
        """Test the session halts once the step cap is reached."""
        session = make_session((1.0, 0.5), step_cap=1)
        session.recommend(0)
        with pytest.raises(SessionHalted) as caught:
            session.recommend(1)
        assert caught.value.reason == "steps"

    def test_out_of_range(self, two_arm_session):
        """Test invalid arms are rejected before touching the user."""
        with pytest.raises(ArmOutOfRange):
            two_arm_session.recommend(2)
        assert two_arm_session.steps == 0

    def test_snapshot_restore(self):
        """Test a restored session replays the same future."""
        session = make_session((1.0, 0.6, 0.2), seed=5)
        for step in range(20):
            session.recommend(step % 3)
        snapshot = session.snapshot()
        future = [session.recommend(step % 3) for step in range(30)]
        session.restore(snapshot)
        assert session.user.state.to_dict() == snapshot.user_state.to_dict()
        assert [session.recommend(step % 3) for step in range(30)] == future
        assert session.transcript.entries[0].step == 21

    def test_snapshot_state_json(self):
        """Test the snapshot serializes the user state."""
        session = make_session((1.0, 0.5), seed=1)
        session.recommend(0)
        data = json.loads(session.snapshot().user_state_json())
        assert data == {"t": 1, "accept_counts": [1, 0], "reward_sums": data["reward_sums"]}


class TestTranscript:
    """Test suite for transcripts."""

    def test_jsonl(self):
        """Test transcripts write and read JSON lines."""
        transcript = Transcript()
        transcript.append(1, 0, True)
        transcript.append(2, 1, False)
        text = transcript.to_jsonl()
        assert text.splitlines()[1] == json.dumps({"t": 2, "arm": 1, "decision": "R"})
        assert Transcript.from_jsonl(text).binary_signature() == [(0, True), (1, False)]
