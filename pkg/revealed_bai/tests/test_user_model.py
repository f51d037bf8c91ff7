"""
Tests for the explorative user model
"""

import math

import numpy as np
import pytest

from revealed_bai.exceptions import ArmOutOfRange, ConfigurationError, RewardMissing, RewardUnexpected
from revealed_bai.user_model import (
    ConstantRho,
    Decision,
    ExplorativeUser,
    LinearAcceptanceRho,
    UserParams,
    UserState,
    Verdict,
    confidence_interval,
    current_gamma,
    decide,
    decide_noisy,
    gamma,
    record_interaction,
    rho_linear,
    rho_policy_from_spec,
)

from .helpers import make_session

ACCEPT = Decision(Verdict.ACCEPT)
REJECT = Decision(Verdict.REJECT)


def state_with(counts, means, t=None):
    counts = np.asarray(counts, dtype=np.int64)
    sums = counts * np.asarray(means, dtype=float)
    total = int(counts.sum())
    return UserState(t=total if t is None else t, accept_counts=counts, reward_sums=sums, n_total=total)


class TestGamma:
    """Test suite for the confidence width driver."""

    def test_identity_case(self):
        """Test n=1, rho=1 gives 0."""
        assert gamma(1, 1.0, 1.0) == 0.0

    def test_eight_acceptances(self):
        """Test n=8, rho=1, alpha=1 gives 2 ln 8."""
        assert gamma(8, 1.0, 1.0) == pytest.approx(4.1588830833596715, rel=1e-9)

    def test_clamped(self):
        """Test negative logarithms clamp to 0."""
        assert gamma(1, 0.5, 1.0) == 0.0

    def test_no_acceptances(self):
        """Test n=0 gives 0."""
        assert gamma(0, 2.0, 1.0) == 0.0

    def test_alpha_scales(self):
        """Test gamma is linear in alpha."""
        assert gamma(10, 1.5, 2.0) == pytest.approx(2.0 * gamma(10, 1.5, 1.0))


class TestRho:
    """Test suite for trust multiplier policies."""

    def test_linear_values(self):
        """Test rho_linear on the documented points."""
        assert rho_linear(10, 5) == 1.5
        assert rho_linear(7, 7) == 2.0
        assert rho_linear(1, 0) == 1.0

    def test_linear_policy_range(self):
        """Test the linear policy declares [1, 2]."""
        policy = LinearAcceptanceRho()
        assert (policy.lower, policy.upper) == (1.0, 2.0)
        assert policy(4, 2) == 1.5

    def test_constant_policy(self):
        """Test a constant policy ignores its arguments."""
        policy = ConstantRho(1.7)
        assert policy(1, 0) == policy(100, 50) == 1.7

    def test_policy_from_strings(self):
        """Test flag forms of the policy."""
        assert rho_policy_from_spec("linear") == LinearAcceptanceRho()
        assert rho_policy_from_spec("constant:2.5") == ConstantRho(2.5)
        assert rho_policy_from_spec({"kind": "constant", "value": 1.0}) == ConstantRho(1.0)

    def test_policy_from_unknown(self):
        """Test unknown kinds are configuration errors."""
        with pytest.raises(ConfigurationError):
            rho_policy_from_spec({"kind": "history"})
        with pytest.raises(ConfigurationError):
            rho_policy_from_spec("constant:abc")
        with pytest.raises(ConfigurationError):
            rho_policy_from_spec({"kind": "constant", "value": "abc"})
        with pytest.raises(ConfigurationError):
            rho_policy_from_spec({"kind": "constant", "value": None})

    def test_params_validation(self):
        """Test alpha and noise_p preconditions."""
        with pytest.raises(ConfigurationError):
            UserParams(alpha=0.0)
        with pytest.raises(ConfigurationError):
            UserParams(noise_p=1.0)


class TestConfidenceInterval:
    """Test suite for confidence_interval."""

    def test_width_from_gamma(self):
        """Test n_i=4, mean 1.0, gamma 4 gives (0, 2)."""
        # 2 ln(4 rho) = 4 with rho = e^2 / 4
        params = UserParams(alpha=1.0, rho_policy=ConstantRho(math.exp(2.0) / 4.0))
        state = state_with([4, 0], [1.0, 0.0])
        assert current_gamma(state, params) == pytest.approx(4.0, rel=1e-12)
        lcb, ucb = confidence_interval(state, params, 0)
        assert lcb == pytest.approx(0.0, abs=1e-12)
        assert ucb == pytest.approx(2.0, rel=1e-12)

    def test_unvisited(self):
        """Test an arm never accepted has an infinite interval."""
        state = state_with([4, 0], [1.0, 0.0])
        assert confidence_interval(state, UserParams(), 1) == (-math.inf, math.inf)

    def test_zero_width(self, unit_rho_params):
        """Test gamma 0 gives a point interval at the mean."""
        state = state_with([1, 0], [0.3, 0.0])
        assert confidence_interval(state, unit_rho_params, 0) == pytest.approx((0.3, 0.3))

    def test_out_of_range(self, unit_rho_params):
        """Test arm index checks."""
        with pytest.raises(ArmOutOfRange):
            confidence_interval(UserState.fresh(2), unit_rho_params, 5)

    def test_width_shrinks_with_data(self, unit_rho_params):
        """Test the width falls as the arm's count grows at fixed gamma."""
        state = state_with([1, 2, 5, 10], [0.5, 0.5, 0.5, 0.5])
        widths = [ucb - lcb for lcb, ucb in (confidence_interval(state, unit_rho_params, arm) for arm in range(4))]
        assert all(wide > narrow for wide, narrow in zip(widths, widths[1:]))

    def test_classic_ucb_width(self, unit_rho_params):
        """Test constant rho=1, alpha=1 gives gamma = 2 ln n."""
        for total in (1, 3, 17, 250):
            state = state_with([total, 0], [0.0, 0.0], t=total + 4)
            assert current_gamma(state, unit_rho_params) == pytest.approx(2.0 * math.log(total))


class TestDecide:
    """Test suite for the accept/reject rule."""

    @staticmethod
    def _intervals():
        # arm 0 ~ (0.5, 1.0) from 16 samples, arm 1 ~ (0.0, 0.4) from 25: gamma = 1
        params = UserParams(alpha=1.0 / (2.0 * math.log(41.0)), rho_policy=ConstantRho(1.0))
        return state_with([16, 25], [0.75, 0.2]), params

    def test_intervals_as_documented(self):
        """Test the fixture reproduces the documented intervals."""
        state, params = self._intervals()
        assert confidence_interval(state, params, 0) == pytest.approx((0.5, 1.0))
        assert confidence_interval(state, params, 1) == pytest.approx((0.0, 0.4))

    def test_dominated_arm_rejected(self):
        """Test the arm whose ucb falls below another lcb is rejected."""
        state, params = self._intervals()
        assert decide(state, params, 1).verdict is Verdict.REJECT

    def test_dominant_arm_accepted(self):
        """Test the dominant arm is accepted."""
        state, params = self._intervals()
        assert decide(state, params, 0).accepted

    def test_all_unvisited(self):
        """Test every arm is accepted by a fresh user."""
        state = UserState.fresh(4)
        assert all(decide(state, UserParams(), arm).accepted for arm in range(4))

    def test_tie_rejects(self):
        """Test lcb equal to ucb rejects under point intervals."""
        # 2 ln(0.5 * 2) = 0: both arms collapse to the point 0.3
        params = UserParams(alpha=1.0, rho_policy=ConstantRho(0.5))
        tie = state_with([1, 1], [0.3, 0.3])
        assert decide(tie, params, 0).verdict is Verdict.REJECT

    def test_unvisited_never_rejected(self):
        """Test an unvisited arm is accepted whatever the others look like."""
        state = state_with([50, 0], [10.0, 0.0])
        assert decide(state, UserParams(), 1).accepted

    def test_decision_records_gamma(self):
        """Test the decision carries the width driver in force."""
        state, params = self._intervals()
        assert decide(state, params, 0).gamma == pytest.approx(1.0)


class TestDecideNoisy:
    """Test suite for the click-noise rule."""

    def test_no_noise_matches_rule(self):
        """Test p=0 reproduces decide() without consuming randomness."""
        state, params = TestDecide._intervals()
        rng = np.random.default_rng(0)
        before = rng.bit_generator.state
        for arm in (0, 1):
            assert decide_noisy(state, params, arm, rng) == decide(state, params, arm)
        assert rng.bit_generator.state == before

    @pytest.mark.statistical
    def test_full_noise_is_fair_coin(self):
        """Test p=1 accepts about half the time."""
        params = UserParams(noise_p=0.999999)
        state = UserState.fresh(2)
        rng = np.random.default_rng(1)
        accepted = sum(decide_noisy(state, params, 0, rng).accepted for _ in range(100_000))
        assert abs(accepted / 100_000 - 0.5) < 0.01

    @pytest.mark.statistical
    def test_agreement_rate(self):
        """Test p=0.1 agrees with the rule about 95% of the time."""
        params = UserParams(noise_p=0.1)
        state = UserState.fresh(2)
        rng = np.random.default_rng(2)
        agree = sum(decide_noisy(state, params, 0, rng).accepted for _ in range(100_000))
        assert abs(agree / 100_000 - 0.95) < 0.01


class TestRecordInteraction:
    """Test suite for state bookkeeping."""

    def test_accept(self):
        """Test an acceptance updates counts, sums and t."""
        state = UserState.fresh(2)
        record_interaction(state, 0, ACCEPT, 0.7)
        assert state.accept_counts.tolist() == [1, 0]
        assert state.empirical_means()[0] == pytest.approx(0.7)
        assert (state.t, state.n_total) == (1, 1)

    def test_reject(self):
        """Test a rejection only advances t."""
        state = state_with([2, 1], [0.5, 0.1])
        before = state.copy()
        record_interaction(state, 1, REJECT)
        assert state.t == before.t + 1
        assert state.accept_counts.tolist() == before.accept_counts.tolist()
        assert state.reward_sums.tolist() == before.reward_sums.tolist()
        assert state.n_total == before.n_total

    def test_reward_missing(self):
        """Test an acceptance needs a reward."""
        with pytest.raises(RewardMissing):
            record_interaction(UserState.fresh(2), 0, ACCEPT)

    def test_reward_unexpected(self):
        """Test a rejection must not carry a reward."""
        with pytest.raises(RewardUnexpected):
            record_interaction(UserState.fresh(2), 0, REJECT, 1.0)

    def test_state_round_trip(self):
        """Test to_dict/from_dict keep the state."""
        state = state_with([3, 1], [0.25, -1.0], t=9)
        restored = UserState.from_dict(state.to_dict())
        assert restored.to_dict() == state.to_dict()
        assert restored.n_total == 4


class TestExplorativeUser:
    """Test suite for the stateful user."""

    def test_noisy_user_needs_stream(self):
        """Test noise without a decision stream is a configuration error."""
        with pytest.raises(ConfigurationError):
            ExplorativeUser(UserParams(noise_p=0.2), 3)

    def test_restore_copies(self):
        """Test restore does not alias the given state."""
        user = ExplorativeUser(UserParams(), 2)
        state = state_with([1, 1], [0.0, 1.0])
        user.restore(state)
        user.record(0, ACCEPT, 2.0)
        assert state.accept_counts.tolist() == [1, 1]

    @pytest.mark.properties
    def test_first_recommendation_always_accepted(self):
        """Test every arm's first recommendation is accepted across seeded sessions."""
        for seed in range(50):
            session = make_session((0.5, 1.5, -2.0, 0.0, 0.3), seed=seed)
            rng = np.random.default_rng(seed)
            seen = set()
            for _ in range(60):
                arm = int(rng.integers(5))
                accepted = session.recommend(arm)
                if arm not in seen:
                    assert accepted, f"seed {seed}: first recommendation of arm {arm} rejected"
                    seen.add(arm)

    @pytest.mark.properties
    def test_replay_reproduces_decisions(self):
        """Test a noiseless user's decisions are a function of its state."""
        session = make_session((1.0, 0.2, 0.4), seed=3)
        rng = np.random.default_rng(3)
        history = []
        for _ in range(80):
            arm = int(rng.integers(3))
            state = session.user.state.copy()
            accepted = session.recommend(arm)
            history.append((state, arm, accepted))
        for state, arm, accepted in history:
            assert decide(state, session.user.params, arm).accepted == accepted
