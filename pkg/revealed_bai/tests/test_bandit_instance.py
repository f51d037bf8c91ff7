"""
Tests for bandit instances, reward sampling and instance batches
"""

import json
import math

import numpy as np
import pytest

from revealed_bai.bandit_instance import (
    batch_from_json,
    batch_to_json,
    generate_instance_batch,
    hardness,
    make_instance,
    sample_reward,
)
from revealed_bai.exceptions import ArmOutOfRange, ConfigurationError, DuplicateMax, InvalidGap, TooFewArms


class TestMakeInstance:
    """Test suite for make_instance."""

    def test_two_arms(self):
        """Test best arm is the first of (1.0, 0.5)."""
        instance = make_instance((1.0, 0.5))
        assert instance.best_arm == 0
        assert instance.n_arms == 2

    def test_duplicate_max(self):
        """Test a tied maximum is rejected."""
        with pytest.raises(DuplicateMax):
            make_instance((1.0, 1.0))

    def test_four_arms(self):
        """Test best arm among (1.5, 1.0, -10, -10)."""
        assert make_instance((1.5, 1.0, -10.0, -10.0)).best_arm == 0

    def test_best_arm_not_first(self):
        """Test best arm index follows the maximum."""
        assert make_instance((0.0, -1.0, 2.0)).best_arm == 2

    def test_too_few_arms(self):
        """Test a single arm is rejected."""
        with pytest.raises(TooFewArms):
            make_instance((1.0,))

    def test_unknown_reward_family(self):
        """Test unknown noise laws are configuration errors."""
        with pytest.raises(ConfigurationError):
            make_instance((1.0, 0.0), reward_family="cauchy")


class TestHardness:
    """Test suite for gap profiles."""

    def test_symmetric_pair(self):
        """Test (1.0, 0.5) gives gaps (0.5, 0.5) and H = 8."""
        profile = hardness(make_instance((1.0, 0.5)))
        assert profile.gaps == (0.5, 0.5)
        assert profile.hardness == pytest.approx(8.0, rel=1e-12)

    def test_three_arms(self):
        """Test (2, 1, 0) gives gaps (1, 1, 2) and H = 2.25."""
        profile = hardness(make_instance((2.0, 1.0, 0.0)))
        assert profile.gaps == (1.0, 1.0, 2.0)
        assert profile.hardness == pytest.approx(2.25, rel=1e-12)

    def test_far_arms(self):
        """Test far-away arms contribute little to H."""
        profile = hardness(make_instance((1.5, 1.0, -10.0, -10.0)))
        assert profile.hardness == pytest.approx(8.0 + 2.0 / 132.25, rel=1e-9)
        assert profile.hardness == pytest.approx(8.0151, abs=1e-4)


class TestSampleReward:
    """Test suite for sample_reward."""

    def test_determinism(self):
        """Test the same seed reproduces the same draws."""
        instance = make_instance((1.0, 0.5))
        rng_a, rng_b = np.random.default_rng(11), np.random.default_rng(11)
        draws_a = [sample_reward(instance, arm % 2, rng_a) for arm in range(50)]
        draws_b = [sample_reward(instance, arm % 2, rng_b) for arm in range(50)]
        assert draws_a == draws_b

    def test_out_of_range(self):
        """Test arm index K is rejected."""
        instance = make_instance((1.0, 0.5))
        with pytest.raises(ArmOutOfRange):
            sample_reward(instance, 2, np.random.default_rng(0))

    @pytest.mark.statistical
    def test_gaussian_moments(self):
        """Test a zero-mean arm has mean ~0 and variance ~1."""
        instance = make_instance((0.0, -1.0))
        rng = np.random.default_rng(2024)
        draws = np.array([sample_reward(instance, 0, rng) for _ in range(200_000)])
        assert abs(draws.mean()) < 0.01
        assert abs(draws.var() - 1.0) < 0.015

    def test_rademacher_support(self):
        """Test Rademacher rewards are mean +/- 1."""
        instance = make_instance((0.25, 0.0), reward_family="rademacher")
        rng = np.random.default_rng(5)
        draws = {sample_reward(instance, 0, rng) for _ in range(100)}
        assert draws == {1.25, -0.75}


class TestInstanceBatch:
    """Test suite for generate_instance_batch."""

    def test_gap_is_exact(self):
        """Test best minus second best equals the requested gap."""
        batch = generate_instance_batch(2, 0.5, 1000, master_seed=1)
        assert len(batch) == 1000
        for instance in batch:
            ordered = sorted(instance.arm_means)
            assert ordered[-1] - ordered[-2] == pytest.approx(0.5, abs=1e-12)

    def test_small_gap(self):
        """Test the gap holds for K=5, gap 0.2."""
        for instance in generate_instance_batch(5, 0.2, 200, master_seed=9):
            ordered = sorted(instance.arm_means)
            assert ordered[-1] - ordered[-2] == pytest.approx(0.2, abs=1e-12)
            assert hardness(instance).hardness >= 2.0 / 0.2 ** 2 * (1 - 1e-9)

    def test_determinism(self):
        """Test identical arguments give identical batches."""
        assert generate_instance_batch(5, 0.5, 20, 42) == generate_instance_batch(5, 0.5, 20, 42)

    def test_seed_changes_batch(self):
        """Test different seeds give different batches."""
        assert generate_instance_batch(5, 0.5, 5, 1) != generate_instance_batch(5, 0.5, 5, 2)

    def test_invalid_gap(self):
        """Test non-positive gaps are rejected."""
        with pytest.raises(InvalidGap):
            generate_instance_batch(3, 0.0, 1, 0)

    def test_json_round_trip(self):
        """Test batches survive JSON serialization."""
        batch = generate_instance_batch(3, 0.5, 4, 0)
        text = batch_to_json(batch)
        assert json.loads(text)[0]["best_arm"] == batch[0].best_arm
        assert batch_from_json(text) == batch

    def test_json_best_arm_mismatch(self):
        """Test a stored best_arm that contradicts the means is rejected."""
        with pytest.raises(DuplicateMax):
            batch_from_json(json.dumps([{"means": [1.0, 0.0], "best_arm": 1}]))

    @pytest.mark.statistical
    def test_empirical_mean_concentration(self):
        """Test sample means stay within 4/sqrt(n) of the true mean."""
        instance = make_instance((0.3, 0.0))
        n = 400
        misses = 0
        for trial in range(200):
            rng = np.random.default_rng(trial)
            mean = np.mean([sample_reward(instance, 0, rng) for _ in range(n)])
            misses += abs(mean - 0.3) >= 4.0 / math.sqrt(n)
        assert misses == 0
