"""Builders shared by the test modules."""

from revealed_bai.bandit_instance import make_instance
from revealed_bai.seeding import SessionStreams
from revealed_bai.session import RecommendationSession
from revealed_bai.user_model import LinearAcceptanceRho, UserParams


def make_session(means, seed=0, alpha=1.0, rho=None, noise_p=0.0, **caps):
    """Session on the given means with a fresh user."""
    instance = make_instance(means)
    params = UserParams(alpha=alpha, rho_policy=rho or LinearAcceptanceRho(), noise_p=noise_p)
    streams = SessionStreams.from_seed(seed, instance.n_arms)
    return RecommendationSession(instance, params, streams, **caps)
