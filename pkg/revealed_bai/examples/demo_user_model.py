"""
Demo: User Model

Walks an explorative user through a handful of recommendations and prints
its confidence intervals and decisions. No algorithm involved.
"""

from revealed_bai import RecommendationSession, UserParams, make_instance
from revealed_bai.seeding import SessionStreams
from revealed_bai.user_model import ConstantRho, current_gamma


def show_intervals(session):
    state = session.user.state
    print(f"  t={state.t}  n(t)={state.n_total}  Gamma={current_gamma(state, session.user.params):.3f}")
    for arm in range(session.n_arms):
        lcb, ucb = session.user.confidence_interval(arm)
        count = int(state.accept_counts[arm])
        print(f"    arm {arm}: n={count:3d}  [{lcb:8.3f}, {ucb:8.3f}]")


def demo_first_visits():
    """Demo: every arm is accepted the first time it is recommended."""
    print("=" * 60)
    print("Demo: First Visits")
    print("=" * 60)

    instance = make_instance((1.0, 0.5, -2.0))
    session = RecommendationSession(instance, UserParams(), SessionStreams.from_seed(0, 3))
    for arm in range(3):
        accepted = session.recommend(arm)
        print(f"\nRecommend arm {arm}: {'accepted' if accepted else 'rejected'}")
        show_intervals(session)


def demo_rejection():
    """Demo: a dominated arm gets rejected once the user has seen enough."""
    print("\n" + "=" * 60)
    print("Demo: Rejection")
    print("=" * 60)

    instance = make_instance((1.0, -1.0))
    session = RecommendationSession(instance, UserParams(), SessionStreams.from_seed(1, 2))
    for step in range(30):
        arm = step % 2
        if not session.recommend(arm):
            print(f"\nArm {arm} rejected at step {session.steps}")
            show_intervals(session)
            return
    print("\nNo rejection within 30 steps")
    show_intervals(session)


def demo_trust():
    """Demo: a more trusting user (larger rho) explores longer."""
    print("\n" + "=" * 60)
    print("Demo: Trust Multiplier")
    print("=" * 60)

    instance = make_instance((1.0, 0.0))
    for value in (1.0, 2.0, 4.0):
        session = RecommendationSession(
            instance, UserParams(rho_policy=ConstantRho(value)), SessionStreams.from_seed(2, 2)
        )
        while session.rejections == 0 and session.steps < 500:
            session.recommend(session.steps % 2)
        print(f"  rho={value}: first rejection at step {session.steps}")


if __name__ == "__main__":
    demo_first_visits()
    demo_rejection()
    demo_trust()

    print("\n" + "=" * 60)
    print("All demos completed!")
    print("=" * 60)
