"""
Demo: BAIR Against the Baselines

Runs BAIR, UNI, EXP3 and Track-and-Stop on one instance and then on a
small batch.
"""

from revealed_bai import ExperimentCell, make_instance, run_cell, run_replication
from revealed_bai.reporting import emit_results


def demo_single_instance():
    """Demo: one run of each policy on the same instance."""
    print("=" * 60)
    print("Demo: Single Instance")
    print("=" * 60)

    instance = make_instance((1.0, 0.5, 0.2, -0.3))
    cell = ExperimentCell(delta=0.05, n_arms=4)
    print(f"\nMeans: {instance.arm_means}  (best arm {instance.best_arm})")
    print(f"N1={cell.n1}  m={cell.m}\n")

    bair_run = run_replication(cell, instance, "bair", seed=7)
    horizon = bair_run.outcome.total_steps
    for name in ("bair", "uni", "exp3", "ts"):
        record = bair_run if name == "bair" else run_replication(cell, instance, name, seed=7, horizon=horizon)
        outcome = record.outcome
        print(
            f"  {name:5s} arm={outcome.chosen_arm}  steps={outcome.total_steps:5d}  "
            f"rejections={outcome.total_rejections:4d}  correct={record.success}"
        )
    print(f"\nBAIR Phase-1 ended after {bair_run.outcome.phase_boundary} steps")


def demo_batch():
    """Demo: metrics over 50 generated instances."""
    print("\n" + "=" * 60)
    print("Demo: Batch of 50 Instances")
    print("=" * 60)

    cell = ExperimentCell(delta=0.1, n_arms=5, replications=50, algorithms=("bair", "uni", "exp3"))
    summary = run_cell(cell, progress=True)
    print()
    print(emit_results([summary], "csv"))


if __name__ == "__main__":
    demo_single_instance()
    demo_batch()

    print("=" * 60)
    print("All demos completed!")
    print("=" * 60)
