"""
Command-line front end.

    revealed-bai simulate --delta 0.1 --k 2,5 --reps 100
    revealed-bai simulate --config grid.json --format json --out results.json
    revealed-bai table table2 --reps 100
    revealed-bai validate properties
    revealed-bai lowerbound --k 3 --delta 0.01 --reps 10000
    revealed-bai inspect --means 1.0,0.5 --algo bair --out run/

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

import argparse
import json
import logging
import sys
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .bandit_instance import REWARD_FAMILIES, batch_to_json, generate_instance_batch, hardness, make_instance
from .config import Settings, load_grid, resolve_cells
from .exceptions import ConfigurationError, RevealedBAIError
from .harness import ALGORITHMS, ExperimentCell, run_experiment, run_policy, run_replication
from .lowerbound_probe import PROBE_POLICIES, hard_instance_pair, indistinguishability_probe
from .presets import PRESETS, build_cells, get_preset
from .reporting import FORMATS, build_id, emit_results, emit_table
from .seeding import ALGORITHM_IDS, SessionStreams, replication_seed
from .session import RecommendationSession

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
SUITES = ("unit", "properties", "statistical")


class _Parser(argparse.ArgumentParser):
    """Reports usage errors as configuration errors instead of exiting."""

    def error(self, message):
        raise ConfigurationError(f"{self.prog}: {message}")


def _floats(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _algorithms(text: str) -> List[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    unknown = [name for name in names if name not in ALGORITHMS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s) {unknown}; valid names: {', '.join(ALGORITHMS)}")
    return names


def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, help="Write results here instead of standard output")
    parser.add_argument("--format", choices=FORMATS, default="csv", help="Result format (default: csv)")


def _add_cell_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--delta", type=_floats, help="Confidence parameter(s), comma-separated")
    parser.add_argument("--k", type=_ints, help="Number(s) of arms, comma-separated")
    parser.add_argument("--gap", type=float, help="Best-minus-second-best gap of generated instances")
    parser.add_argument("--alpha", type=float, help="User exploration tendency")
    parser.add_argument("--rho", help="Trust multiplier: 'linear' or 'constant:<v>'")
    parser.add_argument("--noise-p", type=float, help="User click noise probability")
    parser.add_argument("--reps", type=int, help="Problem instances per cell")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--algos", type=_algorithms, help=f"Algorithms, comma-separated from {','.join(ALGORITHMS)}")
    parser.add_argument("--n1", type=int, help="Phase-1 budget override")
    parser.add_argument("--m", type=int, help="Phase-2 elimination threshold override")
    parser.add_argument("--runs-per-instance", type=int, help="Replications per instance")
    parser.add_argument("--phase1-stop", choices=("acceptances", "steps"), help="Phase-1 budget reading")
    parser.add_argument("--uni-schedule", choices=("random", "round-robin"), help="UNI arm schedule")
    parser.add_argument("--budget-matching", choices=("instance", "cell"), help="UNI/EXP3 horizon matching")
    parser.add_argument("--coupled", action="store_true", default=None, help="Common random numbers across algorithms")
    parser.add_argument("--reward-family", choices=sorted(REWARD_FAMILIES), help="Reward noise law")
    parser.add_argument("--max-steps", type=int, help="Step cap on BAIR runs")
    parser.add_argument(
        "--ts-warm-start", action="store_true", default=None,
        help="Shared-Phase-1 ablation: seed Track-and-Stop with the Phase-1 counts",
    )
    parser.add_argument("--threads", type=int, help="Worker processes (default: available cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="revealed-bai", description="Best arm identification from revealed preferences")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug; shows progress")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    simulate = commands.add_parser("simulate", help="Run experiment cells from flags or a JSON grid")
    simulate.add_argument("--config", type=Path, help="JSON grid {cells: [...]}")
    simulate.add_argument("--shared-phase1", action="store_true", default=None, help="Shared-Phase-1 ablation")
    _add_cell_flags(simulate)
    _add_output(simulate)

    table = commands.add_parser("table", help="Reproduce a published table")
    table.add_argument("preset", choices=sorted(PRESETS), help="Table preset")
    _add_cell_flags(table)
    _add_output(table)

    validate = commands.add_parser("validate", help="Run a test suite")
    validate.add_argument("suite", choices=SUITES, help="Suite to run")

    lowerbound = commands.add_parser("lowerbound", help="Build the hard instance pair and probe it")
    lowerbound.add_argument("--k", type=int, default=3, help="Number of arms (default: 3)")
    lowerbound.add_argument("--delta", type=float, default=0.01, help="Confidence parameter (default: 0.01)")
    lowerbound.add_argument("--alpha", type=float, default=1.0)
    lowerbound.add_argument("--c", type=float, default=0.25, help="Exponent slack c in (0, 1/2)")
    lowerbound.add_argument("--rho0", type=float, default=1.0)
    lowerbound.add_argument("--rho1", type=float, default=2.0)
    lowerbound.add_argument("--gap", type=float, default=0.5)
    lowerbound.add_argument("--reps", type=int, default=10000)
    lowerbound.add_argument("--seed", type=int, help="Master seed")
    lowerbound.add_argument("--policy", choices=PROBE_POLICIES, default="bair")
    lowerbound.add_argument("--threads", type=int, help="Worker processes (default: available cores)")
    lowerbound.add_argument("--diagnostics", action="store_true", help="Include every run, with arm 0's first rewards")
    lowerbound.add_argument("--out", type=Path)

    inspect = commands.add_parser("inspect", help="Run one policy on one instance and dump its trace")
    inspect.add_argument("--means", type=_floats, help="Arm means; otherwise a generated instance")
    inspect.add_argument("--k", type=int, default=5)
    inspect.add_argument("--gap", type=float, default=0.5)
    inspect.add_argument("--instance", type=int, default=0, help="Index into the generated batch")
    inspect.add_argument("--algo", choices=ALGORITHMS, default="bair")
    inspect.add_argument("--delta", type=float, default=0.1)
    inspect.add_argument("--alpha", type=float, default=1.0)
    inspect.add_argument("--rho", default="linear")
    inspect.add_argument("--noise-p", type=float, default=0.0)
    inspect.add_argument("--horizon", type=int, help="T for uni/exp3 (default: BAIR's stopping time)")
    inspect.add_argument("--seed", type=int, help="Master seed")
    inspect.add_argument("--out", type=Path, help="Directory for transcript.jsonl, user_state.json, instances.json")
    return parser


def configure_logging(verbosity: int, default_level: str) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, default_level, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _write(document: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(document)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(document)
    logger.info("wrote %s", out)


def _cell_flags(args: argparse.Namespace) -> Dict[str, Any]:
    """Per-cell overrides given on the command line; None means not given."""
    return {
        "gap": args.gap,
        "alpha": args.alpha,
        "rho_policy": args.rho,
        "noise_p": args.noise_p,
        "algorithms": args.algos,
        "replications": args.reps,
        "master_seed": args.seed,
        "n1_override": args.n1,
        "m_override": args.m,
        "runs_per_instance": args.runs_per_instance,
        "phase1_stop": args.phase1_stop,
        "uni_schedule": args.uni_schedule.replace("-", "_") if args.uni_schedule else None,
        "budget_matching": args.budget_matching,
        "coupled": args.coupled,
        "reward_family": args.reward_family,
        "max_steps": args.max_steps,
        "ts_warm_start": args.ts_warm_start,
    }


def _metadata(command: str, cells: Sequence[ExperimentCell], settings: Settings) -> Dict[str, Any]:
    seeds = sorted({cell.master_seed for cell in cells})
    return {
        "command": command,
        "seed": seeds[0] if len(seeds) == 1 else seeds,
        "build": build_id(__version__),
        "config": [cell.to_dict() for cell in cells],
    }


def _run_cells(cells: Sequence[ExperimentCell], workers: Optional[int], verbose: bool) -> list:
    summaries = []
    for cell in cells:
        logger.info("running cell delta=%g K=%d (%s)", cell.delta, cell.n_arms, ",".join(cell.algorithms))
        summaries.append(run_experiment(cell, workers=workers, progress=verbose))
    return summaries


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    """Run one or more cells and emit the results document."""
    flags = _cell_flags(args)
    flags["shared_phase1"] = args.shared_phase1
    if args.config is not None:
        entries = load_grid(args.config)
        for name, values in (("--delta", args.delta), ("--k", args.k)):
            if values and len(values) > 1:
                raise ConfigurationError(f"{name} takes a single value when combined with --config, got {len(values)}")
        if args.delta:
            flags["delta"] = args.delta[0]
        if args.k:
            flags["n_arms"] = args.k[0]
    else:
        if not args.delta or not args.k:
            raise ConfigurationError("simulate needs --config or both --delta and --k")
        entries = [{"delta": delta, "n_arms": k} for delta, k in product(args.delta, args.k)]
    cells = resolve_cells(entries, settings, flags)
    summaries = _run_cells(cells, args.threads or settings.threads, args.verbose > 0)
    _write(emit_results(summaries, args.format, _metadata("simulate", cells, settings)), args.out)
    return EXIT_OK


def cmd_table(args: argparse.Namespace, settings: Settings) -> int:
    """Run a preset grid and emit it in its published layout."""
    preset = get_preset(args.preset)
    overrides = {key: value for key, value in _cell_flags(args).items() if value is not None}
    overrides.setdefault("replications", settings.reps)
    overrides.setdefault("master_seed", settings.seed)
    if args.delta:
        overrides["deltas"] = args.delta
    if args.k:
        overrides["ks"] = args.k
    cells = build_cells(preset, overrides)
    summaries = _run_cells(cells, args.threads or settings.threads, args.verbose > 0)
    metadata = _metadata(f"table {preset.name}", cells, settings)
    metadata["title"] = preset.title
    _write(emit_table(summaries, args.format, preset.layout, metadata), args.out)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    """Run the selected pytest suite shipped with the package."""
    import pytest

    tests_dir = Path(__file__).resolve().parent / "tests"
    code = pytest.main([str(tests_dir), "-m", args.suite, "-q"])
    return EXIT_OK if code == 0 else EXIT_RUNTIME


def cmd_lowerbound(args: argparse.Namespace, settings: Settings) -> int:
    """Print the hard instance pair and the probe statistics as JSON."""
    pair = hard_instance_pair(args.k, args.delta, args.alpha, args.c, args.rho0, args.rho1, args.gap)
    seed = settings.seed if args.seed is None else args.seed
    stats = indistinguishability_probe(
        pair,
        policy=args.policy,
        reps=args.reps,
        seed=seed,
        workers=args.threads or settings.threads,
        progress=args.verbose > 0,
    )
    document = {
        "metadata": {"command": "lowerbound", "seed": seed, "build": build_id(__version__), "config": pair.params},
        "pair": pair.to_dict(),
        "probe": stats.to_dict(diagnostics=args.diagnostics),
    }
    _write(json.dumps(document, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace, settings: Settings) -> int:
    """Run one policy on one instance; dump transcript, user state and instance."""
    seed = settings.seed if args.seed is None else args.seed
    if args.means:
        instances = [make_instance(args.means)]
        index = 0
    else:
        instances = generate_instance_batch(args.k, args.gap, args.instance + 1, seed)
        index = args.instance
    instance = instances[index]
    cell = ExperimentCell(
        delta=args.delta, n_arms=instance.n_arms, alpha=args.alpha, rho_policy=args.rho,
        noise_p=args.noise_p, algorithms=(args.algo,), replications=1, master_seed=seed,
    )
    horizon = args.horizon
    if args.algo in ("uni", "exp3") and horizon is None:
        horizon = run_replication(cell, instance, "bair", replication_seed(seed, index, 0, ALGORITHM_IDS["bair"])).outcome.total_steps

    run_seed = replication_seed(seed, index, 0, ALGORITHM_IDS[args.algo])
    session = RecommendationSession(instance, cell.user_params, SessionStreams.from_seed(run_seed, instance.n_arms))
    outcome = run_policy(session, cell, args.algo, horizon)
    profile = hardness(instance)
    summary = {
        "instance": instance.to_dict(),
        "gaps": list(profile.gaps),
        "hardness": profile.hardness,
        "algorithm": args.algo,
        "seed": run_seed,
        "outcome": outcome.to_dict(),
        "success": outcome.chosen_arm == instance.best_arm,
    }
    if args.out is None:
        summary["user_state"] = session.user.state.to_dict()
        summary["transcript"] = [entry.to_dict() for entry in session.transcript]
        _write(json.dumps(summary, indent=2) + "\n", None)
        return EXIT_OK
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "transcript.jsonl").write_text(session.transcript.to_jsonl() + "\n")
    (args.out / "user_state.json").write_text(json.dumps(session.user.state.to_dict(), indent=2) + "\n")
    (args.out / "instances.json").write_text(batch_to_json(instances) + "\n")
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    sys.stdout.write(json.dumps(summary) + "\n")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "table": cmd_table,
    "validate": cmd_validate,
    "lowerbound": cmd_lowerbound,
    "inspect": cmd_inspect,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    try:
        settings = Settings.from_env()
        args = build_parser().parse_args(argv)
    except ConfigurationError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_CONFIG
    configure_logging(args.verbose, settings.log_level)
    try:
        return COMMANDS[args.command](args, settings)
    except ConfigurationError as error:
        logger.error("%s", error)
        print(f"error: {error}", file=sys.stderr)
        return EXIT_CONFIG
    except RevealedBAIError as error:
        logger.exception("run failed")
        print(f"error: {error}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as error:  # noqa: BLE001
        logger.exception("unexpected failure")
        print(f"error: {error}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
