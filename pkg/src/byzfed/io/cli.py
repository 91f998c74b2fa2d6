# byzfed/io/cli.py
"""
The byzfed command line.

    byzfed simulate  --config plan.json [--out metrics.json]
    byzfed theory    --config plan.json
    byzfed sweep     --config plan.json [--out results.csv]
    byzfed stepsize  --config plan.json
    byzfed preset    stepsize [--out stepsize.csv]   (or fig1 .. fig9)

Exit status is 0 on success, 1 on any reported error (message on stderr)
and 2 on invalid arguments.
"""

import argparse
import asyncio
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import TextIO

from ..contexts.in_memory import InMemoryContext
from ..contexts.local import LocalContext
from ..core.context import ExperimentContext
from ..core.error import ConfigurationError, ReplicaException, UserException
from ..execution.threaded import ThreadedReplicaExecutor
from ..sim.experiment import run_experiment
from ..sim.plan import ExperimentPlan
from ..sim.sweep import SweepRow, sweep
from ..theory.analysis import analyze
from ..theory.moments import build_bundle
from ..theory.options import TheoryOptions
from ..theory.stability import mean_stability_bound, ms_stability_bound
from ..theory.stepsize import optimal_stepsize
from ..utils.rng import MAX_SEED
from .config import ConfigFile, read_config
from .presets import get_preset, preset_names
from .results import render_csv, write_atomic, write_results

logger = logging.getLogger(__name__)


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from e
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from e
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config; defaults apply when omitted")
    common.add_argument("--seed", type=_seed, metavar="U64", help="overrides the config seed")
    common.add_argument("--out", metavar="PATH", help="output file; stdout when omitted")
    common.add_argument("--replicas", type=_positive, metavar="R")
    common.add_argument("--iters", type=_positive, metavar="N")
    common.add_argument("--neumann-j", type=int, default=5, metavar="J")
    common.add_argument("--small-step-approx", action="store_true", help="drop the mu^2 term of F")
    common.add_argument("--cache-dir", metavar="DIR", help="keep replica traces here and reuse them")
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
    )

    parser = argparse.ArgumentParser(
        prog="byzfed",
        description="Partial-sharing online federated learning under model poisoning.",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    commands.add_parser("simulate", parents=[common], help="run the Monte-Carlo simulation")
    commands.add_parser("theory", parents=[common], help="stability bounds and steady-state MSE")
    commands.add_parser("sweep", parents=[common], help="simulate and predict along the sweep axis")
    commands.add_parser("stepsize", parents=[common], help="optimal stepsize and stability bounds")
    preset = commands.add_parser("preset", parents=[common], help="run a packaged experiment")
    preset.add_argument("name", choices=preset_names())
    return parser


# ------------------------------------------------------------------------------
# SUBCOMMANDS


def _load_config(args: argparse.Namespace) -> ConfigFile:
    config = ConfigFile() if args.config is None else read_config(args.config)
    if args.seed is not None:
        # the seed also drives the variance and Byzantine draws
        config = config.model_update(experiment=config.experiment.model_update(seed=args.seed))
    return config


def _load_plan(args: argparse.Namespace) -> ExperimentPlan:
    plan = _load_config(args).to_plan()
    return plan.with_overrides(replicas=args.replicas, iterations=args.iters)


def _options(args: argparse.Namespace, base: TheoryOptions | None = None) -> TheoryOptions:
    base = base if base is not None else TheoryOptions()
    return base.model_update(
        neumann_j=args.neumann_j,
        small_step_approx=args.small_step_approx or base.small_step_approx,
    )


def _context(args: argparse.Namespace) -> ExperimentContext:
    if args.cache_dir is not None:
        return LocalContext(base_dir=args.cache_dir, run_id="experiments")
    return InMemoryContext()


def _emit(text: str, out: str | None, stdout: TextIO):
    if out is None:
        stdout.write(text)
    else:
        write_atomic(out, text)


def _simulate(args: argparse.Namespace, stdout: TextIO) -> int:
    plan = _load_plan(args)
    metrics = asyncio.run(
        run_experiment(plan, context=_context(args), executor=ThreadedReplicaExecutor())
    )
    if args.out is not None:
        write_atomic(args.out, metrics.model_dump_json())
    stdout.write(f"algorithm = {plan.algorithm.name}\n")
    stdout.write(f"replicas = {metrics.replicas_used}\n")
    stdout.write(f"sim_test_mse = {metrics.test_mse:.9g} (se {metrics.test_mse_se:.3g})\n")
    stdout.write(f"sim_network_mse = {metrics.network_mse:.9g} (se {metrics.network_mse_se:.3g})\n")
    if metrics.flagged_replicas:
        stdout.write(f"flagged_replicas = {list(metrics.flagged_replicas)}\n")
    return 0


def _theory(args: argparse.Namespace, stdout: TextIO) -> int:
    plan = _load_plan(args)
    options = _options(args)
    spec = plan.network
    result = analyze(spec, options)
    lines = [
        f"stepsize = {result.stepsize:.9g}",
        f"mu_max_mean = {result.mu_max_mean:.9g}",
        f"mu_max_ms = {result.mu_max_ms:.9g}",
    ]
    if result.mse is None:
        lines.append(f"theory_mse = unavailable (K={spec.num_clients} > max_clients={options.max_clients})")
    else:
        lines += [
            f"spectral_radius = {result.spectral_radius:.9g}",
            f"theory_e_phi = {result.mse.e_phi:.9g}",
            f"theory_e_omega = {result.mse.e_omega:.9g}",
            f"theory_e_theta = {result.mse.e_theta:.9g}",
            f"theory_total = {result.mse.total:.9g}",
        ]
    lines.append(f"mu_star = {result.mu_star:.9g}")
    _emit("\n".join(lines) + "\n", args.out, stdout)
    return 0


def _stepsize(args: argparse.Namespace, stdout: TextIO) -> int:
    plan = _load_plan(args)
    options = _options(args)
    spec = plan.network
    bundle = build_bundle(spec)
    lines = [
        f"mu_star = {optimal_stepsize(bundle, options.neumann_j):.9g}",
        f"mu_max_mean = {mean_stability_bound(spec):.9g}",
        f"mu_max_ms = {ms_stability_bound(bundle, options=options):.9g}",
    ]
    _emit("\n".join(lines) + "\n", args.out, stdout)
    return 0


def _sweep(args: argparse.Namespace, stdout: TextIO) -> int:
    plan = _load_plan(args)
    if plan.sweep is None:
        raise ConfigurationError("the config declares no experiment.sweep axis")
    rows = asyncio.run(
        sweep(
            plan,
            context=_context(args),
            executor=ThreadedReplicaExecutor(),
            options=_options(args),
        )
    )
    _emit(render_csv(rows), args.out, stdout)
    return 0


def _series_path(out: str, label: str) -> Path:
    path = Path(out)
    return path.with_name(f"{path.stem}-{label}{path.suffix}")


def _preset(args: argparse.Namespace, stdout: TextIO) -> int:
    preset = get_preset(args.name).with_overrides(
        seed=args.seed,
        replicas=args.replicas,
        iterations=args.iters,
    )
    options = _options(args, preset.options)
    context = _context(args)
    executor = ThreadedReplicaExecutor()
    results: list[tuple[str, list[SweepRow]]] = []
    for series in preset.series:
        logger.info("Running series %s of preset %s", series.label, preset.name)
        rows = asyncio.run(sweep(series.plan, context=context, executor=executor, options=options))
        results.append((series.label, rows))

    if args.out is None:
        for label, rows in results:
            if len(results) > 1:
                stdout.write(f"# {preset.name} {label}\n")
            stdout.write(render_csv(rows))
    elif len(results) == 1:
        write_results(results[0][1], args.out)
    else:
        for label, rows in results:
            write_results(rows, _series_path(args.out, label))
    return 0


HANDLERS = {
    "simulate": _simulate,
    "theory": _theory,
    "sweep": _sweep,
    "stepsize": _stepsize,
    "preset": _preset,
}


def run_cli(
    argv: Sequence[str] | None = None,
    *,
    stdout: TextIO | None = None,
    stderr: TextIO | None = None,
) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=stderr,
    )
    try:
        return HANDLERS[args.command](args, stdout)
    except (UserException, ReplicaException) as e:
        if e.message is None:
            raise
        logger.debug("Command %s failed", args.command, exc_info=True)
        stderr.write(f"byzfed {args.command}: error: {e.message}\n")
        return 1


def main():
    sys.exit(run_cli())


__all__ = [
    "build_parser",
    "main",
    "run_cli",
]
