"""CLI entry point for the ``policylab`` command."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable

import pandas as pd
from pydantic import ValidationError

from policylab.config import Settings, get_settings
from policylab.dp import Objective, solve_dp
from policylab.errors import ExponentFitError, PolicyLabError
from policylab.harness import estimate_grid, fit_exponent
from policylab.ldp import bound_report, cl_family_report, solve_gamma_star
from policylab.model import Instance, make_cl_instance, validate_instance
from policylab.posterior import BetaPosterior
from policylab.runs import ManifestWriter, RunManager
from policylab.schemas import (
    BoundsPayload,
    CheckpointPayload,
    ClFamilyPayload,
    DPPayload,
    ExponentPayload,
    GammaPayload,
    InstancePayload,
    PredictionPayload,
    ReportPayload,
    ReportRow,
    SimulateSummary,
)

from .config import RunConfig, resolve_run_config
from .output import emit_json, policy_frame, simulate_frame, write_csv

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _float_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text}") from exc


def _add_instance_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--theta",
        type=_float_list,
        default=None,
        help="Comma-separated success probabilities, e.g. 0.9,0.6",
    )
    parser.add_argument(
        "--k", type=int, default=None, help="Number of arms of a hard-family instance"
    )
    parser.add_argument(
        "--index",
        type=int,
        default=None,
        help="1-based hard-family member; used together with --k instead of --theta",
    )


def _add_output_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--output",
        type=Path,
        default=None,
        help="Write the JSON payload to this file instead of standard output",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="policylab",
        description="Fixed-budget policy choice laboratory for batched Bernoulli experiments",
    )
    parser.add_argument(
        "--log-level",
        default=None,
        help="Logging verbosity (DEBUG, INFO, WARNING, ERROR); defaults to POLICYLAB_LOG_LEVEL",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    instance_parser = subparsers.add_parser(
        "instance", help="Emit a member of the k-arm hard family"
    )
    instance_parser.add_argument("--k", type=int, required=True, help="Number of arms (>= 2)")
    instance_parser.add_argument(
        "--index", type=int, required=True, help="1-based family member in 1..k"
    )
    _add_output_argument(instance_parser)

    gamma_parser = subparsers.add_parser(
        "gamma", help="Solve the optimal allocation program for an instance"
    )
    _add_instance_arguments(gamma_parser)
    _add_output_argument(gamma_parser)

    bounds_parser = subparsers.add_parser(
        "bounds", help="Complexity, rates and the log-k lower bound for an instance"
    )
    _add_instance_arguments(bounds_parser)
    bounds_parser.add_argument(
        "--T", dest="T", type=int, required=True, help="Horizon used by the lower bound"
    )
    bounds_parser.add_argument(
        "--cl-family",
        action="store_true",
        help="Evaluate every member of the k-arm hard family (requires --k)",
    )
    _add_output_argument(bounds_parser)

    simulate_parser = subparsers.add_parser(
        "simulate", help="Run replicated adaptive experiments and write CSV/JSON results"
    )
    simulate_parser.add_argument(
        "--config", type=Path, default=None, help="Run file (YAML or JSON)"
    )
    _add_instance_arguments(simulate_parser)
    simulate_parser.add_argument("--name", default=None, help="Run name (lowercase slug)")
    simulate_parser.add_argument("--N", dest="N", type=int, default=None, help="Wave size")
    simulate_parser.add_argument(
        "--T", dest="T", type=int, default=None, help="Number of waves"
    )
    simulate_parser.add_argument(
        "--T-grid",
        dest="T_grid",
        type=_int_list,
        default=None,
        help="Comma-separated checkpoints in waves; three or more enable the exponent fit",
    )
    simulate_parser.add_argument(
        "--rule",
        choices=["exploration", "thompson", "uniform"],
        default=None,
        help="Allocation rule",
    )
    simulate_parser.add_argument("--reps", type=int, default=None, help="Replications")
    simulate_parser.add_argument("--seed", type=int, default=None, help="Master seed")
    simulate_parser.add_argument(
        "--draws",
        dest="posterior_draws",
        type=int,
        default=None,
        help="Posterior draws per wave for the probability-of-best estimate",
    )
    simulate_parser.add_argument(
        "--workers", type=int, default=None, help="Parallel workers for replication blocks"
    )
    simulate_parser.add_argument(
        "--scheduler",
        choices=["synchronous", "threads", "processes"],
        default=None,
        help="Dask scheduler used when --workers > 1",
    )
    simulate_parser.add_argument(
        "--output-dir", type=Path, default=None, help="Root directory for run outputs"
    )

    dp_parser = subparsers.add_parser("dp", help="Solve the design problem exactly")
    dp_parser.add_argument("--k", type=int, required=True, help="Number of arms")
    dp_parser.add_argument("--N", dest="N", type=int, required=True, help="Wave size")
    dp_parser.add_argument("--T", dest="T", type=int, required=True, help="Number of waves")
    dp_parser.add_argument(
        "--objective",
        choices=[objective.value for objective in Objective],
        default=Objective.WELFARE.value,
        help="Objective to optimise",
    )
    dp_parser.add_argument(
        "--prior-alpha",
        type=_float_list,
        default=None,
        help="Comma-separated prior alpha per arm (default 1 for every arm)",
    )
    dp_parser.add_argument(
        "--prior-beta",
        type=_float_list,
        default=None,
        help="Comma-separated prior beta per arm (default 1 for every arm)",
    )
    dp_parser.add_argument(
        "--state-cap",
        type=int,
        default=None,
        help="Maximum reachable states; defaults to POLICYLAB_STATE_CAP",
    )
    dp_parser.add_argument(
        "--policy-csv", type=Path, default=None, help="Also write the optimal policy table"
    )
    _add_output_argument(dp_parser)

    report_parser = subparsers.add_parser(
        "report", help="Join a finished simulate run with the rate predictions"
    )
    report_parser.add_argument("--run", required=True, help="Name of the simulate run")
    report_parser.add_argument(
        "--output-dir", type=Path, default=None, help="Root directory holding the run"
    )

    return parser


def configure_logging(level: str) -> None:
    """Configure root logger for console output."""

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(levelname)s %(name)s - %(message)s",
    )


def _resolve_instance(args: argparse.Namespace) -> Instance:
    if args.theta is not None:
        if args.k is not None or args.index is not None:
            raise ValueError("give either --theta or --k/--index, not both")
        return validate_instance(args.theta)
    if args.k is None or args.index is None:
        raise ValueError("an instance needs --theta or both --k and --index")
    return make_cl_instance(args.k, args.index)


def _predictions(instance: Instance) -> PredictionPayload:
    report = bound_report(instance, None, 1)
    return PredictionPayload(
        gamma_star=report.gamma_star,
        pinsker_bound=report.pinsker_bound,
        capped_rate=report.capped_rate,
        rho=list(report.rho),
    )


def handle_instance(args: argparse.Namespace, settings: Settings) -> int:
    instance = make_cl_instance(args.k, args.index)
    emit_json(InstancePayload.from_instance(instance, index=args.index), args.output)
    return EXIT_OK


def handle_gamma(args: argparse.Namespace, settings: Settings) -> int:
    instance = _resolve_instance(args)
    solution = solve_gamma_star(instance)
    emit_json(GammaPayload.from_solution(instance, solution), args.output)
    return EXIT_OK


def handle_bounds(args: argparse.Namespace, settings: Settings) -> int:
    if args.cl_family:
        if args.k is None or args.theta is not None:
            raise ValueError("--cl-family needs --k and no --theta")
        family = cl_family_report(args.k, args.T)
        instances = [make_cl_instance(args.k, index) for index in range(1, args.k + 1)]
        emit_json(ClFamilyPayload.from_family(family, instances), args.output)
        return EXIT_OK
    instance = _resolve_instance(args)
    report = bound_report(instance, None, args.T)
    emit_json(BoundsPayload.from_report(instance, report), args.output)
    return EXIT_OK


def handle_simulate(args: argparse.Namespace, settings: Settings) -> int:
    overrides: dict[str, Any] = {
        "name": args.name,
        "theta": args.theta,
        "cl_instance": (
            {"k": args.k, "index": args.index}
            if args.k is not None or args.index is not None
            else None
        ),
        "N": args.N,
        "T": args.T,
        "T_grid": args.T_grid,
        "rule": args.rule,
        "reps": args.reps,
        "seed": args.seed,
        "posterior_draws": args.posterior_draws,
        "workers": args.workers,
        "scheduler": args.scheduler,
        "output_dir": args.output_dir,
    }
    run = resolve_run_config(args.config, overrides)
    return run_simulation(run, settings)


def run_simulation(run: RunConfig, settings: Settings) -> int:
    """Execute a validated simulate run and persist its outputs."""

    instance = run.build_instance()
    config = run.experiment_config(instance, settings)
    manager = RunManager(run.output_dir or settings.output_dir)
    paths = manager.initialize(run.name)
    _LOGGER.info(
        "Simulating %s on theta=%s with N=%d, horizons=%s, reps=%d",
        run.rule,
        list(instance.theta),
        run.N,
        run.horizons,
        run.reps,
    )

    estimates = estimate_grid(
        instance,
        config,
        run.rule,
        run.reps,
        run.horizons,
        workers=run.workers or settings.workers,
        scheduler=run.scheduler or settings.scheduler,
        block_size=settings.block_size,
    )
    fit = None
    if len(estimates) >= 3:
        try:
            fit = fit_exponent([(estimate.budget, estimate.regret_hat) for estimate in estimates])
        except ExponentFitError as exc:
            _LOGGER.warning("Exponent fit skipped: %s", exc)

    summary = SimulateSummary(
        run_name=run.name,
        rule=run.rule,
        theta=list(instance.theta),
        best_arm=instance.best_arm,
        N=run.N,
        T_grid=run.horizons,
        reps=run.reps,
        seed=run.seed,
        posterior_draws=config.posterior_draws,
        fit=ExponentPayload.from_fit(fit) if fit is not None else None,
        predictions=_predictions(instance),
        checkpoints=[CheckpointPayload.from_estimate(estimate) for estimate in estimates],
    )
    write_csv(simulate_frame(estimates), paths.simulate_csv)
    emit_json(summary, paths.summary_json)
    emit_json(run, paths.config_json)
    ManifestWriter(settings.repo_root).write(
        paths, run.name, run.model_dump(mode="json"), command="simulate"
    )
    return EXIT_OK


def handle_dp(args: argparse.Namespace, settings: Settings) -> int:
    prior = BetaPosterior(
        alpha=tuple(args.prior_alpha or (1.0,) * args.k),
        beta=tuple(args.prior_beta or (1.0,) * args.k),
    )
    solution = solve_dp(
        args.k,
        args.N,
        args.T,
        prior,
        args.objective,
        cap=args.state_cap or settings.state_cap,
    )
    if args.policy_csv is not None:
        write_csv(policy_frame(solution, args.k), args.policy_csv)
    payload = DPPayload.from_solution(
        solution,
        k=args.k,
        N=args.N,
        T=args.T,
        prior_alpha=prior.alpha,
        prior_beta=prior.beta,
    )
    emit_json(payload, args.output)
    return EXIT_OK


def handle_report(args: argparse.Namespace, settings: Settings) -> int:
    paths = RunManager(args.output_dir or settings.output_dir).resolve_completed(args.run)
    summary = SimulateSummary.model_validate_json(paths.summary_json.read_text("utf-8"))
    table = pd.read_csv(paths.simulate_csv)
    predictions = _predictions(validate_instance(summary.theta))

    rows = []
    for record in table.sort_values("T").to_dict("records"):
        point = record["exponent_point"]
        point = None if pd.isna(point) else float(point)
        rows.append(
            ReportRow(
                T=int(record["T"]),
                budget=int(record["N"]) * int(record["T"]),
                regret_hat=float(record["regret_hat"]),
                exponent_point=point,
                gamma_star=predictions.gamma_star,
                pinsker_bound=predictions.pinsker_bound,
                capped_rate=predictions.capped_rate,
                exponent_to_gamma=None if point is None else point / predictions.gamma_star,
            )
        )
    payload = ReportPayload(
        run_name=summary.run_name,
        rule=summary.rule,
        theta=summary.theta,
        fit=summary.fit,
        predictions=predictions,
        rows=rows,
    )
    write_csv(pd.DataFrame([row.model_dump() for row in rows]), paths.report_csv)
    emit_json(payload, paths.report_json)
    return EXIT_OK


_HANDLERS: dict[str, Callable[[argparse.Namespace, Settings], int]] = {
    "instance": handle_instance,
    "gamma": handle_gamma,
    "bounds": handle_bounds,
    "simulate": handle_simulate,
    "dp": handle_dp,
    "report": handle_report,
}


def main(argv: list[str] | None = None) -> int:
    """Entry point for the ``policylab`` CLI."""

    parser = _build_parser()
    args = parser.parse_args(argv)

    settings = get_settings()
    configure_logging(args.log_level or settings.log_level)
    _LOGGER.debug("CLI arguments: %s", args)

    handler = _HANDLERS[args.command]
    try:
        return handler(args, settings)
    except ValidationError as exc:
        _LOGGER.error("Invalid configuration: %s", exc)
        return EXIT_CONFIG
    except (FileNotFoundError, ValueError) as exc:
        _LOGGER.error("%s", exc)
        return EXIT_CONFIG
    except (PolicyLabError, OSError) as exc:
        _LOGGER.error("%s failed: %s", args.command, exc)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover - manual invocation
    sys.exit(main())
