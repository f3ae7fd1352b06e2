import logging

from koopman_mpc.analysis.metrics import evaluate_log
from koopman_mpc.analysis.report import metrics_frame
from koopman_mpc.commands.common import (
    bank_for,
    config_from_args,
    log_stem,
    logs_dir,
    simulate,
)
from koopman_mpc.run_config import RunConfig
from koopman_mpc.sim.engine import CONTROLLER_KINDS

logger = logging.getLogger(__name__)


def cmd_run(cfg: RunConfig, scenario_name: str, controller: str | None = None):
    """Run one scenario with one controller; write its logs and metrics row."""
    scenario = cfg.scenario(scenario_name)
    kind = controller or scenario.controller
    bank = bank_for(cfg, kind)
    if kind == "foc":
        print(f"FOC carrier frequency: {cfg.foc_for(scenario).carrier_freq:.1f} Hz")

    log = simulate(cfg, scenario, kind, bank)
    stem = log_stem(log)
    log.to_csv(logs_dir(cfg), stem)
    metrics = evaluate_log(log)
    path = cfg.output_dir / f"{stem}_metrics.csv"
    metrics_frame([metrics]).to_csv(
        path, index=False, float_format="%.6g", lineterminator="\n"
    )
    print(metrics_frame([metrics]).to_string(index=False))
    logger.info(f"Metrics for {stem} written to {path}")
    return log, metrics


def handle(args) -> int:
    cmd_run(config_from_args(args), args.scenario, args.controller)
    return 0


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "run", parents=parents, help="Simulate one scenario with one controller"
    )
    parser.add_argument("--scenario", default="nominal", help="Scenario name from the config")
    parser.add_argument(
        "--controller",
        choices=CONTROLLER_KINDS,
        default=None,
        help="Override the scenario's controller",
    )
    parser.set_defaults(handler=handle, stage="run")
