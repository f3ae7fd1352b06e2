import logging

from koopman_mpc.analysis.metrics import evaluate_log
from koopman_mpc.analysis.report import emit_report
from koopman_mpc.commands.common import config_from_args, logs_dir
from koopman_mpc.errors import ReportIoError
from koopman_mpc.run_config import RunConfig
from koopman_mpc.sim.trajectory import TrajectoryLog

logger = logging.getLogger(__name__)

SUFFIX = "_periods.csv"


def cmd_report(cfg: RunConfig):
    """Re-analyse logs already on disk without re-simulating."""
    directory = logs_dir(cfg)
    stems = sorted(p.name[: -len(SUFFIX)] for p in directory.glob(f"*{SUFFIX}"))
    if not stems:
        raise ReportIoError(f"No logs found in {directory}")
    logs = [TrajectoryLog.from_csv(directory, stem) for stem in stems]
    logger.info(f"Re-analysing {len(logs)} logs from {directory}")
    return emit_report([evaluate_log(log) for log in logs], cfg.output_dir, logs)


def handle(args) -> int:
    written = cmd_report(config_from_args(args))
    print(written[1].read_text())
    return 0


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "report", parents=parents, help="Rebuild the report from existing logs"
    )
    parser.set_defaults(handler=handle, stage="report")
