import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat

from koopman_mpc.analysis.report import emit_report
from koopman_mpc.commands.common import (
    config_from_args,
    log_stem,
    logs_dir,
    simulate_and_evaluate,
)
from koopman_mpc.config import WORKERS
from koopman_mpc.koopman.bank_store import load_bank
from koopman_mpc.run_config import RunConfig
from koopman_mpc.sim.engine import CONTROLLER_KINDS

logger = logging.getLogger(__name__)


def cmd_compare(cfg: RunConfig, workers: int = WORKERS):
    """All three controllers over every configured scenario, then the report."""
    load_bank(cfg.bank_path)  # fail before simulating anything
    jobs = [(s.name, kind) for s in cfg.scenarios for kind in CONTROLLER_KINDS]
    logger.info(f"Comparing {len(jobs)} runs with {workers} worker(s)")

    names = [name for name, _ in jobs]
    kinds = [kind for _, kind in jobs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(simulate_and_evaluate, repeat(cfg), names, kinds))
    else:
        results = [simulate_and_evaluate(cfg, n, k) for n, k in jobs]

    for log, _ in results:
        log.to_csv(logs_dir(cfg), log_stem(log))
    logs = [log for log, _ in results]
    metrics = [m for _, m in results]
    return emit_report(metrics, cfg.output_dir, logs)


def handle(args) -> int:
    written = cmd_compare(config_from_args(args))
    print(f"Report: {written[1]}")
    print(written[1].read_text())
    return 0


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "compare", parents=parents, help="Run every controller on every scenario"
    )
    parser.set_defaults(handler=handle, stage="compare")
