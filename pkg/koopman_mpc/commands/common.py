import logging
from pathlib import Path

from koopman_mpc.analysis.metrics import ScenarioMetrics, evaluate_log
from koopman_mpc.drive.params import OperatingCondition
from koopman_mpc.koopman.bank_store import load_bank
from koopman_mpc.koopman.rom import KoopmanModelBank
from koopman_mpc.run_config import RunConfig, load_run_config
from koopman_mpc.sim.engine import ScenarioConfig, build_controller, run_closed_loop
from koopman_mpc.sim.trajectory import TrajectoryLog

logger = logging.getLogger(__name__)


def config_from_args(args) -> RunConfig:
    return load_run_config(
        Path(args.config) if args.config else None,
        overrides=args.set,
        seed=args.seed,
        out=args.out,
    )


def logs_dir(cfg: RunConfig) -> Path:
    return cfg.output_dir / "logs"


def bank_for(cfg: RunConfig, kind: str) -> KoopmanModelBank | None:
    return load_bank(cfg.bank_path) if kind == "koopman-mpc" else None


def simulate(
    cfg: RunConfig,
    scenario: ScenarioConfig,
    kind: str,
    bank: KoopmanModelBank | None = None,
) -> TrajectoryLog:
    cond = OperatingCondition.from_rpm(scenario.speed_rpm, cfg.motor, scenario.u_dc)
    horizon = cfg.mpc.model_copy(update={"t_s": cfg.timing.t_s})
    controller = build_controller(
        kind, cfg.motor, cond, horizon=horizon, foc=cfg.foc_for(scenario), bank=bank
    )
    return run_closed_loop(scenario, cfg.motor, controller, cfg.timing)


def simulate_and_evaluate(
    cfg: RunConfig, scenario_name: str, kind: str
) -> tuple[TrajectoryLog, ScenarioMetrics]:
    """Worker entry: loads what it needs so it can run in a separate process."""
    scenario = cfg.scenario(scenario_name)
    log = simulate(cfg, scenario, kind, bank_for(cfg, kind))
    return log, evaluate_log(log)


def log_stem(log: TrajectoryLog) -> str:
    return f"{log.meta.scenario}-{log.meta.controller}"
