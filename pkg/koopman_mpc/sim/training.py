"""Training-data generation and the standard scenario catalogue."""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from koopman_mpc.control.mpc import HorizonConfig
from koopman_mpc.drive.params import MotorParams, OperatingCondition
from koopman_mpc.errors import CoverageError
from koopman_mpc.sim.engine import ScenarioConfig, SimTiming, build_controller, run_closed_loop
from koopman_mpc.sim.trajectory import TrajectoryLog

logger = logging.getLogger(__name__)

N_VECTORS = 7


class TrainingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    speed_rpm: float = 1000.0
    u_dc: float = Field(300.0, gt=0)
    duration: float = Field(0.25, gt=0)
    i_d_range: tuple[float, float] = (-170.0, 0.0)
    i_q_range: tuple[float, float] = (-170.0, 170.0)
    dwell_range: tuple[float, float] = (0.5e-3, 2e-3)
    min_pairs_per_vector: int = Field(200, ge=1)
    seed: int = 0


def excitation_schedule(t: TrainingConfig) -> list[tuple[float, float, float]]:
    """Seeded random reference steps covering the operating region."""
    rng = np.random.default_rng(t.seed)
    schedule = []
    time = 0.0
    while time < t.duration:
        i_d = float(rng.uniform(*t.i_d_range))
        i_q = float(rng.uniform(*t.i_q_range))
        schedule.append((time, i_d, i_q))
        time += float(rng.uniform(*t.dwell_range))
    return schedule


def count_vector_pairs(log: TrajectoryLog) -> dict[int, int]:
    applied = log.periods["vector_index"].to_numpy()[:-1]
    return {v: int(np.count_nonzero(applied == v)) for v in range(N_VECTORS)}


def generate_training_data(
    t: TrainingConfig,
    params: MotorParams,
    horizon: HorizonConfig = HorizonConfig(),
    timing: SimTiming = SimTiming(),
) -> TrajectoryLog:
    scenario = ScenarioConfig(
        name="training",
        speed_rpm=t.speed_rpm,
        u_dc=t.u_dc,
        duration=t.duration,
        reference_schedule=excitation_schedule(t),
        controller="whitebox-mpc",
        seed=t.seed,
        record_fine=False,
    )
    cond = OperatingCondition.from_rpm(t.speed_rpm, params, t.u_dc)
    controller = build_controller("whitebox-mpc", params, cond, horizon)
    log = run_closed_loop(scenario, params, controller, timing)

    counts = count_vector_pairs(log)
    logger.info(f"Training pairs per vector: {counts}")
    if any(c < t.min_pairs_per_vector for c in counts.values()):
        raise CoverageError(counts, t.min_pairs_per_vector)
    return log


def default_scenarios() -> list[ScenarioConfig]:
    """Small-signal and nominal steps at training speed, nominal steps off-speed."""
    nominal = [(1e-3, -169.0, 169.0)]
    return [
        ScenarioConfig(
            name="small_signal",
            speed_rpm=1000.0,
            duration=0.1,
            reference_schedule=[(1e-3, -25.0, 0.0), (6e-3, -25.0, 25.0)],
            foc_a=3.0,
            foc_oversampling=6,
        ),
        ScenarioConfig(
            name="nominal",
            speed_rpm=1000.0,
            duration=0.1,
            reference_schedule=nominal,
            foc_a=4.0,
            foc_oversampling=5,
        ),
        ScenarioConfig(
            name="nominal_n100",
            speed_rpm=100.0,
            duration=0.5,
            reference_schedule=nominal,
            foc_a=4.0,
            foc_oversampling=5,
        ),
        ScenarioConfig(
            name="nominal_n2500",
            speed_rpm=2500.0,
            duration=0.06,
            reference_schedule=nominal,
            foc_a=4.0,
            foc_oversampling=5,
        ),
    ]
