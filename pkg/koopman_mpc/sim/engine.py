"""Closed-loop drive simulation with one period of actuation latency.

Per controller period the plant state is sampled, the controller computes a
command, and the plant is integrated at the fine step under the command that
was computed one period earlier. Speed is held constant by an ideal load
machine.
"""

import logging
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from koopman_mpc.control.base import Actuation, Controller, Sample
from koopman_mpc.control.foc import FocConfig, FocController
from koopman_mpc.control.mpc import HorizonConfig, MpcController
from koopman_mpc.control.predictors import KoopmanPredictor, WhiteBoxPredictor
from koopman_mpc.control.pwm import Modulator, modulate
from koopman_mpc.drive.machine import plant_step
from koopman_mpc.drive.params import (
    DqState,
    MotorParams,
    OperatingCondition,
    SwitchState,
    reduce_angle,
)
from koopman_mpc.drive.transforms import vector_index_of
from koopman_mpc.errors import ConfigError, MissingModel
from koopman_mpc.koopman.rom import KoopmanModelBank
from koopman_mpc.sim.trajectory import (
    BOUNDARY,
    LogMeta,
    TrajectoryLog,
    TrajectoryRecorder,
)

logger = logging.getLogger(__name__)

ControllerKind = Literal["koopman-mpc", "whitebox-mpc", "foc"]
CONTROLLER_KINDS: tuple[str, ...] = ("koopman-mpc", "whitebox-mpc", "foc")


class SimTiming(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    t_s: float = Field(50e-6, gt=0, description="Controller period (s)")
    fine_dt: float = Field(1e-6, gt=0, description="Plant integration step (s)")

    @property
    def substeps(self) -> int:
        n = round(self.t_s / self.fine_dt)
        if n < 1 or abs(n * self.fine_dt - self.t_s) > 1e-9 * self.t_s:
            raise ConfigError(
                f"Fine step {self.fine_dt} s does not divide controller period {self.t_s} s"
            )
        return n


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = "scenario"
    speed_rpm: float = 1000.0
    u_dc: float = Field(300.0, gt=0)
    duration: float = Field(0.1, gt=0)
    reference_schedule: list[tuple[float, float, float]] = Field(
        default_factory=lambda: [(1e-3, -169.0, 169.0)],
        description="(time s, i_d* A, i_q* A); references are zero before the first entry",
    )
    controller: ControllerKind = "whitebox-mpc"
    seed: int = 0
    initial_angle: float = 0.0
    foc_a: float | None = None
    foc_oversampling: int | None = None
    record_fine: bool = True

    @model_validator(mode="after")
    def _schedule_ordered(self):
        times = [entry[0] for entry in self.reference_schedule]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("reference_schedule times must be non-decreasing")
        if times and (times[0] < 0 or times[-1] > self.duration):
            raise ValueError("reference_schedule times must lie within duration")
        return self

    def reference_at(self, t: float) -> tuple[float, float]:
        ref = (0.0, 0.0)
        for time, i_d, i_q in self.reference_schedule:
            if time > t:
                break
            ref = (i_d, i_q)
        return ref


def build_controller(
    kind: str,
    params: MotorParams,
    cond: OperatingCondition,
    horizon: HorizonConfig = HorizonConfig(),
    foc: FocConfig = FocConfig(),
    bank: KoopmanModelBank | None = None,
) -> Controller:
    if kind == "whitebox-mpc":
        return MpcController(kind, WhiteBoxPredictor(params, cond, horizon.t_s), horizon)
    if kind == "koopman-mpc":
        if bank is None:
            raise MissingModel("<no bank loaded>")
        if not math.isclose(bank.training_metadata.t_s, horizon.t_s):
            raise ConfigError(
                f"Bank trained at t_s={bank.training_metadata.t_s}, horizon uses {horizon.t_s}"
            )
        return MpcController(kind, KoopmanPredictor(bank), horizon)
    if kind == "foc":
        return FocController(params, cond, foc)
    raise ConfigError(f"Unknown controller {kind!r}; choose from {CONTROLLER_KINDS}")


def run_closed_loop(
    scenario: ScenarioConfig,
    params: MotorParams,
    controller: Controller,
    timing: SimTiming = SimTiming(),
) -> TrajectoryLog:
    substeps = timing.substeps
    t_s, fine_dt = timing.t_s, timing.fine_dt
    cond = OperatingCondition.from_rpm(scenario.speed_rpm, params, scenario.u_dc)
    omega = cond.omega_el
    n_periods = round(scenario.duration / t_s)

    carrier_period = getattr(getattr(controller, "cfg", None), "carrier_period", None)
    modulator = Modulator(carrier_period, fine_dt) if carrier_period else None

    meta = LogMeta(
        scenario=scenario.name,
        controller=controller.name,
        speed_rpm=scenario.speed_rpm,
        omega_el=omega,
        u_dc=cond.u_dc,
        t_s=t_s,
        fine_dt=fine_dt,
        carrier_freq=None if carrier_period is None else 1.0 / carrier_period,
    )
    recorder = TrajectoryRecorder(meta, record_fine=scenario.record_fine)
    logger.info(
        f"Running {scenario.name} with {controller.name}: {n_periods} periods at "
        f"{scenario.speed_rpm:g} min^-1"
    )

    controller.reset()
    effective: Actuation = controller.initial_actuation()
    x = DqState(0.0, 0.0)
    eps0 = scenario.initial_angle
    eps = reduce_angle(eps0)
    prev_s: SwitchState | None = None
    step = 0

    for i in range(n_periods):
        t = i * t_s
        i_d_ref, i_q_ref = scenario.reference_at(t)
        sample = Sample(t, x.i_d, x.i_q, eps, omega, i_d_ref, i_q_ref, cond.u_dc)
        command = controller.control(sample)

        toggles = 0
        period_s = None
        if effective.mode == "switch":
            held = SwitchState(*(int(v) for v in effective.legs))
            fine_states = [held] * substeps
        else:
            fine_states, _ = modulate(
                effective.u_dq, effective.angle, cond.u_dc, modulator, substeps
            )
        for j, s in enumerate(fine_states):
            if period_s is None:
                period_s = s
            if prev_s is not None:
                toggles += s.toggles_from(prev_s)
            prev_s = s
            recorder.fine_step(t + j * fine_dt, x.i_d, x.i_q, eps, s)
            x = plant_step(x, s, eps, cond, params, fine_dt, 1)
            step += 1
            eps = reduce_angle(eps0 + omega * fine_dt * step)

        vector_index = (
            effective.vector_index if effective.mode == "switch" else vector_index_of(period_s)
        )
        recorder.period(
            time=t,
            i_d=sample.i_d,
            i_q=sample.i_q,
            eps_el=sample.eps_el,
            i_d_ref=i_d_ref,
            i_q_ref=i_q_ref,
            u_dc=cond.u_dc,
            vector_index=vector_index,
            s_a=period_s[0],
            s_b=period_s[1],
            s_c=period_s[2],
            cmd_a=command.legs[0],
            cmd_b=command.legs[1],
            cmd_c=command.legs[2],
            applied_a=effective.legs[0],
            applied_b=effective.legs[1],
            applied_c=effective.legs[2],
            best_cost=command.best_cost,
            toggles=toggles,
            overmodulated=int(command.overmodulated),
        )
        effective = command

    t_end = n_periods * t_s
    i_d_ref, i_q_ref = scenario.reference_at(t_end)
    last_s = prev_s or SwitchState(1, 1, 1)
    nan = float("nan")
    recorder.period(
        time=t_end,
        i_d=x.i_d,
        i_q=x.i_q,
        eps_el=eps,
        i_d_ref=i_d_ref,
        i_q_ref=i_q_ref,
        u_dc=cond.u_dc,
        vector_index=BOUNDARY,
        s_a=last_s[0],
        s_b=last_s[1],
        s_c=last_s[2],
        cmd_a=nan,
        cmd_b=nan,
        cmd_c=nan,
        applied_a=effective.legs[0],
        applied_b=effective.legs[1],
        applied_c=effective.legs[2],
        best_cost=nan,
        toggles=0,
        overmodulated=0,
    )
    return recorder.build()


def delay_model_check(log: TrajectoryLog) -> bool:
    """True when every command computed in period i drives period i + 1."""
    cmd = log.periods[["cmd_a", "cmd_b", "cmd_c"]].to_numpy()
    applied = log.periods[["applied_a", "applied_b", "applied_c"]].to_numpy()
    if len(cmd) < 2:
        return True
    return bool(np.array_equal(applied[1:], cmd[:-1]))
