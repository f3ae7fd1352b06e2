"""Field-oriented PI current control tuned by the symmetrical optimum."""

import logging
import math
from typing import Literal, NamedTuple

from pydantic import BaseModel, ConfigDict, Field

from koopman_mpc.control.base import Actuation, Sample
from koopman_mpc.control.mpc import Reference
from koopman_mpc.control.pwm import duty_cycles
from koopman_mpc.drive.params import DqState, DqVoltage, MotorParams, OperatingCondition
from koopman_mpc.drive.transforms import inverse_park

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)


class FocConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    a: float = Field(4.0, gt=1, description="Symmetrical-optimum parameter")
    oversampling: int = Field(6, ge=1, description="Controller rate / carrier rate")
    t_s_foc: float = Field(50e-6, gt=0)
    decoupling: bool = True
    angle_compensation: bool = True
    reference_prefilter: bool = Field(
        True, description="First-order reference filter with time constant t_n"
    )

    @property
    def carrier_period(self) -> float:
        return self.oversampling * self.t_s_foc

    @property
    def carrier_freq(self) -> float:
        return 1.0 / self.carrier_period

    @property
    def tau_sigma(self) -> float:
        """Lumped small time constant: 1.5 controller periods + half a carrier period."""
        return 1.5 * self.t_s_foc + 0.5 * self.carrier_period


class PiGains(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    k_p: float = Field(gt=0, description="V/A")
    t_n: float = Field(gt=0, description="Reset time (s)")
    output_limit: float = Field(gt=0, description="V")


class PiState(NamedTuple):
    integral: float = 0.0


def tune_symmetrical_optimum(
    p: MotorParams, axis: Literal["d", "q"], cfg: FocConfig, output_limit: float
) -> PiGains:
    inductance = p.l_d if axis == "d" else p.l_q
    tau = inductance / p.r_s
    return PiGains(
        k_p=tau * p.r_s / (cfg.a * cfg.tau_sigma),
        t_n=cfg.a**2 * cfg.tau_sigma,
        output_limit=output_limit,
    )


def pi_step(
    error: float, gains: PiGains, dt: float, state: PiState
) -> tuple[float, PiState]:
    """u = k_p (e + integral / t_n) with conditional-integration anti-windup."""
    candidate = state.integral + error * dt
    u = gains.k_p * (error + candidate / gains.t_n)
    if abs(u) > gains.output_limit and u * error > 0:
        candidate = state.integral
        u = gains.k_p * (error + candidate / gains.t_n)
    u = max(-gains.output_limit, min(gains.output_limit, u))
    return u, PiState(candidate)


def decoupling_feedforward(
    x: DqState, cond: OperatingCondition, p: MotorParams
) -> DqVoltage:
    w = cond.omega_el
    return DqVoltage(-w * p.l_q * x.i_q, w * (p.l_d * x.i_d + p.psi_p))


def prefilter_step(target: float, filtered: float, t_n: float, dt: float) -> float:
    """Exact zero-order-hold update of 1 / (1 + s t_n); cancels the PI zero."""
    return filtered + (1.0 - math.exp(-dt / t_n)) * (target - filtered)


class FocState(NamedTuple):
    d: PiState = PiState()
    q: PiState = PiState()
    ref: Reference = Reference(0.0, 0.0)


class FocCommand(NamedTuple):
    u_dq: DqVoltage
    angle: float
    duties: tuple[float, float, float]
    overmodulated: bool


def foc_control_step(
    measured: DqState,
    refs: Reference,
    eps: float,
    cfg: FocConfig,
    gains: tuple[PiGains, PiGains],
    params: MotorParams,
    cond: OperatingCondition,
    state: FocState,
) -> tuple[FocCommand, FocState]:
    """One controller period: PI on both axes, feedforward, circular limit, duties."""
    limit = cond.u_dc / SQRT3
    if cfg.reference_prefilter:
        refs = Reference(
            prefilter_step(refs.i_d_star, state.ref.i_d_star, gains[0].t_n, cfg.t_s_foc),
            prefilter_step(refs.i_q_star, state.ref.i_q_star, gains[1].t_n, cfg.t_s_foc),
        )
    e_d = refs.i_d_star - measured.i_d
    e_q = refs.i_q_star - measured.i_q
    u_d, pi_d = pi_step(e_d, gains[0], cfg.t_s_foc, state.d)
    u_q, pi_q = pi_step(e_q, gains[1], cfg.t_s_foc, state.q)

    if cfg.decoupling:
        ff = decoupling_feedforward(measured, cond, params)
        u_d, u_q = u_d + ff.u_d, u_q + ff.u_q

    magnitude = math.hypot(u_d, u_q)
    if magnitude > limit:
        scale = limit / magnitude
        u_d, u_q = u_d * scale, u_q * scale
        # hold the integrators of axes pushing further into the limit
        if u_d * e_d > 0:
            pi_d = state.d
        if u_q * e_q > 0:
            pi_q = state.q

    angle = eps
    if cfg.angle_compensation:
        angle += 1.5 * cond.omega_el * cfg.t_s_foc
    duties, overmodulated = duty_cycles(inverse_park((u_d, u_q), angle), cond.u_dc)
    next_state = FocState(pi_d, pi_q, refs if cfg.reference_prefilter else state.ref)
    return FocCommand(DqVoltage(u_d, u_q), angle, duties, overmodulated), next_state


class FocController:
    name = "foc"

    def __init__(self, params: MotorParams, cond: OperatingCondition, cfg: FocConfig):
        self.params = params
        self.cond = cond
        self.cfg = cfg
        limit = cond.u_dc / SQRT3
        self.gains = (
            tune_symmetrical_optimum(params, "d", cfg, limit),
            tune_symmetrical_optimum(params, "q", cfg, limit),
        )
        logger.info(
            f"FOC gains: d k_p={self.gains[0].k_p:.4g} t_n={self.gains[0].t_n:.4g}, "
            f"q k_p={self.gains[1].k_p:.4g} t_n={self.gains[1].t_n:.4g}, "
            f"carrier {cfg.carrier_freq:.1f} Hz"
        )
        self.reset()

    def reset(self) -> None:
        self.state = FocState()

    def initial_actuation(self) -> Actuation:
        return Actuation("duty", (0.5, 0.5, 0.5))

    def control(self, sample: Sample) -> Actuation:
        cond = self.cond
        if sample.omega_el != cond.omega_el or sample.u_dc != cond.u_dc:
            cond = OperatingCondition(omega_el=sample.omega_el, u_dc=sample.u_dc)
        command, self.state = foc_control_step(
            DqState(sample.i_d, sample.i_q),
            Reference(sample.i_d_ref, sample.i_q_ref),
            sample.eps_el,
            self.cfg,
            self.gains,
            self.params,
            cond,
            self.state,
        )
        return Actuation(
            "duty",
            command.duties,
            overmodulated=command.overmodulated,
            u_dq=tuple(command.u_dq),
            angle=command.angle,
        )
