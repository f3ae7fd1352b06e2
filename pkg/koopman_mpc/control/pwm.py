"""Carrier-based PWM with min-max common-mode injection."""

import logging
import warnings
from typing import NamedTuple

from koopman_mpc.drive.params import SwitchState
from koopman_mpc.drive.transforms import inverse_clarke, inverse_park
from koopman_mpc.errors import ConfigError, OvermodulationWarning

logger = logging.getLogger(__name__)


class PwmState(NamedTuple):
    tick: int
    duties: tuple[float, float, float]


def duty_cycles(
    alpha_beta, u_dc: float
) -> tuple[tuple[float, float, float], bool]:
    """Phase duty ratios for a stationary-frame command, clamped to [0, 1].

    The common-mode offset (max + min) / 2 extends the linear range to
    |u| = u_dc / sqrt(3). The flag reports clamping.
    """
    u_abc = inverse_clarke(alpha_beta)
    offset = 0.5 * (max(u_abc) + min(u_abc))
    raw = [0.5 + (u - offset) / u_dc for u in u_abc]
    duties = tuple(min(1.0, max(0.0, d)) for d in raw)
    overmodulated = any(d < -1e-12 or d > 1.0 + 1e-12 for d in raw)
    return duties, overmodulated


class Modulator:
    """Triangle-carrier comparator stepped at the plant's fine resolution.

    The carrier starts at its valley (0), peaks (1) at half period. Duties
    latch at both extremes; a leg is +1 while the carrier is below its duty.
    """

    def __init__(self, carrier_period: float, fine_dt: float):
        ticks = round(carrier_period / fine_dt)
        if ticks < 2 or abs(ticks * fine_dt - carrier_period) > 1e-9 * carrier_period:
            raise ConfigError(
                f"Fine step {fine_dt} s does not divide carrier period {carrier_period} s"
            )
        self.ticks = ticks
        self.reset()

    def reset(self, duties=(0.5, 0.5, 0.5)) -> None:
        self.state = PwmState(0, tuple(duties))

    def _latches(self, tick: int) -> bool:
        return tick == 0 or 2 * tick == self.ticks

    def carrier(self, tick: int) -> float:
        phase = (tick + 0.5) / self.ticks
        return 2.0 * phase if phase < 0.5 else 2.0 - 2.0 * phase

    def step(self, commanded_duties) -> SwitchState:
        tick, duties = self.state
        if self._latches(tick):
            duties = tuple(commanded_duties)
        c = self.carrier(tick)
        legs = SwitchState(*(1 if c < d else -1 for d in duties))
        self.state = PwmState((tick + 1) % self.ticks, duties)
        return legs


def modulate(
    u_dq_cmd,
    eps: float,
    u_dc: float,
    modulator: Modulator,
    n_steps: int,
) -> tuple[list[SwitchState], bool]:
    """Switch states for the next ``n_steps`` fine steps of a dq voltage command."""
    duties, overmodulated = duty_cycles(inverse_park(u_dq_cmd, eps), u_dc)
    if overmodulated:
        warnings.warn(OvermodulationWarning(f"Command {u_dq_cmd} exceeds linear range"))
    return [modulator.step(duties) for _ in range(n_steps)], overmodulated
