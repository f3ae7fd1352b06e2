import math
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

TWO_PI = 2.0 * math.pi


class MotorParams(BaseModel):
    """Electrical constants of the IPMSM. Defaults are the test-bench machine."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    r_s: float = Field(0.018, gt=0, description="Stator resistance (Ohm)")
    l_d: float = Field(370e-6, gt=0, description="d-axis inductance (H)")
    l_q: float = Field(1200e-6, gt=0, description="q-axis inductance (H)")
    psi_p: float = Field(0.066, gt=0, description="Magnet flux linkage (Vs)")
    pole_pairs: int = Field(3, gt=0)


class OperatingCondition(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    omega_el: float = Field(description="Electrical angular frequency (rad/s)")
    u_dc: float = Field(300.0, gt=0, description="DC-link voltage (V)")

    @field_validator("omega_el")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("omega_el must be finite")
        return value

    @classmethod
    def from_rpm(
        cls, speed_rpm: float, params: MotorParams, u_dc: float = 300.0
    ) -> "OperatingCondition":
        return cls(omega_el=omega_el_from_rpm(speed_rpm, params.pole_pairs), u_dc=u_dc)


def omega_el_from_rpm(speed_rpm: float, pole_pairs: int) -> float:
    return pole_pairs * TWO_PI * speed_rpm / 60.0


def reduce_angle(eps: float) -> float:
    """Representative of ``eps`` in [0, 2*pi)."""
    r = eps % TWO_PI
    return 0.0 if r >= TWO_PI else r


class DqState(NamedTuple):
    i_d: float
    i_q: float


class DqVoltage(NamedTuple):
    u_d: float
    u_q: float


class ElectricalAngle(NamedTuple):
    eps_el: float

    @classmethod
    def of(cls, radians: float) -> "ElectricalAngle":
        return cls(reduce_angle(radians))

    def advance(self, omega_el: float, dt: float) -> "ElectricalAngle":
        return ElectricalAngle.of(self.eps_el + omega_el * dt)


class SwitchState(NamedTuple):
    """Half-bridge commands, each +1 (upper switch on) or -1 (lower switch on)."""

    s_a: int
    s_b: int
    s_c: int

    def toggles_from(self, other: "SwitchState") -> int:
        return sum(1 for a, b in zip(self, other) if a != b)


class VoltageVector(NamedTuple):
    index: int
    alpha_beta: tuple[float, float]
    representative_states: tuple[SwitchState, ...]
