"""dq-frame electrical model of the inverter-fed IPMSM.

``euler_step`` is the controller's discrete model; ``plant_step`` is the
higher-fidelity plant integrated with classical RK4 while the rotor angle
advances inside the interval.
"""

import math

import numpy as np

from koopman_mpc.drive.params import (
    DqState,
    DqVoltage,
    MotorParams,
    OperatingCondition,
    SwitchState,
)
from koopman_mpc.drive.transforms import switch_to_alphabeta


def system_matrix(cond: OperatingCondition, p: MotorParams) -> np.ndarray:
    w = cond.omega_el
    return np.array(
        [
            [-p.r_s / p.l_d, w * p.l_q / p.l_d],
            [-w * p.l_d / p.l_q, -p.r_s / p.l_q],
        ]
    )


def back_emf_offset(cond: OperatingCondition, p: MotorParams) -> np.ndarray:
    return np.array([0.0, -p.psi_p * cond.omega_el / p.l_q])


def continuous_derivative(
    x: DqState, u: DqVoltage, cond: OperatingCondition, p: MotorParams
) -> DqState:
    """A x + L_dq^-1 u + [0, -psi_p w / L_q] in A/s."""
    w = cond.omega_el
    i_d, i_q = x
    u_d, u_q = u
    return DqState(
        (-p.r_s * i_d + w * p.l_q * i_q + u_d) / p.l_d,
        (-p.r_s * i_q - w * p.l_d * i_d - w * p.psi_p + u_q) / p.l_q,
    )


def euler_step(
    x: DqState,
    u: DqVoltage,
    cond: OperatingCondition,
    p: MotorParams,
    t_s: float,
) -> DqState:
    dx = continuous_derivative(x, u, cond, p)
    return DqState(x[0] + t_s * dx[0], x[1] + t_s * dx[1])


def plant_step(
    x: DqState,
    s: SwitchState,
    eps: float,
    cond: OperatingCondition,
    p: MotorParams,
    t_s: float,
    substeps: int = 1,
) -> DqState:
    """Integrate the continuous model over ``t_s`` with a constant switch state.

    The dq voltage is recomputed at every RK4 stage from the angle reached at
    that instant, so the stationary-frame voltage stays fixed while the rotor
    turns underneath it.
    """
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    u_alpha, u_beta = switch_to_alphabeta(s, cond.u_dc)
    w = cond.omega_el
    r_s, l_d, l_q, psi = p.r_s, p.l_d, p.l_q, p.psi_p
    h = t_s / substeps

    def deriv(i_d, i_q, angle):
        c, sn = math.cos(angle), math.sin(angle)
        u_d = c * u_alpha + sn * u_beta
        u_q = -sn * u_alpha + c * u_beta
        return (
            (-r_s * i_d + w * l_q * i_q + u_d) / l_d,
            (-r_s * i_q - w * l_d * i_d - w * psi + u_q) / l_q,
        )

    i_d, i_q = x
    angle = eps
    for _ in range(substeps):
        k1d, k1q = deriv(i_d, i_q, angle)
        mid = angle + 0.5 * w * h
        k2d, k2q = deriv(i_d + 0.5 * h * k1d, i_q + 0.5 * h * k1q, mid)
        k3d, k3q = deriv(i_d + 0.5 * h * k2d, i_q + 0.5 * h * k2q, mid)
        end = angle + w * h
        k4d, k4q = deriv(i_d + h * k3d, i_q + h * k3q, end)
        i_d += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        i_q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        angle = end
    return DqState(i_d, i_q)
