"""Coordinate transforms and the inverter switch-state to voltage mapping."""

import itertools
import math
from functools import lru_cache

import numpy as np

from koopman_mpc.drive.params import DqVoltage, SwitchState, VoltageVector

SQRT3_2 = math.sqrt(3.0) / 2.0

ZERO_STATES = (SwitchState(1, 1, 1), SwitchState(-1, -1, -1))


def switch_to_alphabeta(s: SwitchState, u_dc: float) -> tuple[float, float]:
    """Stationary-frame voltage produced by the half-bridge commands ``s``."""
    half = 0.5 * u_dc
    u_a, u_b, u_c = half * s[0], half * s[1], half * s[2]
    return (
        (2.0 / 3.0) * (u_a - 0.5 * u_b - 0.5 * u_c),
        (2.0 / 3.0) * SQRT3_2 * (u_b - u_c),
    )


def park_rotate(alpha_beta, eps: float) -> DqVoltage:
    """Rotate a stationary-frame pair into the dq frame, Q(eps) @ v."""
    c, s = math.cos(eps), math.sin(eps)
    a, b = alpha_beta
    return DqVoltage(c * a + s * b, -s * a + c * b)


def inverse_park(dq, eps: float) -> tuple[float, float]:
    c, s = math.cos(eps), math.sin(eps)
    d, q = dq
    return (c * d - s * q, s * d + c * q)


def rotation_matrix(eps: float) -> np.ndarray:
    c, s = math.cos(eps), math.sin(eps)
    return np.array([[c, s], [-s, c]])


def inverse_clarke(alpha_beta) -> tuple[float, float, float]:
    a, b = alpha_beta
    return (a, -0.5 * a + SQRT3_2 * b, -0.5 * a - SQRT3_2 * b)


def dq_to_abc(i_dq: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Phase quantities from dq arrays; ``i_dq`` is (n, 2), ``eps`` is (n,).

    Returns an (n, 3) array whose rows sum to zero.
    """
    i_dq = np.atleast_2d(np.asarray(i_dq, dtype=float))
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    c, s = np.cos(eps), np.sin(eps)
    alpha = c * i_dq[:, 0] - s * i_dq[:, 1]
    beta = s * i_dq[:, 0] + c * i_dq[:, 1]
    i_a = alpha
    i_b = -0.5 * alpha + SQRT3_2 * beta
    i_c = -i_a - i_b
    return np.column_stack([i_a, i_b, i_c])


@lru_cache(maxsize=1)
def voltage_vectors() -> tuple[VoltageVector, ...]:
    """The 7 distinct inverter voltage vectors at unit DC-link voltage.

    Index 0 merges both zero states; active vectors 1..6 are ordered by
    ascending alpha-beta angle starting at 0 degrees.
    """
    active = []
    for legs in itertools.product((1, -1), repeat=3):
        s = SwitchState(*legs)
        if s in ZERO_STATES:
            continue
        ab = switch_to_alphabeta(s, 1.0)
        angle = round(math.degrees(math.atan2(ab[1], ab[0])), 6) % 360.0
        active.append((angle, ab, s))
    active.sort(key=lambda item: item[0])

    vectors = [VoltageVector(0, (0.0, 0.0), ZERO_STATES)]
    for index, (_, ab, s) in enumerate(active, start=1):
        vectors.append(VoltageVector(index, ab, (s,)))
    return tuple(vectors)


@lru_cache(maxsize=1)
def _index_by_state() -> dict[SwitchState, int]:
    return {
        state: vector.index
        for vector in voltage_vectors()
        for state in vector.representative_states
    }


def vector_index_of(s) -> int:
    return _index_by_state()[SwitchState(*(int(v) for v in s))]


def vector_alphabeta_table(u_dc: float) -> np.ndarray:
    """(7, 2) array of alpha-beta voltages scaled to ``u_dc``."""
    return u_dc * np.array([v.alpha_beta for v in voltage_vectors()])
