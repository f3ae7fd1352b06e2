"""Internal models the FCS-MPC predicts with.

Both predictors share one contract: ``encode`` turns a measurement into the
predictor's own state row, ``step`` advances a batch of rows by one period
under a voltage vector, and ``currents`` reads (i_d, i_q) back out.
"""

import math
from typing import Protocol

import numpy as np

from koopman_mpc.drive.params import MotorParams, OperatingCondition
from koopman_mpc.drive.transforms import vector_alphabeta_table
from koopman_mpc.koopman.rom import KoopmanModelBank


class Predictor(Protocol):
    def encode(self, i_d: float, i_q: float, eps_el: float) -> np.ndarray: ...

    def step(self, states: np.ndarray, vector_index: int) -> np.ndarray: ...

    def currents(self, states: np.ndarray) -> np.ndarray: ...

    def at_speed(self, omega_el: float) -> "Predictor": ...


class WhiteBoxPredictor:
    """Euler-discretised dq model; state rows are [i_d, i_q, eps_el]."""

    def __init__(self, params: MotorParams, cond: OperatingCondition, t_s: float):
        self.params = params
        self.cond = cond
        self.t_s = t_s
        self._u_ab = vector_alphabeta_table(cond.u_dc)

    def at_speed(self, omega_el: float) -> "WhiteBoxPredictor":
        if omega_el == self.cond.omega_el:
            return self
        cond = self.cond.model_copy(update={"omega_el": omega_el})
        return WhiteBoxPredictor(self.params, cond, self.t_s)

    def encode(self, i_d: float, i_q: float, eps_el: float) -> np.ndarray:
        return np.array([i_d, i_q, eps_el])

    def step(self, states: np.ndarray, vector_index: int) -> np.ndarray:
        p, w, t_s = self.params, self.cond.omega_el, self.t_s
        i_d, i_q, eps = states[:, 0], states[:, 1], states[:, 2]
        u_alpha, u_beta = self._u_ab[vector_index]
        c, s = np.cos(eps), np.sin(eps)
        u_d = c * u_alpha + s * u_beta
        u_q = -s * u_alpha + c * u_beta
        di_d = (-p.r_s * i_d + w * p.l_q * i_q + u_d) / p.l_d
        di_q = (-p.r_s * i_q - w * p.l_d * i_d - w * p.psi_p + u_q) / p.l_q
        return np.column_stack([i_d + t_s * di_d, i_q + t_s * di_q, eps + w * t_s])

    def currents(self, states: np.ndarray) -> np.ndarray:
        return states[:, :2]


class KoopmanPredictor:
    """Linear propagation of the lifted observables with the trained bank."""

    def __init__(self, bank: KoopmanModelBank):
        self.bank = bank
        self._transposed = np.ascontiguousarray(np.transpose(bank.matrices, (0, 2, 1)))
        self._readout = bank.projection[:2].T

    def at_speed(self, omega_el: float) -> "KoopmanPredictor":
        return self

    def encode(self, i_d: float, i_q: float, eps_el: float) -> np.ndarray:
        y = np.array([i_d, i_q, math.sin(eps_el), math.cos(eps_el)])
        return self.bank.dictionary.evaluate(y)[0]

    def step(self, states: np.ndarray, vector_index: int) -> np.ndarray:
        return states @ self._transposed[vector_index]

    def currents(self, states: np.ndarray) -> np.ndarray:
        return states @ self._readout
