"""Finite-control-set MPC with exhaustive search over voltage-vector sequences."""

import itertools
import logging
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from koopman_mpc.control.base import Actuation, Sample
from koopman_mpc.control.predictors import Predictor
from koopman_mpc.drive.params import SwitchState
from koopman_mpc.drive.transforms import ZERO_STATES, voltage_vectors

logger = logging.getLogger(__name__)

N_VECTORS = 7


class HorizonConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_p: int = Field(3, ge=1)
    t_s: float = Field(50e-6, gt=0)
    delay_compensation: bool = True


class Reference(NamedTuple):
    i_d_star: float
    i_q_star: float


class MpcDecision(NamedTuple):
    switch_state: SwitchState
    vector_index: int
    best_cost: float
    best_sequence: tuple[int, ...]
    evaluated_count: int
    toggles: int


def choose_switch_state(vector_index: int, previous: SwitchState) -> SwitchState:
    """Concrete half-bridge commands for a vector.

    The zero vector picks whichever zero state needs fewer leg changes from
    ``previous``; (+1, +1, +1) wins a tie.
    """
    states = voltage_vectors()[vector_index].representative_states
    if len(states) == 1:
        return states[0]
    upper, lower = ZERO_STATES
    if lower.toggles_from(previous) < upper.toggles_from(previous):
        return lower
    return upper


@lru_cache(maxsize=None)
def sequence_table(n_p: int) -> np.ndarray:
    """All 7**n_p sequences in lexicographic order, shape (7**n_p, n_p)."""
    return np.array(list(itertools.product(range(N_VECTORS), repeat=n_p)), dtype=np.int64)


@lru_cache(maxsize=None)
def sequence_toggles(n_p: int, previous: SwitchState) -> np.ndarray:
    """Total leg changes of every sequence when started from ``previous``."""
    counts = np.empty(N_VECTORS**n_p, dtype=np.int64)
    for row, sequence in enumerate(sequence_table(n_p)):
        state, total = previous, 0
        for v in sequence:
            nxt = choose_switch_state(int(v), state)
            total += nxt.toggles_from(state)
            state = nxt
        counts[row] = total
    return counts


def delay_compensate(
    state: np.ndarray, applied_vector_index: int, predictor: Predictor
) -> np.ndarray:
    """Advance the measured state by the period already committed to."""
    return predictor.step(state[None, :], applied_vector_index)[0]


def sequence_costs(
    start_state: np.ndarray, refs: np.ndarray, predictor: Predictor
) -> np.ndarray:
    """Tracking cost of every sequence, lexicographically ordered.

    States of level j are stored with row index = sequence prefix read as a
    base-7 number, so expanding each row by the 7 vectors keeps the order.
    """
    refs = np.atleast_2d(refs)
    states = start_state[None, :]
    costs = np.zeros(1)
    for ref in refs:
        children = np.stack([predictor.step(states, v) for v in range(N_VECTORS)], axis=1)
        states = children.reshape(-1, children.shape[-1])
        err = predictor.currents(states) - ref
        costs = (costs[:, None] + np.sum(err**2, axis=1).reshape(-1, N_VECTORS)).ravel()
    return costs


def select_sequence(
    costs: np.ndarray, toggles: np.ndarray | None = None
) -> int:
    """Row of the minimum cost; ties go to fewer toggles, then lexicographic order."""
    rows = np.arange(len(costs))
    keys = (rows, costs) if toggles is None else (rows, toggles, costs)
    return int(np.lexsort(keys)[0])


def enumerate_and_cost(
    start_state: np.ndarray,
    refs,
    predictor: Predictor,
    h: HorizonConfig,
    last_applied: SwitchState | None = None,
) -> tuple[tuple[int, ...], float]:
    refs = np.broadcast_to(np.asarray(refs, dtype=float), (h.n_p, 2))
    costs = sequence_costs(start_state, refs, predictor)
    toggles = None if last_applied is None else sequence_toggles(h.n_p, last_applied)
    best = select_sequence(costs, toggles)
    return tuple(int(v) for v in sequence_table(h.n_p)[best]), float(costs[best])


def brute_force_search(
    start_state: np.ndarray,
    refs,
    predictor: Predictor,
    h: HorizonConfig,
) -> tuple[tuple[int, ...], float]:
    """Naive sequence-by-sequence enumeration; lexicographic ties only."""
    refs = np.broadcast_to(np.asarray(refs, dtype=float), (h.n_p, 2))
    best_sequence, best_cost = None, np.inf
    for sequence in itertools.product(range(N_VECTORS), repeat=h.n_p):
        state, cost = start_state[None, :], 0.0
        for v, ref in zip(sequence, refs):
            state = predictor.step(state, v)
            err = predictor.currents(state)[0] - ref
            cost += err[0] ** 2 + err[1] ** 2
        if cost < best_cost:
            best_sequence, best_cost = sequence, cost
    return best_sequence, float(best_cost)


def control_step(
    measured: Sample,
    refs,
    predictor: Predictor,
    h: HorizonConfig,
    last_applied: tuple[SwitchState, int],
) -> MpcDecision:
    last_state, last_index = last_applied
    state = predictor.encode(measured.i_d, measured.i_q, measured.eps_el)
    if h.delay_compensation:
        state = delay_compensate(state, last_index, predictor)
    sequence, cost = enumerate_and_cost(state, refs, predictor, h, last_state)
    switch_state = choose_switch_state(sequence[0], last_state)
    return MpcDecision(
        switch_state=switch_state,
        vector_index=sequence[0],
        best_cost=cost,
        best_sequence=sequence,
        evaluated_count=N_VECTORS**h.n_p,
        toggles=switch_state.toggles_from(last_state),
    )


class MpcController:
    """Receding-horizon controller; the lifted state is re-seeded every period."""

    def __init__(self, name: str, predictor: Predictor, horizon: HorizonConfig):
        self.name = name
        self.predictor = predictor
        self.horizon = horizon
        self.reset()

    def reset(self) -> None:
        self.last_applied = (ZERO_STATES[0], 0)

    def initial_actuation(self) -> Actuation:
        state, index = self.last_applied
        return Actuation("switch", tuple(float(x) for x in state), vector_index=index)

    def control(self, sample: Sample) -> Actuation:
        predictor = self.predictor.at_speed(sample.omega_el)
        refs = Reference(sample.i_d_ref, sample.i_q_ref)
        decision = control_step(sample, refs, predictor, self.horizon, self.last_applied)
        self.last_applied = (decision.switch_state, decision.vector_index)
        return Actuation(
            "switch",
            tuple(float(x) for x in decision.switch_state),
            vector_index=decision.vector_index,
            best_cost=decision.best_cost,
        )
