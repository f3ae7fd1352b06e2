import numpy as np
import pandas as pd
import pytest

from koopman_mpc.drive.params import MotorParams, OperatingCondition
from koopman_mpc.sim.trajectory import BOUNDARY, PERIOD_COLUMNS, LogMeta, TrajectoryLog

T_S = 50e-6


@pytest.fixture
def params() -> MotorParams:
    return MotorParams()


@pytest.fixture
def nominal_cond(params) -> OperatingCondition:
    return OperatingCondition.from_rpm(1000.0, params)


def synthetic_log(
    vector_indices,
    i_d=None,
    i_q=None,
    eps=None,
    refs=None,
    t_s: float = T_S,
    speed_rpm: float = 1000.0,
    omega_el: float = 314.159,
) -> TrajectoryLog:
    """Controller-rate log with one extra boundary record after the last period."""
    n = len(vector_indices) + 1
    rows = {c: np.zeros(n) for c in PERIOD_COLUMNS}
    rows["time"] = np.arange(n) * t_s
    rows["i_d"] = np.zeros(n) if i_d is None else np.asarray(i_d, float)
    rows["i_q"] = np.zeros(n) if i_q is None else np.asarray(i_q, float)
    rows["eps_el"] = np.zeros(n) if eps is None else np.asarray(eps, float)
    if refs is not None:
        rows["i_d_ref"] = np.asarray(refs[0], float)
        rows["i_q_ref"] = np.asarray(refs[1], float)
    rows["u_dc"] = np.full(n, 300.0)
    rows["vector_index"] = np.append(np.asarray(vector_indices, dtype=np.int64), BOUNDARY)
    for leg in ("s_a", "s_b", "s_c"):
        rows[leg] = np.ones(n, dtype=np.int64)
    frame = pd.DataFrame(rows, columns=list(PERIOD_COLUMNS))
    meta = LogMeta(
        scenario="synthetic",
        controller="whitebox-mpc",
        speed_rpm=speed_rpm,
        omega_el=omega_el,
        u_dc=300.0,
        t_s=t_s,
        fine_dt=1e-6,
    )
    return TrajectoryLog(meta, frame, None)


def euler_driven_log(params, n_periods=700, seed=0, speed_rpm=1000.0):
    """Random vector sequence applied to the discrete Euler model.

    Each record is exactly the Euler successor of the previous one, so a
    dictionary with a constant term reproduces the data without error.
    """
    from koopman_mpc.drive.machine import euler_step
    from koopman_mpc.drive.params import DqState, reduce_angle
    from koopman_mpc.drive.transforms import park_rotate, vector_alphabeta_table

    cond = OperatingCondition.from_rpm(speed_rpm, params)
    table = vector_alphabeta_table(cond.u_dc)
    rng = np.random.default_rng(seed)
    vectors = rng.integers(0, 7, size=n_periods)
    x, eps = DqState(-40.0, 60.0), 0.25
    i_d, i_q, angles = [x.i_d], [x.i_q], [eps]
    for v in vectors:
        u = park_rotate(table[v], eps)
        x = euler_step(x, u, cond, params, T_S)
        eps = reduce_angle(eps + cond.omega_el * T_S)
        i_d.append(x.i_d)
        i_q.append(x.i_q)
        angles.append(eps)
    return synthetic_log(
        vectors, i_d, i_q, angles, speed_rpm=speed_rpm, omega_el=cond.omega_el
    )


@pytest.fixture
def euler_log(params):
    return euler_driven_log(params)


@pytest.fixture
def make_log():
    return synthetic_log


@pytest.fixture(scope="session")
def training_log():
    from koopman_mpc.sim.training import TrainingConfig, generate_training_data

    return generate_training_data(TrainingConfig(), MotorParams())


@pytest.fixture(scope="session")
def trained_bank(training_log):
    from koopman_mpc.koopman.dictionary import Dictionary
    from koopman_mpc.koopman.rom import holdout_split, train_bank

    train, _ = holdout_split(training_log)
    return train_bank(train, Dictionary())


@pytest.fixture(scope="session")
def affine_bank(training_log):
    """Identity observables plus a constant: the back-EMF offset becomes representable."""
    from koopman_mpc.koopman.dictionary import Dictionary
    from koopman_mpc.koopman.rom import holdout_split, train_bank

    train, _ = holdout_split(training_log)
    return train_bank(train, Dictionary(include_constant=True))
