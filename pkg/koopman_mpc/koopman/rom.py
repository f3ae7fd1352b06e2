"""Per-voltage-vector Koopman reduced-order models.

For every inverter voltage vector the drive is an autonomous system, so one
linear map z_{i+1} = K z_i on the lifted observables is fitted per vector from
snapshot pairs recorded while that vector was applied.
"""

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict

from koopman_mpc.drive.transforms import voltage_vectors
from koopman_mpc.errors import InsufficientData, RankDeficientWarning
from koopman_mpc.koopman.dictionary import (
    N_OBSERVABLES,
    Dictionary,
    LiftedState,
    Observation,
)
from koopman_mpc.sim.trajectory import TrajectoryLog

logger = logging.getLogger(__name__)

N_VECTORS = len(voltage_vectors())
DEFAULT_TOL = 1e-10
DEFAULT_MIN_PAIRS = 200


@dataclass(frozen=True)
class SnapshotSet:
    """Lifted snapshots (columns) and their one-period successors."""

    vector_index: int
    Y: np.ndarray
    Y_hat: np.ndarray

    @property
    def m(self) -> int:
        return self.Y.shape[1]


@dataclass(frozen=True)
class FitResult:
    matrix: np.ndarray
    residual: float
    rank: int
    singular_values: np.ndarray


class TrainingMetadata(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    speed_rpm: float
    t_s: float
    sample_counts: list[int]
    residuals: list[float]


@dataclass(frozen=True)
class KoopmanModelBank:
    """Seven k x k transition matrices indexed like the voltage vectors.

    ``matrices[v]`` maps a lifted state one controller period ahead while
    vector ``v`` is applied; ``projection`` reads the observation back out.
    """

    matrices: np.ndarray
    projection: np.ndarray
    dictionary: Dictionary
    training_metadata: TrainingMetadata

    def __post_init__(self):
        k = self.dictionary.k
        if self.matrices.shape != (N_VECTORS, k, k):
            raise ValueError(
                f"Expected {N_VECTORS} matrices of {k}x{k}, got {self.matrices.shape}"
            )
        if self.projection.shape != (N_OBSERVABLES, k):
            raise ValueError(f"Projection must be {N_OBSERVABLES}x{k}")

    @property
    def k(self) -> int:
        return self.dictionary.k


def selector_projection(k: int) -> np.ndarray:
    return np.eye(N_OBSERVABLES, k)


def assemble(
    log: TrajectoryLog,
    vector_index: int,
    d: Dictionary,
    min_pairs: int = DEFAULT_MIN_PAIRS,
) -> SnapshotSet:
    """Collect (y_i, y_{i+1}) pairs for every period that applied ``vector_index``.

    Only switch-state logs (MPC) qualify: the vector must be constant over the
    whole period.
    """
    applied = log.periods["vector_index"].to_numpy()
    if len(applied) < 2:
        raise InsufficientData(vector_index, 0, min_pairs)
    idx = np.nonzero(applied[:-1] == vector_index)[0]
    if len(idx) < min_pairs:
        raise InsufficientData(vector_index, len(idx), min_pairs)
    lifted = d.evaluate(log.observations())
    return SnapshotSet(vector_index, lifted[idx].T, lifted[idx + 1].T)


def _signed_svd(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Sign convention: largest-magnitude entry of each left singular vector positive.
    U, s, Vt = np.linalg.svd(Y, full_matrices=False)
    pivots = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivots, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, s, Vt * signs[:, None]


def fit(s: SnapshotSet, tol: float = DEFAULT_TOL) -> FitResult:
    """Least-squares transition matrix Y_hat @ pinv(Y) via a truncated SVD."""
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie in (0, 1)")
    k = s.Y.shape[0]
    U, sv, Vt = _signed_svd(s.Y)
    keep = sv > tol * sv[0] if sv.size and sv[0] > 0 else np.zeros_like(sv, bool)
    rank = int(np.count_nonzero(keep))
    pinv = (Vt[keep].T / sv[keep]) @ U[:, keep].T
    matrix = s.Y_hat @ pinv
    residual = _relative_residual(matrix, s)
    if rank < k:
        warnings.warn(RankDeficientWarning(rank, k, s.vector_index), stacklevel=2)
        logger.warning(f"Vector {s.vector_index}: retained rank {rank} of {k}")
    return FitResult(matrix, residual, rank, sv)


def fit_normal_equations(s: SnapshotSet, tol: float = DEFAULT_TOL) -> FitResult:
    """Second form: (Y_hat Y^T) pinv(Y Y^T), cheaper for m >> k."""
    gram = s.Y @ s.Y.T
    cross = s.Y_hat @ s.Y.T
    matrix = cross @ np.linalg.pinv(gram, rcond=tol**2, hermitian=True)
    sv = np.sqrt(np.clip(np.linalg.eigvalsh(gram)[::-1], 0.0, None))
    rank = int(np.count_nonzero(sv > tol * sv[0])) if sv[0] > 0 else 0
    if rank < s.Y.shape[0]:
        warnings.warn(RankDeficientWarning(rank, s.Y.shape[0], s.vector_index))
    return FitResult(matrix, _relative_residual(matrix, s), rank, sv)


def _relative_residual(matrix: np.ndarray, s: SnapshotSet) -> float:
    scale = np.linalg.norm(s.Y_hat)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(matrix @ s.Y - s.Y_hat) / scale)


def train_bank(
    log: TrajectoryLog,
    d: Dictionary,
    tol: float = DEFAULT_TOL,
    min_pairs: int = DEFAULT_MIN_PAIRS,
    method: Literal["svd", "normal"] = "svd",
    workers: int = 1,
) -> KoopmanModelBank:
    snapshot_sets = [assemble(log, v, d, min_pairs) for v in range(N_VECTORS)]
    solver = fit if method == "svd" else fit_normal_equations

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: solver(s, tol), snapshot_sets))
    else:
        results = [solver(s, tol) for s in snapshot_sets]

    for s, r in zip(snapshot_sets, results):
        logger.info(
            f"Trained vector {s.vector_index}: m={s.m}, rank={r.rank}, "
            f"residual={r.residual:.3e}"
        )

    metadata = TrainingMetadata(
        speed_rpm=log.meta.speed_rpm,
        t_s=log.meta.t_s,
        sample_counts=[s.m for s in snapshot_sets],
        residuals=[r.residual for r in results],
    )
    return KoopmanModelBank(
        matrices=np.stack([r.matrix for r in results]),
        projection=selector_projection(d.k),
        dictionary=d,
        training_metadata=metadata,
    )


def predict(z: LiftedState, bank: KoopmanModelBank, vector_index: int) -> LiftedState:
    return LiftedState(bank.matrices[vector_index] @ np.asarray(z.z))


def project(z: LiftedState, bank: KoopmanModelBank) -> Observation:
    return Observation(*(bank.projection @ np.asarray(z.z)))


def holdout_split(
    log: TrajectoryLog, fraction: float = 0.8
) -> tuple[TrajectoryLog, TrajectoryLog]:
    """Time-ordered split; the later part is held out."""
    n = len(log)
    cut = int(round(fraction * (n - 1)))
    return log.slice(0, cut), log.slice(cut, n - 1)


def evaluate_bank(
    bank: KoopmanModelBank, log: TrajectoryLog
) -> dict[int, tuple[float, float, int]]:
    """One-step prediction RMS error of (i_d, i_q) per vector, with pair counts."""
    applied = log.periods["vector_index"].to_numpy()
    lifted = bank.dictionary.evaluate(log.observations())
    observed = log.observations()
    errors = {}
    for v in range(N_VECTORS):
        idx = np.nonzero(applied[:-1] == v)[0]
        if len(idx) == 0:
            errors[v] = (float("nan"), float("nan"), 0)
            continue
        predicted = lifted[idx] @ bank.matrices[v].T @ bank.projection.T
        err = predicted[:, :2] - observed[idx + 1, :2]
        rms = np.sqrt(np.mean(err**2, axis=0))
        errors[v] = (float(rms[0]), float(rms[1]), len(idx))
    return errors
