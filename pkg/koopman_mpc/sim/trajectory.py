"""Time-stamped closed-loop records and their CSV form."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from koopman_mpc.drive.transforms import dq_to_abc

logger = logging.getLogger(__name__)

PERIOD_COLUMNS = (
    "time",
    "i_d",
    "i_q",
    "eps_el",
    "i_d_ref",
    "i_q_ref",
    "u_dc",
    "vector_index",
    "s_a",
    "s_b",
    "s_c",
    "cmd_a",
    "cmd_b",
    "cmd_c",
    "applied_a",
    "applied_b",
    "applied_c",
    "best_cost",
    "toggles",
    "overmodulated",
)
FINE_COLUMNS = ("time", "i_a", "i_b", "i_c", "s_a", "s_b", "s_c")
INTEGER_COLUMNS = frozenset(
    {"vector_index", "s_a", "s_b", "s_c", "toggles", "overmodulated"}
)

UNITS = {
    "time": "s",
    "i_d": "A",
    "i_q": "A",
    "eps_el": "rad",
    "i_d_ref": "A",
    "i_q_ref": "A",
    "u_dc": "V",
    "best_cost": "A^2",
    "i_a": "A",
    "i_b": "A",
    "i_c": "A",
}

# vector_index of the boundary record that closes the last period
BOUNDARY = -1


class LogMeta(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    scenario: str
    controller: str
    speed_rpm: float
    omega_el: float
    u_dc: float
    t_s: float
    fine_dt: float
    carrier_freq: float | None = None


@dataclass
class TrajectoryLog:
    """One record per controller period plus a closing boundary record.

    ``cmd_*`` hold what the controller computed in that period (switch legs
    for MPC, duty ratios for FOC); ``applied_*`` hold what actually drove the
    inverter during the period.
    """

    meta: LogMeta
    periods: pd.DataFrame
    fine: pd.DataFrame | None = None

    def __len__(self) -> int:
        return len(self.periods)

    @property
    def control_periods(self) -> pd.DataFrame:
        return self.periods[self.periods["vector_index"] != BOUNDARY]

    def observations(self) -> np.ndarray:
        """(n, 4) array of [i_d, i_q, sin eps, cos eps] for every record."""
        eps = self.periods["eps_el"].to_numpy()
        return np.column_stack(
            [
                self.periods["i_d"].to_numpy(),
                self.periods["i_q"].to_numpy(),
                np.sin(eps),
                np.cos(eps),
            ]
        )

    def slice(self, start: int, stop: int) -> "TrajectoryLog":
        """Records ``start..stop`` (inclusive end acts as boundary record)."""
        periods = self.periods.iloc[start : stop + 1].copy()
        if stop < len(self.periods) - 1:
            periods.iloc[-1, periods.columns.get_loc("vector_index")] = BOUNDARY
        return TrajectoryLog(self.meta, periods.reset_index(drop=True), None)

    def to_csv(self, directory: Path, stem: str) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = [directory / f"{stem}_periods.csv"]
        _write_frame(written[0], self.periods, self.meta)
        if self.fine is not None:
            written.append(directory / f"{stem}_fine.csv")
            _write_frame(written[1], self.fine, self.meta)
        logger.info(f"Wrote {len(written)} log file(s) for {stem} to {directory}")
        return written

    @classmethod
    def from_csv(cls, directory: Path, stem: str) -> "TrajectoryLog":
        directory = Path(directory)
        meta, periods = _read_frame(directory / f"{stem}_periods.csv")
        fine_path = directory / f"{stem}_fine.csv"
        fine = _read_frame(fine_path)[1] if fine_path.exists() else None
        return cls(meta, periods, fine)


def _write_frame(path: Path, frame: pd.DataFrame, meta: LogMeta) -> None:
    units = " ".join(f"{c}[{UNITS.get(c, '-')}]" for c in frame.columns)
    with open(path, "w", newline="") as fh:
        fh.write(f"# {json.dumps(meta.model_dump(), sort_keys=True)}\n")
        fh.write(f"# units: {units}\n")
        frame.to_csv(fh, index=False, float_format="%.17g", lineterminator="\n")


def _read_frame(path: Path) -> tuple[LogMeta, pd.DataFrame]:
    with open(path) as fh:
        meta = LogMeta.model_validate(json.loads(fh.readline()[2:]))
    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    # %.17g writes integral floats without a decimal point
    dtypes = {c: np.int64 if c in INTEGER_COLUMNS else np.float64 for c in frame.columns}
    return meta, frame.astype(dtypes)


class TrajectoryRecorder:
    """Accumulates rows during a simulation and freezes them into a log."""

    def __init__(self, meta: LogMeta, record_fine: bool = True):
        self.meta = meta
        self.record_fine = record_fine
        self._rows: list[tuple] = []
        self._fine: list[tuple] = []

    def period(self, **values) -> None:
        self._rows.append(tuple(values[c] for c in PERIOD_COLUMNS))

    def fine_step(self, time: float, i_d: float, i_q: float, eps: float, s) -> None:
        if self.record_fine:
            self._fine.append((time, i_d, i_q, eps, *s))

    def build(self) -> TrajectoryLog:
        periods = pd.DataFrame(self._rows, columns=list(PERIOD_COLUMNS))
        for col in INTEGER_COLUMNS.intersection(PERIOD_COLUMNS):
            periods[col] = periods[col].astype(np.int64)
        fine = None
        if self.record_fine:
            raw = np.array(self._fine, dtype=float).reshape(-1, 7)
            i_abc = dq_to_abc(raw[:, 1:3], raw[:, 3])
            fine = pd.DataFrame(
                np.column_stack([raw[:, 0], i_abc, raw[:, 4:]]), columns=list(FINE_COLUMNS)
            )
            for col in ("s_a", "s_b", "s_c"):
                fine[col] = fine[col].astype(np.int64)
        return TrajectoryLog(self.meta, periods, fine)
