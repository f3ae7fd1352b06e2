"""Steady-state and step-response metrics computed from trajectory logs."""

import logging
import math
import warnings
from typing import NamedTuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from koopman_mpc.analysis.spectrum import Spectrum, dft, thd
from koopman_mpc.drive.transforms import dq_to_abc
from koopman_mpc.errors import (
    SegmentTooShort,
    ShortSegmentWarning,
    StepNotFound,
    WindowError,
    ZeroFundamental,
)
from koopman_mpc.sim.trajectory import TrajectoryLog

logger = logging.getLogger(__name__)

STEADY_FRACTION = 0.6
BAND = 0.05


class Segment(NamedTuple):
    start: float
    stop: float

    @property
    def duration(self) -> float:
        return self.stop - self.start


class StepSummary(NamedTuple):
    axis: str
    magnitude: float
    rise_time: float
    settling_time: float


class ScenarioMetrics(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    controller: str
    speed_rpm: float
    id_ref: float
    iq_ref: float
    thd_pct: float
    setpoint_dev_A: float
    fsw_avg_Hz: float
    rise_ms: float
    settle_ms: float


def fundamental_frequency(log: TrajectoryLog) -> float:
    return abs(log.meta.omega_el) / (2.0 * math.pi)


def steady_state_segment(log: TrajectoryLog) -> Segment:
    """Last 60 % of the final constant-reference interval."""
    periods = log.control_periods
    refs = periods[["i_d_ref", "i_q_ref"]].to_numpy()
    times = periods["time"].to_numpy()
    changed = np.nonzero(np.any(refs[1:] != refs[:-1], axis=1))[0]
    start = times[changed[-1] + 1] if len(changed) else times[0]
    stop = times[-1] + log.meta.t_s
    return Segment(stop - STEADY_FRACTION * (stop - start), stop)


def _in_segment(frame: pd.DataFrame, segment: Segment) -> pd.DataFrame:
    t = frame["time"]
    return frame[(t >= segment.start - 1e-12) & (t < segment.stop - 1e-12)]


def setpoint_deviation(
    log: TrajectoryLog, window: float | None = None, segment: Segment | None = None
) -> float:
    """Mean geometric distance between the sliding-mean dq current and the setpoint.

    The sliding mean spans ``window`` seconds, one electrical period by default.
    """
    segment = segment or steady_state_segment(log)
    if window is None:
        f_fund = fundamental_frequency(log)
        window = 1.0 / f_fund if f_fund > 0 else 1e-3
    n_window = max(1, round(window / log.meta.t_s))
    frame = _in_segment(log.control_periods, segment)
    if len(frame) < n_window:
        raise SegmentTooShort(
            f"Segment holds {len(frame)} samples, sliding window needs {n_window}"
        )
    mean_d = frame["i_d"].rolling(n_window).mean().to_numpy()[n_window - 1 :]
    mean_q = frame["i_q"].rolling(n_window).mean().to_numpy()[n_window - 1 :]
    ref_d = frame["i_d_ref"].to_numpy()[n_window - 1 :]
    ref_q = frame["i_q_ref"].to_numpy()[n_window - 1 :]
    return float(np.mean(np.hypot(mean_d - ref_d, mean_q - ref_q)))


def avg_switching_frequency(log: TrajectoryLog, segment: Segment | None = None) -> float:
    """Leg changes / (2 * 3 * duration); one on+off cycle is one switching period."""
    segment = segment or steady_state_segment(log)
    f_fund = fundamental_frequency(log)
    if f_fund > 0 and segment.duration < 10.0 / f_fund:
        warnings.warn(
            ShortSegmentWarning(
                f"Segment of {segment.duration * 1e3:.1f} ms spans fewer than 10 "
                f"fundamental periods"
            )
        )
    source = log.fine if log.fine is not None else log.control_periods
    legs = _in_segment(source, segment)[["s_a", "s_b", "s_c"]].to_numpy()
    if len(legs) < 2 or segment.duration <= 0:
        return 0.0
    changes = int(np.count_nonzero(legs[1:] != legs[:-1]))
    return changes / (2.0 * 3.0 * segment.duration)


def step_metrics(log: TrajectoryLog, step_time: float) -> dict[str, StepSummary]:
    """Rise (first entry) and settling (final entry) into a +/-5 % band, per axis.

    Times are relative to ``step_time``; an axis never settling reports inf.
    """
    periods = log.control_periods
    times = periods["time"].to_numpy()
    t_s = log.meta.t_s
    after = np.nonzero(times >= step_time - 0.5 * t_s)[0]
    if len(after) == 0 or after[0] == 0:
        raise StepNotFound(f"No reference step at {step_time} s")
    k = after[0]
    summaries = {}
    for axis in ("d", "q"):
        ref = periods[f"i_{axis}_ref"].to_numpy()
        magnitude = ref[k] - ref[k - 1]
        if magnitude == 0.0:
            continue
        current = periods[f"i_{axis}"].to_numpy()[k:]
        target = ref[k:]
        inside = np.abs(current - target) <= BAND * abs(magnitude)
        rel = times[k:] - times[k]
        if not inside.any():
            summaries[axis] = StepSummary(axis, magnitude, math.inf, math.inf)
            continue
        rise = rel[np.argmax(inside)]
        outside = np.nonzero(~inside)[0]
        settle = 0.0 if len(outside) == 0 else rel[outside[-1]] + t_s
        if len(outside) and outside[-1] == len(inside) - 1:
            settle = math.inf
        summaries[axis] = StepSummary(axis, magnitude, float(rise), float(settle))
    if not summaries:
        raise StepNotFound(f"No reference step at {step_time} s")
    return summaries


def reference_steps(log: TrajectoryLog) -> list[float]:
    periods = log.control_periods
    refs = periods[["i_d_ref", "i_q_ref"]].to_numpy()
    times = periods["time"].to_numpy()
    changed = np.nonzero(np.any(refs[1:] != refs[:-1], axis=1))[0]
    return [float(times[i + 1]) for i in changed]


def phase_current(log: TrajectoryLog, segment: Segment) -> tuple[np.ndarray, float]:
    """Phase-a current in the segment with its sampling rate.

    Uses the fine-rate record when present, otherwise reconstructs it from the
    controller-rate dq samples.
    """
    if log.fine is not None:
        frame = _in_segment(log.fine, segment)
        return frame["i_a"].to_numpy(), 1.0 / log.meta.fine_dt
    frame = _in_segment(log.control_periods, segment)
    i_abc = dq_to_abc(frame[["i_d", "i_q"]].to_numpy(), frame["eps_el"].to_numpy())
    return i_abc[:, 0], 1.0 / log.meta.t_s


def phase_spectrum(log: TrajectoryLog, segment: Segment | None = None) -> Spectrum:
    segment = segment or steady_state_segment(log)
    signal, fs = phase_current(log, segment)
    return dft(signal, fs, fundamental_frequency(log))


def evaluate_log(log: TrajectoryLog) -> ScenarioMetrics:
    segment = steady_state_segment(log)
    final = log.control_periods.iloc[-1]
    steps = reference_steps(log)
    rise_ms = settle_ms = math.nan
    if steps:
        summary = step_metrics(log, steps[-1])
        axis = summary.get("q") or next(iter(summary.values()))
        rise_ms, settle_ms = axis.rise_time * 1e3, axis.settling_time * 1e3

    try:
        thd_pct = thd(phase_spectrum(log, segment))
    except (WindowError, ZeroFundamental) as e:
        logger.warning(f"THD unavailable for {log.meta.scenario}/{log.meta.controller}: {e}")
        thd_pct = math.nan

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ShortSegmentWarning)
        fsw = avg_switching_frequency(log, segment)

    return ScenarioMetrics(
        controller=log.meta.controller,
        speed_rpm=log.meta.speed_rpm,
        id_ref=float(final["i_d_ref"]),
        iq_ref=float(final["i_q_ref"]),
        thd_pct=thd_pct,
        setpoint_dev_A=setpoint_deviation(log, segment=segment),
        fsw_avg_Hz=fsw,
        rise_ms=rise_ms,
        settle_ms=settle_ms,
    )
