"""Comparison tables and figures."""

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from koopman_mpc.analysis.metrics import (  # noqa: E402
    ScenarioMetrics,
    phase_spectrum,
    steady_state_segment,
)
from koopman_mpc.errors import ReportIoError, WindowError  # noqa: E402
from koopman_mpc.sim.trajectory import TrajectoryLog  # noqa: E402

logger = logging.getLogger(__name__)

REPORT_COLUMNS = list(ScenarioMetrics.model_fields)
SPECTRUM_XMAX = 12e3

plt.rcParams["svg.hashsalt"] = "koopman-mpc"


def metrics_frame(metrics: list[ScenarioMetrics]) -> pd.DataFrame:
    frame = pd.DataFrame([m.model_dump() for m in metrics], columns=REPORT_COLUMNS)
    return frame.sort_values(["speed_rpm", "id_ref", "iq_ref", "controller"], kind="stable")


def format_table(frame: pd.DataFrame) -> str:
    """Plain-text layout: one block per operating point, one row per controller."""
    blocks = []
    for (speed, id_ref, iq_ref), group in frame.groupby(
        ["speed_rpm", "id_ref", "iq_ref"], sort=True
    ):
        title = f"n = {speed:g} min^-1, i_d* = {id_ref:g} A, i_q* = {iq_ref:g} A"
        body = group.drop(columns=["speed_rpm", "id_ref", "iq_ref"]).to_string(
            index=False, float_format=lambda x: f"{x:.2f}"
        )
        blocks.append(f"{title}\n{'-' * len(title)}\n{body}")
    return "\n\n".join(blocks) + "\n"


def plot_currents(log: TrajectoryLog, path: Path) -> None:
    periods = log.control_periods
    t_ms = periods["time"] * 1e3
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(t_ms, periods["i_d"], label="i_d", linewidth=0.8)
    ax.plot(t_ms, periods["i_q"], label="i_q", linewidth=0.8)
    ax.plot(t_ms, periods["i_d_ref"], "--", label="i_d*", linewidth=0.8)
    ax.plot(t_ms, periods["i_q_ref"], "--", label="i_q*", linewidth=0.8)
    ax.set_xlabel("Time [ms]")
    ax.set_ylabel("Current [A]")
    ax.set_title(f"{log.meta.controller} at {log.meta.speed_rpm:g} min$^{{-1}}$")
    ax.grid(True, linestyle="--", alpha=0.4)
    ax.legend(loc="best")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_spectrum(log: TrajectoryLog, path: Path, xmax: float = SPECTRUM_XMAX) -> None:
    spectrum = phase_spectrum(log, steady_state_segment(log))
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.stem(spectrum.frequencies, spectrum.amplitudes, markerfmt=" ", basefmt=" ")
    ax.set_xlim(0.0, xmax)
    ax.set_yscale("log")
    ax.set_xlabel("Frequency [Hz]")
    ax.set_ylabel("Amplitude i_a [A]")
    ax.set_title(f"DFT of i_a, {log.meta.controller} at {log.meta.speed_rpm:g} min$^{{-1}}$")
    ax.grid(True, which="both", linestyle="--", alpha=0.4)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_report(
    metrics: list[ScenarioMetrics],
    out_dir: Path,
    logs: list[TrajectoryLog] | None = None,
    spectrum_xmax: float = SPECTRUM_XMAX,
) -> list[Path]:
    out_dir = Path(out_dir)
    frame = metrics_frame(metrics)
    written = [out_dir / "report.csv", out_dir / "report.txt"]
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        frame.to_csv(written[0], index=False, float_format="%.6g", lineterminator="\n")
        written[1].write_text(format_table(frame))
        for log in logs or []:
            stem = f"{log.meta.scenario}-{log.meta.controller}"
            currents = out_dir / f"{stem}_currents.svg"
            plot_currents(log, currents)
            written.append(currents)
            try:
                spectrum = out_dir / f"{stem}_spectrum.svg"
                plot_spectrum(log, spectrum, spectrum_xmax)
                written.append(spectrum)
            except WindowError as e:
                logger.warning(f"No spectrum figure for {stem}: {e}")
    except OSError as e:
        raise ReportIoError(f"Could not write report to {out_dir}: {e}") from e
    logger.info(f"Report with {len(frame)} rows written to {out_dir}")
    return written
