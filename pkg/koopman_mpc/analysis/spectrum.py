"""DFT spectra of phase currents and THD."""

from dataclasses import dataclass

import numpy as np

from koopman_mpc.errors import WindowError, ZeroFundamental


@dataclass(frozen=True)
class Spectrum:
    """Single-sided peak-amplitude spectrum over an integer number of periods."""

    frequencies: np.ndarray
    amplitudes: np.ndarray
    fundamental_freq: float
    periods: int
    n_samples: int

    @property
    def fundamental_bin(self) -> int:
        return self.periods

    @property
    def fundamental_amplitude(self) -> float:
        return float(self.amplitudes[self.fundamental_bin])

    @property
    def bin_spacing(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    def power(self) -> np.ndarray:
        """Mean-square contribution of every bin; sums to the signal's mean square."""
        power = self.amplitudes**2 / 2.0
        power[0] = self.amplitudes[0] ** 2
        if self.n_samples % 2 == 0:
            power[-1] = self.amplitudes[-1] ** 2
        return power


def dft(
    signal: np.ndarray, fs: float, f_fund: float, periods: int | None = None
) -> Spectrum:
    """Rectangular-window DFT over exactly ``periods`` fundamental periods.

    The window is taken from the end of ``signal``; ``periods=None`` uses as
    many whole periods as the signal holds.
    """
    signal = np.asarray(signal, dtype=float)
    if f_fund <= 0:
        raise WindowError("Fundamental frequency must be positive")
    per_period = fs / f_fund
    samples_per_period = round(per_period)
    if samples_per_period < 2 or abs(per_period - samples_per_period) > 1e-6 * per_period:
        raise WindowError(
            f"{fs} Hz sampling does not hold an integer number of samples per {f_fund} Hz period"
        )
    available = len(signal) // samples_per_period
    if periods is None:
        periods = available
    if periods < 1 or periods > available:
        raise WindowError(
            f"Window of {periods} period(s) needs {periods * samples_per_period} samples, "
            f"signal has {len(signal)}"
        )
    n = periods * samples_per_period
    window = signal[len(signal) - n :]
    coeffs = np.fft.rfft(window) / n
    amplitudes = 2.0 * np.abs(coeffs)
    amplitudes[0] /= 2.0
    if n % 2 == 0:
        amplitudes[-1] /= 2.0
    return Spectrum(np.fft.rfftfreq(n, 1.0 / fs), amplitudes, f_fund, periods, n)


def thd(spectrum: Spectrum) -> float:
    """Broadband THD in percent: all non-DC, non-fundamental content up to Nyquist."""
    fund = spectrum.fundamental_amplitude
    if fund <= 1e-12 * max(1.0, float(np.max(spectrum.amplitudes))):
        raise ZeroFundamental("Fundamental amplitude is zero")
    power = spectrum.power()
    distortion = float(np.sum(power)) - power[0] - power[spectrum.fundamental_bin]
    return 100.0 * float(np.sqrt(max(distortion, 0.0))) / (fund / np.sqrt(2.0))


def thd_of_signal(signal: np.ndarray, fs: float, f_fund: float) -> float:
    return thd(dft(signal, fs, f_fund))


def carrier_energy_fraction(
    spectrum: Spectrum, carrier_freq: float, band: float = 100.0
) -> float:
    """Share of non-fundamental energy within +/-band of carrier multiples."""
    power = spectrum.power().copy()
    power[0] = 0.0
    power[spectrum.fundamental_bin] = 0.0
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    f = spectrum.frequencies
    k = np.rint(f / carrier_freq)
    near = (k >= 1) & (np.abs(f - k * carrier_freq) <= band)
    return float(np.sum(power[near]) / total)
