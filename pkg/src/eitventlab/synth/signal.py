"""Voltage contamination, zero-phase low-pass filtering, window selection."""

from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, sosfiltfilt

from ..femcore.forward import VoltageSeries, simulate_series
from .errors import UnstableFilter, WindowNotFound

CARDIAC_BAND = (1.0, 1.6)  # Hz, 60-100 beats per minute


def synth_voltage(mesh, movie, pattern, cardiac_amp, noise_rms, seed, fps=20.0):
    """Forward-simulate a movie and add a cardiac tone plus white noise.

    The cardiac component is amp * sin(2 pi f_c t) scattered over channels by
    a fixed random mixing vector; f_c is drawn once per subject. Everything
    is a pure function of (movie, seed).
    """
    if cardiac_amp < 0 or noise_rms < 0:
        raise ValueError("contamination amplitudes must be nonnegative")
    series = simulate_series(mesh, movie, pattern, fps=fps)
    rng = np.random.default_rng(seed)
    f_c = rng.uniform(*CARDIAC_BAND)
    mix = rng.standard_normal(series.num_channels)
    mix /= np.sqrt((mix**2).mean())
    t = np.arange(series.num_frames) / fps
    values = series.values + cardiac_amp * np.sin(2 * np.pi * f_c * t)[:, None] * mix
    if noise_rms > 0:
        values = values + rng.normal(0.0, noise_rms, size=values.shape)
    return VoltageSeries(values, fps=fps)


@dataclass
class FilterSpec:
    kind: str = "low-pass"
    cutoff: float = 0.6  # Hz: above respiration (<= 0.33), below cardiac (>= 1)
    order: int = 4
    zero_phase: bool = True

    def __post_init__(self):
        if self.kind != "low-pass":
            raise ValueError(f"unsupported filter kind {self.kind!r}")
        if self.order < 1:
            raise ValueError("order must be >= 1")


def design_sos(spec, fps):
    if not 0 < spec.cutoff < fps / 2:
        raise ValueError(f"cutoff {spec.cutoff} outside (0, {fps / 2})")
    sos = butter(spec.order, spec.cutoff, btype="low", fs=fps, output="sos")
    poles = np.concatenate([np.roots([1.0, s[4], s[5]]) for s in sos])
    if np.abs(poles).max() >= 1.0:
        raise UnstableFilter("filter pole on or outside the unit circle")
    return sos


def lowpass(series, spec):
    """Forward-backward (zero-phase) second-order-section low-pass."""
    sos = design_sos(spec, series.fps)
    if spec.zero_phase:
        filtered = sosfiltfilt(sos, series.values, axis=0)
    else:
        from scipy.signal import sosfilt

        filtered = sosfilt(sos, series.values, axis=0)
    return VoltageSeries(filtered, fps=series.fps)


def global_signal(series):
    """Summed channel magnitudes; tracks lung air content monotonically for
    this conductivity model, so its peak marks expiration onset and its
    minimum marks the end of expiration."""
    return np.abs(series.values).sum(axis=1)


def select_window(series, mode="forced-expiration"):
    """Reference frame (end of expiration) and [onset, reference] window."""
    if mode != "forced-expiration":
        raise ValueError(f"unsupported window mode {mode!r}")
    g = global_signal(series)
    start = int(np.argmax(g))
    ref = int(np.argmin(g))
    if start >= ref:
        raise WindowNotFound(
            f"no expiration found: peak at frame {start}, minimum at {ref}"
        )
    return ref, (start, ref)
