"""Ventilation volume-fraction waveforms.

`ventilation_waveform` is the bare forced-expiration curve. A full synthetic
record prepends an inhalation ramp from tidal level up to total capacity, so
window selection has a clean onset peak, and caps the expiration so that any
windowed record fits the classifier's 93-frame pad target at 20 fps.
"""

from dataclasses import dataclass

import numpy as np

DECAY_CUTOFF = 5.3  # exp(-5.3) < 0.5%: expiration treated as complete
PRE_SECONDS = 0.75
PRE_START_LEVEL = 0.3  # tidal volume fraction before the maneuver
MAX_EXPIRATION_S = 4.0


def ventilation_waveform(spec, duration, fps=20.0):
    """v(t) = fvc_scale * exp(-t / tau), sampled at fps over `duration` s."""
    if duration < 1.0:
        raise ValueError("duration must be at least 1 s")
    t = np.arange(round(duration * fps)) / fps
    return spec.fvc_scale * np.exp(-t / spec.tau)


def expiration_duration(tau, max_s=MAX_EXPIRATION_S):
    return float(min(max_s, DECAY_CUTOFF * tau))


@dataclass
class ExpirationRecord:
    """Per-frame volume fractions for one maneuver.

    main: the global waveform; defect_curves: one per defect, re-timed with
    that defect's slower time constant. onset_index marks full inflation.
    """

    fps: float
    onset_index: int
    main: np.ndarray
    defect_curves: list

    @property
    def num_frames(self):
        return len(self.main)


def _record_curve(fvc, tau, fps, n_pre, n_exp):
    ramp = fvc * (
        PRE_START_LEVEL
        + (1.0 - PRE_START_LEVEL) * 0.5 * (1 - np.cos(np.pi * np.arange(n_pre) / n_pre))
    )
    t = np.arange(n_exp + 1) / fps
    decay = fvc * np.exp(-t / tau)
    return np.concatenate([ramp, decay])


def expiration_record(spec, fps=20.0, pre_s=PRE_SECONDS, max_exp_s=MAX_EXPIRATION_S):
    n_pre = round(pre_s * fps)
    n_exp = round(expiration_duration(spec.tau, max_exp_s) * fps)
    main = _record_curve(spec.fvc_scale, spec.tau, fps, n_pre, n_exp)
    curves = []
    for d in spec.defects:
        slow_tau = spec.tau * (1.0 + d.severity)
        curves.append(_record_curve(spec.fvc_scale, slow_tau, fps, n_pre, n_exp))
    return ExpirationRecord(fps, n_pre, main, curves)
