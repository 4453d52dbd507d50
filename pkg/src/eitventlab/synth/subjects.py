"""Synthetic subject sampling for the four ventilation classes.

Class phenomenology: obstruction slows expiration (large tau) and ventilates
unevenly (defects); restriction reduces capacity (small fvc_scale) with a
normal-speed, even expiration; mixed combines both. Parameter ranges keep
the classes separable by construction.
"""

from dataclasses import dataclass, field

import numpy as np

LABELS = ("normal", "obstructive", "restrictive", "mixed")

TAU_NORMAL = (0.3, 0.5)
TAU_SLOW = (1.5, 3.0)
FVC_FULL = (0.9, 1.0)
FVC_MILD = (0.85, 1.0)  # obstructive: capacity mostly preserved
FVC_REDUCED = (0.4, 0.7)


@dataclass
class Defect:
    center: tuple  # meters, mesh coordinates
    radius: float
    severity: float

    def to_dict(self):
        return {
            "center": [float(c) for c in self.center],
            "radius": float(self.radius),
            "severity": float(self.severity),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["center"]), d["radius"], d["severity"])


@dataclass
class SubjectSpec:
    label: str
    tau: float
    fvc_scale: float
    defects: list = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0 < self.fvc_scale <= 1:
            raise ValueError("fvc_scale must be in (0, 1]")
        for d in self.defects:
            if not 0 <= d.severity <= 1:
                raise ValueError("defect severity must be in [0, 1]")

    def to_dict(self):
        return {
            "label": self.label,
            "tau": self.tau,
            "fvc_scale": self.fvc_scale,
            "defects": [d.to_dict() for d in self.defects],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["label"],
            d["tau"],
            d["fvc_scale"],
            [Defect.from_dict(x) for x in d["defects"]],
            d["seed"],
        )


@dataclass
class LungGeometry:
    """Two ellipsoidal lung regions inside the cylinder; fvc_scale shrinks
    the ventilated volume (vital capacity is a volume)."""

    radius: float
    height: float
    center_offset: float = 0.45  # of radius, along +-x
    axes_frac: tuple = (0.36, 0.60, 0.28)  # of (R, R, H)

    def centers(self):
        return (
            np.array([-self.center_offset * self.radius, 0.0, 0.5 * self.height]),
            np.array([+self.center_offset * self.radius, 0.0, 0.5 * self.height]),
        )

    def axes(self, fvc_scale=1.0):
        scale = fvc_scale ** (1.0 / 3.0)
        return scale * np.array(
            [
                self.axes_frac[0] * self.radius,
                self.axes_frac[1] * self.radius,
                self.axes_frac[2] * self.height,
            ]
        )


def sample_subject_spec(label, seed, geometry):
    rng = np.random.default_rng(seed)
    tau_range = TAU_NORMAL if label in ("normal", "restrictive") else TAU_SLOW
    if label == "normal":
        fvc_range = FVC_FULL
    elif label == "obstructive":
        fvc_range = FVC_MILD
    else:
        fvc_range = FVC_REDUCED
    tau = rng.uniform(*tau_range)
    fvc = rng.uniform(*fvc_range)
    defects = []
    if label in ("obstructive", "mixed"):
        fvc_axes = geometry.axes(fvc)
        for _ in range(int(rng.integers(1, 3))):
            side = int(rng.integers(0, 2))
            center = geometry.centers()[side] + rng.uniform(-0.5, 0.5, 3) * fvc_axes
            radius = rng.uniform(0.55, 0.85) * fvc_axes[0]
            severity = rng.uniform(0.5, 0.9)
            defects.append(Defect(tuple(center), float(radius), float(severity)))
    return SubjectSpec(label, float(tau), float(fvc), defects, seed)
