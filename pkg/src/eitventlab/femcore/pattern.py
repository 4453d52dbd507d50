"""Injection-measurement patterns. Patterns are plain data and fully
configurable; `two_loop_pattern` is the default concretization: adjacent-pair
injection within each 16-electrode ring plus 16 vertical cross-ring pairs,
measured on all in-ring adjacent pairs that exclude the injecting electrodes.
"""

from dataclasses import dataclass, field

from .. import ioutil


@dataclass
class MeasurementPattern:
    injections: list = field(default_factory=list)  # (src, sink, amplitude)
    measurements: list = field(default_factory=list)  # per injection: [(pos, neg)]

    def __post_init__(self):
        if len(self.injections) != len(self.measurements):
            raise ValueError("one measurement list per injection required")
        for (src, sink, amp), pairs in zip(self.injections, self.measurements):
            if src == sink:
                raise ValueError("injection source equals sink")
            if amp <= 0:
                raise ValueError("injection amplitude must be positive")
            for pos, neg in pairs:
                if {pos, neg} & {src, sink}:
                    raise ValueError("measurement pair overlaps injection pair")
                if pos == neg:
                    raise ValueError("degenerate measurement pair")

    @property
    def num_measurements(self):
        return sum(len(p) for p in self.measurements)

    def to_dict(self):
        return {
            "injections": [[int(s), int(t), float(a)] for s, t, a in self.injections],
            "measurements": [
                [[int(p), int(n)] for p, n in pairs] for pairs in self.measurements
            ],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            [(s, t, a) for s, t, a in d["injections"]],
            [[(p, n) for p, n in pairs] for pairs in d["measurements"]],
        )

    def content_hash(self):
        return ioutil.sha256_json(self.to_dict())


def ring_adjacent_pairs(n_per_ring=16):
    pairs = []
    for ring in (0, 1):
        base = ring * n_per_ring
        pairs.extend(
            (base + i, base + (i + 1) % n_per_ring) for i in range(n_per_ring)
        )
    return pairs


def two_loop_pattern(n_per_ring=16, amplitude=2e-3):
    all_pairs = ring_adjacent_pairs(n_per_ring)
    injections = []
    for ring in (0, 1):
        base = ring * n_per_ring
        injections.extend(
            (base + i, base + (i + 1) % n_per_ring, amplitude)
            for i in range(n_per_ring)
        )
    injections.extend((i, n_per_ring + i, amplitude) for i in range(n_per_ring))

    measurements = []
    for src, sink, _ in injections:
        measurements.append(
            [(p, n) for p, n in all_pairs if not ({p, n} & {src, sink})]
        )
    return MeasurementPattern(injections, measurements)
