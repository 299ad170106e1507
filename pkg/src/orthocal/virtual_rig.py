"""Virtual measurement rig: the gauge protocol run on a simulated mechanism
with known ground-truth encoder offsets.

Raw readings follow the physical sequence per leg and repetition:
zero -> max -> min -> zero (the trailing zero only monitors drift).  Gauge
deltas are taken per repetition against that repetition's initial zero
reading, then averaged across repetitions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import identification, kinematics, leg_model

POSTURE_SEQUENCE = ("zero", "max", "min", "zero")

_DIRECTIONS = ("first", "second")


def _direction_index(direction) -> int:
    if direction in _DIRECTIONS:
        return _DIRECTIONS.index(direction)
    i = int(direction)
    if i not in (0, 1):
        raise ValueError(f"direction must be 'first', 'second', 0 or 1, got {direction!r}")
    return i


@dataclass(frozen=True)
class RigConfig:
    """Virtual rig parameters.

    ``gauge_resolution`` is the indicator step in mm (0 disables
    quantization, the ideal-gauge limit); ``noise_std`` is the i.i.d.
    Gaussian noise per raw reading.
    """

    geometry: kinematics.Geometry = kinematics.DEFAULT_GEOMETRY
    true_offsets: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gauge_resolution: float = 0.010
    noise_std: float = 0.007
    repetitions: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.gauge_resolution < 0:
            raise ValueError("gauge_resolution must be >= 0")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        offsets = kinematics.validate_offsets(self.true_offsets, self.geometry)
        object.__setattr__(self, "true_offsets", tuple(float(v) for v in offsets))


@dataclass(frozen=True, eq=False)
class ProtocolRun:
    """Raw gauge readings, shape (3 legs, repetitions, 4 postures, 2 gauges), mm."""

    readings: np.ndarray

    @property
    def reading_count(self) -> int:
        return int(self.readings.size)

    @property
    def zero_drift(self) -> np.ndarray:
        """Final-zero minus initial-zero reading, per leg/repetition/gauge."""
        return self.readings[:, :, 3, :] - self.readings[:, :, 0, :]


def quantize(value: float, resolution: float) -> float:
    """Round to the nearest resolution multiple, half to even; 0 disables."""
    if resolution <= 0:
        return float(value)
    return float(np.round(value / resolution) * resolution)


def exact_reading(rig: RigConfig, axis, kind: str, direction) -> float:
    """Noise-free transverse leg coordinate at the gauge station (mm)."""
    pair = leg_model.exact_gauge_pair(axis, kind, rig.geometry, rig.true_offsets)
    return pair[_direction_index(direction)]


def simulate_reading(rig: RigConfig, axis, kind: str, direction, rng) -> float:
    """One raw gauge reading: exact value plus noise, quantized to the grid."""
    value = exact_reading(rig, axis, kind, direction)
    if rig.noise_std > 0:
        value += rng.normal(0.0, rig.noise_std)
    return quantize(value, rig.gauge_resolution)


def _gauge_slot(leg, meas) -> int:
    step = (kinematics.axis_index(meas) - kinematics.axis_index(leg)) % 3
    if step == 0:
        raise ValueError("gauge direction cannot equal the leg axis")
    return step - 1


def run_protocol(rig: RigConfig, rng=None):
    """Execute the full protocol; returns (ProtocolRun, full, reduced).

    Reading order is fixed (legs x,y,z; repetitions; postures zero, max,
    min, zero; gauges first, second) so a fixed seed gives a bit-identical
    run.  ``full`` and ``reduced`` are the repetition-averaged measurement
    vectors in the layouts of :mod:`orthocal.identification`.
    """
    if rng is None:
        rng = np.random.default_rng(rig.seed)
    exact = {
        (axis, kind): leg_model.exact_gauge_pair(axis, kind, rig.geometry,
                                                 rig.true_offsets)
        for axis in kinematics.AXES for kind in ("zero", "max", "min")
    }
    readings = np.empty((3, rig.repetitions, len(POSTURE_SEQUENCE), 2))
    for il, axis in enumerate(kinematics.AXES):
        for rep in range(rig.repetitions):
            for ip, kind in enumerate(POSTURE_SEQUENCE):
                for ig in range(2):
                    value = exact[axis, kind][ig]
                    if rig.noise_std > 0:
                        value += rng.normal(0.0, rig.noise_std)
                    readings[il, rep, ip, ig] = quantize(value, rig.gauge_resolution)

    # per-repetition deltas against that repetition's initial zero, averaged
    deltas = (readings[:, :, 1:3, :] - readings[:, :, :1, :]).mean(axis=1)
    kind_slot = {"max": 0, "min": 1}
    full = np.array([
        deltas[kinematics.axis_index(leg), kind_slot[kind], _gauge_slot(leg, meas)]
        for leg, meas, kind in identification.FULL_LAYOUT
    ])
    reduced = np.array([
        deltas[kinematics.axis_index(leg), 0, _gauge_slot(leg, meas)]
        - deltas[kinematics.axis_index(leg), 1, _gauge_slot(leg, meas)]
        for leg, meas in identification.REDUCED_LAYOUT
    ])
    return ProtocolRun(readings=readings), full, reduced


@dataclass(frozen=True, eq=False)
class MonteCarloSummary:
    """Per-trial estimates and aggregate statistics of repeated calibrations."""

    form: str
    true_offsets: np.ndarray     # (3,)
    estimates: np.ndarray        # (trials, 3) estimated offsets, mm
    sigma_hats: np.ndarray       # (trials,)

    @property
    def bias(self) -> np.ndarray:
        return self.estimates.mean(axis=0) - self.true_offsets

    @property
    def std(self) -> np.ndarray:
        if len(self.estimates) < 2:
            return np.zeros(3)
        return self.estimates.std(axis=0, ddof=1)

    @property
    def sigma_hat_mean(self) -> float:
        return float(self.sigma_hats.mean())

    @property
    def sigma_hat_std(self) -> float:
        if len(self.sigma_hats) < 2:
            return 0.0
        return float(self.sigma_hats.std(ddof=1))


def monte_carlo_identification(rig: RigConfig, trials: int,
                               form: str = "reduced") -> MonteCarloSummary:
    """Repeat simulate -> identify ``trials`` times with independent sub-seeds."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if form not in ("full", "reduced"):
        raise ValueError(f"form must be 'full' or 'reduced', got {form!r}")
    angles = identification.PostureAngles.from_geometry(rig.geometry)
    design = (identification.design_matrix_full(angles) if form == "full"
              else identification.design_matrix_reduced(angles))
    estimates = np.empty((trials, 3))
    sigma_hats = np.empty(trials)
    for k in range(trials):
        rng = np.random.default_rng([rig.seed, k])
        _, full, reduced = run_protocol(rig, rng=rng)
        result = identification.solve_offsets(design, full if form == "full" else reduced)
        estimates[k] = result.offsets
        sigma_hats[k] = result.sigma_hat
    return MonteCarloSummary(form=form,
                             true_offsets=np.asarray(rig.true_offsets, dtype=float),
                             estimates=estimates, sigma_hats=sigma_hats)
