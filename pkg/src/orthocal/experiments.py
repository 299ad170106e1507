"""Reference calibration campaign recorded on the Orthoglide prototype.

Three experiments in the reduced measurement layout
(:data:`orthocal.identification.REDUCED_COLUMNS`): the measured max-minus-min
parallelism deltas, the model-predicted deviations after applying the
identified offsets, and the r.m.s. values as originally reported (mm,
rounded to two decimals).
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ExperimentRecord:
    label: str
    measured: np.ndarray
    expected_improvement: np.ndarray
    rms_measured: float
    rms_improvement: float


EXPERIMENTS = (
    ExperimentRecord(
        label="initial settings (before mechanical tuning and calibration)",
        measured=np.array([+0.52, +1.58, +2.37, -0.25, -0.57, -0.04]),
        expected_improvement=np.array([-0.94, +0.63, +1.07, -0.84, -0.27, +0.35]),
        rms_measured=1.19,
        rms_improvement=0.74,
    ),
    ExperimentRecord(
        label="after mechanical tuning (before calibration)",
        measured=np.array([-0.43, -0.37, +0.42, -0.18, -1.14, -0.70]),
        expected_improvement=np.array([-0.28, +0.25, +0.21, -0.14, -0.13, +0.09]),
        rms_measured=0.62,
        rms_improvement=0.20,
    ),
    ExperimentRecord(
        label="after calibration",
        measured=np.array([-0.23, +0.27, +0.34, -0.10, -0.09, +0.11]),
        expected_improvement=np.array([-0.29, +0.23, +0.25, -0.17, -0.10, +0.08]),
        rms_measured=0.21,
        rms_improvement=0.20,
    ),
)
