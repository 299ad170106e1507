"""Linear identification of encoder offsets from leg-parallelism deltas.

Measurement vectors come in two fixed layouts (values in mm):

* full, 12 values: per-leg blocks x, y, z; within each block the two gauge
  deltas (first, second direction) at the maximum posture, then the two at
  the minimum posture.  Column names in :data:`FULL_COLUMNS`.
* reduced, 6 values: max-minus-min differences ordered
  dx_y, dx_z, dy_x, dy_z, dz_x, dz_y, where ``d<axis>_<leg>`` is the
  reading along ``<axis>`` of the gauge probing ``<leg>``.

A design-matrix row for a gauge on leg ``a`` measuring along ``d`` has
``(0.5 + sin a) tan a`` on the leg's own offset and ``sin a`` on the offset
of the measured direction, evaluated at the posture angle; reduced rows use
the max/min difference of those coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import kinematics
from .errors import EmptyVector, RankDeficient

#: Singular values below RANK_RCOND times the largest one count as zero.
RANK_RCOND = 1e-10

#: (leg axis, measured axis, posture kind) of each full-vector entry.
FULL_LAYOUT = tuple(
    (leg, kinematics.AXES[(kinematics.axis_index(leg) + step) % 3], kind)
    for leg in kinematics.AXES
    for kind in ("max", "min")
    for step in (1, 2)
)

FULL_COLUMNS = tuple(f"d{meas}_{leg}_{kind}" for leg, meas, kind in FULL_LAYOUT)

#: (leg axis, measured axis) of each reduced-vector entry.
REDUCED_LAYOUT = tuple(
    (leg, meas) for meas in kinematics.AXES for leg in kinematics.AXES if leg != meas
)

REDUCED_COLUMNS = tuple(f"d{meas}_{leg}" for leg, meas in REDUCED_LAYOUT)


@dataclass(frozen=True)
class PostureAngles:
    """Leg tilt angles at the travel-limit test postures, rad."""

    alpha_max: float
    alpha_min: float

    def __post_init__(self):
        if not (abs(self.alpha_max) < math.pi / 2 and abs(self.alpha_min) < math.pi / 2):
            raise ValueError("|alpha| must be below pi/2")

    @classmethod
    def from_geometry(cls, geometry: kinematics.Geometry) -> "PostureAngles":
        return cls(alpha_max=geometry.alpha_max, alpha_min=geometry.alpha_min)


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    """Least-squares identification output (all lengths in mm)."""

    offsets: np.ndarray          # (3,) estimated encoder offsets
    residuals: np.ndarray        # measurements - design @ offsets
    sigma_hat: float             # noise scale sqrt(|r|^2 / (m - 3))
    rms_before: float            # rms of the measurements
    rms_after_predicted: float   # rms of the residuals


def _b(alpha: float) -> float:
    return math.sin(alpha)


def _c(alpha: float) -> float:
    return (0.5 + math.sin(alpha)) * math.tan(alpha)


def design_matrix_full(angles: PostureAngles) -> np.ndarray:
    """12x3 coefficient matrix for the full measurement layout."""
    alpha = {"max": angles.alpha_max, "min": angles.alpha_min}
    rows = np.zeros((len(FULL_LAYOUT), 3))
    for r, (leg, meas, kind) in enumerate(FULL_LAYOUT):
        rows[r, kinematics.axis_index(leg)] = _c(alpha[kind])
        rows[r, kinematics.axis_index(meas)] = _b(alpha[kind])
    return rows


def design_matrix_reduced(angles: PostureAngles) -> np.ndarray:
    """6x3 coefficient matrix for max-minus-min differenced deltas."""
    b = _b(angles.alpha_max) - _b(angles.alpha_min)
    c = _c(angles.alpha_max) - _c(angles.alpha_min)
    rows = np.zeros((len(REDUCED_LAYOUT), 3))
    for r, (leg, meas) in enumerate(REDUCED_LAYOUT):
        rows[r, kinematics.axis_index(leg)] = c
        rows[r, kinematics.axis_index(meas)] = b
    return rows


def rms(values) -> float:
    """Root mean square of a vector, mm."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise EmptyVector("rms of an empty vector")
    return float(np.sqrt(np.mean(v * v)))


def solve_offsets(design, measurements) -> CalibrationResult:
    """Offsets minimizing ``|measurements - design @ offsets|_2``.

    Solved through an orthogonal factorization (SVD), not the normal
    equations.  Raises RankDeficient when the numerical rank drops below 3
    (unidentifiable configuration, e.g. equal posture angles in the reduced
    form).
    """
    a = np.asarray(design, dtype=float)
    m = np.asarray(measurements, dtype=float)
    if a.ndim != 2 or a.shape[1] != 3 or m.shape != (a.shape[0],):
        raise ValueError(f"shape mismatch: design {a.shape}, measurements {m.shape}")
    if a.shape[0] <= 3:
        raise ValueError("need more than 3 measurements")
    x, _, rank, _ = np.linalg.lstsq(a, m, rcond=RANK_RCOND)
    if rank < 3:
        raise RankDeficient("design matrix numerically rank deficient")
    r = m - a @ x
    return CalibrationResult(
        offsets=x,
        residuals=r,
        sigma_hat=float(np.sqrt(r @ r / (m.size - 3))),
        rms_before=rms(m),
        rms_after_predicted=rms(r),
    )


def predict_improvement(design, measurements, offsets) -> np.ndarray:
    """Model-predicted post-calibration deviations: m - design @ offsets."""
    a = np.asarray(design, dtype=float)
    m = np.asarray(measurements, dtype=float)
    d = np.asarray(offsets, dtype=float)
    if a.ndim != 2 or m.shape != (a.shape[0],) or d.shape != (a.shape[1],):
        raise ValueError(f"shape mismatch: design {a.shape}, measurements "
                         f"{m.shape}, offsets {d.shape}")
    return m - a @ d


def fit_posture_angles(measurements, target_improvement,
                       alpha_bounds: tuple[float, float] = (0.02, 1.45),
                       grid: int = 120) -> PostureAngles:
    """Fit (alpha_max, alpha_min) so the predicted improvement matches a target.

    For rigs whose geometry is unknown: brute-force grid over
    alpha_max in (lo, hi) and alpha_min in (-hi, -lo), then simplex
    refinement of the squared mismatch between the least-squares improvement
    prediction for ``measurements`` and ``target_improvement`` (both reduced
    layout).
    """
    m = np.asarray(measurements, dtype=float)
    target = np.asarray(target_improvement, dtype=float)
    lo, hi = alpha_bounds

    def mismatch(params) -> float:
        a1, a2 = params
        if not (lo <= a1 <= hi and -hi <= a2 <= -lo):
            return math.inf
        a = design_matrix_reduced(PostureAngles(a1, a2))
        x, _, rank, _ = np.linalg.lstsq(a, m, rcond=RANK_RCOND)
        if rank < 3:
            return math.inf
        return float(np.sum((m - a @ x - target) ** 2))

    candidates = np.linspace(lo, hi, grid)
    best = min(((mismatch((a1, a2)), a1, a2)
                for a1 in candidates for a2 in -candidates),
               key=lambda item: item[0])
    res = minimize(mismatch, x0=[best[1], best[2]], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
    a1, a2 = res.x if res.fun <= best[0] else (best[1], best[2])
    return PostureAngles(float(a1), float(a2))
