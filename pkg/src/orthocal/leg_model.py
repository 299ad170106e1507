"""Exact leg-line geometry and ideal transverse gauge readings.

A leg is the segment from the centre of its prismatic joint (actual joint
coordinate on the leg axis, zero on the other two) to the TCP.  A fixed
comparator gauge reads the leg's transverse coordinate where the leg crosses
a given longitudinal station; readings are signed in base-frame directions
and the gauge itself is ideal (no tip geometry, no contact force).

For leg axis i the two gauge directions follow cyclic order: first = axis
i+1, second = axis i+2 (x-leg: y then z; y-leg: z then x; z-leg: x then y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kinematics
from .errors import DegenerateLeg, StationOutOfRange


class DeviationPair(NamedTuple):
    """Transverse leg coordinates (mm) along the leg's two gauge directions."""

    first: float
    second: float


@dataclass(frozen=True, eq=False)
class LegLine:
    """Line segment occupied by one leg at a given posture."""

    axis: str
    joint_end: np.ndarray
    tcp_end: np.ndarray


def leg_line(axis, p, q_axis: float) -> LegLine:
    """Leg segment for ``axis``: joint centre at coordinate ``q_axis``, TCP at ``p``."""
    i = kinematics.axis_index(axis)
    joint_end = np.zeros(3)
    joint_end[i] = float(q_axis)
    return LegLine(axis=kinematics.AXES[i], joint_end=joint_end,
                   tcp_end=np.array(p, dtype=float))


def transverse_deviation(leg: LegLine, station: float) -> DeviationPair:
    """Transverse coordinates of the leg line at longitudinal ``station`` (mm).

    The station must lie strictly between the end points' longitudinal
    coordinates, i.e. the gauge keeps contact with the leg.
    """
    i = kinematics.axis_index(leg.axis)
    span = leg.tcp_end - leg.joint_end
    length = float(np.linalg.norm(span))
    if abs(span[i]) < 1e-9 * max(length, 1.0):
        raise DegenerateLeg("leg has no extent along its longitudinal axis")
    lo, hi = sorted((leg.joint_end[i], leg.tcp_end[i]))
    if not lo < station < hi:
        raise StationOutOfRange(
            f"station {station:g} outside the leg span ({lo:g}, {hi:g})")
    point = leg.joint_end + (station - leg.joint_end[i]) / span[i] * span
    return DeviationPair(float(point[(i + 1) % 3]), float(point[(i + 2) % 3]))


def linearized_deviation_delta(axis, alpha: float, offsets) -> DeviationPair:
    """First-order gauge deltas at a travel-limit posture of a leg.

    ``alpha`` is the posture angle: positive for the maximum posture,
    negative for the minimum.  For the x-leg,

        first  = (0.5 + sin a) tan a * dx + sin a * dy
        second = (0.5 + sin a) tan a * dx + sin a * dz

    and the y-/z-legs follow by cyclic index substitution.
    """
    if not abs(alpha) < math.pi / 2:
        raise ValueError("|alpha| must be below pi/2")
    i = kinematics.axis_index(axis)
    d = np.asarray(offsets, dtype=float)
    s = math.sin(alpha)
    along = (0.5 + s) * math.tan(alpha) * d[i]
    return DeviationPair(along + s * d[(i + 1) % 3], along + s * d[(i + 2) % 3])


def exact_gauge_pair(axis, kind: str, geometry: kinematics.Geometry, offsets,
                     station: float | None = None) -> DeviationPair:
    """Exact gauge pair for one commanded protocol posture.

    The commanded joints are the nominal posture for ``kind``; the offsets
    act on the actual joints, so the TCP comes from the exact direct
    kinematics.  The gauge sits at the nominal midpoint station L/2 on the
    leg axis unless ``station`` overrides it.
    """
    i = kinematics.axis_index(axis)
    offsets = np.asarray(offsets, dtype=float)
    if station is None:
        station = 0.5 * geometry.leg_length
    _, rho = kinematics.test_posture(axis, kind, geometry)
    p = kinematics.direct_kinematics(rho, geometry.leg_length, offsets)
    return transverse_deviation(leg_line(axis, p, rho[i] + offsets[i]), station)


def exact_deviation_delta(axis, kind: str, geometry: kinematics.Geometry,
                          offsets) -> DeviationPair:
    """Exact (nonlinear) gauge deltas for a travel-limit posture of a leg.

    Reproduces the physical protocol: read both gauges at the mechanical
    zero, move to the max/min posture along ``axis``, read again, return the
    differences.  This is the ground truth that
    :func:`linearized_deviation_delta` approximates to first order.
    """
    if kind not in ("max", "min"):
        raise ValueError(f"kind must be 'max' or 'min', got {kind!r}")
    zero = exact_gauge_pair(axis, "zero", geometry, offsets)
    test = exact_gauge_pair(axis, kind, geometry, offsets)
    return DeviationPair(test.first - zero.first, test.second - zero.second)
