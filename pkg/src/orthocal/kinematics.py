"""Closed-form kinematics of the simplified Orthoglide model.

The mechanism is reduced to three rods of length L joining the tool centre
point (TCP) to three prismatic joints sliding along mutually orthogonal axes
that intersect at the base-frame origin.  Joint coordinates are absolute:
the mechanical-zero posture has rho = (L, L, L) with the TCP at the origin.
Encoder offsets shift the actual joint position: actual = commanded + offset.

Points, joint vectors and offsets are plain float arrays of shape (3,);
``closure_residual``, ``inverse_kinematics`` and ``direct_kinematics`` also
broadcast over leading batch dimensions (shape ``(..., 3)``).  The Jacobian
routines operate on a single posture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoRealSolution, SingularJoint, SingularPosture, UnreachablePoint

AXES = ("x", "y", "z")

#: Relative threshold below which a Jacobian denominator |p_i - q_i| counts
#: as singular (leg perpendicular to its rail).
SINGULAR_TOL = 1e-9


def axis_index(axis) -> int:
    """Map an axis name 'x'/'y'/'z' (or an index 0/1/2) to 0/1/2."""
    if isinstance(axis, str):
        try:
            return AXES.index(axis)
        except ValueError:
            raise ValueError(f"axis must be one of {AXES}, got {axis!r}") from None
    i = int(axis)
    if i not in (0, 1, 2):
        raise ValueError(f"axis index out of range: {axis!r}")
    return i


@dataclass(frozen=True)
class Geometry:
    """Leg length and prismatic travel limits, mm.

    ``rho_min``/``rho_max`` are joint displacements from the mechanical zero
    (absolute coordinate L), so rho_min < 0 < rho_max.  Both must stay below
    the leg length in magnitude to keep the travel-limit posture angles
    alpha = arcsin(rho_lim / L) defined.
    """

    leg_length: float
    rho_min: float
    rho_max: float

    def __post_init__(self):
        if not self.leg_length > 0:
            raise ValueError("leg_length must be positive")
        if not self.rho_min < 0 < self.rho_max:
            raise ValueError("expected rho_min < 0 < rho_max")
        if not (abs(self.rho_min) < self.leg_length and self.rho_max < self.leg_length):
            raise ValueError("travel limits must be smaller than the leg length")

    @property
    def alpha_max(self) -> float:
        """Leg tilt angle at the maximum-displacement postures, rad (> 0)."""
        return math.asin(self.rho_max / self.leg_length)

    @property
    def alpha_min(self) -> float:
        """Leg tilt angle at the minimum-displacement postures, rad (< 0)."""
        return math.asin(self.rho_min / self.leg_length)

    def joint_range(self) -> tuple[float, float]:
        """Absolute joint-coordinate interval of commanded postures."""
        return (self.leg_length + self.rho_min, self.leg_length + self.rho_max)


#: Desk-scale defaults used by the CLI and the virtual rig when no explicit
#: configuration is given.
DEFAULT_GEOMETRY = Geometry(leg_length=310.0, rho_min=-73.65, rho_max=73.65)


def validate_offsets(offsets, geometry: Geometry, max_fraction: float = 0.05) -> np.ndarray:
    """Check encoder offsets stay in the linearization regime.

    Returns the offsets as a float array; raises ValueError when any
    magnitude exceeds ``max_fraction * leg_length``.
    """
    d = np.asarray(offsets, dtype=float)
    if d.shape != (3,):
        raise ValueError(f"offsets must be a 3-vector, got shape {d.shape}")
    bound = max_fraction * geometry.leg_length
    if np.any(np.abs(d) > bound):
        raise ValueError(f"offset magnitude exceeds {bound:.4g} mm "
                         f"({max_fraction:g} of the leg length)")
    return d


def closure_residual(p, q, leg_length: float) -> np.ndarray:
    """Loop-closure residuals (mm^2) for TCP ``p`` and ACTUAL joints ``q``.

    Residual i is |p - J_i|^2 - L^2 where J_i is the point at coordinate q_i
    on axis i; all three vanish exactly when (p, q) is a valid posture.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    sq = np.sum(p * p, axis=-1, keepdims=True)
    return sq - 2.0 * p * q + q * q - leg_length**2


def inverse_kinematics(p, leg_length: float, offsets=(0.0, 0.0, 0.0),
                       signs=(1, 1, 1)) -> np.ndarray:
    """Commanded joint coordinates that place the TCP at ``p``.

    ``signs`` picks the per-leg branch; the prototype assembly is
    (+1, +1, +1).  Raises UnreachablePoint when ``p`` lies outside some
    leg's reach.
    """
    p = np.asarray(p, dtype=float)
    signs = np.asarray(signs)
    if signs.shape != (3,) or not np.all(np.abs(signs) == 1):
        raise ValueError("signs must be three values of +1 or -1")
    sq = np.sum(p * p, axis=-1, keepdims=True)
    radicand = leg_length**2 - (sq - p * p)
    if np.any(radicand < 0.0):
        raise UnreachablePoint("point outside leg reach (negative radicand)")
    return p + signs * np.sqrt(radicand) - np.asarray(offsets, dtype=float)


def direct_kinematics(rho, leg_length: float, offsets=(0.0, 0.0, 0.0)) -> np.ndarray:
    """TCP position for commanded joints ``rho`` under encoder ``offsets``.

    Substituting the midpoint parameterization p_i = q_i/2 + t/q_i
    (q = rho + offsets) into the closure equations leaves one quadratic in
    t.  The coefficients below carry a global minus sign so that the
    +sqrt root is the prototype assembly: the sphere intersection on the
    origin side of the plane through the three joint centres.
    """
    rho = np.asarray(rho, dtype=float)
    q = rho + np.asarray(offsets, dtype=float)
    if np.any(q == 0.0):
        raise SingularJoint("actual joint coordinate is zero")
    a = -np.sum(1.0 / (q * q), axis=-1)
    b = -1.0
    c = leg_length**2 - 0.25 * np.sum(q * q, axis=-1)
    disc = b * b - 4.0 * a * c
    if np.any(disc < 0.0):
        raise NoRealSolution("legs cannot close (negative discriminant)")
    t = (-b + np.sqrt(disc)) / (2.0 * a)
    return 0.5 * q + t[..., np.newaxis] / q


def inverse_jacobian(p, q) -> np.ndarray:
    """Matrix mapping a TCP displacement to actual-joint displacements.

    Unit diagonal; entry (i, j) = p_j / (p_i - q_i) off the diagonal, with
    ``q`` the actual joint vector.  Raises SingularPosture when a leg is
    perpendicular to its rail (p_i == q_i within SINGULAR_TOL of the
    posture scale).
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != (3,) or q.shape != (3,):
        raise ValueError("Jacobian routines operate on a single posture")
    denom = p - q
    scale = max(1.0, float(np.max(np.abs(p))), float(np.max(np.abs(q))))
    if np.any(np.abs(denom) < SINGULAR_TOL * scale):
        raise SingularPosture("leg perpendicular to its rail (p_i == q_i)")
    m = p / denom[:, np.newaxis]
    np.fill_diagonal(m, 1.0)
    return m


def jacobian(p, q, cond_limit: float = 1e12) -> np.ndarray:
    """TCP Jacobian dp/dq: the numerical inverse of :func:`inverse_jacobian`.

    Raises SingularPosture when the inverse Jacobian's condition number
    exceeds ``cond_limit``.
    """
    inv = inverse_jacobian(p, q)
    if np.linalg.cond(inv) > cond_limit:
        raise SingularPosture("inverse Jacobian numerically singular")
    return np.linalg.inv(inv)


def test_posture(axis, kind: str, geometry: Geometry) -> tuple[np.ndarray, np.ndarray]:
    """Nominal gauge-protocol posture: (TCP, commanded joints).

    ``kind`` is 'zero' (mechanical zero), 'max' or 'min' (TCP at the travel
    limit along ``axis``; the other two legs tilt by
    alpha = arcsin(rho_lim / L)).
    """
    i = axis_index(axis)
    L = geometry.leg_length
    if kind == "zero":
        return np.zeros(3), np.full(3, L)
    if kind == "max":
        alpha = geometry.alpha_max
    elif kind == "min":
        alpha = geometry.alpha_min
    else:
        raise ValueError(f"kind must be 'zero', 'max' or 'min', got {kind!r}")
    p = np.zeros(3)
    p[i] = L * math.sin(alpha)
    rho = np.full(3, L * math.cos(alpha))
    rho[i] = L * (1.0 + math.sin(alpha))
    return p, rho
