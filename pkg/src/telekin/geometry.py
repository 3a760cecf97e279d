"""3-D vector primitives and the small amount of geometry the simulator needs.

Directions are plain Vec3 values.  A "unit direction" is either an actual unit
vector (norm within tolerance of 1) or the zero sentinel ``ZERO``, which stands
for "no direction established yet".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

UNIT_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class Vec3:
    x: float
    y: float
    z: float

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, c: float) -> "Vec3":
        return Vec3(self.x * c, self.y * c, self.z * c)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.z]


ZERO = Vec3(0.0, 0.0, 0.0)


def unit_or_zero(v: Vec3, eps: float = 1e-12) -> Vec3:
    """Normalize ``v``; degenerate (near-zero) input yields the zero sentinel."""
    n = v.norm()
    if n < eps:
        return ZERO
    return Vec3(v.x / n, v.y / n, v.z / n)


def is_unit(v: Vec3, tol: float = UNIT_TOL) -> bool:
    return abs(v.norm() - 1.0) <= tol


def is_unit_or_zero(v: Vec3, tol: float = UNIT_TOL) -> bool:
    return v == ZERO or is_unit(v, tol)


def angle_deg(u: Vec3, v: Vec3) -> float:
    """Angle between two nonzero vectors, degrees."""
    d = u.dot(v) / (u.norm() * v.norm())
    d = max(-1.0, min(1.0, d))
    return math.degrees(math.acos(d))


def ray_hits_box(origin: Vec3, direction: Vec3, center: Vec3, half_extent: Vec3) -> bool:
    """Slab test for a ray against an axis-aligned box.

    Rays starting inside the box count as hits.
    """
    tmin = -math.inf
    tmax = math.inf
    for o, d, c, h in (
        (origin.x, direction.x, center.x, half_extent.x),
        (origin.y, direction.y, center.y, half_extent.y),
        (origin.z, direction.z, center.z, half_extent.z),
    ):
        lo, hi = c - h, c + h
        if abs(d) < 1e-15:
            if o < lo or o > hi:
                return False
            continue
        t1 = (lo - o) / d
        t2 = (hi - o) / d
        if t1 > t2:
            t1, t2 = t2, t1
        tmin = max(tmin, t1)
        tmax = min(tmax, t2)
        if tmin > tmax:
            return False
    return tmax >= max(tmin, 0.0)
