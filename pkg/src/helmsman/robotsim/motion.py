"""Cartesian straight-line motion with a trapezoidal speed profile.

Pure math, no clocks or state: plan a profile from (distance, cruise
speed, acceleration), then sample position along it. The profile
degenerates to a triangle when the distance is too short to reach cruise
speed (d < v²/a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TAU = 2.0 * math.pi


def normalize_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.fmod(a, TAU)
    if a > math.pi:
        a -= TAU
    elif a <= -math.pi:
        a += TAU
    return a


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float, float]
    orientation: tuple[float, float, float]  # roll, pitch, yaw, radians

    def __post_init__(self):
        for v in (*self.position, *self.orientation):
            if not math.isfinite(v):
                raise ValueError(f"non-finite pose component: {v!r}")

    def normalized(self) -> "Pose":
        return Pose(self.position, tuple(normalize_angle(a) for a in self.orientation))

    def to_dict(self) -> dict:
        return {"position": list(self.position), "orientation": list(self.orientation)}

    @classmethod
    def from_dict(cls, d: dict) -> "Pose":
        return cls(tuple(float(v) for v in d["position"]),
                   tuple(float(v) for v in d["orientation"]))


def linear_distance(a: Pose, b: Pose) -> float:
    return math.dist(a.position, b.position)


def angular_distance(a: Pose, b: Pose) -> float:
    return max(abs(normalize_angle(y - x)) for x, y in zip(a.orientation, b.orientation))


@dataclass(frozen=True)
class SpeedProfile:
    """Timing of one straight-line move.

    trapezoid: accelerate for t_accel, cruise for t_cruise, decelerate
    for t_accel; triangle when t_cruise == 0 and peak < cruise speed.
    """

    distance: float
    cruise: float
    accel: float
    peak: float
    t_accel: float
    t_cruise: float
    duration_s: float

    def velocity_at(self, t: float) -> float:
        if t <= 0.0 or t >= self.duration_s:
            return 0.0
        if t < self.t_accel:
            return self.accel * t
        if t < self.t_accel + self.t_cruise:
            return self.peak
        return self.accel * (self.duration_s - t)

    def position_at(self, t: float) -> float:
        """Arc length covered at time t."""
        if t <= 0.0:
            return 0.0
        if t >= self.duration_s:
            return self.distance
        if t < self.t_accel:
            return 0.5 * self.accel * t * t
        if t < self.t_accel + self.t_cruise:
            ramp = 0.5 * self.accel * self.t_accel**2
            return ramp + self.peak * (t - self.t_accel)
        remaining = self.duration_s - t
        return self.distance - 0.5 * self.accel * remaining * remaining

    def fraction_at(self, t: float) -> float:
        if self.distance <= 0.0:
            return 1.0
        return self.position_at(t) / self.distance


def plan_profile(distance: float, speed: float, accel: float) -> SpeedProfile:
    """Plan a trapezoidal (or triangular) profile over ``distance`` meters.

    duration = v/a + d/v when d >= v²/a, else 2·sqrt(d/a).
    """
    if distance < 0.0:
        raise ValueError("distance must be >= 0")
    if distance == 0.0:
        return SpeedProfile(0.0, speed, accel, 0.0, 0.0, 0.0, 0.0)
    if speed <= 0.0 or accel <= 0.0:
        raise ValueError("speed and accel must be > 0")
    if distance >= speed * speed / accel:
        t_accel = speed / accel
        t_cruise = (distance - speed * speed / accel) / speed
        duration = speed / accel + distance / speed
        peak = speed
    else:
        peak = math.sqrt(accel * distance)
        t_accel = peak / accel
        t_cruise = 0.0
        duration = 2.0 * math.sqrt(distance / accel)
    return SpeedProfile(distance, speed, accel, peak, t_accel, t_cruise, duration)


def interpolate_pose(start: Pose, goal: Pose, fraction: float) -> Pose:
    """Straight segment in position, componentwise linear in RPY."""
    f = min(1.0, max(0.0, fraction))
    position = tuple(s + f * (g - s) for s, g in zip(start.position, goal.position))
    orientation = tuple(
        normalize_angle(s + f * normalize_angle(g - s))
        for s, g in zip(start.orientation, goal.orientation)
    )
    return Pose(position, orientation)


def motion_span(start: Pose, goal: Pose) -> float:
    """Distance the profile is planned over.

    Pure rotations take the largest RPY delta (radians read as meters) so
    they still get a finite, limit-respecting duration.
    """
    d = linear_distance(start, goal)
    if d > 0.0:
        return d
    return angular_distance(start, goal)
