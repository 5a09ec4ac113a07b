"""Robot-facing event vocabulary and the angle/unit helpers controllers use.

All types here are plain immutable values; the runtime identifies topics
by registered name, not by Python type.  Scalar topics (orientation,
seconds, ...) carry bare floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Side(Enum):
    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"


class BumperState(Enum):
    PRESSED = "pressed"
    RELEASED = "released"


class CliffState(Enum):
    HOLE = "hole"
    FLOOR = "floor"


class WheelSide(Enum):
    LEFT = "left"
    RIGHT = "right"


class WheelState(Enum):
    AIR = "air"
    GROUND = "ground"


class LedColor(Enum):
    BLACK = "black"
    RED = "red"
    ORANGE = "orange"
    GREEN = "green"


class Sound(Enum):
    ERROR = "error"
    ON = "on"
    OFF = "off"
    RECHARGE = "recharge"
    BUTTON = "button"
    CLEANING_START = "cleaning-start"
    CLEANING_END = "cleaning-end"


@dataclass(frozen=True)
class Velocity:
    """Drive command / odometry reading: linear m/s, angular rad/s."""

    linear: float
    angular: float


@dataclass(frozen=True)
class BumperEvent:
    side: Side
    state: BumperState


@dataclass(frozen=True)
class CliffEvent:
    side: Side
    state: CliffState


@dataclass(frozen=True)
class WheelEvent:
    side: WheelSide
    state: WheelState


@dataclass(frozen=True)
class Led1:
    color: LedColor


@dataclass(frozen=True)
class Led2:
    color: LedColor


@dataclass(frozen=True)
class SoundCmd:
    sound: Sound


@dataclass(frozen=True)
class Position:
    x: float
    y: float


# Shared controller constants: cruise speed, in-place turn rate, and the
# turn-task stopping tolerance and rate law.
VEL_LIN = 0.5
VEL_ANG = 0.1
TURN_TOLERANCE = 0.02
TURN_GAIN = 1.0
TURN_MAX_RATE = 0.5

_TWO_PI = 2.0 * math.pi


def degrees_to_orientation(degrees: float) -> float:
    """Degrees to radians; the result is not normalized."""
    return degrees * math.pi / 180.0


def norm_orientation(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    r = math.fmod(angle, _TWO_PI)
    if r > math.pi:
        r -= _TWO_PI
    elif r <= -math.pi:
        r += _TWO_PI
    return r


def double_to_seconds(value: float) -> float:
    """Embed a non-negative real as simulated seconds."""
    if value < 0.0:
        raise ValueError(f"durations cannot be negative: {value!r}")
    return float(value)


def orientation_to_angular_velocity(diff: float) -> float:
    """Proportional turn rate for a heading error, clamped to the max rate.

    ``diff`` is expected in (-pi, pi]; the sign of the result matches the
    sign of the error.
    """
    rate = diff * TURN_GAIN
    if rate > TURN_MAX_RATE:
        return TURN_MAX_RATE
    if rate < -TURN_MAX_RATE:
        return -TURN_MAX_RATE
    return rate
