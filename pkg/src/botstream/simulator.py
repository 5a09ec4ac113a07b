"""Deterministic differential-drive robot in a tiled world.

The simulator is driven synchronously by the scheduler: it consumes drive
and LED commands, integrates motion through the kernel selected in
:mod:`botstream.kinematics`, and synthesizes edge-triggered bumper, cliff
and wheel events plus periodic odometry readings.

The velocity latch has no timeout: the robot keeps executing the last
drive command until a new one replaces it.  Holes do not trap the robot;
only cliff events fire when a sensor point passes over one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import kinematics
from .robot import (
    BumperEvent,
    BumperState,
    CliffEvent,
    CliffState,
    Led1,
    Led2,
    LedColor,
    Position,
    Side,
    SoundCmd,
    Velocity,
    WheelEvent,
    WheelSide,
    WheelState,
)
from .world import World

_SIDE_BITS = ((Side.LEFT, 1), (Side.CENTER, 2), (Side.RIGHT, 4))


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.02
    sensor_rate: float = 10.0
    robot_radius: float = 0.175
    max_linear: float = 1.5
    max_angular: float = math.pi

    def __post_init__(self) -> None:
        for name in ("dt", "sensor_rate", "robot_radius", "max_linear", "max_angular"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"SimConfig.{name} must be positive")


@dataclass
class RobotState:
    x: float
    y: float
    theta: float
    latched: Velocity = Velocity(0.0, 0.0)
    led1: LedColor = LedColor.BLACK
    led2: LedColor = LedColor.BLACK
    contact_mask: int = 0
    hole_mask: int = 0
    wheels: dict = field(default_factory=lambda: {
        WheelSide.LEFT: WheelState.GROUND,
        WheelSide.RIGHT: WheelState.GROUND,
    })


def _clamp(value: float, limit: float) -> float:
    if not math.isfinite(value):
        raise ValueError(f"velocity command must be finite, got {value!r}")
    if value > limit:
        return limit
    if value < -limit:
        return -limit
    return value


class Simulator:
    def __init__(self, world: World, config: SimConfig | None = None, kernel=None) -> None:
        self.world = world
        self.config = config or SimConfig()
        self._advance = kernel or kinematics.advance
        x, y, theta = world.start
        self.state = RobotState(x, y, theta)

    def apply_command(self, value) -> None:
        """Apply a robot command; unknown payloads are ignored."""
        if isinstance(value, Velocity):
            cfg = self.config
            self.state.latched = Velocity(
                _clamp(value.linear, cfg.max_linear),
                _clamp(value.angular, cfg.max_angular),
            )
        elif isinstance(value, Led1):
            self.state.led1 = value.color
        elif isinstance(value, Led2):
            self.state.led2 = value.color
        elif isinstance(value, SoundCmd):
            pass  # sounds exist only in the trace

    def step(self, dt: float) -> list[tuple[str, object]]:
        """Advance physics by ``dt``; returns edge events as (topic, value)."""
        st = self.state
        w = self.world
        nx, ny, nt, contacts, holes = self._advance(
            st.x, st.y, st.theta,
            st.latched.linear, st.latched.angular,
            dt, self.config.robot_radius,
            w.cells, w.cols, w.rows, w.tile,
        )
        events: list[tuple[str, object]] = []
        for side, bit in _SIDE_BITS:
            before = st.contact_mask & bit
            now = contacts & bit
            if before != now:
                state = BumperState.PRESSED if now else BumperState.RELEASED
                events.append(("bumper", BumperEvent(side, state)))
        for side, bit in _SIDE_BITS:
            before = st.hole_mask & bit
            now = holes & bit
            if before != now:
                state = CliffState.HOLE if now else CliffState.FLOOR
                events.append(("cliff", CliffEvent(side, state)))
        st.x, st.y, st.theta = nx, ny, nt
        st.contact_mask = contacts
        st.hole_mask = holes
        return events

    def set_wheel(self, side: WheelSide, state: WheelState) -> list[tuple[str, object]]:
        """Scripted wheel injection; emits an event only on transitions."""
        if self.state.wheels[side] is state:
            return []
        self.state.wheels[side] = state
        return [("wheel", WheelEvent(side, state))]

    def periodic_readings(self) -> list[tuple[str, object]]:
        st = self.state
        return [
            ("velocity", st.latched),
            ("position", Position(st.x, st.y)),
            ("orientation", st.theta),
        ]

    def wall_clearance(self) -> float:
        """Distance from the robot center to the nearest wall (test helper)."""
        st = self.state
        w = self.world
        best = min(st.x, st.y, w.width - st.x, w.height - st.y)
        from .world import WALL

        for iy in range(w.rows):
            for ix in range(w.cols):
                if w.cells[iy * w.cols + ix] != WALL:
                    continue
                qx = min(max(st.x, ix * w.tile), (ix + 1) * w.tile)
                qy = min(max(st.y, iy * w.tile), (iy + 1) * w.tile)
                best = min(best, math.hypot(st.x - qx, st.y - qy))
        return best
