"""Tasks: an init step, a continuous controller, and a typed done event.

A task installs its init controller, lets it fire exactly once, swaps in
the body, and runs the body until the first done event of the task's
result type.  On done every controller of the task is uninstalled and the
result flows to the continuation.  Task transitions happen only between
scheduler steps; user events and memory are fresh per task, while robot
sensor topics keep their bus buffers across transitions (an event
arriving in the gap is handed to the next task's subscribers).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional

from .robot import (
    Position,
    TURN_TOLERANCE,
    VEL_LIN,
    Velocity,
    degrees_to_orientation,
    norm_orientation,
    orientation_to_angular_velocity,
)
from .runtime import (
    Function,
    Kind,
    LiftError,
    Registry,
    done_leaves,
    in_event,
    in_memory,
    in_product,
    out_done,
    out_event,
    out_memory,
    out_product,
    out_variant,
)
from .events import Variant
from .scheduler import Scheduler

DONE_TOPIC = "task-done"
TURN_TARGET = "turn-target"
MOVE_START = "move-start"


@dataclass(frozen=True)
class Task:
    init: Optional[Function]
    body: Any  # Function or Parallel
    done_type: str = DONE_TOPIC


def make_task(init: Optional[Function], body, done_type: str = DONE_TOPIC) -> Task:
    leaves = done_leaves(getattr(body, "output", None)) if isinstance(body, Function) else _parallel_done_leaves(body)
    if leaves.count(done_type) != 1:
        raise LiftError(f"task body must emit exactly one done leaf of type {done_type!r}")
    return Task(init, body, done_type)


def _parallel_done_leaves(body) -> list[str]:
    out: list[str] = []
    for child in body.children:
        out.extend(done_leaves(child.output))
    return out


@dataclass(frozen=True)
class Single:
    task: Task


@dataclass(frozen=True)
class Sequence:
    first: "TaskPlan"
    then: Callable[[Any], "TaskPlan"]


@dataclass(frozen=True)
class Repeat:
    count: int
    body: "TaskPlan"

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError("repeat count must be non-negative")


TaskPlan = Single | Sequence | Repeat


def _iter_plan(plan: TaskPlan):
    """Generator yielding tasks in order; receives each task's result."""
    if isinstance(plan, Single):
        result = yield plan.task
        return result
    if isinstance(plan, Sequence):
        result = yield from _iter_plan(plan.first)
        return (yield from _iter_plan(plan.then(result)))
    if isinstance(plan, Repeat):
        result = None
        for _ in range(plan.count):
            result = yield from _iter_plan(plan.body)
        return result
    raise TypeError(f"not a task plan: {plan!r}")


class TaskRunner:
    """Drives a plan on a scheduler via its boundary hook."""

    def __init__(self, scheduler: Scheduler, plan: TaskPlan) -> None:
        self.scheduler = scheduler
        self._iter = _iter_plan(plan)
        self._seq = 0
        self._phase = "idle"
        self._task: Optional[Task] = None
        self._init_installed: list = []
        self._pending_result: Any = None
        self._done_result: Any = None
        self._done_seen = False
        self.finished = False
        self.result: Any = None
        scheduler.done_listeners.append(self._on_done)
        scheduler.boundary_hooks.append(self._on_boundary)

    def start(self) -> None:
        self._advance_plan(first=True)

    def detach(self) -> None:
        self.scheduler.done_listeners.remove(self._on_done)
        self.scheduler.boundary_hooks.remove(self._on_boundary)

    # -- internals -------------------------------------------------------

    def _group(self, phase: str) -> str:
        return f"task{self._seq}-{phase}"

    def _advance_plan(self, first: bool = False, result: Any = None) -> None:
        try:
            task = self._iter.send(None if first else result)
        except StopIteration as stop:
            self.finished = True
            self.result = stop.value
            self._phase = "idle"
            return
        self._seq += 1
        self._task = task
        self._done_seen = False
        self.scheduler.memory.reset()  # memory is task-local
        if task.init is not None:
            self._phase = "init"
            self._init_installed = self.scheduler.install(task.init, group=self._group("init"))
        else:
            self._install_body()

    def _install_body(self) -> None:
        self._phase = "body"
        self.scheduler.install(self._task.body, group=self._group("body"))

    def _on_done(self, group: str, topic: str, value: Any) -> None:
        if self._phase != "body" or group != self._group("body"):
            return
        if topic != self._task.done_type or self._done_seen:
            return  # later done events of a task instance are ignored
        self._done_seen = True
        self._pending_result = value
        for inst in self.scheduler.installed():
            if inst.group == group:
                inst.suspended = True

    def _on_boundary(self, scheduler: Scheduler) -> None:
        if self._phase == "init":
            if self._init_installed and all(i.fired >= 1 for i in self._init_installed):
                scheduler.uninstall_group(self._group("init"))
                self._install_body()
        elif self._phase == "body" and self._done_seen:
            scheduler.uninstall_group(self._group("body"))
            self._advance_plan(result=self._pending_result)


def run_plan(scheduler: Scheduler, plan: TaskPlan, duration: float) -> tuple[bool, Any]:
    """Run a plan to completion or the duration limit.

    Returns ``(completed, result)``; an incomplete plan is a timeout, not
    an error.
    """
    runner = TaskRunner(scheduler, plan)
    try:
        runner.start()
        steps = int(round(duration / scheduler.config.dt))
        for _ in range(steps):
            if runner.finished:
                break
            scheduler.step()
        return runner.finished, runner.result
    finally:
        runner.detach()


# ---------------------------------------------------------------------------
# Built-in tasks


@dataclass(frozen=True)
class Forward:
    distance_cm: float


@dataclass(frozen=True)
class Backward:
    distance_cm: float


def register_task_types(registry: Registry) -> None:
    registry.register(DONE_TOPIC, Kind.DONE)
    registry.register(TURN_TARGET, Kind.MEMORY, default=0.0)
    registry.register(MOVE_START, Kind.MEMORY, default=Position(0.0, 0.0))


def task_turn(side: Variant) -> Task:
    """Rotate in place by the given angle: left tag turns counter-clockwise,
    right tag clockwise."""
    delta = degrees_to_orientation(side.value)
    sign = 1.0 if side.is_left else -1.0

    def start_turn(current: float) -> float:
        return current + sign * delta

    def run_turn(target: float, current: float):
        diff = norm_orientation(target - current)
        if abs(diff) <= TURN_TOLERANCE:
            return Variant.right((Velocity(0.0, 0.0), None))
        return Variant.left(Velocity(0.0, orientation_to_angular_velocity(diff)))

    init = Function(in_event("orientation"), out_memory(TURN_TARGET), start_turn, name="turn-init")
    body = Function(
        in_product(in_memory(TURN_TARGET), in_event("orientation")),
        out_variant(
            out_event("velocity"),
            out_product(out_event("velocity"), out_done(DONE_TOPIC)),
        ),
        run_turn,
        name="turn",
    )
    return make_task(init, body)


def task_move(direction: Forward | Backward) -> Task:
    """Drive straight for a distance in centimeters, then stop."""
    if direction.distance_cm < 0:
        raise ValueError("distance must be non-negative")
    meters = direction.distance_cm / 100.0
    speed = VEL_LIN if isinstance(direction, Forward) else -VEL_LIN

    def start_move(position: Position) -> Position:
        return position

    def run_move(start: Position, position: Position):
        dx = position.x - start.x
        dy = position.y - start.y
        if (dx * dx + dy * dy) ** 0.5 >= meters:
            return Variant.right((Velocity(0.0, 0.0), None))
        return Variant.left(Velocity(speed, 0.0))

    init = Function(in_event("position"), out_memory(MOVE_START), start_move, name="move-init")
    body = Function(
        in_product(in_memory(MOVE_START), in_event("position")),
        out_variant(
            out_event("velocity"),
            out_product(out_event("velocity"), out_done(DONE_TOPIC)),
        ),
        run_move,
        name="move",
    )
    return make_task(init, body)


def task_draw_square(side_cm: float = 2.0) -> TaskPlan:
    """Four legs of drive-then-turn-left; closes back on the start pose."""
    leg = Sequence(
        Single(task_move(Forward(side_cm))),
        lambda _result: Single(task_turn(Variant.left(90.0))),
    )
    return Repeat(4, leg)
