"""Typed pub/sub bus, pure-function lifting, and transactional memory.

Controllers are pure functions described by input and output *shapes*.
The input shape compiles onto the stream combinators: products fuse with
:func:`both_new`, variants merge with :func:`merge_variant`, and memory,
clock and random-seed leaves are sampled at firing time without gating.
A controller whose inputs gate on nothing fires on the periodic
``seconds`` topic instead, which is what gives source-like controllers
their fixed output rate.

Each firing runs as one transaction: the step function is applied, its
outputs are collected by walking the output shape, and only then are
publications delivered and memory writes committed.  A step that raises
publishes and commits nothing.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional

from .events import EventStream, QueueStream, TimedEvent, Variant, both_new, merge_variant

log = logging.getLogger(__name__)


class Kind(Enum):
    ROBOT_SENSOR = "robot-sensor"
    ROBOT_COMMAND = "robot-command"
    USER_EVENT = "user-event"
    MEMORY = "memory"
    CLOCK = "clock"
    RANDOM_SEED = "random-seed"
    DONE = "done"


# Robot topics survive task transitions: events published while no
# subscriber is installed are retained and handed to the next one.
_RETAINED_KINDS = frozenset({Kind.ROBOT_SENSOR})


class RegistrationError(ValueError):
    """Bad event-type registration or lookup."""


class LiftError(ValueError):
    """A controller shape cannot be compiled or does not match its value."""


@dataclass(frozen=True)
class EventType:
    name: str
    kind: Kind
    default: Any = None


class Registry:
    """Every event type used anywhere is registered here exactly once."""

    def __init__(self) -> None:
        self._types: dict[str, EventType] = {}

    def register(self, name: str, kind: Kind, default: Any = None) -> EventType:
        if name in self._types:
            raise RegistrationError(f"event type {name!r} already registered")
        if kind is Kind.MEMORY and default is None:
            raise RegistrationError(f"memory type {name!r} needs a default value")
        et = EventType(name, kind, default)
        self._types[name] = et
        return et

    def __getitem__(self, name: str) -> EventType:
        try:
            return self._types[name]
        except KeyError:
            raise RegistrationError(f"event type {name!r} is not registered") from None

    def __contains__(self, name: str) -> bool:
        return name in self._types

    def names(self) -> list[str]:
        return list(self._types)


def standard_registry() -> Registry:
    """A registry with the robot topic vocabulary pre-registered."""
    reg = Registry()
    for name in ("bumper", "cliff", "wheel", "position", "orientation"):
        reg.register(name, Kind.ROBOT_SENSOR)
    for name in ("velocity", "led1", "led2", "sound"):
        reg.register(name, Kind.ROBOT_COMMAND)
    reg.register("seconds", Kind.CLOCK)
    return reg


class Bus:
    """Delivers every published value to every queue subscribed to its type."""

    def __init__(self, registry: Registry) -> None:
        self.registry = registry
        self._queues: dict[str, list[QueueStream]] = defaultdict(list)
        self._retained: dict[str, list[TimedEvent]] = defaultdict(list)
        self._seeded: set[str] = set()
        self.sinks: list[Callable] = []  # fn(direction, t, topic, value, source)
        self.command_hook: Optional[Callable[[Any], None]] = None

    def subscribe(self, name: str) -> QueueStream:
        et = self.registry[name]
        queue = QueueStream(name)
        if et.kind in _RETAINED_KINDS and self._retained.get(name):
            for ev in self._retained[name]:
                queue.push(ev)
            self._seeded.add(name)
        self._queues[name].append(queue)
        return queue

    def unsubscribe(self, queue: QueueStream) -> None:
        subs = self._queues.get(queue.name)
        if subs and queue in subs:
            subs.remove(queue)

    def end_install_batch(self) -> None:
        """Drop retained events that were handed to new subscribers."""
        for name in self._seeded:
            self._retained[name].clear()
        self._seeded.clear()

    def publish(self, name: str, value: Any, t: float, source: str = "") -> None:
        et = self.registry[name]
        subs = self._queues.get(name)
        ev = TimedEvent(t, value)
        if subs:
            for queue in subs:
                queue.push(ev)
        elif et.kind in _RETAINED_KINDS:
            self._retained[name].append(ev)
        self.notify("pub", t, name, value, source)
        if self.command_hook is not None and et.kind is Kind.ROBOT_COMMAND and source != "sim":
            self.command_hook(value)

    def notify(self, direction: str, t: float, name: str, value: Any, source: str) -> None:
        """Report a record to every sink: direction is pub, sub, or mem."""
        for sink in self.sinks:
            sink(direction, t, name, value, source)


class MemoryStore:
    """Type-keyed cells with registered defaults; commits happen per firing."""

    def __init__(self, registry: Registry) -> None:
        self.registry = registry
        self._cells: dict[str, Any] = {}

    def _check(self, name: str) -> EventType:
        et = self.registry[name]
        if et.kind is not Kind.MEMORY:
            raise RegistrationError(f"event type {name!r} is not a memory type")
        return et

    def read(self, name: str) -> Any:
        et = self._check(name)
        return self._cells.get(name, et.default)

    def write(self, name: str, value: Any) -> None:
        self._check(name)
        self._cells[name] = value

    def reset(self) -> None:
        self._cells.clear()


# ---------------------------------------------------------------------------
# Controller shapes


@dataclass(frozen=True)
class InEvent:
    name: str


@dataclass(frozen=True)
class InProduct:
    parts: tuple


@dataclass(frozen=True)
class InVariant:
    left: Any
    right: Any


@dataclass(frozen=True)
class InMemory:
    name: str


@dataclass(frozen=True)
class InClock:
    pass


@dataclass(frozen=True)
class InSeed:
    pass


def in_event(name: str) -> InEvent:
    return InEvent(name)


def in_product(*parts) -> InProduct:
    return InProduct(parts)


def in_variant(left, right) -> InVariant:
    return InVariant(left, right)


def in_memory(name: str) -> InMemory:
    return InMemory(name)


def in_clock() -> InClock:
    return InClock()


def in_seed() -> InSeed:
    return InSeed()


@dataclass(frozen=True)
class OutEvent:
    name: str


@dataclass(frozen=True)
class OutProduct:
    parts: tuple


@dataclass(frozen=True)
class OutVariant:
    left: Any
    right: Any


@dataclass(frozen=True)
class OutOptional:
    inner: Any


@dataclass(frozen=True)
class OutMemory:
    name: str


@dataclass(frozen=True)
class OutDone:
    name: str


def out_event(name: str) -> OutEvent:
    return OutEvent(name)


def out_product(*parts) -> OutProduct:
    return OutProduct(parts)


def out_variant(left, right) -> OutVariant:
    return OutVariant(left, right)


def out_optional(inner) -> OutOptional:
    return OutOptional(inner)


def out_memory(name: str) -> OutMemory:
    return OutMemory(name)


def out_done(name: str) -> OutDone:
    return OutDone(name)


@dataclass(frozen=True)
class Function:
    """One reactive node: a pure step function between two shapes.

    ``inputs`` may be a single shape, a tuple of shapes (an implicit
    product, passed to ``fn`` as separate arguments), or ``()`` for a
    source that fires at the periodic rate.
    """

    inputs: Any
    output: Any
    fn: Callable
    name: str = ""


@dataclass(frozen=True)
class Parallel:
    children: tuple


def parallel(*specs) -> Parallel:
    return Parallel(specs)


def done_leaves(shape) -> list[str]:
    """Names of the done leaves in an output shape."""
    found: list[str] = []

    def walk(s) -> None:
        if isinstance(s, OutDone):
            found.append(s.name)
        elif isinstance(s, OutProduct):
            for p in s.parts:
                walk(p)
        elif isinstance(s, OutVariant):
            walk(s.left)
            walk(s.right)
        elif isinstance(s, OutOptional):
            walk(s.inner)

    walk(shape)
    return found


# ---------------------------------------------------------------------------
# Lifting


class _FireContext:
    """Per-firing sampling context for non-gating input leaves."""

    __slots__ = ("now", "memory", "draw_seed")

    def __init__(self, now, memory, draw_seed):
        self.now = now
        self.memory = memory
        self.draw_seed = draw_seed


class _NotifyingStream(EventStream):
    """Leaf queue wrapper that reports each consumed event to the bus."""

    def __init__(self, queue: QueueStream, notify: Callable[[str, TimedEvent], None]) -> None:
        self._queue = queue
        self._notify = notify

    def poll(self) -> Optional[TimedEvent]:
        ev = self._queue.poll()
        if ev is not None:
            self._notify(self._queue.name, ev)
        return ev


def _compile_input(shape, subscribe) -> tuple[Optional[EventStream], Callable]:
    """Compile an input shape to its gating stream and a value builder.

    ``builder(stream_value, ctx)`` reconstitutes the full input value;
    for shapes without gating leaves the stream is ``None`` and the
    builder ignores its first argument.
    """
    if isinstance(shape, InEvent):
        return subscribe(shape.name), lambda v, ctx: v
    if isinstance(shape, InMemory):
        name = shape.name
        return None, lambda v, ctx, n=name: ctx.memory.read(n)
    if isinstance(shape, InClock):
        return None, lambda v, ctx: ctx.now
    if isinstance(shape, InSeed):
        return None, lambda v, ctx: ctx.draw_seed()
    if isinstance(shape, InProduct):
        parts = [_compile_input(p, subscribe) for p in shape.parts]
        gating = [i for i, (s, _) in enumerate(parts) if s is not None]
        if not gating:
            return None, lambda v, ctx: tuple(b(None, ctx) for _, b in parts)
        stream = parts[gating[0]][0]
        for i in gating[1:]:
            stream = both_new(stream, parts[i][0])

        def build(v, ctx, parts=parts, gating=gating):
            flat = _unfold(v, len(gating))
            values = {}
            for slot, i in enumerate(gating):
                values[i] = flat[slot]
            return tuple(
                b(values[i] if i in values else None, ctx)
                for i, (_, b) in enumerate(parts)
            )

        return stream, build
    if isinstance(shape, InVariant):
        ls, lb = _compile_input(shape.left, subscribe)
        rs, rb = _compile_input(shape.right, subscribe)
        if ls is None or rs is None:
            raise LiftError("variant input branches must contain an event leaf")
        stream = merge_variant(ls, rs)

        def build(v, ctx, lb=lb, rb=rb):
            if v.is_left:
                return Variant.left(lb(v.value, ctx))
            return Variant.right(rb(v.value, ctx))

        return stream, build
    raise LiftError(f"unknown input shape: {shape!r}")


def _unfold(value, n: int) -> list:
    """Flatten the left-nested pairs produced by folded fusion."""
    out = [value]
    for _ in range(n - 1):
        head = out.pop(0)
        out[0:0] = [head[0], head[1]]
    return out


def _collect_outputs(shape, value, acts: list) -> None:
    """Walk shape and value together, appending (op, name, payload) actions."""
    if isinstance(shape, OutEvent):
        acts.append(("publish", shape.name, value))
    elif isinstance(shape, OutMemory):
        acts.append(("memory", shape.name, value))
    elif isinstance(shape, OutDone):
        acts.append(("done", shape.name, value))
    elif isinstance(shape, OutOptional):
        if value is not None:
            _collect_outputs(shape.inner, value, acts)
    elif isinstance(shape, OutProduct):
        if not isinstance(value, tuple) or len(value) != len(shape.parts):
            raise LiftError(f"output {value!r} does not match product shape {shape!r}")
        for part, item in zip(shape.parts, value):
            _collect_outputs(part, item, acts)
    elif isinstance(shape, OutVariant):
        if not isinstance(value, Variant):
            raise LiftError(f"output {value!r} does not match variant shape {shape!r}")
        _collect_outputs(shape.left if value.is_left else shape.right, value.value, acts)
    else:
        raise LiftError(f"unknown output shape: {shape!r}")


class Installed:
    """One lifted controller, live on the scheduler."""

    def __init__(self, spec: Function, stream, builder, call, queues, group: str, label: str):
        self.spec = spec
        self.stream = stream
        self.builder = builder
        self.call = call
        self.queues = queues
        self.group = group
        self.label = label
        self.fired = 0
        self.suspended = False

    def __repr__(self) -> str:
        return f"<Installed {self.label} group={self.group} fired={self.fired}>"


def _normalize_inputs(inputs):
    if inputs is None:
        return InProduct(())
    if isinstance(inputs, tuple):
        return InProduct(inputs)
    return inputs
