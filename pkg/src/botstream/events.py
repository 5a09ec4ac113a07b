"""Timestamped event streams and the combinator algebra built on them.

A stream is a pull-based, conceptually infinite sequence of ``(t, value)``
events with non-decreasing timestamps.  ``poll`` returns the next event if
one is available right now and ``None`` otherwise; a finite test stream
simply polls ``None`` forever once exhausted.  Streams never signal
termination -- ending a computation is the task engine's job.

Combinators assume events become available in global timestamp order
across their inputs, which the scheduler guarantees.  Wherever two sides
tie on a timestamp, the left-hand input wins, so every run is
deterministic.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

log = logging.getLogger(__name__)

# A queue holding this many undelivered events almost certainly means one
# consumer has stalled; warn once instead of silently growing.
QUEUE_HIGH_WATER = 100_000


@dataclass(frozen=True)
class TimedEvent:
    """One stream element: a payload stamped with simulated seconds."""

    t: float
    value: Any


@dataclass(frozen=True)
class Variant:
    """Origin-tagged value used by two-way merges and splits."""

    tag: str
    value: Any

    @staticmethod
    def left(value: Any) -> "Variant":
        return Variant("left", value)

    @staticmethod
    def right(value: Any) -> "Variant":
        return Variant("right", value)

    @property
    def is_left(self) -> bool:
        return self.tag == "left"

    @property
    def is_right(self) -> bool:
        return self.tag == "right"


class EventStream:
    """Single-consumer pull stream; duplicate with :func:`tee` if needed."""

    def poll(self) -> Optional[TimedEvent]:
        raise NotImplementedError

    def drain(self) -> list[TimedEvent]:
        """Pull until dry.  Mostly useful for finite streams in tests."""
        out = []
        while (ev := self.poll()) is not None:
            out.append(ev)
        return out


class ListStream(EventStream):
    """Feeds a fixed sequence of events, then polls ``None`` forever."""

    def __init__(self, events: Iterable) -> None:
        items = [e if isinstance(e, TimedEvent) else TimedEvent(*e) for e in events]
        for prev, cur in zip(items, items[1:]):
            if cur.t < prev.t:
                raise ValueError("stream timestamps must be non-decreasing")
        self._pending = deque(items)

    def poll(self) -> Optional[TimedEvent]:
        return self._pending.popleft() if self._pending else None


class QueueStream(EventStream):
    """FIFO stream fed externally (the bus delivers into these)."""

    def __init__(self, name: str = "") -> None:
        self.name = name
        self._queue: deque[TimedEvent] = deque()
        self._warned = False

    def push(self, event: TimedEvent) -> None:
        self._queue.append(event)
        if len(self._queue) > QUEUE_HIGH_WATER and not self._warned:
            self._warned = True
            log.warning("queue %r backed up beyond %d events", self.name, QUEUE_HIGH_WATER)

    def poll(self) -> Optional[TimedEvent]:
        return self._queue.popleft() if self._queue else None

    def __len__(self) -> int:
        return len(self._queue)


class _Peek:
    """One-slot lookahead so merge-style combinators can compare heads."""

    __slots__ = ("stream", "held")

    def __init__(self, stream: EventStream) -> None:
        self.stream = stream
        self.held: Optional[TimedEvent] = None

    def peek(self) -> Optional[TimedEvent]:
        if self.held is None:
            self.held = self.stream.poll()
        return self.held

    def take(self) -> TimedEvent:
        ev, self.held = self.held, None
        assert ev is not None
        return ev


class _Mapped(EventStream):
    def __init__(self, fn: Callable[[Any], Any], source: EventStream) -> None:
        self._fn = fn
        self._source = source

    def poll(self) -> Optional[TimedEvent]:
        ev = self._source.poll()
        if ev is None:
            return None
        return TimedEvent(ev.t, self._fn(ev.value))


def stream_map(fn: Callable[[Any], Any], stream: EventStream) -> EventStream:
    """Apply a pure function to every value, keeping timestamps."""
    return _Mapped(fn, stream)


class _Fused(EventStream):
    """Pairs two streams, emitting whenever both hold an unconsumed value.

    Each emission carries the latest unconsumed value of each side and the
    later of the two source timestamps.  Values overtaken on the faster
    side are dropped, never replayed, so the source indices consumed from
    each input are strictly increasing.
    """

    def __init__(self, left: EventStream, right: EventStream) -> None:
        self._left = _Peek(left)
        self._right = _Peek(right)
        self._pending_left: Optional[TimedEvent] = None
        self._pending_right: Optional[TimedEvent] = None

    def poll(self) -> Optional[TimedEvent]:
        while True:
            a = self._left.peek()
            b = self._right.peek()
            if a is None and b is None:
                return None
            if b is None or (a is not None and a.t <= b.t):
                self._pending_left = self._left.take()
            else:
                self._pending_right = self._right.take()
            if self._pending_left is not None and self._pending_right is not None:
                pa, pb = self._pending_left, self._pending_right
                self._pending_left = None
                self._pending_right = None
                return TimedEvent(max(pa.t, pb.t), (pa.value, pb.value))


def both_new(left: EventStream, right: EventStream) -> EventStream:
    """Fuse two streams into pairs of fresh values, subsampling the faster side."""
    return _Fused(left, right)


class _TeeShared:
    def __init__(self, source: EventStream) -> None:
        self.source = source
        self.buffers: tuple[deque, deque] = (deque(), deque())
        self._warned = False

    def pump(self, side: int) -> Optional[TimedEvent]:
        buf = self.buffers[side]
        if not buf:
            ev = self.source.poll()
            if ev is None:
                return None
            for b in self.buffers:
                b.append(ev)
            n = max(len(b) for b in self.buffers)
            if n > QUEUE_HIGH_WATER and not self._warned:
                self._warned = True
                log.warning("tee branch backed up beyond %d events", QUEUE_HIGH_WATER)
        return buf.popleft()


class _TeeBranch(EventStream):
    def __init__(self, shared: _TeeShared, side: int) -> None:
        self._shared = shared
        self._side = side

    def poll(self) -> Optional[TimedEvent]:
        return self._shared.pump(self._side)


def tee(stream: EventStream) -> tuple[EventStream, EventStream]:
    """Duplicate a stream; the branches may be consumed at different rates."""
    shared = _TeeShared(stream)
    return _TeeBranch(shared, 0), _TeeBranch(shared, 1)


class _SplitShared:
    def __init__(self, source: EventStream) -> None:
        self.source = source
        self.buffers: tuple[deque, deque] = (deque(), deque())

    def pump(self, side: int) -> Optional[TimedEvent]:
        buf = self.buffers[side]
        while not buf:
            ev = self.source.poll()
            if ev is None:
                return None
            variant = ev.value
            if not isinstance(variant, Variant):
                raise TypeError(f"split_variant needs Variant values, got {variant!r}")
            idx = 0 if variant.is_left else 1
            self.buffers[idx].append(TimedEvent(ev.t, variant.value))
        return buf.popleft()


class _SplitBranch(EventStream):
    def __init__(self, shared: _SplitShared, side: int) -> None:
        self._shared = shared
        self._side = side

    def poll(self) -> Optional[TimedEvent]:
        return self._shared.pump(self._side)


def split_variant(stream: EventStream) -> tuple[EventStream, EventStream]:
    """Route a stream of tagged values into a left stream and a right stream."""
    shared = _SplitShared(stream)
    return _SplitBranch(shared, 0), _SplitBranch(shared, 1)


class _Merged(EventStream):
    def __init__(self, left: EventStream, right: EventStream) -> None:
        self._left = _Peek(left)
        self._right = _Peek(right)

    def poll(self) -> Optional[TimedEvent]:
        a = self._left.peek()
        b = self._right.peek()
        if a is None and b is None:
            return None
        if b is None or (a is not None and a.t <= b.t):
            ev = self._left.take()
            return TimedEvent(ev.t, Variant.left(ev.value))
        ev = self._right.take()
        return TimedEvent(ev.t, Variant.right(ev.value))


def merge_variant(left: EventStream, right: EventStream) -> EventStream:
    """Interleave two streams in timestamp order, tagging values by origin.

    Equal timestamps resolve left-first.
    """
    return _Merged(left, right)


class _Present(EventStream):
    def __init__(self, source: EventStream) -> None:
        self._source = source

    def poll(self) -> Optional[TimedEvent]:
        while (ev := self._source.poll()) is not None:
            if ev.value is not None:
                return ev
        return None


def filter_optional(stream: EventStream) -> EventStream:
    """Drop ``None`` values, passing present ones through unchanged."""
    return _Present(stream)
