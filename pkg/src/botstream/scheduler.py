"""Deterministic cooperative scheduler.

Controllers behave as if concurrent, but execution is single-threaded
with a fixed firing order (installation order), so a given (program,
world, seed, step size, duration) always produces the identical event
trace.

Each ``step()`` advances simulated time by ``dt`` and, in order:
physics, synthesized edge events, scripted and test injections, periodic
sensor readings when due, then one firing attempt per installed
controller.  The very first ``step()`` call additionally runs a prologue
at t=0 (periodic readings plus firings) so traces start at time zero;
``run_steps(0)`` therefore produces no events at all.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .rng import SplitMix64
from .runtime import (
    Bus,
    Function,
    Installed,
    Kind,
    LiftError,
    MemoryStore,
    Parallel,
    Registry,
    _collect_outputs,
    _compile_input,
    _FireContext,
    _normalize_inputs,
    _NotifyingStream,
)
from .simulator import Simulator

log = logging.getLogger(__name__)

_TIME_EPS = 1e-9


@dataclass(frozen=True)
class SchedulerConfig:
    dt: float = 0.02
    sensor_rate: float = 10.0
    seed: int = 1

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if not self.sensor_rate > 0.0:
            raise ValueError("sensor_rate must be positive")
        if self.sensor_rate * self.dt > 1.0 + _TIME_EPS:
            raise ValueError("sensor_rate may not exceed one reading per step")


class Scheduler:
    def __init__(
        self,
        registry: Registry,
        sim: Optional[Simulator] = None,
        config: Optional[SchedulerConfig] = None,
        bus: Optional[Bus] = None,
        memory: Optional[MemoryStore] = None,
    ) -> None:
        self.registry = registry
        self.config = config or SchedulerConfig()
        self.bus = bus or Bus(registry)
        self.memory = memory or MemoryStore(registry)
        self.sim = sim
        if sim is not None:
            self.bus.command_hook = sim.apply_command
        self.rng = SplitMix64(self.config.seed)
        self.now = 0.0
        self._step_index = 0
        self._next_tick = 0  # periodic reading counter
        self._started = False
        self._controllers: list[Installed] = []
        self._injections: list[tuple[float, str, Any]] = []
        self._scripted = list(sim.world.scripted) if sim is not None else []
        self._script_index = 0
        self.done_listeners: list[Callable[[str, str, Any], None]] = []
        self.post_step_hooks: list[Callable[["Scheduler"], None]] = []
        self.boundary_hooks: list[Callable[["Scheduler"], None]] = []

    # -- program installation -------------------------------------------

    def install(self, spec, group: str = "main") -> list[Installed]:
        """Lift a controller spec; Parallel children install independently."""
        installed: list[Installed] = []
        for fn_spec in _flatten(spec):
            installed.append(self._install_function(fn_spec, group))
        self.bus.end_install_batch()
        return installed

    def _install_function(self, spec: Function, group: str) -> Installed:
        label = spec.name or getattr(spec.fn, "__name__", "controller")
        queues = []

        def notify(name: str, ev) -> None:
            self.bus.notify("sub", self.now, name, ev.value, label)

        def subscribe(name: str):
            queue = self.bus.subscribe(name)
            queues.append(queue)
            return _NotifyingStream(queue, notify)

        shape = _normalize_inputs(spec.inputs)
        stream, builder = _compile_input(shape, subscribe)
        if stream is None:
            # No gating leaf: fire at the periodic rate.
            tick_queue = self.bus.subscribe("seconds")
            queues.append(tick_queue)
            stream = _NotifyingStream(tick_queue, notify)

        from .runtime import InProduct

        if isinstance(shape, InProduct):
            call = lambda value: spec.fn(*value)
        else:
            call = lambda value: spec.fn(value)

        inst = Installed(spec, stream, builder, call, queues, group, label)
        self._controllers.append(inst)
        return inst

    def uninstall_group(self, group: str) -> None:
        for inst in self._controllers:
            if inst.group == group:
                for queue in inst.queues:
                    self.bus.unsubscribe(queue)
        self._controllers = [c for c in self._controllers if c.group != group]

    def installed(self) -> list[Installed]:
        return list(self._controllers)

    # -- event helpers ---------------------------------------------------

    def inject(self, topic: str, value: Any, at: float) -> None:
        """Schedule a test/support injection published at simulated time."""
        self._injections.append((at, topic, value))
        self._injections.sort(key=lambda item: item[0])

    def memory_read(self, name: str) -> Any:
        return self.memory.read(name)

    def memory_write(self, name: str, value: Any) -> None:
        self.memory.write(name, value)

    # -- the step loop ---------------------------------------------------

    def step(self) -> None:
        if not self._started:
            self._started = True
            self._emit_periodic()
            self._fire_all()
            self._boundary()
        edge_events = self.sim.step(self.config.dt) if self.sim is not None else []
        self._step_index += 1
        self.now = self._step_index * self.config.dt
        for topic, value in edge_events:
            self.bus.publish(topic, value, self.now, source="sim")
        self._run_scripted()
        self._run_injections()
        while self._next_tick / self.config.sensor_rate <= self.now + _TIME_EPS:
            self._emit_periodic()
            self._next_tick += 1
        self._fire_all()
        for hook in self.post_step_hooks:
            hook(self)
        self._boundary()

    def run_steps(self, n: int) -> None:
        for _ in range(n):
            self.step()

    def run(self, duration: float) -> None:
        self.run_steps(int(round(duration / self.config.dt)))

    def _boundary(self) -> None:
        for hook in self.boundary_hooks:
            hook(self)

    def _emit_periodic(self) -> None:
        if self.sim is not None:
            for topic, value in self.sim.periodic_readings():
                self.bus.publish(topic, value, self.now, source="sim")
        self.bus.publish("seconds", self.now, self.now, source="sim")

    def _run_scripted(self) -> None:
        while self._script_index < len(self._scripted):
            entry = self._scripted[self._script_index]
            if entry.t > self.now + _TIME_EPS:
                break
            self._script_index += 1
            for topic, value in self.sim.set_wheel(entry.side, entry.state):
                self.bus.publish(topic, value, self.now, source="sim")

    def _run_injections(self) -> None:
        while self._injections and self._injections[0][0] <= self.now + _TIME_EPS:
            _, topic, value = self._injections.pop(0)
            self.bus.publish(topic, value, self.now, source="inject")

    def _fire_all(self) -> None:
        for inst in list(self._controllers):
            if inst.suspended:
                continue
            self._fire(inst)

    def _fire(self, inst: Installed) -> bool:
        ev = inst.stream.poll()
        if ev is None:
            return False
        ctx = _FireContext(self.now, self.memory, lambda: self.rng.split())
        acts: list = []
        try:
            value = inst.builder(ev.value, ctx)
            result = inst.call(value)
            _collect_outputs(inst.spec.output, result, acts)
        except Exception:
            log.exception("controller %r step aborted", inst.label)
            return True
        inst.fired += 1
        writes = []
        for op, name, payload in acts:
            if op == "publish":
                self.bus.publish(name, payload, self.now, source=inst.label)
            elif op == "memory":
                writes.append((name, payload))
            else:  # done
                self.bus.publish(name, payload, self.now, source=inst.label)
                for listener in self.done_listeners:
                    listener(inst.group, name, payload)
        for name, payload in writes:
            self.memory.write(name, payload)
            self.bus.notify("mem", self.now, name, payload, inst.label)
        return True


def _flatten(spec) -> list[Function]:
    if isinstance(spec, Function):
        return [spec]
    if isinstance(spec, Parallel):
        out: list[Function] = []
        for child in spec.children:
            out.extend(_flatten(child))
        return out
    raise LiftError(f"not a controller spec: {spec!r}")
