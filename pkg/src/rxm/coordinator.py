"""The integration runtime: one clock, one broker, one trace.

A super-step is the full cascade following one environment event or
timer batch: machine-emitted events drain first (FIFO), then unblocked
chart candidates fire one at a time, until quiescence. Machine-origin
and timer-origin events are delivered unconditionally; chart-origin
events are selected only when no copy would hot/forbidden-violate.

The trace is newline-delimited JSON with a fixed key order, suitable for
byte-exact golden comparisons. Two pieces of per-entry metadata stay out
of the serialized form: the broker queue depth at selection time and a
consumed-by-anybody flag.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .bundle import ModelBundle
from .errors import InjectError, ModelError, RunError, RxmError
from .events import ENV, EventInstance
from .lsc import ChartSpec, Violation
from .playout import Playout
from .script import (
    AssertActive,
    AssertionOutcome,
    AssertProp,
    InjectStep,
    Script,
    TickStep,
)
from .statechart import EvalEnv, Machine, StatechartSpec
from .values import Value, value_from_json, value_to_json

DEFAULT_STEP_BOUND = 10000


@dataclass
class TraceEntry:
    seq: int
    clock: int
    event: EventInstance
    violations: list[Violation] = field(default_factory=list)
    quiescent: bool = False
    queue_depth: int = 0  # broker depth at selection; not serialized
    consumed: bool = False  # anyone reacted; not serialized

    def to_json_obj(self) -> dict:
        return {
            "seq": self.seq,
            "clock": self.clock,
            "origin": self.event.origin,
            "src": self.event.src,
            "dst": self.event.dst,
            "event": self.event.name,
            "args": [value_to_json(a) for a in self.event.args],
            "violations": [
                {"chart": v.chart, "copy": v.copy_id, "kind": v.kind}
                for v in self.violations
            ],
            "quiescent": self.quiescent,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))


@dataclass
class RunResult:
    entries: list[TraceEntry]
    assertions: list[AssertionOutcome]
    errors: list[str]
    violations: list[Violation]
    halted: bool = False

    @property
    def assertions_ok(self) -> bool:
        return all(a.ok for a in self.assertions)

    def trace_text(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.entries)


class SystemClock:
    """Monotone logical clock in ms; wall mode exists for interactive use."""

    def __init__(self, mode: str = "logical"):
        self.now = 0
        self.mode = mode

    def advance_to(self, t: int) -> None:
        if t < self.now:
            raise RunError(f"clock cannot go backwards ({self.now} -> {t})")
        self.now = t


class Coordinator:
    """Owns all engine state; callers interact one command at a time."""

    def __init__(self, bundle: ModelBundle, *, strict: bool = False,
                 step_bound: int = DEFAULT_STEP_BOUND, clock_mode: str = "logical"):
        diags = bundle.validate()
        if diags:
            raise ModelError("invalid model: " + "; ".join(diags))
        self.bundle = bundle
        self.store = bundle.build_store()
        self.strict = strict
        self.step_bound = step_bound
        self.clock = SystemClock(clock_mode)
        self.machines: dict[str, Machine] = {}
        self.playout = Playout()
        self.env = EvalEnv(self.store, self.machines.get)
        self._queue: deque[EventInstance] = deque()
        self.trace: list[TraceEntry] = []
        self.errors: list[str] = []
        self.seq = 0
        self.started = False
        self.halted = False
        for spec in bundle.machines:
            for obj in self.store.instances_of(spec.owner_class):
                self.register("machine", (spec, obj.id))
        for chart in bundle.charts:
            self.register("chart", chart)

    # -- registry ------------------------------------------------------------

    def register(self, kind: str, item) -> None:
        """Attach a machine (spec, owner id) or a chart spec before the run."""
        if self.started:
            raise RunError("registration is only allowed before the run starts")
        if kind == "machine":
            spec, owner_id = item
            if not isinstance(spec, StatechartSpec):
                raise ModelError("machine registration needs a StatechartSpec")
            if owner_id in self.machines:
                raise ModelError(f"duplicate machine registration for '{owner_id}'")
            if not self.store.has_object(owner_id):
                raise ModelError(f"machine owner '{owner_id}' is unknown")
            owner = self.store.get_object(owner_id)
            if owner.class_def.name != spec.owner_class:
                raise ModelError(f"class-mismatch: '{owner_id}' is "
                                 f"{owner.class_def.name}")
            self.machines[owner_id] = Machine(spec, owner_id)
        elif kind == "chart":
            if not isinstance(item, ChartSpec):
                raise ModelError("chart registration needs a ChartSpec")
            self.playout.register(item)
        else:
            raise ModelError(f"unknown registration kind '{kind}'")

    # -- lifecycle -------------------------------------------------------------

    def start(self) -> list[TraceEntry]:
        """Initialize every machine; drain any entry-action emissions."""
        if self.started:
            raise RunError("already started")
        self.started = True
        for machine in self.machines.values():
            result = machine.initialize(self.clock.now, self.env)
            self._queue.extend(result.emitted)
        if self._queue:
            return self._superstep()
        return []

    # -- command surface ---------------------------------------------------------

    def inject(self, src: str, dst: str, name: str,
               args: tuple[Value, ...] = ()) -> list[TraceEntry]:
        """One environment event, then a full super-step."""
        self._require_running()
        if src != ENV and not self.store.has_object(src):
            raise InjectError(f"unknown source '{src}'")
        if not self.store.has_object(dst):
            raise InjectError(f"unknown target '{dst}'")
        cls = self.store.get_object(dst).class_def
        arity = cls.event_arity(name)
        if arity is None:
            raise InjectError(f"'{cls.name}' does not declare event '{name}'")
        if arity != len(args):
            raise InjectError(f"event '{name}' expects {arity} args, "
                              f"got {len(args)}")
        event = EventInstance(src, dst, name, tuple(args), ENV)
        return self._superstep(first=event)

    def tick(self, delta: int) -> list[TraceEntry]:
        """Advance the logical clock, stopping at every timer due-time."""
        self._require_running()
        if delta < 0:
            raise RunError("tick delta must be non-negative")
        if self.clock.mode != "logical":
            raise RunError("tick is only available on the logical clock")
        target = self.clock.now + delta
        entries: list[TraceEntry] = []
        while True:
            dues = [m.next_due() for m in self.machines.values()
                    if m.next_due() is not None]
            dues = [d for d in dues if d <= target]
            if not dues:
                break
            stop = min(dues)
            self.clock.advance_to(stop)
            for machine in self.machines.values():
                self._queue.extend(machine.due_timers(stop))
            entries.extend(self._superstep())
            if self.halted:
                break
        if not self.halted:
            self.clock.advance_to(target)
        return entries

    def probe_deliver(self, event: EventInstance) -> list[TraceEntry]:
        """Diagnostic: force one event through, bypassing selection."""
        self._require_running()
        return self._superstep(first=event)

    def _require_running(self) -> None:
        if not self.started:
            raise RunError("system not started")
        if self.halted:
            raise RunError("run halted on a strict violation")

    # -- super-step ---------------------------------------------------------------

    def _superstep(self, first: EventInstance | None = None) -> list[TraceEntry]:
        entries: list[TraceEntry] = []
        budget = self.step_bound
        if first is not None:
            self._deliver(first, len(self._queue), entries)
            budget -= 1
        quiescent = False
        while not self.halted:
            if budget <= 0:
                self.errors.append(
                    f"step-bound-exceeded: super-step stopped after "
                    f"{self.step_bound} events at clock {self.clock.now}")
                self._queue.clear()
                break
            selected = self.select_next()
            if selected is None:
                quiescent = True
                break
            event, depth = selected
            self._deliver(event, depth, entries)
            budget -= 1
        if quiescent and entries:
            entries[-1].quiescent = True
        return entries

    def select_next(self) -> tuple[EventInstance, int] | None:
        """Next event to deliver: the broker queue head (machine and timer
        events, FIFO) wins over chart candidates; None means quiescent.
        Returns the event with the queue depth at selection time."""
        if self._queue:
            depth = len(self._queue)
            return self._queue.popleft(), depth
        candidates = self.playout.candidates(self.store)
        if candidates:
            return candidates[0], 0
        return None

    def _deliver(self, event: EventInstance, queue_depth: int,
                 entries: list[TraceEntry]) -> TraceEntry:
        """Machine first, then chart observation, then setter application.

        Setter events write the store only after the charts observed the
        event, so chart expressions evaluate against the pre-event state
        (the same state the candidate was computed from)."""
        self.seq += 1
        consumed = False
        machine = self.machines.get(event.dst)
        if machine is not None:
            try:
                result = machine.dispatch(event, self.clock.now, self.env)
                self._queue.extend(result.emitted)
                consumed = consumed or result.consumed
            except RxmError as exc:
                self.errors.append(f"machine '{event.dst}': {exc}")
        update = self.playout.observe(event, self.store)
        consumed = consumed or self._apply_setter(event)
        self.errors.extend(update.errors)
        entry = TraceEntry(self.seq, self.clock.now, event,
                           list(update.violations), False, queue_depth,
                           consumed or update.touched)
        self.trace.append(entry)
        entries.append(entry)
        if self.strict and update.violations:
            self.halted = True
            self.errors.append(
                f"strict: halting on {update.violations[0].kind} violation "
                f"of chart '{update.violations[0].chart}'")
        return entry

    def _apply_setter(self, event: EventInstance) -> bool:
        """Property-setter events write the store before anyone reacts."""
        cls = self.store.get_object(event.dst).class_def
        prop = cls.setter_property(event.name)
        if prop is None:
            return False
        if len(event.args) != 1:
            self.errors.append(f"setter '{event.name}' expects 1 arg")
            return False
        try:
            self.store.write(event.dst, prop.name, event.args[0])
        except ModelError as exc:
            self.errors.append(str(exc))
            return False
        return True

    # -- scripts ---------------------------------------------------------------------

    def run_script(self, script: Script) -> RunResult:
        """Execute a script on a fresh system; assertion failures never stop it."""
        if self.seq or self.started:
            raise RunError("run_script needs a fresh system")
        self.start()
        assertions: list[AssertionOutcome] = []
        for step in script.steps:
            if self.halted:
                break
            if isinstance(step, InjectStep):
                try:
                    self.inject(step.src, step.dst, step.event, tuple(step.args))
                except (InjectError, RunError) as exc:
                    self.errors.append(str(exc))
            elif isinstance(step, TickStep):
                self.tick(step.ms)
            elif isinstance(step, AssertProp):
                try:
                    actual = self.store.read(step.obj, step.prop)
                except ModelError as exc:
                    assertions.append(AssertionOutcome(step, False, str(exc)))
                    continue
                assertions.append(
                    AssertionOutcome(step, actual == step.expected, actual))
            elif isinstance(step, AssertActive):
                machine = self.machines.get(step.owner)
                if machine is None:
                    assertions.append(AssertionOutcome(step, False, "no machine"))
                    continue
                try:
                    actual = machine.is_active(step.path)
                except ModelError as exc:
                    assertions.append(AssertionOutcome(step, False, str(exc)))
                    continue
                assertions.append(
                    AssertionOutcome(step, actual == step.expected, actual))
        return RunResult(list(self.trace), assertions, list(self.errors),
                         list(self.playout.violation_log), self.halted)

    # -- snapshots ---------------------------------------------------------------------

    def snapshot(self) -> dict:
        """Complete serializable view; enough to resume an identical run."""
        obligations = []
        for copy, pending in self.playout.obligations(self.store):
            obligations.append({
                "chart": copy.spec.name,
                "copy": copy.copy_id,
                "messages": [m.name for m, _ in pending],
            })
        return {
            "clock": self.clock.now,
            "seq": self.seq,
            "started": self.started,
            "halted": self.halted,
            "store": {oid: {k: value_to_json(v) for k, v in obj.values.items()}
                      for oid, obj in self.store.objects.items()},
            "machines": {owner: m.snapshot() for owner, m in self.machines.items()},
            "playout": self.playout.snapshot(),
            "queue": [self._event_to_json(e) for e in self._queue],
            "obligations": obligations,
            "classes": {
                cls.name: {
                    "props": {p.name: p.kind for p in cls.properties},
                    "signals": [[d.name, d.arity] for d in cls.signals],
                    "methods": [[d.name, d.arity] for d in cls.methods],
                    "setters": [["set_" + p.name, 1] for p in cls.properties],
                } for cls in self.store.classes.values()
            },
            "objects": {oid: obj.class_def.name
                        for oid, obj in self.store.objects.items()},
        }

    @staticmethod
    def _event_to_json(event: EventInstance) -> dict:
        return {"src": event.src, "dst": event.dst, "name": event.name,
                "args": [value_to_json(a) for a in event.args],
                "origin": event.origin}

    @staticmethod
    def _event_from_json(data: dict) -> EventInstance:
        return EventInstance(data["src"], data["dst"], data["name"],
                             tuple(value_from_json(a) for a in data["args"]),
                             data["origin"])

    @classmethod
    def from_snapshot(cls, bundle: ModelBundle, snap: dict, *,
                      strict: bool = False,
                      step_bound: int = DEFAULT_STEP_BOUND) -> "Coordinator":
        coord = cls(bundle, strict=strict, step_bound=step_bound)
        coord.clock.now = snap["clock"]
        coord.seq = snap["seq"]
        coord.started = snap["started"]
        coord.halted = snap["halted"]
        for oid, values in snap["store"].items():
            obj = coord.store.get_object(oid)
            for name, value in values.items():
                obj.set(name, value_from_json(value))
        for owner, data in snap["machines"].items():
            coord.machines[owner].restore(data)
        coord.playout.restore(snap["playout"])
        coord._queue = deque(cls._event_from_json(e) for e in snap["queue"])
        return coord
