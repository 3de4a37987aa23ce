"""Aggregation of all running chart copies.

Feeds every observed event to activation and advancement, computes the
global candidate set (executed, fully bound, unblocked) and the pending
hot obligations, and collects violations. All copies advance against one
shared object store; the coordinator owns the only instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import EvalError
from .events import EventInstance
from .lsc import ActiveChart, ChartSpec, Violation, try_activate
from .objects import ObjectStore


@dataclass
class PlayoutUpdate:
    activated: list[int] = field(default_factory=list)
    advanced: list[int] = field(default_factory=list)
    completed: list[int] = field(default_factory=list)
    aborted: list[int] = field(default_factory=list)  # includes silent cold aborts
    violations: list[Violation] = field(default_factory=list)  # hot/forbidden only
    errors: list[str] = field(default_factory=list)

    @property
    def touched(self) -> bool:
        return bool(self.activated or self.advanced or self.completed
                    or self.aborted or self.violations)


class Playout:
    """Registered chart specs plus every live copy, in activation order."""

    def __init__(self) -> None:
        self.specs: list[ChartSpec] = []
        self.copies: list[ActiveChart] = []
        self.violation_log: list[Violation] = []
        self.next_copy_id = 1

    def register(self, spec: ChartSpec) -> None:
        if any(s.name == spec.name for s in self.specs):
            raise ValueError(f"chart '{spec.name}' already registered")
        self.specs.append(spec)

    # -- event intake ----------------------------------------------------------

    def observe(self, event: EventInstance, store: ObjectStore) -> PlayoutUpdate:
        """Offer one event to every spec (activation) and running copy.

        Total: any event yields a well-formed update; expression failures
        abort the offending copy and are reported as errors, not raised.
        """
        update = PlayoutUpdate()
        pre_existing = list(self.copies)
        for spec in self.specs:
            try:
                outcomes = try_activate(spec, event, store)
            except EvalError as exc:
                update.errors.append(f"chart '{spec.name}' activation: {exc}")
                continue
            for copy, result in outcomes:
                if self._duplicate_running(copy):
                    continue
                copy.copy_id = self.next_copy_id
                self.next_copy_id += 1
                if result.violation is not None:
                    result.violation = replace(result.violation,
                                               copy_id=copy.copy_id)
                update.activated.append(copy.copy_id)
                self._settle(copy, result, update, activated=True)

        for copy in pre_existing:
            if copy.status != "running":
                continue
            try:
                result = copy.advance(event, store)
            except EvalError as exc:
                copy.status = "aborted"
                self.copies.remove(copy)
                update.aborted.append(copy.copy_id)
                update.errors.append(f"chart '{copy.spec.name}' copy "
                                     f"{copy.copy_id}: {exc}")
                continue
            if result.kind == "irrelevant":
                continue
            if result.kind in ("progressed", "completed"):
                update.advanced.append(copy.copy_id)
            self._settle(copy, result, update, activated=False)
        return update

    def _settle(self, copy: ActiveChart, result, update: PlayoutUpdate,
                activated: bool) -> None:
        if result.violation is not None:
            self.violation_log.append(result.violation)
            update.violations.append(result.violation)
        if result.kind == "completed" or copy.status == "completed":
            update.completed.append(copy.copy_id)
            self._drop(copy)
        elif result.is_violation or copy.status == "aborted":
            update.aborted.append(copy.copy_id)
            self._drop(copy)
        elif activated:
            self.copies.append(copy)

    def _drop(self, copy: ActiveChart) -> None:
        if copy in self.copies:
            self.copies.remove(copy)

    def _duplicate_running(self, fresh: ActiveChart) -> bool:
        """Suppress activation when a running copy already covers these bindings."""
        for copy in self.copies:
            if copy.spec is not fresh.spec:
                continue
            if all(copy.ll_bindings.get(k) == v
                   for k, v in fresh.ll_bindings.items()) \
                    and all(copy.var_bindings.get(k) == v
                            for k, v in fresh.var_bindings.items()):
                return True
        return False

    # -- queries ----------------------------------------------------------------

    def candidates(self, store: ObjectStore) -> list[EventInstance]:
        """Executed, fully bound, unblocked events, deterministically ordered.

        Order: copy activation sequence, then element position within the
        chart; identical events from several copies collapse to the first.
        An event is withheld when delivering it right now would produce a
        hot or forbidden violation in any copy, existing or newly activated.
        """
        seen = set()
        ordered: list[EventInstance] = []
        for copy in self.copies:
            for msg, mode, _temp, event in copy.enabled_messages(store):
                if mode != "exec" or event is None:
                    continue
                if event.key in seen:
                    continue
                seen.add(event.key)
                ordered.append(event)
        return [e for e in ordered if not self.would_violate(e, store)]

    def would_violate(self, event: EventInstance, store: ObjectStore) -> bool:
        """True if delivering ``event`` now would hot/forbidden-violate anywhere."""
        for copy in self.copies:
            if copy.is_blocked(event, store):
                return True
        for spec in self.specs:
            try:
                outcomes = try_activate(spec, event, store)
            except EvalError:
                continue
            for copy, result in outcomes:
                if result.blocks and not self._duplicate_running(copy):
                    return True
        return False

    def obligations(self, store: ObjectStore) -> list[tuple[ActiveChart, list]]:
        """Per copy, the enabled hot monitored messages still outstanding."""
        out = []
        for copy in self.copies:
            pending = copy.pending_hot_monitored(store)
            if pending:
                out.append((copy, pending))
        return out

    def running(self) -> list[ActiveChart]:
        return list(self.copies)

    # -- persistence ----------------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "next_copy_id": self.next_copy_id,
            "copies": [c.snapshot() for c in self.copies],
        }

    def restore(self, data: dict) -> None:
        by_name = {s.name: s for s in self.specs}
        self.next_copy_id = data["next_copy_id"]
        self.copies = [ActiveChart.from_snapshot(by_name[c["chart"]], c)
                       for c in data["copies"]]
