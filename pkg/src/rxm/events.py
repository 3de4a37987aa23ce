"""Concrete event instances exchanged between objects.

An event is one directed communication: source, target, name, argument
values, and an origin tag saying who produced it (the environment, a
machine, a chart copy, or a timer). Signals and method calls are not
distinguished at runtime; both become events.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .values import Value

ENV = "env"


def sc_origin(owner_id: str) -> str:
    return f"sc:{owner_id}"


def lsc_origin(chart: str, copy_id: int) -> str:
    return f"lsc:{chart}#{copy_id}"


def timer_origin(owner_id: str) -> str:
    return f"timer:{owner_id}"


@dataclass(frozen=True)
class EventInstance:
    src: str  # "env" or an object id
    dst: str  # an object id
    name: str
    args: tuple[Value, ...] = ()
    origin: str = ENV

    @property
    def key(self):
        """Identity used for candidate de-duplication (origin excluded)."""
        return (self.src, self.dst, self.name, self.args)

    def with_origin(self, origin: str) -> "EventInstance":
        return replace(self, origin=origin)

    def describe(self) -> str:
        args = ", ".join(repr(a) for a in self.args)
        return f"{self.src} -> {self.dst}: {self.name}({args})"
