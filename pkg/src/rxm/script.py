"""Run scripts: the batch driver steps (inject, tick, assert)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .values import Value


@dataclass
class InjectStep:
    src: str  # "env" or an object id
    dst: str
    event: str
    args: list[Value] = field(default_factory=list)


@dataclass
class TickStep:
    ms: int


@dataclass
class AssertProp:
    obj: str
    prop: str
    expected: Value


@dataclass
class AssertActive:
    owner: str
    path: str
    expected: bool = True


Step = Union[InjectStep, TickStep, AssertProp, AssertActive]


@dataclass
class Script:
    steps: list[Step] = field(default_factory=list)


@dataclass
class AssertionOutcome:
    step: Step
    ok: bool
    actual: object

    def describe(self) -> str:
        if isinstance(self.step, AssertProp):
            want = f"{self.step.obj}.{self.step.prop} == {self.step.expected!r}"
        else:
            want = f"active({self.step.owner}.{self.step.path}) is {self.step.expected}"
        status = "pass" if self.ok else f"FAIL (actual: {self.actual!r})"
        return f"assert {want}: {status}"
