"""Canonical text form for bundles and scripts.

Deterministic: two-space indent, sections ordered classes, objects,
statecharts, charts; members in declaration order; message modes and
temperatures always explicit. ``parse(serialize(b))`` is structurally
equal to ``b`` and serialization is idempotent.
"""

from __future__ import annotations

from .. import expr as E
from ..bundle import ModelBundle, ObjectDecl
from ..lsc import (
    AllBinding,
    Binder,
    ChartSpec,
    ConcreteBinding,
    Cond,
    Forbidden,
    Lifeline,
    Loop,
    Message,
    SymbolicBinding,
    Sync,
)
from ..objects import ClassDef
from ..script import AssertActive, AssertProp, InjectStep, Script, TickStep
from ..statechart import (
    Assign,
    AssignProp,
    Emit,
    EventTrigger,
    Raise,
    Region,
    StateNode,
    StatechartSpec,
    TimerTrigger,
    Transition,
)
from ..values import value_literal


def serialize_model(bundle: ModelBundle) -> str:
    out: list[str] = []
    for cls in bundle.classes:
        out.append(_class_text(cls))
    for obj in bundle.objects:
        out.append(_object_text(obj))
    for spec in bundle.machines:
        out.append(_statechart_text(spec))
    for chart in bundle.charts:
        out.append(_chart_text(chart))
    return "\n".join(out)


def serialize_script(script: Script) -> str:
    lines = []
    for step in script.steps:
        if isinstance(step, InjectStep):
            args = ""
            if step.args:
                args = "(" + ", ".join(value_literal(a) for a in step.args) + ")"
            lines.append(f"inject {step.src} {step.dst}.{step.event}{args};")
        elif isinstance(step, TickStep):
            lines.append(f"tick {_duration(step.ms)};")
        elif isinstance(step, AssertProp):
            lines.append(f"assert {step.obj}.{step.prop} == "
                         f"{value_literal(step.expected)};")
        elif isinstance(step, AssertActive):
            bang = "" if step.expected else "!"
            lines.append(f"assert {bang}active({step.owner}.{step.path});")
    return "".join(line + "\n" for line in lines)


def _duration(ms: int) -> str:
    if ms and ms % 1000 == 0:
        return f"{ms // 1000}s"
    return f"{ms}ms"


def _class_text(cls: ClassDef) -> str:
    lines = [f"class {cls.name} {{"]
    for prop in cls.properties:
        default = ""
        if prop.default is not None:
            default = f" = {value_literal(prop.default)}"
        lines.append(f"  prop {prop.name}: {prop.kind}{default};")
    for decl in cls.signals:
        lines.append(f"  signal {decl.name}/{decl.arity};")
    for decl in cls.methods:
        lines.append(f"  method {decl.name}/{decl.arity};")
    lines.append("}\n")
    return "\n".join(lines)


def _object_text(obj: ObjectDecl) -> str:
    if not obj.overrides:
        return f"object {obj.id} : {obj.class_name};\n"
    lines = [f"object {obj.id} : {obj.class_name} {{"]
    for name, value in obj.overrides.items():
        lines.append(f"  {name} = {value_literal(value)};")
    lines.append("}\n")
    return "\n".join(lines)


def _statechart_text(spec: StatechartSpec) -> str:
    lines = [f"statechart {spec.name} for {spec.owner_class} {{"]
    for var in spec.variables:
        default = ""
        if var.default is not None:
            default = f" = {value_literal(var.default)}"
        lines.append(f"  var {var.name}: {var.kind}{default};")
    for name, arity in spec.inputs:
        lines.append(f"  in {name}/{arity};")
    for name, arity, peer in spec.outputs:
        lines.append(f"  out {name}/{arity} -> {peer};")
    for region in spec.regions:
        lines.extend(_region_lines(region, 1))
    lines.append("}\n")
    return "\n".join(lines)


def _region_lines(region: Region, depth: int) -> list[str]:
    pad = "  " * depth
    lines = [f"{pad}region {region.name} {{"]
    if region.initial is not None:
        lines.append(f"{pad}  initial {region.initial};")
    for state in region.states:
        lines.extend(_state_lines(state, depth + 1))
    lines.append(f"{pad}}}")
    return lines


def _state_lines(state: StateNode, depth: int) -> list[str]:
    pad = "  " * depth
    if state.kind == "final":
        return [f"{pad}final {state.name};"]
    if state.kind == "choice":
        lines = [f"{pad}choice {state.name} {{"]
        for trans in state.transitions:
            lines.append(f"{pad}  {_choice_arm_text(trans)}")
        lines.append(f"{pad}}}")
        return lines
    header_members = (state.entry or state.exit or state.transitions
                      or state.regions)
    if not header_members:
        return [f"{pad}state {state.name};"]
    lines = [f"{pad}state {state.name} {{"]
    if state.entry:
        lines.append(f"{pad}  entry / {_actions_text(state.entry)};")
    if state.exit:
        lines.append(f"{pad}  exit / {_actions_text(state.exit)};")
    if state.kind == "compound":
        inner = state.regions[0]
        if inner.initial is not None:
            lines.append(f"{pad}  initial {inner.initial};")
        for trans in state.transitions:
            lines.append(f"{pad}  {_transition_text(trans)}")
        for child in inner.states:
            lines.extend(_state_lines(child, depth + 1))
    else:
        for trans in state.transitions:
            lines.append(f"{pad}  {_transition_text(trans)}")
        for region in state.regions:
            lines.extend(_region_lines(region, depth + 1))
    lines.append(f"{pad}}}")
    return lines


def _transition_text(trans: Transition) -> str:
    if isinstance(trans.trigger, TimerTrigger):
        head = f"on {trans.trigger.kind} {_duration(trans.trigger.ms)}"
    elif isinstance(trans.trigger, EventTrigger):
        head = f"on {trans.trigger.name}"
    else:
        head = "on ?"
    guard = f" [{E.to_source(trans.guard)}]" if trans.guard is not None else ""
    actions = f" / {_actions_text(trans.actions)}" if trans.actions else ""
    return f"{head}{guard} -> {trans.target}{actions};"


def _choice_arm_text(trans: Transition) -> str:
    guard = "[else]" if trans.is_else else f"[{E.to_source(trans.guard)}]"
    actions = f" / {_actions_text(trans.actions)}" if trans.actions else ""
    return f"{guard} -> {trans.target}{actions};"


def _actions_text(actions) -> str:
    parts = []
    for action in actions:
        if isinstance(action, Assign):
            parts.append(f"{action.name} = {E.to_source(action.value)}")
        elif isinstance(action, AssignProp):
            parts.append(f"self.{action.prop} = {E.to_source(action.value)}")
        elif isinstance(action, Raise):
            args = ", ".join(E.to_source(a) for a in action.args)
            parts.append(f"raise {action.name}({args})")
        elif isinstance(action, Emit):
            args = ", ".join(E.to_source(a) for a in action.args)
            parts.append(f"emit {action.target}.{action.name}({args})")
    return ", ".join(parts)


def _chart_text(chart: ChartSpec) -> str:
    lines = [f"chart {chart.name} {{"]
    for ll in chart.lifelines:
        lines.append(f"  {_lifeline_text(ll)}")
    for element in chart.body:
        lines.extend(_element_lines(element, 1))
    lines.append("}\n")
    return "\n".join(lines)


def _lifeline_text(ll: Lifeline) -> str:
    if isinstance(ll.binding, ConcreteBinding):
        binding = f" = {ll.binding.object_id}"
    elif isinstance(ll.binding, AllBinding):
        binding = " all"
    elif isinstance(ll.binding, SymbolicBinding) and ll.binding.expr is not None:
        binding = f" where {E.to_source(ll.binding.expr)}"
    else:
        binding = ""
    return f"lifeline {ll.name} : {ll.class_name}{binding};"


def _element_lines(element, depth: int) -> list[str]:
    pad = "  " * depth
    label = f"{element.label}: " if getattr(element, "label", None) else ""
    if isinstance(element, Message):
        args = ", ".join(_arg_text(a) for a in element.args)
        return [f"{pad}{label}{element.src} -> {element.dst} : "
                f"{element.name}({args}) {element.mode} {element.temp};"]
    if isinstance(element, Sync):
        return [f"{pad}{label}sync({', '.join(element.lifelines)});"]
    if isinstance(element, Cond):
        on = f"on {', '.join(element.lifelines)} " if element.lifelines else ""
        return [f"{pad}{label}cond {on}({E.to_source(element.expr)}) "
                f"{element.temp};"]
    if isinstance(element, Loop):
        if element.kind == "bound":
            head = str(element.bound)
        elif element.kind == "while":
            head = f"while ({E.to_source(element.expr)})"
        else:
            head = f"all {element.var}"
        lines = [f"{pad}{label}loop {head} {{"]
        for child in element.body:
            lines.extend(_element_lines(child, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(element, Forbidden):
        args = ""
        if element.args is not None:
            args = "(" + ", ".join(_arg_text(a) for a in element.args) + ")"
        return [f"{pad}{label}forbid {element.src} -> {element.dst} : "
                f"{element.name}{args} from {element.scope_from} "
                f"to {element.scope_to};"]
    raise TypeError(f"unknown chart element {element!r}")


def _arg_text(term) -> str:
    if isinstance(term, Binder):
        return f"?{term.name}"
    return E.to_source(term.expr)
