"""Scenario charts: definitions, per-copy cut tracking, and unification.

A chart is an ordered body of elements over declared lifelines. Messages
carry an execution mode (``exec``: triggered by the engine when enabled,
``mon``: waited for) and a temperature (``hot``: must occur once enabled,
``cold``: may occur). Sync bars order lifelines, conditions gate
progress, loops repeat a sub-block (bounded, while, or once per instance
of a class), and forbidden patterns outlaw an event between two labeled
points.

A running copy tracks one location per lifeline (the cut). Copies are
plain values: cloning one is cheap, which is how blocking checks simulate
an advance without committing it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from . import expr as E
from .errors import EvalError, ModelError
from .events import ENV, EventInstance, lsc_origin
from .objects import ClassDef, ObjectStore
from .values import Value, value_from_json, value_to_json

# ---------------------------------------------------------------------------
# Spec types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConcreteBinding:
    object_id: str


@dataclass(frozen=True)
class SymbolicBinding:
    expr: Optional[E.Expr] = None  # None: any instance of the class


@dataclass(frozen=True)
class AllBinding:
    """Multiplicity: elements iterate over every instance of the class."""


Binding = Union[ConcreteBinding, SymbolicBinding, AllBinding]


@dataclass
class Lifeline:
    name: str
    class_name: str
    binding: Binding


@dataclass(frozen=True)
class Binder:
    """Free chart variable in a message argument; binds on unification."""

    name: str


@dataclass(frozen=True)
class ExprTerm:
    expr: E.Expr


ArgTerm = Union[Binder, ExprTerm]


@dataclass
class Message:
    src: str  # lifeline name or "env"
    dst: str
    name: str
    args: list[ArgTerm] = field(default_factory=list)
    mode: str = "mon"  # "exec" | "mon"
    temp: str = "cold"  # "hot" | "cold"
    label: str | None = None


@dataclass
class Sync:
    lifelines: list[str]
    label: str | None = None


@dataclass
class Cond:
    lifelines: list[str]
    expr: E.Expr | None = None
    temp: str = "cold"
    label: str | None = None


@dataclass
class Loop:
    kind: str  # "bound" | "while" | "all"
    body: list["Element"] = field(default_factory=list)
    bound: int | None = None
    expr: E.Expr | None = None
    var: str | None = None  # the all-lifeline iterated over
    label: str | None = None


@dataclass
class Forbidden:
    src: str
    dst: str
    name: str
    args: list[ArgTerm] | None = None  # None: any arguments
    scope_from: str = "start"  # label, or "start"
    scope_to: str = "end"  # label, or "end"
    label: str | None = None


Element = Union[Message, Sync, Cond, Loop, Forbidden]


def element_lifelines(element: Element) -> set[str]:
    if isinstance(element, Message):
        return {element.src, element.dst} - {ENV}
    if isinstance(element, Sync):
        return set(element.lifelines)
    if isinstance(element, Cond):
        return set(element.lifelines)
    if isinstance(element, Loop):
        span = set()
        for child in element.body:
            span |= element_lifelines(child)
        if element.var:
            span.add(element.var)
        return span
    return set()  # Forbidden patterns have no locations


@dataclass
class _BlockInfo:
    elements: list[Element]
    proj: dict[str, list[int]]  # lifeline -> indices of its elements, in order
    proj_index: dict[int, dict[str, int]]  # element idx -> lifeline -> slot


BlockKey = Union[str, int]  # "top" or the top index of a loop


@dataclass
class ChartSpec:
    name: str
    lifelines: list[Lifeline] = field(default_factory=list)
    body: list[Element] = field(default_factory=list)

    def __post_init__(self):
        self._compiled = False
        self._blocks: dict[BlockKey, _BlockInfo] = {}
        self._loop_span: dict[int, set[str]] = {}
        self._labels: dict[str, tuple[BlockKey, int]] = {}
        self._minimal: list[int] = []
        self._ordinals: dict[tuple[BlockKey, int], int] = {}
        self._chart_vars: set[str] = set()

    # -- compile -------------------------------------------------------------

    def lifeline(self, name: str) -> Lifeline | None:
        for ll in self.lifelines:
            if ll.name == name:
                return ll
        return None

    def compile(self, classes: dict[str, ClassDef] | None = None) -> list[str]:
        diags: list[str] = []
        self._blocks = {}
        self._loop_span = {}
        self._labels = {}
        self._ordinals = {}
        self._chart_vars = set()
        names = [ll.name for ll in self.lifelines]
        if len(set(names)) != len(names):
            diags.append(f"chart '{self.name}' has duplicate lifeline names")
        if ENV in names or "self" in names:
            diags.append(f"chart '{self.name}' uses a reserved lifeline name")
        if classes is not None:
            for ll in self.lifelines:
                if ll.class_name not in classes:
                    diags.append(f"lifeline '{ll.name}' has unknown class "
                                 f"'{ll.class_name}'")

        ordinal = 0

        def index_block(key: BlockKey, elements: list[Element]):
            nonlocal ordinal
            proj: dict[str, list[int]] = {}
            proj_index: dict[int, dict[str, int]] = {}
            for idx, el in enumerate(elements):
                self._ordinals[(key, idx)] = ordinal
                ordinal += 1
                if el.label:
                    if el.label in self._labels or el.label in ("start", "end"):
                        diags.append(f"duplicate or reserved label '{el.label}'")
                    else:
                        self._labels[el.label] = (key, idx)
                for ll in sorted(element_lifelines(el)):
                    if self.lifeline(ll) is None:
                        diags.append(f"element references unknown lifeline '{ll}'")
                        continue
                    proj_index.setdefault(idx, {})[ll] = len(proj.setdefault(ll, []))
                    proj[ll].append(idx)
                if isinstance(el, Message):
                    for term in el.args:
                        if isinstance(term, Binder):
                            self._chart_vars.add(term.name)
                if isinstance(el, Loop):
                    if key != "top":
                        diags.append(f"chart '{self.name}': loops may not nest")
                        continue
                    if not any(isinstance(c, Message) for c in el.body):
                        diags.append(f"loop in '{self.name}' must contain a message")
                    if el.kind == "bound" and (el.bound is None or el.bound < 0):
                        diags.append(f"loop bound must be >= 0 in '{self.name}'")
                    if el.kind == "all":
                        var_ll = self.lifeline(el.var or "")
                        if var_ll is None or not isinstance(var_ll.binding, AllBinding):
                            diags.append(f"loop-all variable '{el.var}' must be an "
                                         f"all-lifeline")
                    self._loop_span[idx] = element_lifelines(el)
                    index_block(idx, el.body)
            self._blocks[key] = _BlockInfo(elements, proj, proj_index)

        index_block("top", self.body)

        if self._chart_vars & set(names):
            clash = sorted(self._chart_vars & set(names))
            diags.append(f"chart '{self.name}': variables {clash} collide with "
                         f"lifeline names")

        diags += self._check_elements(classes)
        diags += self._check_minimal()
        diags += self._check_forbidden_scopes()
        if classes is not None:
            diags += self._check_expressions(classes)
        self._compiled = not diags
        return diags

    def _check_expressions(self, classes) -> list[str]:
        """Resolve property and variable references in every expression."""
        diags = []

        def check(expr: E.Expr | None, self_class: str | None = None):
            if expr is None:
                return
            for node in E.walk(expr):
                if isinstance(node, E.Attr):
                    if node.base == "self":
                        cls_name = self_class
                    else:
                        ll = self.lifeline(node.base)
                        cls_name = ll.class_name if ll else None
                    if cls_name is None:
                        diags.append(f"chart '{self.name}': unknown lifeline "
                                     f"'{node.base}' in expression")
                    elif cls_name in classes and \
                            classes[cls_name].property_def(node.name) is None:
                        diags.append(f"chart '{self.name}': '{cls_name}' has "
                                     f"no property '{node.name}'")
                elif isinstance(node, E.Name):
                    if node.ident not in self._chart_vars:
                        diags.append(f"chart '{self.name}': unknown chart "
                                     f"variable '{node.ident}'")
                elif isinstance(node, E.ActiveQuery):
                    diags.append(f"chart '{self.name}': active() is not "
                                 f"available in chart expressions")

        for ll in self.lifelines:
            if isinstance(ll.binding, SymbolicBinding):
                check(ll.binding.expr, self_class=ll.class_name)
        for _key, elements in self._blocks_iter():
            for el in elements:
                if isinstance(el, Message):
                    for term in el.args:
                        if isinstance(term, ExprTerm):
                            check(term.expr)
                elif isinstance(el, Cond):
                    check(el.expr)
                elif isinstance(el, Loop) and el.kind == "while":
                    check(el.expr)
                elif isinstance(el, Forbidden) and el.args:
                    for term in el.args:
                        if isinstance(term, ExprTerm):
                            check(term.expr)
        return diags

    def _blocks_iter(self):
        yield "top", self.body
        for idx, el in enumerate(self.body):
            if isinstance(el, Loop):
                yield idx, el.body

    def _check_elements(self, classes) -> list[str]:
        diags = []
        all_lls = {ll.name for ll in self.lifelines
                   if isinstance(ll.binding, AllBinding)}
        for key, elements in self._blocks_iter():
            loop = self.body[key] if isinstance(key, int) else None
            for el in elements:
                where = f"chart '{self.name}'"
                if isinstance(el, Message):
                    if el.dst == ENV:
                        diags.append(f"{where}: messages cannot target env")
                    if el.mode == "exec" and el.src == ENV:
                        diags.append(f"{where}: executed messages cannot come "
                                     f"from env")
                    if el.mode == "exec":
                        for term in el.args:
                            if isinstance(term, Binder):
                                diags.append(f"{where}: executed message "
                                             f"'{el.name}' cannot bind '?{term.name}'")
                    for end in (el.src, el.dst):
                        if end in all_lls:
                            if loop is None or loop.var != end:
                                diags.append(f"{where}: all-lifeline '{end}' used "
                                             f"outside its loop")
                    if classes is not None and el.dst != ENV:
                        ll = self.lifeline(el.dst)
                        if ll is not None and ll.class_name in classes:
                            arity = classes[ll.class_name].event_arity(el.name)
                            if arity is None:
                                diags.append(f"{where}: '{ll.class_name}' does not "
                                             f"declare event '{el.name}'")
                            elif arity != len(el.args):
                                diags.append(f"{where}: event '{el.name}' expects "
                                             f"{arity} args, got {len(el.args)}")
                elif isinstance(el, Cond):
                    if not el.lifelines:
                        diags.append(f"{where}: condition attaches to no lifeline")
                elif isinstance(el, Sync):
                    if len(el.lifelines) < 2:
                        diags.append(f"{where}: sync needs at least two lifelines")
        return diags

    def _check_minimal(self) -> list[str]:
        diags = []
        self._minimal = []
        top = self._blocks["top"]
        for idx, el in enumerate(top.elements):
            if isinstance(el, Forbidden):
                continue
            lls = element_lifelines(el) & {ll.name for ll in self.lifelines}
            if not lls:
                diags.append(f"chart '{self.name}': element {idx} attaches to no "
                             f"lifeline")
                continue
            minimal = all(top.proj[ll][0] == idx for ll in lls if ll in top.proj)
            if minimal:
                if isinstance(el, Message) and el.mode == "mon":
                    self._minimal.append(idx)
                else:
                    diags.append(f"chart '{self.name}': minimal element {idx} must "
                                 f"be a monitored message (activation)")
        if not self._minimal and not diags:
            diags.append(f"chart '{self.name}' has no activation message")
        return diags

    def _check_forbidden_scopes(self) -> list[str]:
        diags = []
        for key, elements in self._blocks_iter():
            for el in elements:
                if not isinstance(el, Forbidden):
                    continue
                for label in (el.scope_from, el.scope_to):
                    if label in ("start", "end"):
                        continue
                    if label not in self._labels:
                        diags.append(f"chart '{self.name}': forbid scope label "
                                     f"'{label}' is not defined")
                    elif self._labels[label][0] != key:
                        diags.append(f"chart '{self.name}': forbid scope label "
                                     f"'{label}' crosses a block boundary")
                if (el.scope_from not in ("start", "end")
                        and el.scope_to not in ("start", "end")
                        and el.scope_from in self._labels
                        and el.scope_to in self._labels):
                    if self._labels[el.scope_from][1] > self._labels[el.scope_to][1]:
                        diags.append(f"chart '{self.name}': forbid scope runs "
                                     f"backwards")
        return diags

    def compile_or_raise(self, classes=None) -> "ChartSpec":
        diags = self.compile(classes)
        if diags:
            raise ModelError(f"invalid chart '{self.name}': " + "; ".join(diags))
        return self

    def minimal_messages(self) -> list[tuple[int, Message]]:
        return [(idx, self.body[idx]) for idx in self._minimal]  # type: ignore[misc]

    def ordinal(self, key: BlockKey, idx: int) -> int:
        return self._ordinals[(key, idx)]


def validate_chart(spec: ChartSpec,
                   classes: dict[str, ClassDef] | None = None) -> list[str]:
    """Compile and return diagnostics; empty list means the chart is valid."""
    return spec.compile(classes)


# ---------------------------------------------------------------------------
# Violations and advance results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    chart: str
    copy_id: int
    kind: str  # "hot" | "cold" | "forbidden"
    event: EventInstance | None
    cut: tuple[tuple[str, int], ...]


@dataclass
class AdvanceResult:
    kind: str  # progressed | irrelevant | completed | cold-violation |
    #            hot-violation | forbidden-violation
    violation: Violation | None = None

    @property
    def is_violation(self) -> bool:
        return self.kind.endswith("violation")

    @property
    def blocks(self) -> bool:
        return self.kind in ("hot-violation", "forbidden-violation")


# ---------------------------------------------------------------------------
# Runtime copies
# ---------------------------------------------------------------------------

@dataclass
class LoopRun:
    iterations: int = 0
    all_ids: list[str] | None = None
    all_index: int = 0
    iter_binding: dict[str, str] = field(default_factory=dict)
    pos: dict[str, int] = field(default_factory=dict)


@dataclass
class _Unified:
    lifelines: dict[str, str]
    variables: dict[str, Value]


class _ChartScope:
    """Expression scope over a copy's bindings plus the object store."""

    def __init__(self, copy: "ActiveChart", store: ObjectStore,
                 candidate: str | None = None,
                 extra_lls: dict[str, str] | None = None,
                 extra_vars: dict[str, Value] | None = None):
        self.copy = copy
        self.store = store
        self.candidate = candidate
        self.extra_lls = extra_lls or {}
        self.extra_vars = extra_vars or {}

    def _object_for(self, base: str) -> str | None:
        if base == "self":
            return self.candidate
        if base in self.extra_lls:
            return self.extra_lls[base]
        return self.copy._resolve_end(base) if base != ENV else None

    def resolve_name(self, ident: str) -> Value:
        if ident in self.extra_vars:
            return self.extra_vars[ident]
        if ident in self.copy.var_bindings:
            return self.copy.var_bindings[ident]
        raise EvalError(f"unknown chart variable '{ident}'")

    def resolve_attr(self, base: str, name: str) -> Value:
        obj_id = self._object_for(base)
        if obj_id is None:
            raise EvalError(f"lifeline '{base}' is not bound")
        try:
            return self.store.read(obj_id, name)
        except ModelError as exc:
            raise EvalError(str(exc)) from None

    def resolve_active(self, path):
        raise EvalError("active() is not available in chart expressions")


class ActiveChart:
    """One live copy of a chart: cut position, bindings, status."""

    def __init__(self, spec: ChartSpec, copy_id: int):
        if not spec._compiled:
            raise ModelError(f"chart '{spec.name}' was not compiled")
        self.spec = spec
        self.copy_id = copy_id
        self.status = "running"  # running | completed | aborted
        self.ll_bindings: dict[str, str] = {}
        self.var_bindings: dict[str, Value] = {}
        self.top_pos: dict[str, int] = {}
        self.loops: dict[int, LoopRun] = {}
        self.cut: dict[str, int] = {ll.name: 0 for ll in spec.lifelines}

    # -- copying ----------------------------------------------------------------

    def clone(self) -> "ActiveChart":
        twin = ActiveChart(self.spec, self.copy_id)
        twin.status = self.status
        twin.ll_bindings = dict(self.ll_bindings)
        twin.var_bindings = dict(self.var_bindings)
        twin.top_pos = dict(self.top_pos)
        twin.loops = {
            idx: LoopRun(run.iterations,
                         list(run.all_ids) if run.all_ids is not None else None,
                         run.all_index, dict(run.iter_binding), dict(run.pos))
            for idx, run in self.loops.items()
        }
        twin.cut = dict(self.cut)
        return twin

    # -- location machinery ------------------------------------------------------

    def _pending(self, ll: str) -> tuple[str, Optional[int], Optional[int]]:
        """Where lifeline ``ll`` waits: (context, loop idx, element idx)."""
        for idx, run in self.loops.items():
            if ll in self.spec._loop_span[idx]:
                proj = self.spec._blocks[idx].proj.get(ll, [])
                p = run.pos.get(ll, 0)
                if p < len(proj):
                    return ("loop", idx, proj[p])
                return ("loopend", idx, None)
        proj = self.spec._blocks["top"].proj.get(ll, [])
        p = self.top_pos.get(ll, 0)
        if p < len(proj):
            return ("top", None, proj[p])
        return ("end", None, None)

    def _is_enabled(self, key: BlockKey, idx: int) -> bool:
        element = self.spec._blocks[key].elements[idx]
        lls = element_lifelines(element) & set(self.cut)
        if not lls:
            return False
        if key == "top":
            want = ("top", None, idx)
        else:
            if key not in self.loops:
                return False
            want = ("loop", key, idx)
        return all(self._pending(ll) == want for ll in lls)

    def _pass_element(self, key: BlockKey, idx: int) -> None:
        element = self.spec._blocks[key].elements[idx]
        for ll in element_lifelines(element) & set(self.cut):
            if key == "top":
                self.top_pos[ll] = self.top_pos.get(ll, 0) + 1
            else:
                run = self.loops[key]
                run.pos[ll] = run.pos.get(ll, 0) + 1
            self.cut[ll] += 1

    def _elem_passed(self, key: BlockKey, idx: int) -> bool:
        element = self.spec._blocks[key].elements[idx]
        lls = element_lifelines(element) & set(self.cut)
        if not lls:
            return False
        if key != "top" and key not in self.loops:
            # closed/unopened loop body: inherits the loop element's state
            return self._elem_passed("top", key)
        info = self.spec._blocks[key]
        for ll in lls:
            slot = info.proj_index[idx][ll]
            pos = (self.top_pos.get(ll, 0) if key == "top"
                   else self.loops[key].pos.get(ll, 0))
            if pos <= slot:
                return False
        return True

    # -- auto-advance ----------------------------------------------------------------

    def _auto_advance(self, store: ObjectStore,
                      event: EventInstance | None) -> Violation | None:
        """Run syncs, conditions, loop heads to a fixpoint; may violate."""
        changed = True
        while changed and self.status == "running":
            changed = False
            for idx in list(self.loops):
                if self._loop_body_done(idx):
                    self._finish_iteration(idx, store)
                    changed = True
            for key in list(self._contexts()):
                if key != "top" and key not in self.loops:
                    continue
                elements = self.spec._blocks[key].elements
                for idx, el in enumerate(elements):
                    if isinstance(el, (Forbidden, Message)):
                        continue
                    if not self._is_enabled(key, idx):
                        continue
                    if isinstance(el, Sync):
                        self._pass_element(key, idx)
                        changed = True
                    elif isinstance(el, Cond):
                        if self._eval_cond(el, store):
                            self._pass_element(key, idx)
                        else:
                            violation = self._cond_failed(key, el, store, event)
                            if violation is not None:
                                return violation
                        changed = True
                        break  # positions shifted; re-scan this context
                    elif isinstance(el, Loop):
                        self._open_loop(idx, el, store)
                        changed = True
                        break
            if self._chart_done():
                self.status = "completed"
        return None

    def _contexts(self):
        yield "top"
        yield from list(self.loops.keys())

    def _eval_cond(self, cond: Cond, store: ObjectStore) -> bool:
        scope = _ChartScope(self, store)
        return E.evaluate_bool(cond.expr, scope)

    def _cond_failed(self, key: BlockKey, cond: Cond, store: ObjectStore,
                     event: EventInstance | None) -> Violation | None:
        if cond.temp == "hot":
            self.status = "aborted"
            return Violation(self.spec.name, self.copy_id, "hot", event,
                             self.cut_snapshot())
        if key != "top":
            # cold condition inside a loop: this iteration opts out
            loop = self.spec.body[key]
            assert isinstance(loop, Loop)
            if loop.kind == "while":
                self._close_loop(key)
            else:
                self._finish_iteration(key, store)
            return None
        self.status = "aborted"  # benign: cold means "may"
        return None

    def _loop_body_done(self, idx: int) -> bool:
        run = self.loops[idx]
        info = self.spec._blocks[idx]
        for ll in self.spec._loop_span[idx]:
            proj = info.proj.get(ll, [])
            if run.pos.get(ll, 0) < len(proj):
                return False
        return True

    def _open_loop(self, idx: int, loop: Loop, store: ObjectStore) -> None:
        run = LoopRun()
        if loop.kind == "all":
            run.all_ids = [o.id for o in store.instances_of(
                self.spec.lifeline(loop.var).class_name)]  # type: ignore[union-attr]
        self.loops[idx] = run
        if not self._start_iteration(idx, loop, store):
            self._close_loop(idx)

    def _start_iteration(self, idx: int, loop: Loop, store: ObjectStore) -> bool:
        run = self.loops[idx]
        run.pos = {}
        run.iter_binding = {}
        if loop.kind == "bound":
            return run.iterations < (loop.bound or 0)
        if loop.kind == "while":
            scope = _ChartScope(self, store)
            return E.evaluate_bool(loop.expr, scope)
        assert run.all_ids is not None
        if run.all_index >= len(run.all_ids):
            return False
        run.iter_binding[loop.var] = run.all_ids[run.all_index]  # type: ignore[index]
        return True

    def _finish_iteration(self, idx: int, store: ObjectStore) -> None:
        run = self.loops[idx]
        loop = self.spec.body[idx]
        assert isinstance(loop, Loop)
        run.iterations += 1
        if loop.kind == "all":
            run.all_index += 1
        if not self._start_iteration(idx, loop, store):
            self._close_loop(idx)

    def _close_loop(self, idx: int) -> None:
        del self.loops[idx]
        self._pass_element("top", idx)

    def _chart_done(self) -> bool:
        if self.loops:
            return False
        top = self.spec._blocks["top"]
        for ll, proj in top.proj.items():
            if self.top_pos.get(ll, 0) < len(proj):
                return False
        return True

    # -- unification ------------------------------------------------------------------

    def _resolve_end(self, name: str) -> str | None:
        """Bound object id for a lifeline reference, or None if unbound."""
        if name == ENV:
            return ENV
        bound = self.ll_bindings.get(name)
        if bound is not None:
            return bound
        for run in self.loops.values():
            if name in run.iter_binding:
                return run.iter_binding[name]
        ll = self.spec.lifeline(name)
        if ll is not None and isinstance(ll.binding, ConcreteBinding):
            return ll.binding.object_id
        return None

    def _end_needs_context(self, ll_name: str) -> bool:
        """True when this end carries a binding expression and is unbound."""
        if ll_name == ENV or self._resolve_end(ll_name) is not None:
            return False
        ll = self.spec.lifeline(ll_name)
        return (ll is not None and isinstance(ll.binding, SymbolicBinding)
                and ll.binding.expr is not None)

    def _unify_end(self, ll_name: str, participant: str, store: ObjectStore,
                   unified: _Unified) -> bool:
        if ll_name == ENV:
            return participant == ENV
        if participant == ENV:
            return False
        known = unified.lifelines.get(ll_name, self._resolve_end(ll_name))
        if known is not None:
            return known == participant
        ll = self.spec.lifeline(ll_name)
        if ll is None or not store.has_object(participant):
            return False
        obj = store.get_object(participant)
        if obj.class_def.name != ll.class_name:
            return False
        if isinstance(ll.binding, SymbolicBinding):
            if ll.binding.expr is not None:
                scope = _ChartScope(self, store, candidate=participant,
                                    extra_lls=unified.lifelines,
                                    extra_vars=unified.variables)
                try:
                    if not E.evaluate_bool(ll.binding.expr, scope):
                        return False
                except EvalError:
                    return False
            unified.lifelines[ll_name] = participant
            return True
        if isinstance(ll.binding, AllBinding):
            # reachable only from the out-of-order scan: loop closed/unopened
            return True
        return False

    def unify(self, msg: Message, event: EventInstance,
              store: ObjectStore) -> _Unified | None:
        """Bindings extension if ``event`` matches ``msg``, else None.

        Never rebinds: bound lifelines and variables must match exactly.
        Ends without a binding expression bind first, so an expression on
        the other end may refer to them.
        """
        if msg.name != event.name or len(msg.args) != len(event.args):
            return None
        unified = _Unified({}, {})
        ends = [(msg.src, event.src), (msg.dst, event.dst)]
        ends.sort(key=lambda pair: self._end_needs_context(pair[0]))
        for ll_name, participant in ends:
            if not self._unify_end(ll_name, participant, store, unified):
                return None
        for term, value in zip(msg.args, event.args):
            if isinstance(term, Binder):
                if term.name in unified.variables:
                    if unified.variables[term.name] != value:
                        return None
                elif term.name in self.var_bindings:
                    if self.var_bindings[term.name] != value:
                        return None
                else:
                    unified.variables[term.name] = value
            else:
                scope = _ChartScope(self, store, extra_lls=unified.lifelines,
                                    extra_vars=unified.variables)
                try:
                    expected = E.evaluate(term.expr, scope)
                except EvalError:
                    return None
                if expected != value:
                    return None
        return unified

    # -- main operations ------------------------------------------------------------

    def advance(self, event: EventInstance, store: ObjectStore) -> AdvanceResult:
        """Feed one event to this copy.

        Deterministic in (copy state, event, store); completed and aborted
        copies are inert.
        """
        if self.status != "running":
            return AdvanceResult("irrelevant")
        # 1. enabled messages, document order
        for key, idx, el in self._located_messages():
            if not self._is_enabled(key, idx):
                continue
            unified = self.unify(el, event, store)
            if unified is None:
                continue
            self.ll_bindings.update(unified.lifelines)
            self.var_bindings.update(unified.variables)
            self._pass_element(key, idx)
            violation = self._auto_advance(store, event)
            if violation is not None:
                return AdvanceResult(violation.kind + "-violation", violation)
            if self.status == "aborted":
                return AdvanceResult("cold-violation")
            if self.status == "completed":
                return AdvanceResult("completed")
            return AdvanceResult("progressed")
        # 2. forbidden patterns in scope
        for key, idx, el in self._forbidden_elements():
            if not self._forbidden_in_scope(el):
                continue
            if self._forbidden_matches(el, event, store):
                self.status = "aborted"
                violation = Violation(self.spec.name, self.copy_id, "forbidden",
                                      event, self.cut_snapshot())
                return AdvanceResult("forbidden-violation", violation)
        # 3. the event belongs to the chart but is out of order
        for key, idx, el in self._located_messages():
            if self._is_enabled(key, idx):
                continue
            if self.unify(el, event, store) is not None:
                self.status = "aborted"
                if el.temp == "hot":
                    violation = Violation(self.spec.name, self.copy_id, "hot",
                                          event, self.cut_snapshot())
                    return AdvanceResult("hot-violation", violation)
                return AdvanceResult("cold-violation")
        return AdvanceResult("irrelevant")

    def _located_messages(self) -> Iterator[tuple[BlockKey, int, Message]]:
        found = []
        for key, elements in self.spec._blocks_iter():
            for idx, el in enumerate(elements):
                if isinstance(el, Message):
                    found.append((self.spec.ordinal(key, idx), key, idx, el))
        for _ord, key, idx, el in sorted(found, key=lambda item: item[0]):
            yield key, idx, el

    def _forbidden_elements(self) -> Iterator[tuple[BlockKey, int, Forbidden]]:
        for key, elements in self.spec._blocks_iter():
            for idx, el in enumerate(elements):
                if isinstance(el, Forbidden):
                    yield key, idx, el

    def _forbidden_in_scope(self, el: Forbidden) -> bool:
        if el.scope_from == "start":
            started = True
        else:
            key, idx = self.spec._labels[el.scope_from]
            started = self._elem_passed(key, idx)
        if not started:
            return False
        if el.scope_to == "end":
            return True
        key, idx = self.spec._labels[el.scope_to]
        return not self._elem_passed(key, idx)

    def _forbidden_matches(self, el: Forbidden, event: EventInstance,
                           store: ObjectStore) -> bool:
        if el.name != event.name:
            return False
        for ll_name, participant in ((el.src, event.src), (el.dst, event.dst)):
            if ll_name == ENV:
                if participant != ENV:
                    return False
                continue
            bound = self._resolve_end(ll_name)
            if bound is None or bound != participant:
                return False
        if el.args is None:
            return True
        if len(el.args) != len(event.args):
            return False
        for term, value in zip(el.args, event.args):
            if isinstance(term, Binder):
                continue  # wildcard
            scope = _ChartScope(self, store)
            try:
                if E.evaluate(term.expr, scope) != value:
                    return False
            except EvalError:
                return False
        return True

    def enabled_messages(
        self, store: ObjectStore
    ) -> list[tuple[Message, str, str, EventInstance | None]]:
        """Messages at the cut: (message, mode, temp, concrete event or None)."""
        if self.status != "running":
            return []
        out = []
        for key, idx, el in self._located_messages():
            if not self._is_enabled(key, idx):
                continue
            out.append((el, el.mode, el.temp, self._concretize(el, store)))
        return out

    def _concretize(self, msg: Message,
                    store: ObjectStore) -> EventInstance | None:
        """Fully bound event for a message, resolving symbolic lifelines
        speculatively through their binding expressions (first satisfying
        instance in creation order). None when anything stays unresolved."""
        speculative: dict[str, str] = {}

        def resolve(name: str) -> str | None:
            if name == ENV:
                return ENV
            bound = self._resolve_end(name)
            if bound is not None:
                return bound
            if name in speculative:
                return speculative[name]
            ll = self.spec.lifeline(name)
            if ll is None or not isinstance(ll.binding, SymbolicBinding) \
                    or ll.binding.expr is None:
                return None
            for obj in store.instances_of(ll.class_name):
                scope = _ChartScope(self, store, candidate=obj.id,
                                    extra_lls=speculative)
                try:
                    if E.evaluate_bool(ll.binding.expr, scope):
                        speculative[name] = obj.id
                        return obj.id
                except EvalError:
                    continue
            return None

        src = resolve(msg.src)
        dst = resolve(msg.dst)
        if src is None or dst is None:
            return None
        args: list[Value] = []
        for term in msg.args:
            if isinstance(term, Binder):
                if term.name not in self.var_bindings:
                    return None
                args.append(self.var_bindings[term.name])
            else:
                scope = _ChartScope(self, store, extra_lls=speculative)
                try:
                    args.append(E.evaluate(term.expr, scope))
                except EvalError:
                    return None
        return EventInstance(src, dst, msg.name, tuple(args),
                             lsc_origin(self.spec.name, self.copy_id))

    def is_blocked(self, event: EventInstance, store: ObjectStore) -> bool:
        """Would delivering ``event`` to this copy hot/forbidden-violate?"""
        if self.status != "running":
            return False
        return self.clone().advance(event, store).blocks

    def pending_hot_monitored(self, store: ObjectStore):
        """Enabled hot monitored messages: the copy's liveness debt."""
        return [(msg, ev) for msg, mode, temp, ev in self.enabled_messages(store)
                if mode == "mon" and temp == "hot"]

    def bindings_view(self) -> dict[str, Union[str, Value]]:
        merged: dict[str, Union[str, Value]] = dict(self.ll_bindings)
        merged.update(self.var_bindings)
        return merged

    def cut_snapshot(self) -> tuple[tuple[str, int], ...]:
        return tuple(sorted(self.cut.items()))

    # -- persistence ------------------------------------------------------------------

    def snapshot(self) -> dict:
        return {
            "chart": self.spec.name,
            "copy_id": self.copy_id,
            "status": self.status,
            "lifelines": dict(self.ll_bindings),
            "vars": {k: value_to_json(v) for k, v in self.var_bindings.items()},
            "top_pos": dict(self.top_pos),
            "loops": {str(idx): {
                "iterations": run.iterations,
                "all_ids": run.all_ids,
                "all_index": run.all_index,
                "iter_binding": dict(run.iter_binding),
                "pos": dict(run.pos),
            } for idx, run in self.loops.items()},
            "cut": dict(self.cut),
        }

    @classmethod
    def from_snapshot(cls, spec: ChartSpec, data: dict) -> "ActiveChart":
        copy = cls(spec, data["copy_id"])
        copy.status = data["status"]
        copy.ll_bindings = dict(data["lifelines"])
        copy.var_bindings = {k: value_from_json(v) for k, v in data["vars"].items()}
        copy.top_pos = dict(data["top_pos"])
        copy.loops = {
            int(idx): LoopRun(run["iterations"],
                              list(run["all_ids"]) if run["all_ids"] is not None
                              else None,
                              run["all_index"], dict(run["iter_binding"]),
                              dict(run["pos"]))
            for idx, run in data["loops"].items()
        }
        copy.cut = dict(data["cut"])
        return copy


def try_activate(spec: ChartSpec, event: EventInstance,
                 store: ObjectStore) -> list[tuple[ActiveChart, AdvanceResult]]:
    """New copies for every minimal message ``event`` unifies with.

    Each new copy consumes the activating event (its cut starts past that
    message); immediate conditions and loop heads run right away, so a
    result may already be completed, aborted, or violated. Copy ids are
    provisional (0); the play-out layer assigns real ones.
    """
    activations = []
    probe = ActiveChart(spec, 0)
    for idx, msg in spec.minimal_messages():
        unified = probe.unify(msg, event, store)
        if unified is None:
            continue
        copy = ActiveChart(spec, 0)
        copy.ll_bindings.update(unified.lifelines)
        copy.var_bindings.update(unified.variables)
        copy._pass_element("top", idx)
        violation = copy._auto_advance(store, event)
        if violation is not None:
            activations.append(
                (copy, AdvanceResult(violation.kind + "-violation", violation)))
        elif copy.status == "aborted":
            activations.append((copy, AdvanceResult("cold-violation")))
        elif copy.status == "completed":
            activations.append((copy, AdvanceResult("completed")))
        else:
            activations.append((copy, AdvanceResult("progressed")))
    return activations
