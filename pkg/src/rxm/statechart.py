"""Hierarchical statechart definitions and a run-to-completion interpreter.

Supported features: nested (compound) states, orthogonal regions, choice
pseudo-states with an optional else branch, entry/exit actions, guards
over machine variables and owner-object properties, ``active(...)``
state queries (same machine or, through the coordinator registry, other
machines), ``after``/``every`` timers, parameterized events (``arg1..N``),
internally raised events, and outgoing event emission.

Semantics pinned here:

* Conflict resolution is innermost source first, then document order.
* Orthogonal regions react to the same event in document order within a
  microstep; earlier regions' actions are visible to later guards.
* Internally raised events are processed FIFO as further microsteps of
  the same ``dispatch`` call.
* ``every`` timers re-arm at ``due + period`` (no drift).
* All transitions are external: the source scope is exited and the
  target scope entered, even for self-transitions.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import expr as E
from .errors import EvalError, ModelError, RunError
from .events import EventInstance, sc_origin, timer_origin
from .objects import ClassDef, ObjectStore
from .values import KINDS, ObjRef, Value, conforms, kind_of

MAX_MICROSTEPS = 1000

TIMER_PREFIX = "tm."


# ---------------------------------------------------------------------------
# Spec types
# ---------------------------------------------------------------------------

@dataclass
class VarDecl:
    name: str
    kind: str
    default: Value | None = None


@dataclass(frozen=True)
class EventTrigger:
    name: str


@dataclass(frozen=True)
class TimerTrigger:
    kind: str  # "after" | "every"
    ms: int


Trigger = EventTrigger | TimerTrigger


@dataclass
class Assign:
    name: str
    value: E.Expr


@dataclass
class AssignProp:
    prop: str
    value: E.Expr


@dataclass
class Raise:
    name: str
    args: list[E.Expr] = field(default_factory=list)


@dataclass
class Emit:
    target: str  # "self", an owner ref-property name, or an object id
    name: str
    args: list[E.Expr] = field(default_factory=list)


Action = Assign | AssignProp | Raise | Emit


@dataclass
class Transition:
    trigger: Trigger | None
    target: str  # as written; resolved during compile
    guard: E.Expr | None = None
    actions: list[Action] = field(default_factory=list)
    is_else: bool = False
    # filled in by compile():
    source_path: tuple[str, ...] = field(default=(), compare=False)
    target_path: tuple[str, ...] = field(default=(), compare=False)
    timer_name: str | None = field(default=None, compare=False)
    exit_child: tuple[str, ...] = field(default=(), compare=False)
    enter_chain: list[tuple[str, ...]] = field(default_factory=list, compare=False)


@dataclass
class StateNode:
    name: str
    kind: str = "basic"  # basic | compound | orthogonal | choice | final
    regions: list["Region"] = field(default_factory=list)
    entry: list[Action] = field(default_factory=list)
    exit: list[Action] = field(default_factory=list)
    transitions: list[Transition] = field(default_factory=list)


@dataclass
class Region:
    name: str | None
    states: list[StateNode] = field(default_factory=list)
    initial: str | None = None  # defaults to the first declared state

    def initial_state(self) -> StateNode:
        target = self.initial or (self.states[0].name if self.states else None)
        for st in self.states:
            if st.name == target:
                return st
        raise ModelError(f"region has no initial state '{target}'")


@dataclass
class StatechartSpec:
    name: str
    owner_class: str
    variables: list[VarDecl] = field(default_factory=list)
    regions: list[Region] = field(default_factory=list)
    inputs: list[tuple[str, int]] = field(default_factory=list)
    outputs: list[tuple[str, int, str]] = field(default_factory=list)  # name, arity, peer class

    def __post_init__(self):
        self._compiled = False
        self._info: dict[tuple[str, ...], "_StateInfo"] = {}

    # -- compile / validate -------------------------------------------------

    def compile(self, classes: dict[str, ClassDef] | None = None) -> list[str]:
        """Index states and validate the spec; returns diagnostics (empty = ok)."""
        diags: list[str] = []
        self._info = {}
        ordinal = 0

        def add_state(node: StateNode, path: tuple[str, ...],
                      region_key: tuple[str, ...], parent: tuple[str, ...] | None):
            nonlocal ordinal
            if path in self._info:
                diags.append(f"duplicate state path '{_dotted(path)}'")
                return
            self._info[path] = _StateInfo(node, path, parent, region_key, ordinal)
            ordinal += 1
            n_regions = len(node.regions)
            if node.kind == "compound" and n_regions != 1:
                diags.append(f"compound state '{_dotted(path)}' needs exactly 1 region")
            if node.kind == "orthogonal":
                if n_regions < 2:
                    diags.append(f"orthogonal state '{_dotted(path)}' needs >=2 regions")
                names = [r.name for r in node.regions]
                if None in names or len(set(names)) != len(names):
                    diags.append(f"orthogonal state '{_dotted(path)}' needs uniquely "
                                 f"named regions")
            if node.kind in ("basic", "final", "choice") and n_regions:
                diags.append(f"{node.kind} state '{_dotted(path)}' may not contain regions")
            if node.kind == "choice" and (node.entry or node.exit):
                diags.append(f"choice '{_dotted(path)}' may not have entry/exit actions")
            if node.kind == "final" and node.transitions:
                diags.append(f"final state '{_dotted(path)}' may not have transitions")
            for region in node.regions:
                key = path if node.kind == "compound" else path + (region.name or "?",)
                for child in region.states:
                    add_state(child, key + (child.name,), key, path)
                if region.states:
                    try:
                        region.initial_state()
                    except ModelError:
                        diags.append(f"region under '{_dotted(path)}' has unknown "
                                     f"initial '{region.initial}'")
                else:
                    diags.append(f"empty region under '{_dotted(path)}'")

        top_names = [r.name for r in self.regions]
        if not self.regions:
            diags.append(f"statechart '{self.name}' has no regions")
        if None in top_names or len(set(top_names)) != len(top_names):
            diags.append(f"statechart '{self.name}' needs uniquely named top regions")
        for region in self.regions:
            if not region.states:
                diags.append(f"top region '{region.name}' of '{self.name}' is empty")
            for st in region.states:
                add_state(st, (region.name or "?", st.name), (region.name or "?",), None)
            if region.states:
                try:
                    region.initial_state()
                except ModelError:
                    diags.append(f"top region '{region.name}' has unknown initial "
                                 f"'{region.initial}'")

        seen_vars: set[str] = set()
        for var in self.variables:
            if var.name in seen_vars:
                diags.append(f"duplicate variable '{var.name}'")
            seen_vars.add(var.name)
            if var.kind not in KINDS:
                diags.append(f"variable '{var.name}' has unknown kind '{var.kind}'")
            elif var.default is not None and not conforms(var.default, var.kind):
                diags.append(f"variable '{var.name}' default does not match kind")
            if _arg_index(var.name) is not None:
                diags.append(f"variable name '{var.name}' is reserved")

        input_arity = dict(self.inputs)
        owner_cls = classes.get(self.owner_class) if classes else None
        if classes is not None and owner_cls is None:
            diags.append(f"statechart '{self.name}' owner class "
                         f"'{self.owner_class}' is not declared")

        for info in list(self._info.values()):
            node = info.node
            timer_idx = 0
            for trans in node.transitions:
                trans.source_path = info.path
                if trans.trigger is None and node.kind != "choice":
                    diags.append(f"triggerless transition outside choice at "
                                 f"'{_dotted(info.path)}'")
                if node.kind == "choice":
                    if trans.trigger is not None:
                        diags.append(f"choice '{_dotted(info.path)}' transition may "
                                     f"not have a trigger")
                    if trans.guard is None and not trans.is_else:
                        diags.append(f"choice '{_dotted(info.path)}' transition needs "
                                     f"a guard or else")
                if isinstance(trans.trigger, EventTrigger):
                    if trans.trigger.name not in input_arity:
                        diags.append(f"trigger '{trans.trigger.name}' at "
                                     f"'{_dotted(info.path)}' is not a declared input")
                if isinstance(trans.trigger, TimerTrigger):
                    if trans.trigger.ms <= 0:
                        diags.append(f"timer duration must be positive at "
                                     f"'{_dotted(info.path)}'")
                    trans.timer_name = f"{TIMER_PREFIX}{_dotted(info.path)}.{timer_idx}"
                    timer_idx += 1
                target = self._resolve_target(info, trans.target)
                if target is None:
                    diags.append(f"unknown transition target '{trans.target}' from "
                                 f"'{_dotted(info.path)}'")
                    continue
                trans.target_path = target
                err = self._plan_transition(trans)
                if err:
                    diags.append(err)
                if node.kind == "choice" and trans.target_path:
                    tgt_info = self._info[trans.target_path]
                    if tgt_info.region_key != info.region_key:
                        diags.append(f"choice '{_dotted(info.path)}' target "
                                     f"'{trans.target}' must stay in the same region")
                arity = (input_arity.get(trans.trigger.name, 0)
                         if isinstance(trans.trigger, EventTrigger) else 0)
                if trans.guard is not None:
                    diags += self._check_expr(trans.guard, arity, owner_cls, info)
                diags += self._check_actions(trans.actions, arity, owner_cls, info,
                                             input_arity)
            else_count = sum(1 for t in node.transitions if t.is_else)
            if else_count > 1:
                diags.append(f"choice '{_dotted(info.path)}' has multiple else branches")
            if node.kind != "choice" and else_count:
                diags.append(f"else branch outside choice at '{_dotted(info.path)}'")
            diags += self._check_actions(node.entry, 0, owner_cls, info, input_arity)
            diags += self._check_actions(node.exit, 0, owner_cls, info, input_arity)

        self._compiled = not diags
        return diags

    def compile_or_raise(self, classes: dict[str, ClassDef] | None = None) -> "StatechartSpec":
        diags = self.compile(classes)
        if diags:
            raise ModelError(f"invalid statechart '{self.name}': " + "; ".join(diags))
        return self

    def _resolve_target(self, source: "_StateInfo",
                        target: str) -> tuple[str, ...] | None:
        segs = tuple(target.split("."))
        # innermost enclosing region outward, then absolute
        scope: Optional[_StateInfo] = source
        while scope is not None:
            base = scope.region_key
            if base + segs in self._info:
                return base + segs
            scope = self._info.get(scope.parent) if scope.parent else None
        if segs in self._info:
            return segs
        return None

    def _plan_transition(self, trans: Transition) -> str | None:
        src = self._info[trans.source_path]
        tgt = self._info[trans.target_path]
        src_chain = self._region_chain(src)
        tgt_chain = self._region_chain(tgt)
        common = None
        for key in src_chain:
            if key in tgt_chain:
                common = key
                break
        if common is None:
            return (f"transition from '{_dotted(src.path)}' to '{_dotted(tgt.path)}' "
                    f"crosses top-level regions")
        trans.exit_child = self._child_in_region(src, common)
        chain: list[tuple[str, ...]] = []
        walker: Optional[_StateInfo] = tgt
        while walker is not None and walker.region_key != common:
            chain.append(walker.path)
            walker = self._info.get(walker.parent) if walker.parent else None
        if walker is not None:
            chain.append(walker.path)
        trans.enter_chain = list(reversed(chain))
        for path in trans.enter_chain[:-1]:
            if self._info[path].node.kind == "choice":
                return (f"transition from '{_dotted(src.path)}' routes through "
                        f"choice '{_dotted(path)}'")
        return None

    def _region_chain(self, info: "_StateInfo") -> list[tuple[str, ...]]:
        chain = [info.region_key]
        walker = info
        while walker.parent is not None:
            walker = self._info[walker.parent]
            chain.append(walker.region_key)
        return chain

    def _child_in_region(self, info: "_StateInfo",
                         region_key: tuple[str, ...]) -> tuple[str, ...]:
        walker = info
        while walker.region_key != region_key:
            walker = self._info[walker.parent]  # type: ignore[index]
        return walker.path

    def _check_expr(self, expression: E.Expr, trigger_arity: int,
                    owner_cls: ClassDef | None, info: "_StateInfo") -> list[str]:
        diags = []
        where = f"'{_dotted(info.path)}'"
        var_names = {v.name for v in self.variables}
        for node in E.walk(expression):
            if isinstance(node, E.Name):
                idx = _arg_index(node.ident)
                if idx is not None:
                    if idx < 1 or idx > trigger_arity:
                        diags.append(f"{node.ident} out of range at {where}")
                elif node.ident not in var_names:
                    diags.append(f"unknown variable '{node.ident}' at {where}")
            elif isinstance(node, E.Attr):
                if node.base != "self":
                    diags.append(f"only 'self.<prop>' attributes are allowed at {where}")
                elif owner_cls is not None and owner_cls.property_def(node.name) is None:
                    diags.append(f"unknown property 'self.{node.name}' at {where}")
            elif isinstance(node, E.ActiveQuery):
                if node.path in self._info:
                    continue
                # cross-machine form: first segment is an object id, checked at runtime
                if len(node.path) < 2:
                    diags.append(f"active() path '{_dotted(node.path)}' unknown at {where}")
        return diags

    def _check_actions(self, actions: list[Action], trigger_arity: int,
                       owner_cls: ClassDef | None, info: "_StateInfo",
                       input_arity: dict[str, int]) -> list[str]:
        diags = []
        where = f"'{_dotted(info.path)}'"
        var_kinds = {v.name: v.kind for v in self.variables}
        output_decls = {(name, arity) for name, arity, _peer in self.outputs}
        for action in actions:
            if isinstance(action, Assign):
                if action.name not in var_kinds:
                    diags.append(f"assignment to unknown variable '{action.name}' "
                                 f"at {where}")
                diags += self._check_expr(action.value, trigger_arity, owner_cls, info)
            elif isinstance(action, AssignProp):
                if owner_cls is not None and owner_cls.property_def(action.prop) is None:
                    diags.append(f"assignment to unknown property 'self.{action.prop}' "
                                 f"at {where}")
                diags += self._check_expr(action.value, trigger_arity, owner_cls, info)
            elif isinstance(action, Raise):
                if action.name not in input_arity:
                    diags.append(f"raised event '{action.name}' is not a declared "
                                 f"input at {where}")
                elif input_arity[action.name] != len(action.args):
                    diags.append(f"raised event '{action.name}' arity mismatch at {where}")
                for arg in action.args:
                    diags += self._check_expr(arg, trigger_arity, owner_cls, info)
            elif isinstance(action, Emit):
                if (action.name, len(action.args)) not in output_decls:
                    diags.append(f"emitted event '{action.name}/{len(action.args)}' "
                                 f"is not a declared output at {where}")
                for arg in action.args:
                    diags += self._check_expr(arg, trigger_arity, owner_cls, info)
        return diags

    # -- queries -------------------------------------------------------------

    def state_paths(self) -> list[str]:
        return [_dotted(p) for p in self._info]

    def has_state(self, path: str) -> bool:
        return tuple(path.split(".")) in self._info

    def info(self, path: tuple[str, ...]) -> "_StateInfo":
        return self._info[path]


@dataclass
class _StateInfo:
    node: StateNode
    path: tuple[str, ...]
    parent: tuple[str, ...] | None
    region_key: tuple[str, ...]
    ordinal: int


def _dotted(path: tuple[str, ...]) -> str:
    return ".".join(path)


def _arg_index(ident: str) -> int | None:
    if ident.startswith("arg") and ident[3:].isdigit():
        return int(ident[3:])
    return None


# ---------------------------------------------------------------------------
# Runtime
# ---------------------------------------------------------------------------

@dataclass
class StepResult:
    configuration: frozenset[str]
    emitted: list[EventInstance]
    consumed: bool
    log: list[str] = field(default_factory=list)


@dataclass
class ArmedTimer:
    name: str
    due: int
    period: int | None
    seq: int
    owner_state: tuple[str, ...]


@dataclass
class EvalEnv:
    """Runtime services a machine needs: the store and the machine registry."""

    store: ObjectStore
    machine_for: Callable[[str], Optional["Machine"]] | None = None


class _MachineScope:
    def __init__(self, machine: "Machine", args: tuple[Value, ...], env: EvalEnv):
        self.machine = machine
        self.args = args
        self.env = env

    def resolve_name(self, ident: str) -> Value:
        idx = _arg_index(ident)
        if idx is not None:
            if 1 <= idx <= len(self.args):
                return self.args[idx - 1]
            raise EvalError(f"{ident} out of range")
        if ident in self.machine.vars:
            return self.machine.vars[ident]
        raise EvalError(f"unknown variable '{ident}'")

    def resolve_attr(self, base: str, name: str) -> Value:
        if base != "self":
            raise EvalError(f"unknown attribute '{base}.{name}'")
        return self.env.store.read(self.machine.owner_id, name)

    def resolve_active(self, path: tuple[str, ...]) -> bool:
        if self.machine.spec.has_state(_dotted(path)):
            return self.machine.is_active(_dotted(path))
        if self.env.machine_for is not None and len(path) >= 2:
            other = self.env.machine_for(path[0])
            if other is not None:
                return other.is_active(_dotted(path[1:]))
        raise EvalError(f"active() path '{_dotted(path)}' does not resolve")


class _StepContext:
    """Mutable bag threaded through one initialize/dispatch call."""

    def __init__(self, machine: "Machine", args: tuple[Value, ...], env: EvalEnv,
                 now: int):
        self.machine = machine
        self.env = env
        self.now = now
        self.scope = _MachineScope(machine, args, env)
        self.queue: deque[tuple[str, tuple[Value, ...]]] = deque()
        self.emitted: list[EventInstance] = []
        self.log: list[str] = []

    def with_args(self, args: tuple[Value, ...]) -> "_StepContext":
        self.scope = _MachineScope(self.machine, args, self.env)
        return self


class Machine:
    """One running statechart instance bound to an owner object."""

    def __init__(self, spec: StatechartSpec, owner_id: str):
        if not spec._compiled:
            raise ModelError(f"statechart '{spec.name}' was not compiled")
        self.spec = spec
        self.owner_id = owner_id
        self.config: set[tuple[str, ...]] = set()
        self.vars: dict[str, Value] = {
            v.name: (v.default if v.default is not None
                     else {"int": 0, "string": "", "bool": False,
                           "ref": ObjRef(None)}[v.kind])
            for v in spec.variables
        }
        self.timers: list[ArmedTimer] = []
        self.initialized = False
        self._arm_seq = 0

    # -- lifecycle -----------------------------------------------------------

    def initialize(self, now: int = 0, env: EvalEnv | None = None) -> StepResult:
        if self.initialized:
            raise RunError(f"machine '{self.owner_id}' already initialized")
        ctx = _StepContext(self, (), env or EvalEnv(ObjectStore()), now)
        for region in self.spec.regions:
            self._enter_default(region, (region.name or "?",), ctx)
        self.initialized = True
        self._drain_internal(ctx)
        self.check_configuration()
        return StepResult(self.configuration(), ctx.emitted, True, ctx.log)

    def dispatch(self, event: EventInstance, now: int, env: EvalEnv) -> StepResult:
        if not self.initialized:
            raise RunError(f"machine '{self.owner_id}' is not initialized")
        if event.dst != self.owner_id:
            raise RunError(f"event targets '{event.dst}', not '{self.owner_id}'")
        ctx = _StepContext(self, event.args, env, now)
        ctx.queue.append((event.name, event.args))
        consumed = self._drain_internal(ctx)
        self.check_configuration()
        return StepResult(self.configuration(), ctx.emitted, consumed, ctx.log)

    def _drain_internal(self, ctx: _StepContext) -> bool:
        consumed = False
        microsteps = 0
        while ctx.queue:
            microsteps += 1
            if microsteps > MAX_MICROSTEPS:
                raise RunError(
                    f"machine '{self.owner_id}' exceeded {MAX_MICROSTEPS} microsteps")
            name, args = ctx.queue.popleft()
            ctx.with_args(args)
            consumed |= self._microstep(name, ctx)
        return consumed

    def _microstep(self, name: str, ctx: _StepContext) -> bool:
        fired = False
        for leaf in self._ordered_leaves():
            if leaf not in self.config:
                continue  # exited by an earlier region's transition
            trans = self._select_transition(leaf, name, ctx)
            if trans is None:
                continue
            self._fire(trans, ctx)
            fired = True
        return fired

    def _select_transition(self, leaf, name, ctx) -> Transition | None:
        path = leaf
        while path:
            info = self.spec.info(path)
            for trans in info.node.transitions:
                if not _trigger_matches(trans, name):
                    continue
                if trans.guard is None or E.evaluate_bool(trans.guard, ctx.scope):
                    return trans
            path = info.parent or ()
        return None

    def _fire(self, trans: Transition, ctx: _StepContext) -> None:
        self._exit_subtree(trans.exit_child, ctx)
        ctx.log.append(f"fire {_dotted(trans.source_path)} -> "
                       f"{_dotted(trans.target_path)}")
        self._run_actions(trans.actions, ctx)
        self._enter(trans.enter_chain[0], trans.enter_chain[1:], ctx, set())

    # -- exit ----------------------------------------------------------------

    def _exit_subtree(self, root: tuple[str, ...], ctx: _StepContext) -> None:
        active = [p for p in self._active_states() if p[:len(root)] == root]
        active.sort(key=lambda p: (-len(p), self.spec.info(p).ordinal))
        for path in active:
            node = self.spec.info(path).node
            self._run_actions(node.exit, ctx)
            ctx.log.append(f"exit {_dotted(path)}")
            self.timers = [t for t in self.timers if t.owner_state != path]
        self.config = {p for p in self.config if p[:len(root)] != root}

    # -- entry ---------------------------------------------------------------

    def _enter(self, path: tuple[str, ...], forced_rest: list[tuple[str, ...]],
               ctx: _StepContext, choice_guard: set) -> None:
        """Enter ``path``; descend along ``forced_rest`` where given, defaults elsewhere."""
        info = self.spec.info(path)
        node = info.node
        if node.kind == "choice":
            self._resolve_choice(path, ctx, choice_guard)
            return
        ctx.log.append(f"enter {_dotted(path)}")
        self._run_actions(node.entry, ctx)
        self._arm_timers(info, ctx.now)
        if not node.regions:
            self.config.add(path)
            return
        for region in node.regions:
            key = path if node.kind == "compound" else path + (region.name or "?",)
            if (forced_rest and forced_rest[0][:len(key)] == key
                    and len(forced_rest[0]) == len(key) + 1):
                self._enter(forced_rest[0], forced_rest[1:], ctx, choice_guard)
            else:
                self._enter_default(region, key, ctx)

    def _enter_default(self, region: Region, key: tuple[str, ...],
                       ctx: _StepContext) -> None:
        child = region.initial_state()
        self._enter(key + (child.name,), [], ctx, set())

    def _resolve_choice(self, path, ctx: _StepContext, choice_guard: set) -> None:
        if path in choice_guard:
            raise RunError(f"choice cycle through '{_dotted(path)}'")
        choice_guard.add(path)
        node = self.spec.info(path).node
        chosen = None
        for trans in node.transitions:
            if trans.is_else:
                continue
            if trans.guard is None or E.evaluate_bool(trans.guard, ctx.scope):
                chosen = trans
                break
        if chosen is None:
            chosen = next((t for t in node.transitions if t.is_else), None)
        if chosen is None:
            raise RunError(f"choice '{_dotted(path)}' has no enabled branch")
        ctx.log.append(f"choice {_dotted(path)} -> {_dotted(chosen.target_path)}")
        self._run_actions(chosen.actions, ctx)
        self._enter(chosen.enter_chain[0], chosen.enter_chain[1:], ctx, choice_guard)

    def _arm_timers(self, info: _StateInfo, now: int) -> None:
        for trans in info.node.transitions:
            if isinstance(trans.trigger, TimerTrigger):
                self._arm_seq += 1
                period = trans.trigger.ms if trans.trigger.kind == "every" else None
                self.timers.append(ArmedTimer(trans.timer_name, now + trans.trigger.ms,
                                              period, self._arm_seq, info.path))

    # -- actions ---------------------------------------------------------------

    def _run_actions(self, actions: list[Action], ctx: _StepContext) -> None:
        for action in actions:
            if isinstance(action, Assign):
                value = E.evaluate(action.value, ctx.scope)
                kind = next(v.kind for v in self.spec.variables
                            if v.name == action.name)
                if not conforms(value, kind):
                    raise RunError(f"variable '{action.name}' is {kind}, "
                                   f"got {kind_of(value)}")
                self.vars[action.name] = value
                ctx.log.append(f"{action.name} = {value!r}")
            elif isinstance(action, AssignProp):
                value = E.evaluate(action.value, ctx.scope)
                ctx.env.store.write(self.owner_id, action.prop, value)
                ctx.log.append(f"self.{action.prop} = {value!r}")
            elif isinstance(action, Raise):
                values = tuple(E.evaluate(a, ctx.scope) for a in action.args)
                ctx.queue.append((action.name, values))
                ctx.log.append(f"raise {action.name}")
            elif isinstance(action, Emit):
                target = self._resolve_emit_target(action.target, ctx.env)
                values = tuple(E.evaluate(a, ctx.scope) for a in action.args)
                cls = ctx.env.store.get_object(target).class_def
                arity = cls.event_arity(action.name)
                if arity is None:
                    raise RunError(f"'{cls.name}' does not declare event "
                                   f"'{action.name}' (emit from {self.owner_id})")
                if arity != len(values):
                    raise RunError(f"event '{action.name}' expects {arity} args, "
                                   f"got {len(values)}")
                ctx.emitted.append(EventInstance(self.owner_id, target, action.name,
                                                 values, sc_origin(self.owner_id)))
                ctx.log.append(f"emit {target}.{action.name}")

    def _resolve_emit_target(self, token: str, env: EvalEnv) -> str:
        if token == "self":
            return self.owner_id
        owner = env.store.get_object(self.owner_id)
        prop = owner.class_def.property_def(token)
        if prop is not None and prop.kind == "ref":
            ref = owner.get(token)
            if not isinstance(ref, ObjRef) or ref.id is None:
                raise RunError(f"emit target 'self.{token}' is null")
            return ref.id
        if env.store.has_object(token):
            return token
        raise RunError(f"emit target '{token}' does not resolve")

    # -- timers ---------------------------------------------------------------

    def due_timers(self, now: int) -> list[EventInstance]:
        """Collect timer events due at or before ``now``, in firing order.

        Periodic timers re-arm at ``due + period``; one-shots disarm.
        Timers disarm when their owning state is exited.
        """
        if not self.initialized:
            raise RunError(f"machine '{self.owner_id}' is not initialized")
        events: list[EventInstance] = []
        while True:
            due = [t for t in self.timers if t.due <= now]
            if not due:
                return events
            timer = min(due, key=lambda t: (t.due, t.seq))
            events.append(EventInstance(self.owner_id, self.owner_id, timer.name,
                                        (), timer_origin(self.owner_id)))
            if timer.period is not None:
                timer.due += timer.period
            else:
                self.timers.remove(timer)

    def next_due(self) -> int | None:
        return min((t.due for t in self.timers), default=None)

    # -- queries ----------------------------------------------------------------

    def is_active(self, path: str) -> bool:
        if not self.spec.has_state(path):
            raise ModelError(f"unknown state path '{path}' in '{self.spec.name}'")
        segs = tuple(path.split("."))
        return any(leaf[:len(segs)] == segs for leaf in self.config)

    def configuration(self) -> frozenset[str]:
        return frozenset(_dotted(p) for p in self.config)

    def _ordered_leaves(self) -> list[tuple[str, ...]]:
        return sorted(self.config, key=lambda p: self.spec.info(p).ordinal)

    def _active_states(self) -> set[tuple[str, ...]]:
        active: set[tuple[str, ...]] = set()
        for leaf in self.config:
            path = leaf
            while path:
                info = self.spec._info.get(path)
                if info is not None:
                    active.add(path)
                    path = info.parent or ()
                else:
                    path = path[:-1]
        return active

    def check_configuration(self) -> None:
        """Raise RunError unless the active tree is well-formed."""
        if not self.initialized and not self.config:
            return
        active = self._active_states()
        for region in self.spec.regions:
            children = [p for p in active if len(p) == 2 and p[0] == region.name]
            if len(children) != 1:
                raise RunError(f"top region '{region.name}' of '{self.owner_id}' has "
                               f"{len(children)} active children")
        for path in active:
            node = self.spec.info(path).node
            if node.kind == "compound":
                kids = [p for p in active
                        if len(p) == len(path) + 1 and p[:len(path)] == path]
                if len(kids) != 1:
                    raise RunError(f"compound '{_dotted(path)}' has {len(kids)} "
                                   f"active children")
            elif node.kind == "orthogonal":
                for region in node.regions:
                    key = path + (region.name or "?",)
                    kids = [p for p in active
                            if len(p) == len(key) + 1 and p[:len(key)] == key]
                    if len(kids) != 1:
                        raise RunError(f"region '{_dotted(key)}' has {len(kids)} "
                                       f"active children")
            elif node.kind == "choice":
                raise RunError(f"choice '{_dotted(path)}' appears in configuration")
            elif path in self.config and node.kind not in ("basic", "final"):
                raise RunError(f"non-leaf '{_dotted(path)}' recorded as leaf")

    # -- snapshot ------------------------------------------------------------------

    def snapshot(self) -> dict:
        from .values import value_to_json
        return {
            "config": sorted(_dotted(p) for p in self.config),
            "vars": {k: value_to_json(v) for k, v in self.vars.items()},
            "timers": [[t.name, t.due, t.period, t.seq, _dotted(t.owner_state)]
                       for t in self.timers],
            "initialized": self.initialized,
            "arm_seq": self._arm_seq,
        }

    def restore(self, data: dict) -> None:
        from .values import value_from_json
        self.config = {tuple(p.split(".")) for p in data["config"]}
        self.vars.update({k: value_from_json(v) for k, v in data["vars"].items()})
        self.timers = [ArmedTimer(n, due, period, seq, tuple(owner.split(".")))
                       for n, due, period, seq, owner in data["timers"]]
        self.initialized = data["initialized"]
        self._arm_seq = data["arm_seq"]


def _trigger_matches(trans: Transition, name: str) -> bool:
    if isinstance(trans.trigger, EventTrigger):
        return trans.trigger.name == name
    if isinstance(trans.trigger, TimerTrigger):
        return trans.timer_name == name
    return False


def instantiate_machine(spec: StatechartSpec, owner_id: str,
                        store: ObjectStore) -> Machine:
    """Create a machine for ``owner_id``; the owner's class must match the spec."""
    owner = store.get_object(owner_id)
    if owner.class_def.name != spec.owner_class:
        raise ModelError(f"class-mismatch: '{owner_id}' is {owner.class_def.name}, "
                         f"spec '{spec.name}' is for {spec.owner_class}")
    return Machine(spec, owner_id)
