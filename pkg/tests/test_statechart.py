import pytest

from rxm import expr as E
from rxm.errors import ModelError, RunError
from rxm.events import EventInstance
from rxm.objects import ClassDef, EventDecl, ObjectStore
from rxm.statechart import (
    Assign,
    EvalEnv,
    EventTrigger,
    Machine,
    Raise,
    Region,
    StateNode,
    StatechartSpec,
    TimerTrigger,
    Transition,
    VarDecl,
    instantiate_machine,
)

from helpers import platform_world, switch_world


def ev(src, dst, name, *args):
    return EventInstance(src, dst, name, tuple(args))


# ---------------------------------------------------------------------------
# instantiation / initialization
# ---------------------------------------------------------------------------

def test_instantiate_on_matching_owner():
    store, spec = platform_world()
    machine = instantiate_machine(spec, "pm1", store)
    assert machine.configuration() == frozenset()
    assert not machine.initialized


def test_instantiate_class_mismatch():
    store, spec = platform_world()
    with pytest.raises(ModelError, match="class-mismatch"):
        instantiate_machine(spec, "terminal1", store)


def test_initialize_platform_manager_configuration():
    # hand-simulated: each region enters its first/initial state
    store, spec = platform_world()
    machine = instantiate_machine(spec, "pm1", store)
    machine.initialize(0, EvalEnv(store))
    assert machine.configuration() == frozenset(
        {"main.Idle", "Platform_1.Free", "Platform_2.Free", "Entrance_1.Free"})


def test_initialize_switch_no_emissions():
    store, spec = switch_world()
    machine = instantiate_machine(spec, "switch1", store)
    result = machine.initialize(0, EvalEnv(store))
    assert machine.configuration() == frozenset({"main.off"})
    assert result.emitted == []


def test_initialize_twice_is_error():
    store, spec = switch_world()
    machine = instantiate_machine(spec, "switch1", store)
    machine.initialize(0, EvalEnv(store))
    with pytest.raises(RunError, match="already initialized"):
        machine.initialize(0, EvalEnv(store))


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def test_switch_click_toggles_and_emits():
    store, spec = switch_world()
    machine = instantiate_machine(spec, "switch1", store)
    machine.initialize(0, EvalEnv(store))
    result = machine.dispatch(ev("env", "switch1", "click"), 0, EvalEnv(store))
    assert machine.configuration() == frozenset({"main.on"})
    assert [e.name for e in result.emitted] == ["toggle"]
    assert result.emitted[0].dst == "controller1"
    assert result.emitted[0].origin == "sc:switch1"
    assert result.consumed


def test_connect_segment_stores_args_and_allocates():
    store, spec = platform_world()
    machine = instantiate_machine(spec, "pm1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    result = machine.dispatch(ev("env", "pm1", "connectSegment", 5, "entry", 1), 0, env)
    assert machine.vars["carID"] == 5
    assert machine.vars["segType"] == "entry"
    assert machine.vars["dir"] == 1
    assert machine.is_active("main.connectingSegment")
    # choice picked Platform_1, occupy fired in a later microstep of the same call
    assert machine.is_active("Platform_1.Busy")
    assert machine.is_active("Entrance_1.Busy")
    assert [e.name for e in result.emitted] == ["platformAllocated"]
    assert result.emitted[0].args == (1,)
    assert result.emitted[0].dst == "terminal1"


def test_second_allocation_goes_to_platform_2():
    store, spec = platform_world()
    machine = instantiate_machine(spec, "pm1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    machine.dispatch(ev("env", "pm1", "hold1"), 0, env)
    result = machine.dispatch(ev("env", "pm1", "connectSegment", 9, "entry", 0), 0, env)
    assert result.emitted[0].args == (2,)
    assert machine.is_active("Platform_2.Busy")


def test_unmatched_event_not_consumed():
    store, spec = switch_world()
    machine = instantiate_machine(spec, "switch1", store)
    machine.initialize(0, EvalEnv(store))
    before = machine.configuration()
    result = machine.dispatch(ev("env", "switch1", "click"), 0, EvalEnv(store))
    assert result.consumed
    # an undeclared-but-delivered name simply does not match any trigger
    result = machine.dispatch(ev("env", "switch1", "nonsense"), 0, EvalEnv(store))
    assert not result.consumed
    assert result.emitted == []
    assert machine.configuration() != before  # still the post-click config


def test_busy_platforms_choice_takes_else_to_trying():
    store, spec = platform_world()
    machine = instantiate_machine(spec, "pm1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    machine.dispatch(ev("env", "pm1", "hold1"), 0, env)
    machine.dispatch(ev("env", "pm1", "hold2"), 0, env)
    result = machine.dispatch(ev("env", "pm1", "connectSegment", 5, "x", 1), 0, env)
    assert machine.is_active("main.connectingSegment.trying")
    assert result.emitted == []
    assert machine.next_due() == 1000


def test_disconnect_frees_allocated_platform():
    store, spec = platform_world()
    machine = instantiate_machine(spec, "pm1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    machine.dispatch(ev("env", "pm1", "connectSegment", 5, "entry", 1), 0, env)
    machine.dispatch(ev("env", "pm1", "disconnect"), 0, env)
    assert machine.configuration() == frozenset(
        {"main.Idle", "Platform_1.Free", "Platform_2.Free", "Entrance_1.Free"})


# ---------------------------------------------------------------------------
# priority and microsteps
# ---------------------------------------------------------------------------

def two_level_spec():
    spec = StatechartSpec(
        "Nested", "Thing",
        inputs=[("go", 0)],
        regions=[Region("r", [
            StateNode("outer", kind="compound",
                      regions=[Region(None, [
                          StateNode("inner", transitions=[
                              Transition(EventTrigger("go"), "inner2")]),
                          StateNode("inner2"),
                      ])],
                      transitions=[Transition(EventTrigger("go"), "other")]),
            StateNode("other"),
        ])],
    )
    store = ObjectStore()
    store.register_class(ClassDef("Thing", signals=[EventDecl("go", 0)]))
    store.create_object("Thing", "t1", {})
    spec.compile_or_raise(store.classes)
    return store, spec


def test_innermost_transition_wins():
    store, spec = two_level_spec()
    machine = instantiate_machine(spec, "t1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    machine.dispatch(ev("env", "t1", "go"), 0, env)
    assert machine.configuration() == frozenset({"r.outer.inner2"})
    # no inner transition matches now; the ancestor fires
    machine.dispatch(ev("env", "t1", "go"), 0, env)
    assert machine.configuration() == frozenset({"r.other"})


def test_internal_raise_runs_within_same_dispatch():
    store = ObjectStore()
    store.register_class(ClassDef("Thing", signals=[EventDecl("go", 0)]))
    store.create_object("Thing", "t1", {})
    spec = StatechartSpec(
        "Chain", "Thing",
        variables=[VarDecl("n", "int")],
        inputs=[("go", 0), ("step", 0)],
        regions=[Region("r", [
            StateNode("a", transitions=[
                Transition(EventTrigger("go"), "b", actions=[Raise("step")])]),
            StateNode("b", transitions=[
                Transition(EventTrigger("step"), "c",
                           actions=[Assign("n", E.Lit(7))])]),
            StateNode("c"),
        ])],
    )
    spec.compile_or_raise(store.classes)
    machine = instantiate_machine(spec, "t1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    result = machine.dispatch(ev("env", "t1", "go"), 0, env)
    assert machine.configuration() == frozenset({"r.c"})
    assert machine.vars["n"] == 7
    assert result.consumed


def test_microstep_bound_reported():
    store = ObjectStore()
    store.register_class(ClassDef("Thing", signals=[EventDecl("go", 0)]))
    store.create_object("Thing", "t1", {})
    spec = StatechartSpec(
        "Loop", "Thing",
        inputs=[("go", 0), ("again", 0)],
        regions=[Region("r", [
            StateNode("a", transitions=[
                Transition(EventTrigger("go"), "a", actions=[Raise("again")]),
                Transition(EventTrigger("again"), "a", actions=[Raise("again")]),
            ]),
        ])],
    )
    spec.compile_or_raise(store.classes)
    machine = instantiate_machine(spec, "t1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    with pytest.raises(RunError, match="microsteps"):
        machine.dispatch(ev("env", "t1", "go"), 0, env)


def test_determinism_of_dispatch():
    def run():
        store, spec = platform_world()
        machine = instantiate_machine(spec, "pm1", store)
        env = EvalEnv(store)
        machine.initialize(0, env)
        r = machine.dispatch(ev("env", "pm1", "connectSegment", 5, "e", 1), 0, env)
        return (machine.configuration(), tuple(e.key for e in r.emitted),
                r.consumed, tuple(r.log))
    assert run() == run()


def deep_target_spec():
    store = ObjectStore()
    store.register_class(ClassDef("Thing", signals=[
        EventDecl("dive", 0), EventDecl("up", 0)]))
    store.create_object("Thing", "t1", {})
    spec = StatechartSpec(
        "Deep", "Thing",
        inputs=[("dive", 0), ("up", 0)],
        regions=[Region("r", [
            StateNode("idle", transitions=[
                Transition(EventTrigger("dive"), "split.right.r2"),
            ]),
            StateNode("split", kind="orthogonal", regions=[
                Region("left", [StateNode("l1"), StateNode("l2")]),
                Region("right", [
                    StateNode("r1"),
                    StateNode("r2", transitions=[
                        Transition(EventTrigger("up"), "split")]),
                ]),
            ]),
        ])],
    )
    spec.compile_or_raise(store.classes)
    return store, spec


def test_deep_target_into_orthogonal_state():
    # an explicit target inside one region forces that region's child;
    # sibling regions enter their defaults
    store, spec = deep_target_spec()
    machine = instantiate_machine(spec, "t1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    machine.dispatch(ev("env", "t1", "dive"), 0, env)
    assert machine.configuration() == frozenset({"r.split.left.l1",
                                                 "r.split.right.r2"})


def test_transition_to_ancestor_reenters_defaults():
    store, spec = deep_target_spec()
    machine = instantiate_machine(spec, "t1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    machine.dispatch(ev("env", "t1", "dive"), 0, env)
    # r2's transition targets the orthogonal ancestor itself: the whole
    # state exits and re-enters through every region's initial child
    machine.dispatch(ev("env", "t1", "up"), 0, env)
    assert machine.configuration() == frozenset({"r.split.left.l1",
                                                 "r.split.right.r1"})
    machine.check_configuration()


# ---------------------------------------------------------------------------
# is_active
# ---------------------------------------------------------------------------

def test_is_active_closure_and_errors():
    store, spec = platform_world()
    machine = instantiate_machine(spec, "pm1", store)
    machine.initialize(0, EvalEnv(store))
    assert machine.is_active("Platform_1.Free")
    assert not machine.is_active("Platform_1.Busy")
    with pytest.raises(ModelError, match="unknown state path"):
        machine.is_active("Platform_1.Gone")


# ---------------------------------------------------------------------------
# timers
# ---------------------------------------------------------------------------

def arm_every_machine():
    store = ObjectStore()
    store.register_class(ClassDef("Thing", signals=[EventDecl("kick", 0)]))
    store.create_object("Thing", "t1", {})
    spec = StatechartSpec(
        "Ticker", "Thing",
        inputs=[("kick", 0)],
        regions=[Region("r", [
            StateNode("s", transitions=[
                Transition(TimerTrigger("every", 1000), "s"),
                Transition(EventTrigger("kick"), "idle"),
            ]),
            StateNode("idle"),
        ])],
    )
    spec.compile_or_raise(store.classes)
    machine = instantiate_machine(spec, "t1", store)
    machine.initialize(0, EvalEnv(store))
    return store, machine


def brute_force_fire_times(start, period, now):
    # independent timeline oracle: walk every ms and record fire points
    times, due = [], start + period
    for t in range(now + 1):
        if t == due:
            times.append(t)
            due += period
    return times


def test_every_timer_catches_up_without_polls():
    store, machine = arm_every_machine()
    fired = machine.due_timers(1000)
    assert len(fired) == 1
    # fresh machine: 3500ms with no intermediate polls -> 1000, 2000, 3000
    store2, machine2 = arm_every_machine()
    fired2 = machine2.due_timers(3500)
    assert len(fired2) == len(brute_force_fire_times(0, 1000, 3500)) == 3
    assert machine2.next_due() == 4000


def test_after_timer_exact_boundary():
    store = ObjectStore()
    store.register_class(ClassDef("Thing", signals=[EventDecl("arrive", 0)]))
    store.create_object("Thing", "t1", {})
    spec = StatechartSpec(
        "Delay", "Thing",
        inputs=[("arrive", 0)],
        regions=[Region("r", [
            StateNode("wait", transitions=[
                Transition(EventTrigger("arrive"), "idle")]),
            StateNode("idle", transitions=[
                Transition(TimerTrigger("after", 90000), "wait")]),
        ])],
    )
    spec.compile_or_raise(store.classes)
    machine = instantiate_machine(spec, "t1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    machine.dispatch(ev("env", "t1", "arrive"), 10, env)  # enters idle at t=10
    assert machine.due_timers(90009) == []
    fired = machine.due_timers(90010)
    assert len(fired) == 1
    assert fired[0].origin == "timer:t1"
    # one-shot: disarmed after firing
    assert machine.due_timers(200000) == []


def test_timer_disarmed_on_state_exit():
    store, machine = arm_every_machine()
    env = EvalEnv(store)
    machine.dispatch(ev("env", "t1", "kick"), 500, env)  # exits the timed state
    assert machine.due_timers(10_000) == []


def test_timer_event_fires_transition():
    store, machine = arm_every_machine()
    env = EvalEnv(store)
    fired = machine.due_timers(1000)
    result = machine.dispatch(fired[0], 1000, env)
    assert result.consumed
    # self-transition re-entered the state, re-arming relative to now
    assert machine.next_due() == 2000


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def test_validation_catches_bad_specs():
    bad = StatechartSpec(
        "Bad", "Thing",
        inputs=[("go", 0)],
        regions=[Region("r", [
            StateNode("a", transitions=[Transition(EventTrigger("go"), "nowhere")]),
        ])],
    )
    diags = bad.compile()
    assert any("unknown transition target" in d for d in diags)

    undeclared = StatechartSpec(
        "Bad2", "Thing",
        regions=[Region("r", [
            StateNode("a", transitions=[Transition(EventTrigger("mystery"), "a")]),
        ])],
    )
    diags = undeclared.compile()
    assert any("not a declared input" in d for d in diags)

    triggerless = StatechartSpec(
        "Bad3", "Thing",
        regions=[Region("r", [
            StateNode("a", transitions=[Transition(None, "a")]),
        ])],
    )
    diags = triggerless.compile()
    assert any("triggerless" in d for d in diags)


def test_configuration_validity_after_steps():
    store, spec = platform_world()
    machine = instantiate_machine(spec, "pm1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    machine.check_configuration()
    for name, args in [("hold1", ()), ("connectSegment", (5, "e", 1)),
                       ("disconnect", ()), ("release", (1,))]:
        machine.dispatch(ev("env", "pm1", name, *args), 0, env)
        machine.check_configuration()


def test_snapshot_restore_round_trip():
    store, spec = platform_world()
    machine = instantiate_machine(spec, "pm1", store)
    env = EvalEnv(store)
    machine.initialize(0, env)
    machine.dispatch(ev("env", "pm1", "hold1"), 0, env)
    machine.dispatch(ev("env", "pm1", "hold2"), 0, env)
    machine.dispatch(ev("env", "pm1", "connectSegment", 5, "e", 1), 0, env)
    snap = machine.snapshot()
    clone = Machine(spec, "pm1")
    clone.restore(snap)
    assert clone.configuration() == machine.configuration()
    assert clone.vars == machine.vars
    assert clone.due_timers(1000)[0].name == machine.due_timers(1000)[0].name
