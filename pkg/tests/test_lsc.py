import random


from rxm import expr as E
from rxm.events import EventInstance
from rxm.lsc import (
    Binder,
    ChartSpec,
    ConcreteBinding,
    Cond,
    ExprTerm,
    Forbidden,
    Lifeline,
    Loop,
    Message,
    try_activate,
    validate_chart,
)
from rxm.objects import ClassDef, EventDecl, ObjectStore, PropertyDef

from lsc_fixtures import (
    alert_world,
    arrival_chart,
    chart_one,
    chart_three,
    chart_two,
    comp_store,
    conc,
    ev,
)


def activate_one(spec, event, store):
    outcomes = try_activate(spec, event, store)
    assert len(outcomes) == 1
    copy, result = outcomes[0]
    assert result.kind == "progressed"
    return copy


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def test_delay_trio_validates():
    store = comp_store()
    for build in (chart_one, chart_two, chart_three):
        assert build(store.classes) is not None


def test_executed_minimal_is_invalid():
    spec = ChartSpec("Bad", [conc("A", "a"), conc("B", "b")], [
        Message("A", "B", "e1", mode="exec", temp="hot"),
    ])
    diags = validate_chart(spec)
    assert any("monitored message" in d for d in diags)


def test_forbid_scope_must_stay_in_one_block():
    spec = ChartSpec("Bad2", [conc("A", "a"), conc("B", "b")], [
        Message("A", "B", "e1", mode="mon", label="m1"),
        Loop("bound", bound=2, body=[
            Message("A", "B", "e2", mode="mon", label="m2"),
        ]),
        Forbidden("A", "B", "e4", scope_from="m1", scope_to="m2"),
    ])
    diags = validate_chart(spec)
    assert any("crosses a block boundary" in d for d in diags)


def test_expression_property_references_validated():
    store = comp_store()
    spec = ChartSpec("BadExpr", [conc("A", "a"), conc("B", "b")], [
        Message("A", "B", "e1", mode="mon"),
        Cond(["A"], E.Binary("==", E.Attr("A", "voltage"), E.Lit(1))),
    ])
    diags = validate_chart(spec, store.classes)
    assert any("no property 'voltage'" in d for d in diags)


def test_env_cannot_send_executed():
    spec = ChartSpec("Bad3", [conc("A", "a")], [
        Message("env", "A", "e1", mode="mon"),
        Message("env", "A", "e2", mode="exec"),
    ])
    diags = validate_chart(spec)
    assert any("executed messages cannot come from env" in d for d in diags)


# ---------------------------------------------------------------------------
# activation
# ---------------------------------------------------------------------------

def test_activation_binds_and_consumes_minimal():
    store = comp_store()
    copy = activate_one(chart_one(store.classes), ev("e1"), store)
    assert copy.cut["A"] == 1 and copy.cut["B"] == 1
    assert copy.cut["C"] == 0


def test_non_matching_event_yields_no_copies():
    store = comp_store()
    assert try_activate(chart_one(store.classes), ev("e7"), store) == []


def test_symbolic_activation_binds_participants():
    store = ObjectStore()
    store.register_class(ClassDef("Car", properties=[
        PropertyDef("terminal", "int")],
        signals=[EventDecl("startArrival", 0), EventDecl("arriveReq", 1)]))
    store.register_class(ClassDef("Terminal", properties=[PropertyDef("id", "int")],
                                  signals=[EventDecl("arriveReq", 1)]))
    store.create_object("Terminal", "terminal1", {"id": 1})
    store.create_object("Terminal", "terminal2", {"id": 2})
    store.create_object("Car", "car1", {"terminal": 2})
    spec = arrival_chart(store.classes)
    copy = activate_one(spec, EventInstance("car1", "car1", "startArrival"), store)
    assert copy.ll_bindings == {"car": "car1"}
    # the terminal lifeline resolves through its binding expression
    enabled = copy.enabled_messages(store)
    assert [m.name for m, *_ in enabled] == ["arriveReq"]


# ---------------------------------------------------------------------------
# advance
# ---------------------------------------------------------------------------

def test_e2_e3_commute_then_sync_gates_e4():
    store = comp_store()
    spec = chart_one(store.classes)
    for first, second in ((ev("e2", "a", "c"), ev("e3", "b", "d")),
                          (ev("e3", "b", "d"), ev("e2", "a", "c"))):
        copy = activate_one(spec, ev("e1"), store)
        assert copy.advance(first, store).kind == "progressed"
        assert copy.advance(second, store).kind == "progressed"
        enabled = copy.enabled_messages(store)
        assert [(m.name, mode) for m, mode, *_ in enabled] == [("e4", "exec")]


def test_out_of_order_event_violates_by_temperature():
    store = comp_store()
    copy = activate_one(chart_one(store.classes), ev("e1"), store)
    result = copy.advance(ev("e4"), store)  # e4 is in the chart, not enabled
    assert result.kind == "hot-violation"
    assert result.violation.kind == "hot"
    assert copy.status == "aborted"


def test_unrelated_event_is_irrelevant():
    store = comp_store()
    copy = activate_one(chart_one(store.classes), ev("e1"), store)
    assert copy.advance(ev("e9"), store).kind == "irrelevant"


def test_completion_discards():
    store = comp_store()
    copy = activate_one(chart_two(store.classes), ev("e5"), store)
    result = copy.advance(ev("e6"), store)
    assert result.kind == "completed"
    assert copy.status == "completed"
    # completed copies are inert
    before = copy.cut_snapshot()
    assert copy.advance(ev("e6"), store).kind == "irrelevant"
    assert copy.cut_snapshot() == before
    assert copy.enabled_messages(store) == []


# ---------------------------------------------------------------------------
# blocking / forbidden
# ---------------------------------------------------------------------------

def test_forbidden_blocks_until_release():
    store = comp_store()
    copy = activate_one(chart_three(store.classes), ev("e1"), store)
    assert copy.is_blocked(ev("e4"), store) is True
    assert copy.is_blocked(ev("e2", "a", "c"), store) is False
    result = copy.advance(ev("e6"), store)
    assert result.kind == "completed"
    assert copy.is_blocked(ev("e4"), store) is False


def test_forbidden_violation_reports_and_aborts():
    store = comp_store()
    copy = activate_one(chart_three(store.classes), ev("e1"), store)
    result = copy.advance(ev("e4"), store)
    assert result.kind == "forbidden-violation"
    assert result.violation.kind == "forbidden"
    assert copy.status == "aborted"


def test_blocking_via_message_order_encoding():
    # same captioned behavior, encoded with a hot out-of-order message
    store = comp_store()
    spec = ChartSpec("OrderEncoding", [conc("A", "a"), conc("B", "b")], [
        Message("A", "B", "e1", mode="mon", temp="cold"),
        Message("A", "B", "e6", mode="mon", temp="cold"),
        Message("A", "B", "e4", mode="mon", temp="hot"),
    ])
    spec.compile_or_raise(store.classes)
    copy = activate_one(spec, ev("e1"), store)
    assert copy.is_blocked(ev("e4"), store) is True
    assert copy.advance(ev("e6"), store).kind == "progressed"
    assert copy.is_blocked(ev("e4"), store) is False
    assert copy.advance(ev("e4"), store).kind == "completed"


# ---------------------------------------------------------------------------
# unify
# ---------------------------------------------------------------------------

def test_unify_literal_mismatch_fails():
    store = comp_store()
    spec = ChartSpec("Lit", [conc("A", "a"), conc("B", "b")], [
        Message("A", "B", "e1", mode="mon"),
        Message("A", "B", "e2", [ExprTerm(E.Lit(1))], mode="mon"),
    ])
    spec.compile_or_raise(None)
    copy = activate_one(spec, ev("e1"), store)
    msg = spec.body[1]
    assert copy.unify(msg, EventInstance("a", "b", "e2", (1,)), store) is not None
    assert copy.unify(msg, EventInstance("a", "b", "e2", (2,)), store) is None


def test_unify_binder_extends_and_pins():
    store = comp_store()
    spec = ChartSpec("Bind", [conc("A", "a"), conc("B", "b")], [
        Message("A", "B", "e1", mode="mon"),
        Message("A", "B", "e2", [Binder("n")], mode="mon"),
        Message("A", "B", "e3", [Binder("n")], mode="mon"),
    ])
    spec.compile_or_raise(None)
    copy = activate_one(spec, ev("e1"), store)
    assert copy.advance(EventInstance("a", "b", "e2", (3,)), store).kind == "progressed"
    assert copy.var_bindings["n"] == 3
    # once bound, the variable never rebinds: a mismatching value unifies with
    # nothing in the chart, so the event is irrelevant and the cut holds still
    assert copy.advance(EventInstance("a", "b", "e3", (4,)), store).kind == "irrelevant"
    assert copy.var_bindings["n"] == 3
    assert copy.advance(EventInstance("a", "b", "e3", (3,)), store).kind == "completed"


def test_binding_immutability_over_random_runs():
    store = comp_store()
    spec = chart_one(store.classes)
    alphabet = [ev("e1"), ev("e2", "a", "c"), ev("e3", "b", "d"), ev("e4"),
                ev("e5"), ev("e6")]
    rng = random.Random(7)
    for _ in range(50):
        copy = activate_one(spec, ev("e1"), store)
        seen = dict(copy.ll_bindings)
        for _ in range(6):
            copy.advance(rng.choice(alphabet), store)
            for k, v in seen.items():
                assert copy.ll_bindings.get(k) == v


def test_cut_monotonicity_over_random_runs():
    store = comp_store()
    spec = chart_one(store.classes)
    alphabet = [ev("e2", "a", "c"), ev("e3", "b", "d"), ev("e4"), ev("e6")]
    rng = random.Random(11)
    for _ in range(50):
        copy = activate_one(spec, ev("e1"), store)
        last = dict(copy.cut)
        for _ in range(8):
            copy.advance(rng.choice(alphabet), store)
            assert all(copy.cut[k] >= last[k] for k in last)
            last = dict(copy.cut)


def test_advance_replay_is_deterministic():
    store = comp_store()
    spec = chart_one(store.classes)
    sequence = [ev("e3", "b", "d"), ev("e2", "a", "c"), ev("e9"), ev("e4")]

    def run():
        copy = activate_one(spec, ev("e1"), store)
        kinds = [copy.advance(e, store).kind for e in sequence]
        return kinds, copy.cut_snapshot(), copy.status

    assert run() == run()


# ---------------------------------------------------------------------------
# loops / multiplicity
# ---------------------------------------------------------------------------

def test_all_loop_iterates_instances_with_participation_cond():
    store, spec = alert_world()
    copy = activate_one(spec, EventInstance("env", "car1", "move"), store)
    # terminal1 opted out (dest mismatch); terminal2 offers approaching(2)
    enabled = copy.enabled_messages(store)
    assert len(enabled) == 1
    msg, mode, temp, event = enabled[0]
    assert (msg.name, mode, temp) == ("approaching", "exec", "hot")
    assert event == EventInstance("terminal2", "car1", "approaching", (2,),
                                  event.origin)
    result = copy.advance(event, store)
    assert result.kind == "progressed"
    enabled = copy.enabled_messages(store)
    assert [m.name for m, *_ in enabled] == ["alert100"]
    final = copy.enabled_messages(store)[0][3]
    assert copy.advance(final, store).kind == "completed"


def test_bound_loop_counts_completed_bodies():
    store = comp_store()
    spec = ChartSpec("Twice", [conc("A", "a"), conc("B", "b")], [
        Message("A", "B", "e1", mode="mon"),
        Loop("bound", bound=2, body=[Message("A", "B", "e2", mode="mon")]),
        Message("A", "B", "e3", mode="mon"),
    ])
    spec.compile_or_raise(store.classes)
    copy = activate_one(spec, ev("e1"), store)
    assert copy.advance(ev("e2"), store).kind == "progressed"
    assert copy.advance(ev("e2"), store).kind == "progressed"
    # loop exhausted; a third e2 is out of order now
    assert copy.advance(ev("e2"), store).is_violation is True


def test_zero_bound_loop_skips_immediately():
    store = comp_store()
    spec = ChartSpec("Never", [conc("A", "a"), conc("B", "b")], [
        Message("A", "B", "e1", mode="mon"),
        Loop("bound", bound=0, body=[Message("A", "B", "e2", mode="mon")]),
        Message("A", "B", "e3", mode="mon"),
    ])
    spec.compile_or_raise(store.classes)
    copy = activate_one(spec, ev("e1"), store)
    assert [m.name for m, *_ in copy.enabled_messages(store)] == ["e3"]


def test_while_loop_reevaluates_each_head():
    store = comp_store()
    store.register_class(ClassDef("Gate", properties=[PropertyDef("open", "bool")]))
    store.create_object("Gate", "g", {"open": True})
    spec = ChartSpec("While", [conc("A", "a"), conc("B", "b"),
                               Lifeline("G", "Gate", ConcreteBinding("g"))], [
        Message("A", "B", "e1", mode="mon"),
        Loop("while", expr=E.Attr("G", "open"), body=[
            Message("A", "B", "e2", mode="mon"),
            Cond(["G"], E.Lit(True)),
        ]),
        Message("A", "B", "e3", mode="mon"),
    ])
    spec.compile_or_raise(store.classes)
    copy = activate_one(spec, ev("e1"), store)
    assert copy.advance(ev("e2"), store).kind == "progressed"
    store.write("g", "open", False)
    assert copy.advance(ev("e2"), store).kind == "progressed"
    # gate closed: the loop finished after that body, e3 is next
    assert [m.name for m, *_ in copy.enabled_messages(store)] == ["e3"]
    assert copy.advance(ev("e3"), store).kind == "completed"
