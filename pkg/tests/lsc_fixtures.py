"""Chart fixtures used by the lsc and playout tests.

The delay trio encodes the classic pattern: chart one demands e2/e3 (any
order) then e4 after a sync; chart two demands e6 after e5; chart three
forbids e4 between e1 and e6. Net effect: e4 is delayed until e5 arrives.
"""

from __future__ import annotations

from rxm import expr as E
from rxm.events import EventInstance
from rxm.lsc import (
    AllBinding,
    Binder,
    ChartSpec,
    ConcreteBinding,
    Cond,
    ExprTerm,
    Forbidden,
    Lifeline,
    Loop,
    Message,
    Sync,
    SymbolicBinding,
)
from rxm.objects import ClassDef, EventDecl, ObjectStore, PropertyDef


def comp_store() -> ObjectStore:
    store = ObjectStore()
    store.register_class(ClassDef(
        "Comp",
        signals=[EventDecl(f"e{n}", 0) for n in range(1, 7)],
    ))
    for oid in ("a", "b", "c", "d"):
        store.create_object("Comp", oid, {})
    return store


def conc(name: str, obj: str, cls: str = "Comp") -> Lifeline:
    return Lifeline(name, cls, ConcreteBinding(obj))


def chart_one(classes=None) -> ChartSpec:
    spec = ChartSpec("ChartOne", [
        conc("A", "a"), conc("B", "b"), conc("C", "c"), conc("D", "d"),
    ], [
        Message("A", "B", "e1", mode="mon", temp="cold", label="m1"),
        Message("A", "C", "e2", mode="exec", temp="hot"),
        Message("B", "D", "e3", mode="exec", temp="hot"),
        Sync(["A", "B", "C", "D"]),
        Message("A", "B", "e4", mode="exec", temp="hot"),
    ])
    spec.compile_or_raise(classes)
    return spec


def chart_two(classes=None) -> ChartSpec:
    spec = ChartSpec("ChartTwo", [conc("A", "a"), conc("B", "b")], [
        Message("A", "B", "e5", mode="mon", temp="cold"),
        Message("A", "B", "e6", mode="exec", temp="hot"),
    ])
    spec.compile_or_raise(classes)
    return spec


def chart_three(classes=None) -> ChartSpec:
    spec = ChartSpec("ChartThree", [conc("A", "a"), conc("B", "b")], [
        Message("A", "B", "e1", mode="mon", temp="cold", label="f1"),
        Message("A", "B", "e6", mode="mon", temp="cold", label="f2"),
        Forbidden("A", "B", "e4", args=None, scope_from="f1", scope_to="f2"),
    ])
    spec.compile_or_raise(classes)
    return spec


def ev(name: str, src: str = "a", dst: str = "b") -> EventInstance:
    return EventInstance(src, dst, name)


def alert_world():
    """Symbolic + multiplicity fixture: every terminal checks an approach."""
    store = ObjectStore()
    store.register_class(ClassDef(
        "Car",
        properties=[PropertyDef("dest", "int"), PropertyDef("terminal", "int")],
        signals=[EventDecl("move", 0), EventDecl("approaching", 1),
                 EventDecl("alert100", 0)],
    ))
    store.register_class(ClassDef(
        "Terminal", properties=[PropertyDef("id", "int")],
    ))
    store.register_class(ClassDef("Manager"))
    store.create_object("Terminal", "terminal1", {"id": 1})
    store.create_object("Terminal", "terminal2", {"id": 2})
    store.create_object("Car", "car1", {"dest": 2})
    store.create_object("Manager", "mgr", {})

    spec = ChartSpec("Alert", [
        Lifeline("car", "Car", SymbolicBinding(None)),
        Lifeline("t", "Terminal", AllBinding()),
        Lifeline("m", "Manager", ConcreteBinding("mgr")),
    ], [
        Message("env", "car", "move", mode="mon", temp="cold"),
        Loop("all", var="t", body=[
            Cond(["t"], E.Binary("==", E.Attr("t", "id"), E.Attr("car", "dest")),
                 temp="cold"),
            Message("t", "car", "approaching", [ExprTerm(E.Attr("t", "id"))],
                    mode="exec", temp="hot"),
        ]),
        Message("m", "car", "alert100", mode="exec", temp="hot"),
    ])
    spec.compile_or_raise(store.classes)
    return store, spec


def arrival_chart(classes=None) -> ChartSpec:
    """Symbolic binding-expression fixture: the approached terminal binds."""
    spec = ChartSpec("Arrival", [
        Lifeline("car", "Car", SymbolicBinding(None)),
        Lifeline("t", "Terminal",
                 SymbolicBinding(E.Binary("==", E.Attr("self", "id"),
                                          E.Attr("car", "terminal")))),
    ], [
        Message("car", "car", "startArrival", mode="mon", temp="cold"),
        Message("car", "t", "arriveReq", [Binder("n")], mode="mon", temp="cold"),
    ])
    spec.compile_or_raise(classes)
    return spec
