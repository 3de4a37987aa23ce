"""Programmatic model fixtures shared by the unit tests."""

from __future__ import annotations

from rxm import expr as E
from rxm.objects import ClassDef, EventDecl, ObjectStore, PropertyDef
from rxm.statechart import (
    Assign,
    Emit,
    EventTrigger,
    Raise,
    Region,
    StateNode,
    StatechartSpec,
    TimerTrigger,
    Transition,
    VarDecl,
)


def active(path: str) -> E.ActiveQuery:
    return E.ActiveQuery(tuple(path.split(".")))


def lit(v) -> E.Lit:
    return E.Lit(v)


def platform_classes() -> list[ClassDef]:
    return [
        ClassDef(
            "Terminal",
            properties=[PropertyDef("id", "int")],
            signals=[EventDecl("arriveReq", 1), EventDecl("platformAllocated", 1)],
        ),
        ClassDef(
            "PlatformMgr",
            properties=[PropertyDef("tid", "int"), PropertyDef("term", "ref")],
            signals=[
                EventDecl("connectSegment", 3),
                EventDecl("hold1", 0),
                EventDecl("hold2", 0),
                EventDecl("release", 1),
                EventDecl("disconnect", 0),
            ],
        ),
    ]


def platform_world() -> tuple[ObjectStore, StatechartSpec]:
    """A station platform manager: four concurrent regions, choice, 1s retry."""
    from rxm.values import ObjRef
    store = ObjectStore()
    for cls in platform_classes():
        store.register_class(cls)
    store.create_object("Terminal", "terminal1", {"id": 1})
    store.create_object("PlatformMgr", "pm1",
                        {"tid": 1, "term": ObjRef("terminal1")})

    def platform_region(n: int) -> Region:
        hold = f"hold{n}"
        return Region(f"Platform_{n}", [
            StateNode("Free", transitions=[
                Transition(EventTrigger(hold), "Busy"),
                Transition(EventTrigger("occupy"), "Busy",
                           guard=E.Binary("==", E.Name("alloc"), lit(n))),
            ]),
            StateNode("Busy", transitions=[
                Transition(EventTrigger("free"), "Free",
                           guard=E.Binary("==", E.Name("alloc"), lit(n))),
                Transition(EventTrigger("release"), "Free",
                           guard=E.Binary("==", E.Name("arg1"), lit(n))),
            ]),
        ])

    spec = StatechartSpec(
        "PmSC", "PlatformMgr",
        variables=[
            VarDecl("carID", "int"), VarDecl("segType", "string"),
            VarDecl("dir", "int"), VarDecl("alloc", "int"),
        ],
        inputs=[("connectSegment", 3), ("hold1", 0), ("hold2", 0), ("release", 1),
                ("disconnect", 0), ("occupy", 0), ("free", 0)],
        outputs=[("platformAllocated", 1, "Terminal")],
        regions=[
            Region("main", [
                StateNode("Idle", transitions=[
                    Transition(EventTrigger("connectSegment"), "connectingSegment",
                               actions=[Assign("carID", E.Name("arg1")),
                                        Assign("segType", E.Name("arg2")),
                                        Assign("dir", E.Name("arg3"))]),
                ]),
                StateNode("connectingSegment", kind="compound", regions=[
                    Region(None, [
                        StateNode("decide", kind="choice", transitions=[
                            Transition(None, "connected",
                                       guard=active("Platform_1.Free"),
                                       actions=[Assign("alloc", lit(1)),
                                                Raise("occupy"),
                                                Emit("term", "platformAllocated",
                                                     [lit(1)])]),
                            Transition(None, "connected",
                                       guard=active("Platform_2.Free"),
                                       actions=[Assign("alloc", lit(2)),
                                                Raise("occupy"),
                                                Emit("term", "platformAllocated",
                                                     [lit(2)])]),
                            Transition(None, "trying", is_else=True),
                        ]),
                        StateNode("trying", transitions=[
                            Transition(TimerTrigger("every", 1000), "decide"),
                        ]),
                        StateNode("connected", transitions=[
                            Transition(EventTrigger("disconnect"), "Idle",
                                       actions=[Raise("free")]),
                        ]),
                    ], initial="decide"),
                ]),
            ]),
            platform_region(1),
            platform_region(2),
            Region("Entrance_1", [
                StateNode("Free", transitions=[
                    Transition(EventTrigger("occupy"), "Busy")]),
                StateNode("Busy", transitions=[
                    Transition(EventTrigger("free"), "Free")]),
            ]),
        ],
    )
    spec.compile_or_raise(store.classes)
    return store, spec


def platform_bundle():
    """The platform manager as a loadable model."""
    from rxm.bundle import ModelBundle, ObjectDecl
    from rxm.values import ObjRef
    store, spec = platform_world()
    return ModelBundle(
        classes=platform_classes(),
        objects=[ObjectDecl("terminal1", "Terminal", {"id": 1}),
                 ObjectDecl("pm1", "PlatformMgr",
                            {"tid": 1, "term": ObjRef("terminal1")})],
        machines=[spec],
        charts=[],
    )


def switch_world() -> tuple[ObjectStore, StatechartSpec]:
    store = ObjectStore()
    store.register_class(ClassDef(
        "Switch",
        properties=[PropertyDef("state", "string", "off")],
        signals=[EventDecl("click", 0)],
    ))
    store.register_class(ClassDef("Controller", signals=[EventDecl("toggle", 0)]))
    store.create_object("Switch", "switch1", {})
    store.create_object("Controller", "controller1", {})
    spec = StatechartSpec(
        "SwitchSC", "Switch",
        inputs=[("click", 0)],
        outputs=[("toggle", 0, "Controller")],
        regions=[Region("main", [
            StateNode("off", transitions=[
                Transition(EventTrigger("click"), "on",
                           actions=[Emit("controller1", "toggle")])]),
            StateNode("on", transitions=[
                Transition(EventTrigger("click"), "off",
                           actions=[Emit("controller1", "toggle")])]),
        ])],
    )
    spec.compile_or_raise(store.classes)
    return store, spec
