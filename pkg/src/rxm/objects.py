"""The shared object model: class definitions, instances, and the store.

Both the chart engine and the statechart machines read and mutate one
store. The store is owned by a single execution context (the
coordinator); all operations here are plain synchronous calls.

Every declared property ``p`` implicitly provides a setter event
``set_p/1``: delivering that event to an object writes the property.
This is what lets purely scenario-level models change state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import ModelError
from .values import KINDS, Value, conforms, default_for, kind_of

SETTER_PREFIX = "set_"


@dataclass(frozen=True)
class PropertyDef:
    name: str
    kind: str  # one of KINDS
    default: Value | None = None  # None means the kind's zero value

    def effective_default(self) -> Value:
        return self.default if self.default is not None else default_for(self.kind)


@dataclass(frozen=True)
class EventDecl:
    """A declared signal or method: name plus argument count."""

    name: str
    arity: int


@dataclass
class ClassDef:
    name: str
    properties: list[PropertyDef] = field(default_factory=list)
    signals: list[EventDecl] = field(default_factory=list)
    methods: list[EventDecl] = field(default_factory=list)

    def validate(self) -> None:
        seen: set[str] = set()
        for prop in self.properties:
            if prop.name in seen:
                raise ModelError(
                    f"duplicate-property: class {self.name} declares "
                    f"'{prop.name}' twice"
                )
            seen.add(prop.name)
            if prop.kind not in KINDS:
                raise ModelError(
                    f"unknown-kind: {self.name}.{prop.name} has kind '{prop.kind}'"
                )
            if prop.default is not None and not conforms(prop.default, prop.kind):
                raise ModelError(
                    f"malformed-default: {self.name}.{prop.name} default "
                    f"{prop.default!r} is not {prop.kind}"
                )
        event_names: set[str] = set()
        for decl in list(self.signals) + list(self.methods):
            if decl.name in event_names:
                raise ModelError(
                    f"duplicate-event: class {self.name} declares "
                    f"'{decl.name}' twice"
                )
            event_names.add(decl.name)
            if decl.arity < 0:
                raise ModelError(f"negative-arity: {self.name}.{decl.name}")
        for prop in self.properties:
            if SETTER_PREFIX + prop.name in event_names:
                raise ModelError(
                    f"setter-collision: class {self.name} declares "
                    f"'{SETTER_PREFIX}{prop.name}', which is the implicit "
                    f"setter for property '{prop.name}'"
                )

    def property_def(self, name: str) -> PropertyDef | None:
        for prop in self.properties:
            if prop.name == name:
                return prop
        return None

    def setter_property(self, event_name: str) -> PropertyDef | None:
        """The property an implicit ``set_<prop>`` event writes, if any."""
        if not event_name.startswith(SETTER_PREFIX):
            return None
        return self.property_def(event_name[len(SETTER_PREFIX):])

    def event_arity(self, name: str) -> int | None:
        """Arity of a declared signal/method or implicit setter; None if unknown."""
        for decl in self.signals:
            if decl.name == name:
                return decl.arity
        for decl in self.methods:
            if decl.name == name:
                return decl.arity
        if self.setter_property(name) is not None:
            return 1
        return None


@dataclass
class ObjectInstance:
    id: str
    class_def: ClassDef
    values: dict[str, Value]

    def get(self, name: str) -> Value:
        if name not in self.values:
            raise ModelError(
                f"unknown-property: {self.class_def.name}.{name} (object {self.id})"
            )
        return self.values[name]

    def set(self, name: str, value: Value) -> Value:
        prop = self.class_def.property_def(name)
        if prop is None:
            raise ModelError(
                f"unknown-property: {self.class_def.name}.{name} (object {self.id})"
            )
        if not conforms(value, prop.kind):
            raise ModelError(
                f"kind-mismatch: {self.id}.{name} is {prop.kind}, "
                f"got {kind_of(value)}"
            )
        self.values[name] = value
        return value


class ObjectStore:
    """Registry of classes and object instances, in creation order."""

    def __init__(self) -> None:
        self.classes: dict[str, ClassDef] = {}
        self.objects: dict[str, ObjectInstance] = {}

    def register_class(self, class_def: ClassDef) -> str:
        if class_def.name in self.classes:
            raise ModelError(f"duplicate-class-name: {class_def.name}")
        class_def.validate()
        self.classes[class_def.name] = class_def
        return class_def.name

    def create_object(
        self, class_name: str, obj_id: str, overrides: dict[str, Value] | None = None
    ) -> ObjectInstance:
        cls = self.classes.get(class_name)
        if cls is None:
            raise ModelError(f"unknown-class: {class_name}")
        if obj_id in self.objects:
            raise ModelError(f"duplicate-id: {obj_id}")
        values = {p.name: p.effective_default() for p in cls.properties}
        for name, value in (overrides or {}).items():
            prop = cls.property_def(name)
            if prop is None:
                raise ModelError(f"unknown-property: {class_name}.{name}")
            if not conforms(value, prop.kind):
                raise ModelError(
                    f"kind-mismatch: {obj_id}.{name} is {prop.kind}, "
                    f"got {kind_of(value)}"
                )
            values[name] = value
        obj = ObjectInstance(obj_id, cls, values)
        self.objects[obj_id] = obj
        return obj

    def get_object(self, obj_id: str) -> ObjectInstance:
        obj = self.objects.get(obj_id)
        if obj is None:
            raise ModelError(f"unknown-object: {obj_id}")
        return obj

    def has_object(self, obj_id: str) -> bool:
        return obj_id in self.objects

    def read(self, obj_id: str, name: str) -> Value:
        return self.get_object(obj_id).get(name)

    def write(self, obj_id: str, name: str, value: Value) -> Value:
        return self.get_object(obj_id).set(name, value)

    def instances_of(self, class_name: str) -> list[ObjectInstance]:
        """All instances of a class, in creation order."""
        if class_name not in self.classes:
            raise ModelError(f"unknown-class: {class_name}")
        return [o for o in self.objects.values() if o.class_def.name == class_name]

    def query_objects(
        self, class_name: str, predicate: Callable[[ObjectInstance], bool]
    ) -> list[ObjectInstance]:
        """Instances of ``class_name`` satisfying ``predicate``, creation order."""
        return [o for o in self.instances_of(class_name) if predicate(o)]

    def query_by_expression(self, class_name: str, expression) -> list[ObjectInstance]:
        """Expression-predicate query: bare names are candidate properties,
        ``obj.prop`` reads other objects. Same deterministic ordering."""
        from . import expr as E
        from .errors import EvalError
        cls = self.classes.get(class_name)
        if cls is None:
            raise ModelError(f"unknown-class: {class_name}")
        for node in E.walk(expression):
            if isinstance(node, E.Name) and cls.property_def(node.ident) is None:
                raise ModelError(
                    f"unknown-property: predicate references '{node.ident}', "
                    f"not a property of {class_name}")

        store = self

        class _PredicateScope:
            def __init__(self, candidate: ObjectInstance):
                self.candidate = candidate

            def resolve_name(self, ident: str) -> Value:
                return self.candidate.get(ident)

            def resolve_attr(self, base: str, name: str) -> Value:
                try:
                    return store.read(base, name)
                except ModelError as exc:
                    raise EvalError(str(exc)) from None

            def resolve_active(self, path):
                raise EvalError("active() is not available in predicates")

        return [o for o in self.instances_of(class_name)
                if E.evaluate_bool(expression, _PredicateScope(o))]

    def snapshot_values(self) -> dict[str, dict[str, Value]]:
        return {oid: dict(obj.values) for oid, obj in self.objects.items()}

    def restore_values(self, data: dict[str, dict[str, Value]]) -> None:
        for oid, values in data.items():
            obj = self.get_object(oid)
            for name, value in values.items():
                obj.set(name, value)


def ordered_ids(objs: Iterable[ObjectInstance]) -> list[str]:
    return [o.id for o in objs]
