"""A complete model: classes, objects, statecharts, and charts.

Object populations are static: everything is declared up front and
created before execution starts. Every object whose class has a
statechart gets its own machine instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ModelError
from .lsc import ChartSpec
from .objects import ClassDef, ObjectStore
from .statechart import StatechartSpec
from .values import ObjRef, Value, conforms


@dataclass
class ObjectDecl:
    id: str
    class_name: str
    overrides: dict[str, Value] = field(default_factory=dict)


@dataclass
class ModelBundle:
    classes: list[ClassDef] = field(default_factory=list)
    objects: list[ObjectDecl] = field(default_factory=list)
    machines: list[StatechartSpec] = field(default_factory=list)
    charts: list[ChartSpec] = field(default_factory=list)

    def validate(self) -> list[str]:
        """Cross-validate everything; returns diagnostics (empty = valid)."""
        diags: list[str] = []
        try:
            store = self.build_store()
        except ModelError as exc:
            return [str(exc)]
        classes = store.classes
        for decl in self.objects:
            cls = classes.get(decl.class_name)
            if cls is None:
                continue  # already reported by build_store
            for name, value in decl.overrides.items():
                if isinstance(value, ObjRef) and value.id is not None \
                        and not store.has_object(value.id):
                    diags.append(f"object '{decl.id}': reference "
                                 f"'{name} = {value.id}' does not resolve")
        owners = set()
        for spec in self.machines:
            if spec.owner_class in owners:
                diags.append(f"class '{spec.owner_class}' has more than one "
                             f"statechart")
            owners.add(spec.owner_class)
            diags += [f"statechart '{spec.name}': {d}" for d in spec.compile(classes)]
        chart_names = set()
        for chart in self.charts:
            if chart.name in chart_names:
                diags.append(f"duplicate chart name '{chart.name}'")
            chart_names.add(chart.name)
            diags += chart.compile(classes)
            for ll in chart.lifelines:
                from .lsc import ConcreteBinding
                if isinstance(ll.binding, ConcreteBinding) \
                        and not store.has_object(ll.binding.object_id):
                    diags.append(f"chart '{chart.name}': lifeline '{ll.name}' "
                                 f"binds unknown object '{ll.binding.object_id}'")
        return diags

    def validate_or_raise(self) -> "ModelBundle":
        diags = self.validate()
        if diags:
            raise ModelError("invalid model: " + "; ".join(diags))
        return self

    def build_store(self) -> ObjectStore:
        """Fresh store with all classes registered and objects created."""
        store = ObjectStore()
        for cls in self.classes:
            store.register_class(cls)
        for decl in self.objects:
            store.create_object(decl.class_name, decl.id, dict(decl.overrides))
        return store

    def machine_spec_for(self, class_name: str) -> StatechartSpec | None:
        for spec in self.machines:
            if spec.owner_class == class_name:
                return spec
        return None

    def class_def(self, name: str) -> ClassDef | None:
        for cls in self.classes:
            if cls.name == name:
                return cls
        return None

    def merge(self, other: "ModelBundle") -> "ModelBundle":
        return ModelBundle(self.classes + other.classes,
                           self.objects + other.objects,
                           self.machines + other.machines,
                           self.charts + other.charts)


def check_override(cls: ClassDef, name: str, value: Value) -> str | None:
    prop = cls.property_def(name)
    if prop is None:
        return f"unknown-property: {cls.name}.{name}"
    if not conforms(value, prop.kind):
        return f"kind-mismatch: {cls.name}.{name}"
    return None
