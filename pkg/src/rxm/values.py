"""Typed values shared by the object store, machines, and charts.

Four value kinds exist: ``int``, ``string``, ``bool`` and ``ref`` (a
reference to an object instance by id, or the null reference).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

KINDS = ("int", "string", "bool", "ref")


@dataclass(frozen=True)
class ObjRef:
    """Reference to an object instance; ``ObjRef(None)`` is the null ref."""

    id: str | None = None

    def __bool__(self) -> bool:
        return self.id is not None

    def __repr__(self) -> str:
        return f"ObjRef({self.id!r})"


NULL_REF = ObjRef(None)

Value = Union[int, str, bool, ObjRef]


def kind_of(value: Value) -> str:
    # bool before int: bool is an int subclass in Python
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, str):
        return "string"
    if isinstance(value, ObjRef):
        return "ref"
    raise TypeError(f"not a model value: {value!r}")


def conforms(value: Value, kind: str) -> bool:
    return kind_of(value) == kind


def default_for(kind: str) -> Value:
    return {"int": 0, "string": "", "bool": False, "ref": NULL_REF}[kind]


def value_to_json(value: Value):
    """JSON form used in traces and snapshots (refs become ``{"ref": id}``)."""
    if isinstance(value, ObjRef):
        return {"ref": value.id}
    return value


def value_from_json(data) -> Value:
    if isinstance(data, dict):
        return ObjRef(data.get("ref"))
    if isinstance(data, (bool, int, str)):
        return data
    raise ValueError(f"not a serialized value: {data!r}")


def value_literal(value: Value) -> str:
    """Source-text form of a literal value (used by the serializer)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, ObjRef):
        return value.id if value.id is not None else "null"
    raise TypeError(f"not a model value: {value!r}")
