"""rxm: joint execution of scenario charts and statecharts.

Models pair inter-object scenarios (live sequence charts) with
intra-object hierarchical statecharts over one shared object store, so a
system stays executable from its first requirement scenario to its fully
implemented machines.
"""

from .bundle import ModelBundle, ObjectDecl
from .coordinator import Coordinator, RunResult, TraceEntry
from .errors import (
    EvalError,
    InjectError,
    ModelError,
    RunError,
    RxmError,
    StepBoundExceeded,
)
from .events import EventInstance
from .lsc import ActiveChart, ChartSpec, Violation
from .objects import ClassDef, EventDecl, ObjectStore, PropertyDef
from .playout import Playout, PlayoutUpdate
from .script import Script
from .statechart import Machine, StatechartSpec, StepResult
from .values import NULL_REF, ObjRef, Value

__version__ = "0.1.0"

__all__ = [
    "ModelBundle",
    "ObjectDecl",
    "Coordinator",
    "RunResult",
    "TraceEntry",
    "EventInstance",
    "ActiveChart",
    "ChartSpec",
    "Violation",
    "ClassDef",
    "EventDecl",
    "ObjectStore",
    "PropertyDef",
    "Playout",
    "PlayoutUpdate",
    "Script",
    "Machine",
    "StatechartSpec",
    "StepResult",
    "ObjRef",
    "NULL_REF",
    "Value",
    "RxmError",
    "ModelError",
    "RunError",
    "EvalError",
    "InjectError",
    "StepBoundExceeded",
    "__version__",
]
