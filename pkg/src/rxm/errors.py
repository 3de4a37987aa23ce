"""Exception types used across the engine."""

from __future__ import annotations


class RxmError(Exception):
    """Base class for all engine errors."""


class ModelError(RxmError):
    """A model is structurally or semantically invalid (load-time)."""


class RunError(RxmError):
    """A runtime failure caused by the model (bad guard, stuck choice, ...).

    The coordinator records these and keeps running; they never crash a run.
    """


class StepBoundExceeded(RunError):
    """A super-step produced more events than the configured bound."""


class EvalError(RunError):
    """Expression evaluation failed (unknown symbol, kind mismatch, zero division)."""


class InjectError(RxmError):
    """An injected environment event failed validation; no trace entry is made."""
