"""Continual reinforcement learning with task-context detection."""

from ._crlkit import (
    ContextRegistry,
    DomainError,
    Error,
    InputError,
    IoError,
    LearnerConfig,
    Mode,
    ParseError,
    RunRecord,
    StreamType,
    TaskSpec,
    TaskStream,
    detect,
    detect_only_contexts,
    generate_stream,
    gradcheck,
    load_checkpoint,
    make_registry,
    posterior,
    run_stream,
    seat_first,
    train_run,
)

__all__ = [name for name in dir() if not name.startswith("_")]
