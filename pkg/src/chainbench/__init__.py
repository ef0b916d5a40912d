"""Procedural long-chain reasoning tasks: generation, solving, verification,
rendering, reasoning scaffolds and a hybrid policy-optimisation loss kernel."""
from __future__ import annotations

__version__ = "0.1.0"

from .core import (  # noqa: E402
    GenerationExhausted,
    TaskInstance,
    Verdict,
    all_tasks,
    generate_instance,
    get_task,
    verify_answer,
)
from .rng import seeded_stream  # noqa: E402

__all__ = [
    "GenerationExhausted", "TaskInstance", "Verdict", "all_tasks", "generate_instance",
    "get_task", "verify_answer", "seeded_stream",
]
