"""Instance model, task registry and the generate / verify loop."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from . import grammar as G
from .rng import Stream, seeded_stream

log = logging.getLogger(__name__)

CATEGORIES = ("Algorithm", "Graph", "Puzzle", "Game")
VERIFY_MODES = ("exact_match", "simulate", "constraint_check")
REASONS = ("parse_error", "rule_violation", "wrong_value", "incomplete")
DEFAULT_ATTEMPT_BUDGET = 10_000


class GenerationExhausted(RuntimeError):
    def __init__(self, task: str, level: int, attempts: int):
        super().__init__(f"{task} level {level}: no valid instance in {attempts} attempts")
        self.task = task
        self.level = level


class Reject(Exception):
    """Raised by a task checker: the answer fails with ``reason``."""

    def __init__(self, reason: str, detail: str = ""):
        if reason not in REASONS:
            raise ValueError(reason)
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


@dataclass(frozen=True)
class TaskSpec:
    """Hooks and difficulty table for one task.

    ``generate(params, stream)`` returns ``(state, solution)`` or ``None`` to
    reject the attempt.  ``check(state, truth, answer)`` raises ``Reject``
    for a bad answer; ``truth`` is the parsed ground truth.
    """

    name: str
    title: str
    category: str
    verify_mode: str
    levels: dict[int, dict[str, Any]]
    generate: Callable[[dict, Stream], Optional[tuple[dict, Any]]]
    solve: Callable[[dict], Any]
    check: Callable[[dict, Any, Any], None]
    question: Callable[[dict], str]
    text_schema: tuple[tuple[str, str, str], ...] = ()
    draw: Optional[Callable] = None
    trace: Optional[Callable] = None
    size_keys: tuple[str, ...] = ()
    unique: bool = False
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def grammar(self) -> str:
        return self.name


REGISTRY: dict[str, TaskSpec] = {}


def register(spec: TaskSpec) -> TaskSpec:
    if spec.category not in CATEGORIES:
        raise ValueError(spec.category)
    if spec.verify_mode not in VERIFY_MODES:
        raise ValueError(spec.verify_mode)
    if spec.verify_mode == "exact_match" and spec.category not in ("Algorithm", "Graph"):
        raise ValueError(f"{spec.name}: exact_match is reserved for Algorithm/Graph tasks")
    if spec.name not in G.GRAMMARS:
        raise ValueError(f"{spec.name}: no grammar")
    REGISTRY[spec.name] = spec
    return spec


def get_task(name: str) -> TaskSpec:
    _ensure_loaded()
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown task {name!r}") from None


def all_tasks() -> list[TaskSpec]:
    _ensure_loaded()
    order = {c: i for i, c in enumerate(CATEGORIES)}
    return sorted(REGISTRY.values(), key=lambda s: (order[s.category], s.name))


def _ensure_loaded() -> None:
    if len(REGISTRY) < 42:
        from . import tasks  # noqa: F401  (registers every task family)


def canonical_json(value: Any) -> Any:
    """Round-trip through JSON so states hold only lists/dicts/ints/strs."""
    return json.loads(json.dumps(value, sort_keys=False))


@dataclass(frozen=True)
class TaskInstance:
    id: str
    task: str
    category: str
    level: int
    seed: int
    question: str
    initial_state: dict
    ground_truth: str
    grammar: str

    def to_record(self) -> dict:
        # field order is part of the file format
        return {
            "id": self.id,
            "task": self.task,
            "category": self.category,
            "level": self.level,
            "seed": self.seed,
            "question": self.question,
            "initial_state": self.initial_state,
            "ground_truth": self.ground_truth,
            "grammar": self.grammar,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "TaskInstance":
        return cls(
            id=rec["id"], task=rec["task"], category=rec["category"],
            level=int(rec["level"]), seed=int(rec["seed"]), question=rec["question"],
            initial_state=rec["initial_state"], ground_truth=rec["ground_truth"],
            grammar=rec["grammar"],
        )


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: Optional[str] = None
    normalized: Optional[Any] = None

    @property
    def reward(self) -> int:
        return 1 if self.accepted else 0


def instance_id(task: str, level: int, index: int) -> str:
    return f"{task}-{level}-{index:04d}"


def generate_instance(task: str, level: int, seed: int, index: int = 0,
                      budget: int = DEFAULT_ATTEMPT_BUDGET) -> TaskInstance:
    spec = get_task(task)
    if level not in spec.levels:
        raise ValueError(f"level must be in 1..5, got {level}")
    params = spec.levels[level]
    for attempt in range(budget):
        stream = seeded_stream(seed, f"{task}/{level}/attempt/{attempt}")
        out = spec.generate(params, stream)
        if out is None:
            continue
        state, solution = out
        state = canonical_json(state)
        truth = G.normalize(spec.grammar, solution)
        inst = TaskInstance(
            id=instance_id(task, level, index), task=task, category=spec.category,
            level=level, seed=seed, question=spec.question(state),
            initial_state=state, ground_truth=truth, grammar=spec.grammar,
        )
        v = verify_answer(inst, truth)
        if not v.accepted:
            raise AssertionError(f"{task}: generated ground truth rejected ({v.reason})")
        return inst
    raise GenerationExhausted(task, level, budget)


def verify_answer(instance: TaskInstance, answer_text: str) -> Verdict:
    """Judge ``answer_text``; never raises."""
    try:
        spec = get_task(instance.task)
    except KeyError:
        return Verdict(False, "rule_violation")
    try:
        parsed = G.parse(spec.grammar, answer_text)
    except G.ParseError:
        return Verdict(False, "parse_error")
    try:
        truth = G.parse(spec.grammar, instance.ground_truth)
        spec.check(instance.initial_state, truth, parsed)
    except Reject as r:
        return Verdict(False, r.reason)
    except Exception:  # a malformed answer must never crash the reward oracle
        log.exception("checker crashed on %s", instance.id)
        return Verdict(False, "rule_violation")
    return Verdict(True, None, G.normalize(spec.grammar, parsed))


def instance_from_state(task: str, state: dict, level: int = 0, seed: int = 0,
                        id: str = "adhoc") -> TaskInstance:
    """Build an instance from a bare initial state by running the solver."""
    spec = get_task(task)
    state = canonical_json(state)
    solution = spec.solve(state)
    return TaskInstance(
        id=id, task=task, category=spec.category, level=level, seed=seed,
        question=spec.question(state), initial_state=state,
        ground_truth=G.normalize(spec.grammar, solution), grammar=spec.grammar,
    )
