"""Step-elicited response generation.

A rule-based constructor turns a solved instance into a four-phase reasoning
scaffold with anchors (critical intermediate values).  An optional external
refiner rewrites the scaffold; every record is kept only if the final answer
found in its text passes the task verifier.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional, Protocol

from . import grammar as G
from .core import TaskInstance, all_tasks, canonical_json, generate_instance, get_task, verify_answer
from .rng import instance_seed

log = logging.getLogger(__name__)

ANCHOR_KINDS = ("state_reading", "intermediate_state", "key_calculation", "decision_point",
                "final_answer")
FINAL_MARK = "Final answer:"
SECTIONS = ("rules", "state", "steps", "validation")
HEADERS = {
    "rules": "### 1. Understanding the rules",
    "state": "### 2. Reading the initial state",
    "steps": "### 3. Working through the solution",
    "validation": "### 4. Checking the result",
}
REFINER_ENV = "CHAINBENCH_REFINER_URL"


@dataclass(frozen=True)
class Anchor:
    position: int
    kind: str
    payload: str


@dataclass(frozen=True)
class CoTScaffold:
    steps: tuple[tuple[str, str], ...]  # (section, text)
    anchors: tuple[Anchor, ...]
    final_answer: str

    @property
    def text(self) -> str:
        out, current = [], None
        for section, line in self.steps:
            if section != current:
                if current is not None:
                    out.append("")
                out.append(HEADERS[section])
                current = section
            out.append(line)
        return "\n".join(out) + "\n"

    def section_words(self) -> dict[str, int]:
        counts = {s: 0 for s in SECTIONS}
        for section, line in self.steps:
            counts[section] += len(line.split())
        return counts


def _payload_text(value: Any) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, separators=(",", ":"))


def _state_lines(spec, state: dict) -> list[tuple[str, str, str]]:
    """(text, kind, payload) checklist entries for each schema field."""
    out = []
    for key, kind, desc in spec.text_schema:
        v = state[key]
        if kind == "matrix":
            h = len(v)
            w = len(v[0]) if h else 0
            text = f"- {key} ({desc}): {h} rows x {w} columns, read row by row:"
            out.append((text, "state_reading", f"{key}:{h}x{w}"))
            for i, row in enumerate(v, 1):
                out.append((f"  row {i}: " + " ".join(str(x) if x != "" else "." for x in row), "note", ""))
        elif isinstance(v, list):
            out.append((f"- {key} ({desc}): {len(v)} entries, {_payload_text(v)}.", "state_reading",
                        f"{key}:{_payload_text(v)}"))
        else:
            out.append((f"- {key} ({desc}): {_payload_text(v)}.", "state_reading", f"{key}:{_payload_text(v)}"))
    return out


_VALIDATION = {
    "exact_match": "Recomputing the quantity from scratch gives the same value, so the result is settled.",
    "constraint_check": "Going through every rule once more against the filled-in solution, no rule is broken.",
    "simulate": "Replaying the whole move list from the start position breaks no rule and reaches the goal.",
}


def build_scaffold(instance: TaskInstance, solution: Any = None) -> CoTScaffold:
    """Deterministic four-phase scaffold ending in exactly one final-answer anchor."""
    spec = get_task(instance.task)
    impl = spec.extras.get("impl")
    if solution is None:
        solution = G.parse(spec.grammar, instance.ground_truth)
    elif isinstance(solution, str):
        solution = G.parse(spec.grammar, solution)
    answer = G.normalize(spec.grammar, solution)
    steps: list[tuple[str, str]] = []
    anchors: list[Anchor] = []

    def add(section: str, text: str, kind: str = "note", payload: Optional[str] = None):
        if kind != "note":
            anchors.append(Anchor(len(steps), kind, payload if payload is not None else ""))
        steps.append((section, text))

    # phase 1: rules in the task's own wording, one sentence per line
    rules = impl.rules if impl is not None else spec.question(instance.initial_state)
    for sentence in re.split(r"(?<=[.!?])\s+", rules.strip()):
        add("rules", sentence)
    add("rules", f"This is a {spec.category.lower()} task; the answer must follow the stated format.")

    # phase 2: state reading with a checklist
    add("state", f"The {spec.title} instance at level {instance.level} consists of:")
    for text, kind, payload in _state_lines(spec, instance.initial_state):
        add("state", text, kind, payload)
    add("state", "Checklist: every field above is accounted for, so nothing is hidden from the reasoning.")

    # phase 3: strategy trace
    trace = spec.trace(instance.initial_state, solution) if spec.trace else None
    if not trace:
        add("steps", "The solver derives the answer directly.")
    for kind, text, payload in trace or ():
        add("steps", text, kind if kind in ANCHOR_KINDS[:-1] else "note", payload)

    # phase 4: validation and the single final answer, last
    verdict = verify_answer(instance, answer)
    if not verdict.accepted:
        raise ValueError(f"{instance.id}: solution does not verify ({verdict.reason})")
    add("validation", _VALIDATION[spec.verify_mode])
    add("validation", f"{FINAL_MARK} {answer}", "final_answer", answer)
    return CoTScaffold(tuple(steps), tuple(anchors), answer)


def extract_final_answer(text: str) -> Optional[str]:
    """Text after the last final-answer marker, or None when it is missing."""
    at = text.rfind(FINAL_MARK)
    if at < 0:
        return None
    return text[at + len(FINAL_MARK):].strip()


# -- refiner -------------------------------------------------------------------------------


class RefinerError(RuntimeError):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code


class Refiner(Protocol):
    def refine(self, question: str, rule_cot: str) -> str: ...


class MockRefiner:
    """Offline stand-in: returns the scaffold verbatim."""

    def refine(self, question: str, rule_cot: str) -> str:
        return rule_cot


@dataclass
class HttpRefiner:
    """POST {question, rule_cot} as JSON to ``endpoint``; expects {refined_cot}."""

    endpoint: str
    timeout: float = 60.0
    retries: int = 2
    backoff: float = 0.5

    @classmethod
    def from_env(cls, timeout: float = 60.0) -> Optional["HttpRefiner"]:
        url = os.environ.get(REFINER_ENV)
        return cls(url, timeout=timeout) if url else None

    def refine(self, question: str, rule_cot: str) -> str:
        body = json.dumps({"question": question, "rule_cot": rule_cot}).encode("utf-8")
        last = RefinerError("refiner_unavailable")
        for attempt in range(self.retries + 1):
            req = urllib.request.Request(self.endpoint, data=body, method="POST",
                                         headers={"Content-Type": "application/json"})
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    data = json.loads(resp.read().decode("utf-8"))
                text = data.get("refined_cot") if isinstance(data, dict) else None
                if not isinstance(text, str):
                    raise RefinerError("refiner_unavailable", "response lacks refined_cot")
                return text
            except TimeoutError as e:
                last = RefinerError("refiner_timeout", str(e))
            except urllib.error.URLError as e:
                timed_out = isinstance(getattr(e, "reason", None), TimeoutError)
                last = RefinerError("refiner_timeout" if timed_out else "refiner_unavailable", str(e))
            except (ValueError, OSError) as e:
                last = RefinerError("refiner_unavailable", str(e))
            except RefinerError as e:
                last = e
            if attempt < self.retries:
                time.sleep(self.backoff * (attempt + 1))
        raise last


def refine(scaffold: CoTScaffold, client: Refiner, question: str = "") -> str:
    """The refiner's text, untouched."""
    return client.refine(question, scaffold.text)


# -- records, filtering and emission --------------------------------------------------------


@dataclass
class DatasetRecord:
    id: str
    task: str
    level: int
    question: str
    initial_state: dict
    rule_cot: str
    answer: str
    refined_cot: Optional[str] = None
    verified: bool = False

    def to_json(self) -> dict:
        d = asdict(self)
        if d["refined_cot"] is None:
            del d["refined_cot"]
        return d


def filter_verified(record: DatasetRecord) -> bool:
    """Accept iff the final answer in the (refined or rule) text verifies."""
    text = record.refined_cot if record.refined_cot is not None else record.rule_cot
    ans = extract_final_answer(text)
    if ans is None:
        return False
    spec = get_task(record.task)
    inst = TaskInstance(id=record.id, task=record.task, category=spec.category, level=record.level,
                        seed=0, question=record.question, initial_state=record.initial_state,
                        ground_truth=record.answer, grammar=spec.grammar)
    return verify_answer(inst, ans).accepted


def make_record(inst: TaskInstance, client: Optional[Refiner] = None) -> tuple[DatasetRecord, Optional[str]]:
    """Scaffold (and optionally refine) one instance; returns (record, refiner error code)."""
    sc = build_scaffold(inst)
    rec = DatasetRecord(id=inst.id, task=inst.task, level=inst.level, question=inst.question,
                        initial_state=inst.initial_state, rule_cot=sc.text, answer=sc.final_answer)
    err = None
    if client is not None:
        try:
            rec.refined_cot = refine(sc, client, inst.question)
        except RefinerError as e:
            err = e.code
            log.warning("%s left unrefined: %s", inst.id, e)
    rec.verified = filter_verified(rec)
    return rec, err


@dataclass
class TrainingSpec:
    counts: dict[str, int]  # records per task
    level_weights: dict[int, float] = field(default_factory=lambda: {k: 1.0 for k in range(1, 6)})
    seed: int = 0
    max_inflight: int = 8


def allocate_levels(total: int, weights: dict[int, float], offset: int = 0) -> dict[int, int]:
    """Largest-remainder split of ``total`` over levels; ties rotate with ``offset``."""
    levels = sorted(weights)
    z = sum(weights.values())
    exact = {k: total * weights[k] / z for k in levels}
    out = {k: int(exact[k]) for k in levels}
    rest = total - sum(out.values())
    order = sorted(levels, key=lambda k: (-(exact[k] - out[k]), (levels.index(k) - offset) % len(levels)))
    for k in order[:rest]:
        out[k] += 1
    return out


def _state_key(inst: TaskInstance) -> str:
    return hashlib.sha256(json.dumps([inst.task, inst.initial_state], sort_keys=True).encode()).hexdigest()


def emit_training_set(spec: TrainingSpec, output, client: Optional[Refiner] = None) -> dict:
    """Write verified records to ``output``/records.jsonl; returns manifest with stats."""
    if sum(spec.counts.values()) < 1:
        raise ValueError("training spec asks for no records")
    order = [s.name for s in all_tasks() if s.name in spec.counts]
    unknown = set(spec.counts) - set(order)
    if unknown:
        raise KeyError(f"unknown tasks {sorted(unknown)}")
    instances: list[TaskInstance] = []
    seen: set[str] = set()
    duplicates = 0
    for ti, task in enumerate(order):
        for level, n in allocate_levels(spec.counts[task], spec.level_weights, ti).items():
            index = 0
            made = 0
            while made < n:
                seed = instance_seed(f"train/{task}", level, index, spec.seed)
                inst = generate_instance(task, level, seed, index=index)
                index += 1
                key = _state_key(inst)
                if key in seen:
                    duplicates += 1
                    if index > 20 * n + 100:  # tiny state spaces: accept repeats
                        seen.discard(key)
                    continue
                seen.add(key)
                instances.append(inst)
                made += 1
    with ThreadPoolExecutor(max(1, spec.max_inflight)) as ex:
        results = list(ex.map(lambda i: make_record(i, client), instances))
    records = sorted((r for r, _ in results), key=lambda r: r.id)
    kept = [r for r in records if r.verified]
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "records.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for r in kept:
            fh.write(json.dumps(r.to_json(), ensure_ascii=False, separators=(",", ":")) + "\n")
    stats = training_stats(kept, [e for _, e in results])
    stats["generated"] = len(records)
    stats["rejected_by_verifier"] = len(records) - len(kept)
    stats["duplicates_skipped"] = duplicates
    manifest = {"records": "records.jsonl", "count": len(kept), "seed": spec.seed,
                "counts": dict(sorted(spec.counts.items())), "stats": stats}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return manifest


def _section_words_of(text: str) -> dict[str, int]:
    counts = {s: 0 for s in SECTIONS}
    heads = {v: k for k, v in HEADERS.items()}
    cur = None
    for line in text.splitlines():
        if line in heads:
            cur = heads[line]
        elif cur is not None:
            counts[cur] += len(line.split())
    return counts


def training_stats(records: list[DatasetRecord], errors: list[Optional[str]] = ()) -> dict:
    """Descriptive word-count statistics (word counts stand in for tokens)."""
    n = len(records)
    levels = {k: 0 for k in range(1, 6)}
    words = {s: 0 for s in SECTIONS}
    rule_total = refined_total = refined_n = 0
    for r in records:
        levels[r.level] = levels.get(r.level, 0) + 1
        for s, c in _section_words_of(r.rule_cot).items():
            words[s] += c
        rule_total += len(r.rule_cot.split())
        if r.refined_cot is not None:
            refined_total += len(r.refined_cot.split())
            refined_n += 1
    return {
        "records": n,
        "level_share": {str(k): (v / n if n else 0.0) for k, v in sorted(levels.items())},
        "mean_rule_cot_words": rule_total / n if n else 0.0,
        "mean_refined_cot_words": refined_total / refined_n if refined_n else None,
        "mean_section_words": {s: (c / n if n else 0.0) for s, c in words.items()},
        "unrefined": sum(1 for r in records if r.refined_cot is None),
        "refiner_errors": {code: sum(1 for e in errors if e == code)
                           for code in ("refiner_unavailable", "refiner_timeout")},
    }


def anchors_replay(instance: TaskInstance, scaffold: CoTScaffold) -> bool:
    """Check position anchors of move-based games against an independent replay."""
    from .tasks.common import STEP

    spec = get_task(instance.task)
    moves = G.parse(spec.grammar, scaffold.final_answer)
    s = canonical_json(instance.initial_state)
    step_anchors = [a for a in scaffold.anchors if a.kind in ("intermediate_state", "key_calculation")]
    if instance.task == "maze":
        r, c = s["start"]
        want = []
        for m in moves.moves:
            r, c = r + STEP[m][0], c + STEP[m][1]
            want.append(f"({r},{c})")
        return [a.payload for a in step_anchors] == want
    if instance.task == "nibbles":
        r, c = s["snake"][0]
        apples = {tuple(a) for a in s["apples"]}
        want, eats = [], []
        for m in moves.moves:
            r, c = r + STEP[m][0], c + STEP[m][1]
            want.append(f"({r}, {c})")
            eats.append((r, c) in apples)
            apples.discard((r, c))
        got_eats = [a.kind == "key_calculation" for a in step_anchors]
        return [a.payload for a in step_anchors] == want and got_eats == eats
    return True
