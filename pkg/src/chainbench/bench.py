"""Benchmark emission: balanced instances, renderings and a hashed manifest.

Directory layout written by ``emit_benchmark``::

    instances.jsonl        one record per line, fixed field order
    text/{id}.txt          text-only transcription
    images/{id}.svg        vector image
    manifest.json          entries, per-file hashes and a content hash
"""
from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .core import (CATEGORIES, TaskInstance, all_tasks, generate_instance, get_task,
                   verify_answer)
from .render import render_image, render_text
from .rng import instance_seed

log = logging.getLogger(__name__)

LEVELS = (1, 2, 3, 4, 5)
PER_LEVEL = 6
MANIFEST_VERSION = 1


@dataclass
class BenchConfig:
    seed: int = 0
    per_level: int = PER_LEVEL
    levels: tuple[int, ...] = LEVELS
    tasks: Optional[tuple[str, ...]] = None  # None = the whole catalog
    workers: int = 1


def record_line(inst: TaskInstance) -> str:
    return json.dumps(inst.to_record(), ensure_ascii=False, separators=(",", ":"))


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def bench_jobs(cfg: BenchConfig) -> list[tuple[str, int, int, int]]:
    names = cfg.tasks or tuple(s.name for s in all_tasks())
    return [(t, lv, i, instance_seed(t, lv, i, cfg.seed))
            for t in names for lv in cfg.levels for i in range(cfg.per_level)]


def _build(job: tuple[str, int, int, int]) -> tuple[str, str, bytes]:
    task, level, index, seed = job
    inst = generate_instance(task, level, seed, index=index)
    return record_line(inst), render_text(inst), render_image(inst)


def emit_benchmark(output_dir, seed: int = 0, cfg: Optional[BenchConfig] = None) -> dict:
    """Generate, render and write the benchmark; returns the manifest."""
    cfg = cfg or BenchConfig(seed=seed)
    out = Path(output_dir)
    (out / "text").mkdir(parents=True, exist_ok=True)
    (out / "images").mkdir(parents=True, exist_ok=True)
    jobs = bench_jobs(cfg)
    t0 = time.perf_counter()
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            built = list(ex.map(_build, jobs, chunksize=4))
    else:
        built = []
        for k, job in enumerate(jobs):
            built.append(_build(job))
            if (k + 1) % 60 == 0:
                log.info("generated %d/%d instances (%.1fs)", k + 1, len(jobs), time.perf_counter() - t0)

    from .tasks.words import dictionary_hash

    entries = []
    lines = []
    for (task, level, index, iseed), (line, text, svg) in zip(jobs, built):
        rec = json.loads(line)
        iid = rec["id"]
        text_b = text.encode("utf-8")
        (out / "text" / f"{iid}.txt").write_bytes(text_b)
        (out / "images" / f"{iid}.svg").write_bytes(svg)
        lines.append(line)
        entries.append({
            "id": iid, "task": task, "category": rec["category"], "level": level,
            "seed": iseed, "text": f"text/{iid}.txt", "image": f"images/{iid}.svg",
            "record_sha256": sha256(line.encode("utf-8")),
            "text_sha256": sha256(text_b), "image_sha256": sha256(svg),
        })
    data = ("\n".join(lines) + "\n").encode("utf-8")
    (out / "instances.jsonl").write_bytes(data)
    content = hashlib.sha256(data)
    for e in entries:
        content.update(e["text_sha256"].encode())
        content.update(e["image_sha256"].encode())
    manifest = {
        "version": MANIFEST_VERSION,
        "master_seed": cfg.seed,
        "count": len(entries),
        "per_level": cfg.per_level,
        "levels": list(cfg.levels),
        "instances": "instances.jsonl",
        "image_format": "svg (one file per instance, images/{id}.svg)",
        "text_format": "utf-8 (one file per instance, text/{id}.txt)",
        "dictionary_sha256": dictionary_hash(),
        "category_counts": category_counts(entries),
        "content_sha256": content.hexdigest(),
        "entries": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    log.info("wrote %d instances to %s in %.1fs", len(entries), out, time.perf_counter() - t0)
    return manifest


def category_counts(entries: Iterable[dict]) -> dict[str, int]:
    counts = {c: 0 for c in CATEGORIES}
    for e in entries:
        counts[e["category"]] += 1
    return counts


def load_manifest(path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    return json.loads(path.read_text(encoding="utf-8"))


def load_instances(manifest_path) -> dict[str, TaskInstance]:
    """Instances referenced by a manifest, keyed by id."""
    path = Path(manifest_path)
    root = path if path.is_dir() else path.parent
    man = load_manifest(path)
    out = {}
    with open(root / man["instances"], encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                inst = TaskInstance.from_record(json.loads(line))
                out[inst.id] = inst
    return out


def read_instances(path) -> list[TaskInstance]:
    with open(path, encoding="utf-8") as fh:
        return [TaskInstance.from_record(json.loads(l)) for l in fh if l.strip()]


def tree_hash(root) -> str:
    """Hash of every file under ``root`` (relative path + bytes), order-stable."""
    root = Path(root)
    h = hashlib.sha256()
    for p in sorted(q for q in root.rglob("*") if q.is_file()):
        h.update(str(p.relative_to(root)).encode("utf-8") + b"\0")
        h.update(p.read_bytes())
    return h.hexdigest()


def solution_count(inst: TaskInstance, limit: int = 2) -> Optional[int]:
    """Number of solutions (capped at ``limit``) for unique-solution puzzles.

    Returns None for tasks that make no uniqueness claim.
    """
    spec = get_task(inst.task)
    if not spec.unique:
        return None
    if "model" in spec.extras:
        from .csp import count_solutions

        return count_solutions(spec.extras["model"](inst.initial_state), limit)
    if inst.task == "wordsearch":
        from .tasks.words import scan_word

        hits = [len(scan_word(inst.initial_state["grid"], w)) for w in inst.initial_state["words"]]
        return 0 if min(hits) == 0 else min(limit, max(hits))
    raise NotImplementedError(inst.task)


@dataclass
class SweepReport:
    total: int = 0
    accepted: int = 0
    unique_checked: int = 0
    not_unique: list[str] = field(default_factory=list)
    rejected: list[str] = field(default_factory=list)


def sweep(instances: Iterable[TaskInstance]) -> SweepReport:
    """Self-verify every ground truth and re-count unique-solution puzzles."""
    rep = SweepReport()
    for inst in instances:
        rep.total += 1
        if verify_answer(inst, inst.ground_truth).accepted:
            rep.accepted += 1
        else:
            rep.rejected.append(inst.id)
        n = solution_count(inst, 2)
        if n is not None:
            rep.unique_checked += 1
            if n != 1:
                rep.not_unique.append(inst.id)
    return rep
