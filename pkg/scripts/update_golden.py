"""Record the render hashes checked by tests/test_render.py.

Run only when a rendering change is intended, and review the diff:

    python scripts/update_golden.py
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

from chainbench.core import all_tasks, generate_instance
from chainbench.render import render_image, render_text

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden" / "render_hashes.json"
CASES = [(s.name, level, 2024) for s in all_tasks() for level in (1, 5)]


def snapshot() -> dict:
    out = {}
    for task, level, seed in CASES:
        inst = generate_instance(task, level, seed)
        out[f"{task}/{level}/{seed}"] = {
            "text": hashlib.sha256(render_text(inst).encode("utf-8")).hexdigest(),
            "image": hashlib.sha256(render_image(inst)).hexdigest(),
        }
    return out


if __name__ == "__main__":
    GOLDEN.parent.mkdir(parents=True, exist_ok=True)
    GOLDEN.write_text(json.dumps(snapshot(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(CASES)} entries to {GOLDEN}")
