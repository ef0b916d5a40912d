from __future__ import annotations

import json
import re
import subprocess
import sys
from pathlib import Path

import pytest

from chainbench.core import all_tasks, generate_instance, instance_from_state
from chainbench.render import parse_state_text, render_image, render_text, state_block
from paper_cases import SUDOKU_CLUES

ROOT = Path(__file__).resolve().parent.parent
TASKS = [s.name for s in all_tasks()]


@pytest.mark.parametrize("task", TASKS)
def test_text_round_trip(task):
    for level in (1, 5):
        inst = generate_instance(task, level, 21)
        text = render_text(inst)
        assert text.startswith(inst.question.rstrip())
        assert parse_state_text(task, text) == inst.initial_state
        assert render_text(inst) == text


@pytest.mark.parametrize("task", TASKS)
def test_image_is_deterministic_svg(task):
    inst = generate_instance(task, 2, 21)
    a, b = render_image(inst), render_image(inst)
    assert a == b
    assert a.startswith(b"<svg") or a.startswith(b"<?xml")
    assert a.rstrip().endswith(b"</svg>")


def test_sudoku_text_matches_printed_grid():
    inst = instance_from_state("sudoku", {"grid": SUDOKU_CLUES})
    lines = state_block("sudoku", inst.initial_state).splitlines()
    start = next(i for i, l in enumerate(lines) if l.startswith("grid:")) + 1
    assert lines[start:start + 9] == [" ".join(map(str, row)) for row in SUDOKU_CLUES]


@pytest.mark.parametrize("level", [1, 2, 3, 4, 5])
def test_nibbles_lattice_size(level):
    svg = render_image(generate_instance("nibbles", level, 3)).decode("utf-8")
    assert len(re.findall(r'class="cell"', svg)) == (5 + level) ** 2


def test_golden_hashes():
    golden = json.loads((ROOT / "tests" / "golden" / "render_hashes.json").read_text(encoding="utf-8"))
    sys.path.insert(0, str(ROOT / "scripts"))
    try:
        from update_golden import snapshot
    finally:
        sys.path.pop(0)
    now = snapshot()
    changed = sorted(k for k in golden if golden[k] != now.get(k))
    assert not changed, f"renderings changed for {changed[:5]} (run scripts/update_golden.py if intended)"


def test_render_hashes_stable_across_processes():
    code = ("from chainbench.core import generate_instance; from chainbench.render import render_image;"
            "import hashlib; print(hashlib.sha256(render_image(generate_instance('sokoban', 3, 5))).hexdigest())")
    runs = {subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                           env={"PYTHONHASHSEED": str(h), "PATH": ""}).stdout for h in (1, 2)}
    assert len(runs) == 1 and len(next(iter(runs))) == 65
