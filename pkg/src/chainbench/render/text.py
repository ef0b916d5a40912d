"""Text transcription of an instance and its inverse.

The rendering is the question followed by a ``[state]`` block that lists
every field of the task's text schema.  Scalar and list fields are written
as one compact JSON line (``key: value``); matrix fields are written as a
``key:`` header followed by one line per row with space-separated cells,
so a Sudoku grid reads as nine rows of digits with 0 for empty cells.
"""
from __future__ import annotations

import json
import re

from ..core import TaskInstance, get_task

STATE_MARK = "[state]"
_INT = re.compile(r"-?\d+\Z")


def _cell(v) -> str:
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        return json.dumps(v, separators=(",", ":"))
    if isinstance(v, int):
        return str(v)
    if v == "":
        return "."
    if _INT.match(v) or v == "." or v.startswith('"') or any(ch.isspace() for ch in v):
        return json.dumps(v)
    return v


def _uncell(tok: str):
    if _INT.match(tok):
        return int(tok)
    if tok == ".":
        return ""
    if tok[:1] in '"[{' or tok in ("true", "false", "null"):
        return json.loads(tok)
    return tok


def state_block(task: str, state: dict) -> str:
    spec = get_task(task)
    lines = [STATE_MARK]
    for key, kind, desc in spec.text_schema:
        if kind == "matrix":
            lines.append(f"{key}:  # {desc}")
            for row in state[key]:
                lines.append(" ".join(_cell(v) for v in row))
        else:
            lines.append(f"{key}: {json.dumps(state[key], separators=(', ', ': '))}")
    return "\n".join(lines) + "\n"


def render_text(instance: TaskInstance) -> str:
    """Question plus a complete, machine-readable transcription of the state."""
    return instance.question.rstrip() + "\n\n" + state_block(instance.task, instance.initial_state)


def parse_state_text(task: str, text: str) -> dict:
    """Recover ``initial_state`` from a rendering (or from a bare state block)."""
    spec = get_task(task)
    kinds = {k: kind for k, kind, _ in spec.text_schema}
    at = text.rfind(STATE_MARK)
    body = text[at + len(STATE_MARK):] if at >= 0 else text
    state: dict = {}
    current = None
    for raw in body.splitlines():
        line = raw.rstrip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if sep and key in kinds and (kinds[key] != "matrix" or not rest.strip() or rest.strip().startswith("#")):
            if kinds[key] == "matrix":
                state[key] = []
                current = key
            else:
                state[key] = json.loads(rest.strip())
                current = None
            continue
        if current is None:
            raise ValueError(f"unexpected line in state block: {line!r}")
        state[current].append([_uncell(tok) for tok in line.split()])
    missing = [k for k in kinds if k not in state]
    if missing:
        raise ValueError(f"state block lacks {missing}")
    return state
