"""Shared scaffolding for task families."""
from __future__ import annotations

from typing import Any, Optional

from .. import grammar as G
from ..core import Reject, TaskSpec, register
from ..rng import Stream

ORTHO = ((-1, 0), (0, 1), (1, 0), (0, -1))
KING = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
STEP = {"up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1)}


class TaskBase:
    """One task: subclasses set the class attributes and override hooks."""

    name = ""
    title = ""
    category = ""
    verify_mode = "constraint_check"
    levels: dict[int, dict[str, Any]] = {}
    schema: tuple[tuple[str, str, str], ...] = ()
    size_keys: tuple[str, ...] = ()
    unique = False
    rules = ""
    answer_format = ""

    def generate(self, p: dict, rng: Stream) -> Optional[tuple[dict, Any]]:
        raise NotImplementedError

    def solve(self, s: dict) -> Any:
        raise NotImplementedError

    def check(self, s: dict, truth: Any, ans: Any) -> None:
        # exact-match default: compare canonical forms
        if G.normalize(self.name, ans) != G.normalize(self.name, truth):
            raise Reject("wrong_value")

    def describe(self, s: dict) -> str:
        """Instance-specific sentences inserted between rules and format."""
        return ""

    def question(self, s: dict) -> str:
        parts = [self.rules.strip()]
        extra = self.describe(s).strip()
        if extra:
            parts.append(extra)
        parts.append("Answer format: " + self.answer_format.strip())
        return "\n\n".join(parts)

    def draw(self, s: dict):
        return None

    def trace(self, s: dict, solution: Any) -> Optional[list]:
        return None

    def model(self, s: dict):
        """CSP model of the instance, for tasks solved by the generic engine."""
        return None


def register_task(cls):
    t = cls()
    extras = {"impl": t}
    if type(t).model is not TaskBase.model:
        extras["model"] = t.model
    register(TaskSpec(
        name=t.name, title=t.title, category=t.category, verify_mode=t.verify_mode,
        levels={k: dict(v) for k, v in t.levels.items()}, generate=t.generate, solve=t.solve,
        check=t.check, question=t.question, text_schema=t.schema, draw=t.draw,
        trace=t.trace, size_keys=t.size_keys, unique=t.unique, extras=extras,
    ))
    return cls


# -- small helpers -----------------------------------------------------------


def step(kind: str, text: str, payload: Optional[str] = None) -> tuple:
    """One scaffold step; ``kind`` is an anchor kind or "note"."""
    return (kind, text, payload)


def in_bounds(r: int, c: int, h: int, w: int) -> bool:
    return 0 <= r < h and 0 <= c < w


def neighbors(r: int, c: int, h: int, w: int, dirs=ORTHO):
    for dr, dc in dirs:
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w:
            yield rr, cc


def grid_adjacency(h: int, w: int, dirs=ORTHO) -> list[list[int]]:
    return [[rr * w + cc for rr, cc in neighbors(i // w, i % w, h, w, dirs)] for i in range(h * w)]


def connected(cells, dirs=ORTHO) -> bool:
    cells = set(map(tuple, cells))
    if not cells:
        return True
    start = next(iter(cells))
    seen = {start}
    stack = [start]
    while stack:
        r, c = stack.pop()
        for dr, dc in dirs:
            q = (r + dr, c + dc)
            if q in cells and q not in seen:
                seen.add(q)
                stack.append(q)
    return len(seen) == len(cells)


def require(cond: bool, reason: str = "rule_violation", detail: str = "") -> None:
    if not cond:
        raise Reject(reason, detail)


def grid_shape(rows, h: int, w: int) -> None:
    require(len(rows) == h and all(len(r) == w for r in rows), "incomplete",
            f"expected a {h}x{w} grid")


def random_latin(n: int, rng: Stream) -> list[list[int]]:
    """Random Latin square on 1..n drawn by a randomised CSP search."""
    from ..csp import AllDifferent, GridModel, mask_of, solve_csp

    m = GridModel(n, n, [mask_of(range(1, n + 1))] * (n * n))
    for r in range(n):
        m.add(AllDifferent([r * n + c for c in range(n)], exact=True))
    for c in range(n):
        m.add(AllDifferent([r * n + c for r in range(n)], exact=True))
    sol = solve_csp(m, rng=rng)
    return [sol[r * n:(r + 1) * n] for r in range(n)]


def random_partition(h: int, w: int, rng: Stream, min_size: int, max_size: int) -> list[list[int]]:
    """Partition the grid into connected regions by random growth."""
    region = [[-1] * w for _ in range(h)]
    order = rng.shuffled([(r, c) for r in range(h) for c in range(w)])
    rid = 0
    for r0, c0 in order:
        if region[r0][c0] >= 0:
            continue
        target = rng.randint(min_size, max_size)
        cells = [(r0, c0)]
        region[r0][c0] = rid
        while len(cells) < target:
            frontier = sorted({q for (r, c) in cells for q in neighbors(r, c, h, w)
                               if region[q[0]][q[1]] < 0})
            if not frontier:
                break
            q = rng.choice(frontier)
            region[q[0]][q[1]] = rid
            cells.append(q)
        rid += 1
    return region
