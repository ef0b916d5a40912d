"""Game tasks: Maze, Sokoban, Nibbles, Sliding Puzzle, Minesweeper and Tower of Hanoi.

Every game has a step simulator (``simulate_moves``) used for verification and a
planner (``plan``) that produces the ground-truth move list.
"""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from itertools import count
from typing import Optional

from .. import grammar as G
from ..csp import GridModel, LinearSum, SearchLimit, make_unique, solve_csp
from ..render.svg import (CELL, MARGIN, PALETTE, THICK, Canvas, cell_center, cell_xy, draw_cells,
                          draw_values, grid_canvas)
from .common import KING, ORTHO, STEP, TaskBase, neighbors, register_task, require, step

DIR_OF = {v: k for k, v in STEP.items()}


@dataclass(frozen=True)
class Outcome:
    """Result of replaying a move list: success, violation or incomplete."""

    status: str
    kind: Optional[str] = None
    step: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.status == "success"


SUCCESS = Outcome("success")
INCOMPLETE = Outcome("incomplete")


def _violation(kind: str, i: int) -> Outcome:
    return Outcome("violation", kind, i)


def _outcome_to_reject(out: Outcome) -> None:
    if out.status == "violation":
        require(False, "rule_violation", f"{out.kind} at step {out.step}")
    require(out.status == "success", "incomplete", "goal not reached")


# -- Maze ------------------------------------------------------------------------------


def maze_open(s, r, c, d) -> bool:
    """True when the walker may step from (r, c) in direction d."""
    dr, dc = d
    rr, cc = r + dr, c + dc
    if not (0 <= rr < s["rows"] and 0 <= cc < s["cols"]):
        return False
    if dr == 0:
        return not s["right"][r][min(c, cc)]
    return not s["down"][min(r, rr)][c]


def simulate_maze(s, moves) -> Outcome:
    r, c = s["start"]
    for i, m in enumerate(moves):
        if not maze_open(s, r, c, STEP[m]):
            return _violation("wall", i)
        r, c = r + STEP[m][0], c + STEP[m][1]
    return SUCCESS if [r, c] == list(s["end"]) else INCOMPLETE


def maze_bfs(s, start):
    prev = {tuple(start): None}
    q = deque([tuple(start)])
    while q:
        r, c = q.popleft()
        for name, d in STEP.items():
            nxt = (r + d[0], c + d[1])
            if nxt not in prev and maze_open(s, r, c, d):
                prev[nxt] = ((r, c), name)
                q.append(nxt)
    return prev


def plan_maze(s) -> list[str]:
    prev = maze_bfs(s, s["start"])
    cur = tuple(s["end"])
    out = []
    while prev[cur] is not None:
        cur, m = prev[cur]
        out.append(m)
    return out[::-1]


@register_task
class Maze(TaskBase):
    name = "maze"
    title = "Maze"
    category = "Game"
    verify_mode = "simulate"
    levels = {k: {"n": 2 * k + 5, "loops": k + 1} for k in range(1, 6)}
    schema = (("rows", "json", "rows"), ("cols", "json", "columns"),
              ("start", "json", "start cell [row, col]"), ("end", "json", "end cell [row, col]"),
              ("right", "matrix", "1 = wall between (r,c) and (r,c+1)"),
              ("down", "matrix", "1 = wall between (r,c) and (r+1,c)"))
    size_keys = ("n",)
    rules = ("Walk from the start cell to the end cell of the maze. Each move goes one cell up, "
             "down, left or right, and a move may not cross a wall between two cells or leave "
             "the grid.")
    answer_format = "the moves separated by spaces, e.g. right down left up."

    def generate(self, p, rng):
        n = p["n"]
        right = [[1] * (n - 1) for _ in range(n)]
        down = [[1] * n for _ in range(n - 1)]

        def knock(a, b):
            (r1, c1), (r2, c2) = sorted((a, b))
            if r1 == r2:
                right[r1][c1] = 0
            else:
                down[r1][c1] = 0

        start = (rng.below(n), rng.below(n))
        seen = {start}
        stack = [start]
        while stack:
            cur = stack[-1]
            opts = [q for q in neighbors(cur[0], cur[1], n, n) if q not in seen]
            if not opts:
                stack.pop()
                continue
            q = rng.choice(opts)
            knock(cur, q)
            seen.add(q)
            stack.append(q)
        for _ in range(p["loops"]):
            r, c = rng.below(n), rng.below(n)
            q = rng.choice(list(neighbors(r, c, n, n)))
            knock((r, c), q)
        s = {"rows": n, "cols": n, "start": list(start), "end": [0, 0], "right": right, "down": down}
        dist = {}
        prev = maze_bfs(s, start)
        for cell in prev:
            k, cur = 0, cell
            while prev[cur] is not None:
                cur = prev[cur][0]
                k += 1
            dist[cell] = k
        far = max(dist.values())
        s["end"] = list(rng.choice(sorted(c for c, k in dist.items() if k == far)))
        return s, G.MoveSeq(tuple(plan_maze(s)))

    def solve(self, s):
        return G.MoveSeq(tuple(plan_maze(s)))

    def check(self, s, truth, ans):
        _outcome_to_reject(simulate_maze(s, ans.moves))

    def describe(self, s):
        rows, cols = s["rows"], s["cols"]
        lines = ["+" + "--+" * cols]
        for r in range(rows):
            mid = "|"
            for c in range(cols):
                mark = "S " if [r, c] == list(s["start"]) else "E " if [r, c] == list(s["end"]) else "  "
                wall = c == cols - 1 or s["right"][r][c]
                mid += mark + ("|" if wall else " ")
            lines.append(mid)
            bot = "+"
            for c in range(cols):
                wall = r == rows - 1 or s["down"][r][c]
                bot += ("--" if wall else "  ") + "+"
            lines.append(bot)
        return ("Maze (S = start, E = end; | and -- are walls; rows top to bottom, "
                "columns left to right):\n" + "\n".join(lines))

    def draw(self, s):
        rows, cols = s["rows"], s["cols"]
        cv = grid_canvas(rows, cols)
        draw_cells(cv, rows, cols)
        for r in range(rows):
            for c in range(cols - 1):
                if s["right"][r][c]:
                    x, y = cell_xy(r, c + 1)
                    cv.line(x, y, x, y + CELL, stroke=PALETTE["ink"], sw=THICK, cls="wall")
        for r in range(rows - 1):
            for c in range(cols):
                if s["down"][r][c]:
                    x, y = cell_xy(r + 1, c)
                    cv.line(x, y, x + CELL, y, stroke=PALETTE["ink"], sw=THICK, cls="wall")
        x, y = cell_center(*s["start"])
        cv.circle(x, y, CELL // 3, fill=PALETTE["start"], cls="start")
        x, y = cell_center(*s["end"])
        cv.cross(x, y, CELL // 3, stroke=PALETTE["goal"], cls="goal")
        return cv

    def trace(self, s, sol):
        r, c = s["start"]
        out = []
        for i, m in enumerate(sol.moves, 1):
            r, c = r + STEP[m][0], c + STEP[m][1]
            out.append(step("intermediate_state", f"Move {i}: {m} to ({r},{c}).", f"({r},{c})"))
        return out


# -- Sokoban -----------------------------------------------------------------------------


def simulate_sokoban(s, moves) -> Outcome:
    walls = {tuple(w) for w in s["walls"]}
    boxes = {tuple(b) for b in s["boxes"]}
    pr, pc = s["player"]
    rows, cols = s["rows"], s["cols"]

    def free(q):
        return 0 <= q[0] < rows and 0 <= q[1] < cols and q not in walls

    for i, m in enumerate(moves):
        dr, dc = STEP[m]
        nxt = (pr + dr, pc + dc)
        if not free(nxt):
            return _violation("wall", i)
        if nxt in boxes:
            beyond = (nxt[0] + dr, nxt[1] + dc)
            if not free(beyond) or beyond in boxes:
                return _violation("blocked_push", i)
            boxes.remove(nxt)
            boxes.add(beyond)
        pr, pc = nxt
    return SUCCESS if boxes == {tuple(t) for t in s["targets"]} else INCOMPLETE


class SokobanSolver:
    """A* over push states; the player position is normalised to its reachable region."""

    def __init__(self, s):
        self.rows, self.cols = s["rows"], s["cols"]
        walls = {tuple(w) for w in s["walls"]}
        self.floor = {(r, c) for r in range(self.rows) for c in range(self.cols) if (r, c) not in walls}
        self.targets = frozenset(tuple(t) for t in s["targets"])
        self.live = self._live_squares()

    def _live_squares(self):
        # a box can reach a target from x iff x is pull-reachable from some target
        live = set(self.targets)
        q = deque(live)
        while q:
            x = q.popleft()
            for dr, dc in ORTHO:
                y = (x[0] - dr, x[1] - dc)
                behind = (y[0] - dr, y[1] - dc)
                if y in self.floor and behind in self.floor and y not in live:
                    live.add(y)
                    q.append(y)
        return live

    def reach(self, player, boxes):
        seen = {player}
        q = deque([player])
        while q:
            r, c = q.popleft()
            for dr, dc in ORTHO:
                nxt = (r + dr, c + dc)
                if nxt in self.floor and nxt not in boxes and nxt not in seen:
                    seen.add(nxt)
                    q.append(nxt)
        return seen

    def walk(self, start, goal, boxes) -> list[str]:
        prev = {start: None}
        q = deque([start])
        while q:
            cur = q.popleft()
            if cur == goal:
                break
            for name, (dr, dc) in STEP.items():
                nxt = (cur[0] + dr, cur[1] + dc)
                if nxt in self.floor and nxt not in boxes and nxt not in prev:
                    prev[nxt] = (cur, name)
                    q.append(nxt)
        out = []
        cur = goal
        while prev[cur] is not None:
            cur, m = prev[cur]
            out.append(m)
        return out[::-1]

    def h(self, boxes):
        return sum(min(abs(b[0] - t[0]) + abs(b[1] - t[1]) for t in self.targets) for b in boxes)

    def solve(self, player, boxes, node_limit: int = 30_000) -> Optional[list[str]]:
        boxes = frozenset(boxes)
        root = boxes
        if any(b not in self.live for b in boxes if b not in self.targets):
            return None
        reach = self.reach(player, boxes)
        key = (min(reach), boxes)
        parent = {key: None}
        tie = count()
        heap = [(self.h(boxes), 0, next(tie), key, player)]
        goal = None
        expanded = 0
        while heap:
            _, g, _, key, pos = heapq.heappop(heap)
            boxes = key[1]
            if boxes == self.targets:
                goal = key
                break
            expanded += 1
            if expanded > node_limit:
                return None
            reach = self.reach(pos, boxes)
            for b in sorted(boxes):
                for name, (dr, dc) in STEP.items():
                    stand = (b[0] - dr, b[1] - dc)
                    dest = (b[0] + dr, b[1] + dc)
                    if stand not in reach or dest not in self.live or dest in boxes:
                        continue
                    nb = (boxes - {b}) | {dest}
                    nreach_key = (min(self.reach(b, nb)), nb)
                    if nreach_key in parent:
                        continue
                    parent[nreach_key] = (key, stand, name, b)
                    heapq.heappush(heap, (g + 1 + self.h(nb), g + 1, next(tie), nreach_key, b))
        if goal is None:
            return None
        pushes = []
        cur = goal
        while parent[cur] is not None:
            prev, stand, name, b = parent[cur]
            pushes.append((stand, name, b))
            cur = prev
        moves: list[str] = []
        pos, boxes = player, set(root)
        for stand, name, b in reversed(pushes):
            moves += self.walk(pos, stand, boxes)
            moves.append(name)
            boxes.remove(b)
            boxes.add((b[0] + STEP[name][0], b[1] + STEP[name][1]))
            pos = b
        return moves


def plan_sokoban(s, node_limit: int = 30_000) -> Optional[list[str]]:
    return SokobanSolver(s).solve(tuple(s["player"]), [tuple(b) for b in s["boxes"]], node_limit)


@register_task
class Sokoban(TaskBase):
    name = "sokoban"
    title = "Sokoban"
    category = "Game"
    verify_mode = "simulate"
    levels = {1: {"n": 6, "boxes": 1, "pulls": 30}, 2: {"n": 7, "boxes": 1, "pulls": 50},
              3: {"n": 7, "boxes": 2, "pulls": 60}, 4: {"n": 8, "boxes": 2, "pulls": 80},
              5: {"n": 8, "boxes": 3, "pulls": 100}}
    schema = (("rows", "json", "rows"), ("cols", "json", "columns"), ("walls", "json", "wall cells"),
              ("boxes", "json", "box cells"), ("targets", "json", "target cells"),
              ("player", "json", "player cell"))
    size_keys = ("n", "boxes")
    rules = ("You control the player in a warehouse. Each move goes one cell up, down, left or "
             "right. Walking into a box pushes it one cell further in the same direction, which "
             "is only possible when that cell is free (no wall and no other box). Boxes cannot "
             "be pulled and walls cannot be entered. The puzzle is solved when every box stands "
             "on a target. Cells are (row,col) from the top-left.")
    answer_format = "the player's moves separated by spaces, e.g. up right down left."

    def generate(self, p, rng):
        n = p["n"]
        walls = {(r, c) for r in range(n) for c in range(n) if r in (0, n - 1) or c in (0, n - 1)}
        for r in range(1, n - 1):
            for c in range(1, n - 1):
                if rng.chance(0.12):
                    walls.add((r, c))
        floor = [(r, c) for r in range(n) for c in range(n) if (r, c) not in walls]
        if len(floor) < 2 * p["boxes"] + 4:
            return None
        # keep the largest floor component only
        comp, best = {}, []
        for cell in floor:
            if cell in comp:
                continue
            part, q = [cell], deque([cell])
            comp[cell] = cell
            while q:
                x = q.popleft()
                for y in neighbors(x[0], x[1], n, n):
                    if y not in walls and y not in comp:
                        comp[y] = cell
                        part.append(y)
                        q.append(y)
            if len(part) > len(best):
                best = part
        walls |= set(floor) - set(best)
        floor = sorted(best)
        targets = rng.sample(floor, p["boxes"])
        boxes = set(targets)
        player = rng.choice([c for c in floor if c not in boxes])
        fl = set(floor)
        for _ in range(p["pulls"]):
            opts = [d for d in ORTHO if (player[0] + d[0], player[1] + d[1]) in fl
                    and (player[0] + d[0], player[1] + d[1]) not in boxes]
            if not opts:
                return None
            d = rng.choice(opts)
            behind = (player[0] - d[0], player[1] - d[1])
            if behind in boxes and rng.chance(0.7):
                boxes.remove(behind)
                boxes.add(player)
            player = (player[0] + d[0], player[1] + d[1])
        if boxes & set(targets):
            return None
        s = {"rows": n, "cols": n, "walls": sorted([list(w) for w in walls]),
             "boxes": sorted([list(b) for b in boxes]), "targets": sorted([list(t) for t in targets]),
             "player": list(player)}
        moves = plan_sokoban(s)
        if moves is None or len(moves) < 3:
            return None
        return s, G.MoveSeq(tuple(moves))

    def solve(self, s):
        moves = plan_sokoban(s, node_limit=500_000)
        if moves is None:
            raise RuntimeError("plan_failed")
        return G.MoveSeq(tuple(moves))

    def check(self, s, truth, ans):
        _outcome_to_reject(simulate_sokoban(s, ans.moves))

    def describe(self, s):
        return "Map (# wall, . floor, B box, T target, * box on target, P player):\n" + sokoban_text(s)

    def draw(self, s):
        n_r, n_c = s["rows"], s["cols"]
        walls = {tuple(w) for w in s["walls"]}
        cv = grid_canvas(n_r, n_c)
        draw_cells(cv, n_r, n_c, fills=lambda r, c: PALETTE["ink"] if (r, c) in walls else None)
        for r, c in s["targets"]:
            x, y = cell_center(r, c)
            cv.circle(x, y, CELL // 4, fill="none", stroke=PALETTE["target"], sw=3, cls="target")
        for r, c in s["boxes"]:
            x, y = cell_xy(r, c)
            cv.rect(x + 8, y + 8, CELL - 16, CELL - 16, fill=PALETTE["box"], stroke=PALETTE["ink"], cls="box")
        x, y = cell_center(*s["player"])
        cv.circle(x, y, CELL // 3, fill=PALETTE["accent"], cls="player")
        return cv

    def trace(self, s, sol):
        boxes = {tuple(b) for b in s["boxes"]}
        pr, pc = s["player"]
        out = []
        for i, m in enumerate(sol.moves, 1):
            dr, dc = STEP[m]
            pr, pc = pr + dr, pc + dc
            if (pr, pc) in boxes:
                boxes.remove((pr, pc))
                boxes.add((pr + dr, pc + dc))
                out.append(step("decision_point", f"Move {i}: {m}, push the box to ({pr + dr},{pc + dc}).",
                                f"box ({pr + dr},{pc + dc})"))
            else:
                out.append(step("intermediate_state", f"Move {i}: {m} to ({pr},{pc}).", f"({pr},{pc})"))
        return out


def sokoban_text(s) -> str:
    walls = {tuple(w) for w in s["walls"]}
    boxes = {tuple(b) for b in s["boxes"]}
    targets = {tuple(t) for t in s["targets"]}
    rows = []
    for r in range(s["rows"]):
        line = ""
        for c in range(s["cols"]):
            q = (r, c)
            if q in walls:
                line += "#"
            elif q in boxes:
                line += "*" if q in targets else "B"
            elif q == tuple(s["player"]):
                line += "P"
            else:
                line += "T" if q in targets else "."
        rows.append(line)
    return "\n".join(rows)


# -- Nibbles ---------------------------------------------------------------------------------


def simulate_nibbles(s, moves) -> Outcome:
    rows, cols = s["rows"], s["cols"]
    body = deque(tuple(x) for x in s["snake"])
    apples = {tuple(a) for a in s["apples"]}
    for i, m in enumerate(moves):
        dr, dc = STEP[m]
        head = (body[0][0] + dr, body[0][1] + dc)
        if not (0 <= head[0] < rows and 0 <= head[1] < cols):
            return _violation("wall", i)
        if len(body) > 1 and head == body[1]:
            return _violation("reverse", i)
        eat = head in apples
        if not eat:
            body.pop()  # the tail leaves before the head arrives
        if head in body:
            return _violation("self_collision", i)
        body.appendleft(head)
        if eat:
            apples.remove(head)
    return SUCCESS if not apples else INCOMPLETE


def nibbles_step(body: tuple, apples: frozenset, m: str):
    dr, dc = STEP[m]
    head = (body[0][0] + dr, body[0][1] + dc)
    if head in apples:
        return (head,) + body, apples - {head}
    return (head,) + body[:-1], apples


def _timed_path(body, target, rows, cols, blocked):
    """BFS for the head where body segment i frees up after len(body) - i moves."""
    n = len(body)
    free_at = {cell: n - i for i, cell in enumerate(body)}
    start = body[0]
    prev = {start: None}
    q = deque([(start, 0)])
    while q:
        cur, t = q.popleft()
        if cur == target:
            break
        for name, (dr, dc) in STEP.items():
            nxt = (cur[0] + dr, cur[1] + dc)
            if not (0 <= nxt[0] < rows and 0 <= nxt[1] < cols) or nxt in prev or nxt in blocked:
                continue
            if t == 0 and n > 1 and nxt == body[1]:
                continue
            if free_at.get(nxt, 0) > t + 1:
                continue
            prev[nxt] = (cur, name)
            q.append((nxt, t + 1))
    if target not in prev:
        return None
    out = []
    cur = target
    while prev[cur] is not None:
        cur, m = prev[cur]
        out.append(m)
    return out[::-1]


def _roomy(body, rows, cols) -> bool:
    """Safety test: the head can still reach its tail or a region as large as the snake."""
    occupied = set(body[:-1])
    seen = {body[0]}
    q = deque([body[0]])
    while q:
        r, c = q.popleft()
        for dr, dc in ORTHO:
            nxt = (r + dr, c + dc)
            if nxt == body[-1] and len(body) > 2:
                return True
            if 0 <= nxt[0] < rows and 0 <= nxt[1] < cols and nxt not in occupied and nxt not in seen:
                seen.add(nxt)
                q.append(nxt)
    return len(seen) - 1 >= len(body)


def plan_nibbles(s, budget: int = 2000) -> Optional[list[str]]:
    rows, cols = s["rows"], s["cols"]
    calls = [0]

    def go(body, apples):
        if not apples:
            return []
        calls[0] += 1
        if calls[0] > budget:
            return None
        head = body[0]
        order = sorted(apples, key=lambda a: (abs(a[0] - head[0]) + abs(a[1] - head[1]), a))
        for a in order:
            path = _timed_path(body, a, rows, cols, apples - {a})
            if path is None:
                continue
            b, ap = body, apples
            for m in path:
                b, ap = nibbles_step(b, ap, m)
            if ap and not _roomy(b, rows, cols):
                continue
            rest = go(b, ap)
            if rest is not None:
                return path + rest
        return None

    moves = go(tuple(tuple(x) for x in s["snake"]), frozenset(tuple(a) for a in s["apples"]))
    if moves is None or not simulate_nibbles(s, moves).ok:
        return None
    return moves


def facing(body) -> str:
    if len(body) < 2:
        return "up"
    return DIR_OF[(body[0][0] - body[1][0], body[0][1] - body[1][1])]


@register_task
class Nibbles(TaskBase):
    name = "nibbles"
    title = "Nibbles"
    category = "Game"
    verify_mode = "simulate"
    levels = {k: {"n": 5 + k, "apples": k} for k in range(1, 6)}
    schema = (("rows", "json", "rows"), ("cols", "json", "columns"),
              ("snake", "json", "snake cells [row, col], head first"),
              ("apples", "json", "apple cells [row, col]"))
    size_keys = ("n", "apples")
    rules = ("Steer the snake with the commands up, down, left and right; every command moves the "
             "head one cell and the body follows. Eat every apple. Eating an apple makes the "
             "snake one segment longer because its tail stays where it is on that move. The "
             "snake may not leave the grid, run into its own body, or turn straight back onto "
             "the segment behind its head. Cells are (row, col) with (0, 0) at the top-left.")
    answer_format = "the commands separated by spaces, e.g. up right down left up."

    def generate(self, p, rng):
        n = p["n"]
        head = (rng.below(n), rng.below(n))
        neck = rng.choice(list(neighbors(head[0], head[1], n, n)))
        free = [(r, c) for r in range(n) for c in range(n) if (r, c) not in (head, neck)]
        apples = rng.sample(free, p["apples"])
        s = {"rows": n, "cols": n, "snake": [list(head), list(neck)],
             "apples": sorted([list(a) for a in apples])}
        moves = plan_nibbles(s)
        if moves is None:
            return None
        return s, G.MoveSeq(tuple(moves))

    def solve(self, s):
        moves = plan_nibbles(s, budget=100_000)
        if moves is None:
            raise RuntimeError("plan_failed")
        return G.MoveSeq(tuple(moves))

    def check(self, s, truth, ans):
        _outcome_to_reject(simulate_nibbles(s, ans.moves))

    def describe(self, s):
        grid = [["."] * s["cols"] for _ in range(s["rows"])]
        for r, c in s["apples"]:
            grid[r][c] = "A"
        for r, c in s["snake"][1:]:
            grid[r][c] = "S"
        r, c = s["snake"][0]
        grid[r][c] = "H"
        return (f"Grid: {s['rows']}x{s['cols']} (H head, S body, A apple, . empty)\n" +
                "\n".join("".join(row) for row in grid) +
                f"\nSnake (head first): {', '.join(f'({r}, {c})' for r, c in s['snake'])}"
                f"\nApples: {', '.join(f'({r}, {c})' for r, c in s['apples'])}")

    def draw(self, s):
        rows, cols = s["rows"], s["cols"]
        cv = grid_canvas(rows, cols)
        draw_cells(cv, rows, cols)
        for r, c in s["apples"]:
            x, y = cell_center(r, c)
            cv.circle(x, y, CELL // 3, fill=PALETTE["apple"], cls="apple")
        for i, (r, c) in enumerate(s["snake"]):
            x, y = cell_xy(r, c)
            fill = PALETTE["head"] if i == 0 else PALETTE["snake"]
            cv.rect(x + 4, y + 4, CELL - 8, CELL - 8, fill=fill, cls="head" if i == 0 else "body")
        return cv

    def trace(self, s, sol):
        body = tuple(tuple(x) for x in s["snake"])
        apples = frozenset(tuple(a) for a in s["apples"])
        out = []
        for i, m in enumerate(sol.moves, 1):
            old = body[0]
            body, left = nibbles_step(body, apples, m)
            h = body[0]
            text = f"Move {i}: {m}, head ({old[0]}, {old[1]}) -> ({h[0]}, {h[1]})."
            if left != apples:
                text += f" Apple consumed at ({h[0]}, {h[1]}); length is now {len(body)}."
                out.append(step("key_calculation", text, f"({h[0]}, {h[1]})"))
            else:
                out.append(step("intermediate_state", text, f"({h[0]}, {h[1]})"))
            apples = left
        return out


# -- Sliding puzzle -----------------------------------------------------------------------------

GOAL15 = tuple(list(range(1, 16)) + [0])
# a command names the direction the tile travels, so the blank moves the other way
BLANK_SHIFT = {"up": (1, 0), "down": (-1, 0), "left": (0, 1), "right": (0, -1)}


def slide(board: tuple, m: str, n: int = 4) -> Optional[tuple]:
    z = board.index(0)
    r, c = divmod(z, n)
    dr, dc = BLANK_SHIFT[m]
    rr, cc = r + dr, c + dc
    if not (0 <= rr < n and 0 <= cc < n):
        return None
    t = rr * n + cc
    b = list(board)
    b[z], b[t] = b[t], 0
    return tuple(b)


def simulate_sliding(s, moves) -> Outcome:
    b = tuple(v for row in s["board"] for v in row)
    for i, m in enumerate(moves):
        b = slide(b, m)
        if b is None:
            return _violation("no_tile", i)
    return SUCCESS if b == GOAL15 else INCOMPLETE


def solvable15(board: tuple) -> bool:
    tiles = [v for v in board if v]
    inv = sum(1 for i in range(len(tiles)) for j in range(i + 1, len(tiles)) if tiles[i] > tiles[j])
    blank_row_from_bottom = 4 - board.index(0) // 4
    return (inv + blank_row_from_bottom) % 2 == 1


def manhattan15(board: tuple) -> int:
    d = 0
    for i, v in enumerate(board):
        if v:
            t = v - 1
            d += abs(i // 4 - t // 4) + abs(i % 4 - t % 4)
    return d


OPPOSITE = {"up": "down", "down": "up", "left": "right", "right": "left"}


def plan_sliding(board: tuple) -> list[str]:
    """IDA* with the Manhattan-distance heuristic (optimal)."""
    path: list[str] = []

    def dfs(b, g, bound, h, last):
        f = g + h
        if f > bound:
            return f
        if b == GOAL15:
            return -1
        best = 10 ** 9
        for m in ("up", "down", "left", "right"):
            if last and OPPOSITE[last] == m:
                continue
            nb = slide(b, m)
            if nb is None:
                continue
            path.append(m)
            t = dfs(nb, g + 1, bound, manhattan15(nb), m)
            if t == -1:
                return -1
            path.pop()
            best = min(best, t)
        return best

    h0 = manhattan15(board)
    bound = h0
    while True:
        t = dfs(board, 0, bound, h0, None)
        if t == -1:
            return path
        bound = t


def random_board15(rng, walk: int) -> tuple:
    """Random-walk scramble from the goal; always solvable by construction."""
    b = GOAL15
    seen = {b}
    last = None
    for _ in range(walk):
        opts = [m for m in ("up", "down", "left", "right")
                if m != (OPPOSITE[last] if last else None) and slide(b, m) is not None
                and slide(b, m) not in seen]
        if not opts:
            break
        last = rng.choice(opts)
        b = slide(b, last)
        seen.add(b)
    return b


@register_task
class SlidingPuzzle(TaskBase):
    name = "sliding_puzzle"
    title = "Sliding Puzzle"
    category = "Game"
    verify_mode = "simulate"
    levels = {k: {"walk": 4 * k + 2} for k in range(1, 6)}
    schema = (("board", "matrix", "4x4 tiles, 0 = empty space"),)
    size_keys = ("walk",)
    rules = ("The board is a 4x4 frame holding tiles 1 to 15 and one empty space. A move slides a "
             "tile that borders the empty space into it. Reach the order 1 2 3 4 / 5 6 7 8 / "
             "9 10 11 12 / 13 14 15 with the empty space at the bottom right. A command names the "
             "direction the tile travels: up moves the tile below the space up, down moves the "
             "tile above it down, left moves the tile to its right leftwards and right moves the "
             "tile to its left rightwards. Rows and columns are numbered 1 to 4 from the top-left.")
    answer_format = "the commands separated by spaces, e.g. up down up left right."

    def generate(self, p, rng):
        b = random_board15(rng, p["walk"])
        if b == GOAL15:
            return None
        s = {"board": [list(b[i:i + 4]) for i in range(0, 16, 4)]}
        return s, G.MoveSeq(tuple(plan_sliding(b)))

    def solve(self, s):
        return G.MoveSeq(tuple(plan_sliding(tuple(v for row in s["board"] for v in row))))

    def check(self, s, truth, ans):
        _outcome_to_reject(simulate_sliding(s, ans.moves))

    def describe(self, s):
        return "Board (0 = empty space):\n" + "\n".join(" ".join(f"{v:2d}" for v in row) for row in s["board"])

    def draw(self, s):
        cv = grid_canvas(4, 4)
        draw_cells(cv, 4, 4, fills=lambda r, c: PALETTE["shade"] if s["board"][r][c] else None)
        draw_values(cv, s["board"])
        return cv

    def trace(self, s, sol):
        b = tuple(v for row in s["board"] for v in row)
        out = []
        for i, m in enumerate(sol.moves, 1):
            z = b.index(0)
            dr, dc = BLANK_SHIFT[m]
            tile = b[z + dr * 4 + dc]
            b = slide(b, m)
            out.append(step("intermediate_state", f"Move {i}: {m}, tile {tile} slides; "
                            f"Manhattan distance now {manhattan15(b)}.", str(tile)))
        return out


# -- Minesweeper --------------------------------------------------------------------------


def mine_model(board) -> GridModel:
    rows, cols = len(board), len(board[0])
    m = GridModel(cols, rows, [0b11] * (rows * cols))
    for r in range(rows):
        for c in range(cols):
            v = board[r][c]
            if v >= 0:
                m.fix(r * cols + c, 0)
                nb = [rr * cols + cc for rr, cc in neighbors(r, c, rows, cols, KING)]
                m.add(LinearSum(nb, v, v))
    return m


def deduce_minesweeper(board) -> G.CoordList:
    """The mine set implied by the revealed numbers (-1 marks a covered cell)."""
    cols = len(board[0])
    flat = solve_csp(mine_model(board))
    if flat is None:
        raise ValueError("no mine layout matches the clues")
    return G.CoordList(tuple(divmod(i, cols) for i, v in enumerate(flat) if v))


def mine_counts(mines: set, rows: int, cols: int):
    return [[sum((rr, cc) in mines for rr, cc in neighbors(r, c, rows, cols, KING))
             for c in range(cols)] for r in range(rows)]


@register_task
class Minesweeper(TaskBase):
    name = "minesweeper"
    title = "Minesweeper"
    category = "Game"
    unique = True
    levels = {1: {"n": 5, "density": 0.16, "revealed": 0.7}, 2: {"n": 6, "density": 0.17, "revealed": 0.62},
              3: {"n": 7, "density": 0.18, "revealed": 0.55}, 4: {"n": 8, "density": 0.18, "revealed": 0.5},
              5: {"n": 9, "density": 0.19, "revealed": 0.45}}
    schema = (("rows", "json", "rows"), ("cols", "json", "columns"),
              ("board", "matrix", "-1 = covered cell, otherwise the revealed mine count"),)
    size_keys = ("n",)
    rules = ("Some cells of the grid hide mines. Every uncovered cell shows how many of its eight "
             "neighbours (diagonals included) contain a mine; an uncovered cell showing 0 has no "
             "mine around it. Uncovered cells never contain mines. Use logic to find every mine.")
    answer_format = "all mine cells as 0-based (row,col) pairs, e.g. (0,5),(0,7),(1,1)."

    def model(self, s):
        return mine_model(s["board"])

    def generate(self, p, rng):
        n = p["n"]
        cells = [(r, c) for r in range(n) for c in range(n)]
        mines = set(rng.sample(cells, max(1, round(p["density"] * n * n))))
        counts = mine_counts(mines, n, n)
        safe = [r * n + c for r, c in cells if (r, c) not in mines]
        hidden = [1 if q in mines else 0 for q in cells]

        def board_of(shown):
            b = [[-1] * n for _ in range(n)]
            for i in shown:
                b[i // n][i % n] = counts[i // n][i % n]
            return b

        target = int(p["revealed"] * len(safe))
        try:
            shown = make_unique(lambda cs: mine_model(board_of(cs)), safe, hidden,
                                lambda i, sol: sol[i] == 0, rng, initial=safe,
                                stop=lambda cs: len(cs) <= target, node_limit=50_000)
        except (SearchLimit, ValueError):
            return None
        s = {"rows": n, "cols": n, "board": board_of(shown)}
        return s, G.CoordList(tuple(sorted(mines)))

    def solve(self, s):
        return deduce_minesweeper(s["board"])

    def describe(self, s):
        rows = [" ".join("?" if v < 0 else str(v) for v in row) for row in s["board"]]
        return "Board (? = covered, digits = uncovered counts):\n" + "\n".join(rows)

    def draw(self, s):
        rows, cols = s["rows"], s["cols"]
        cv = grid_canvas(rows, cols)
        draw_cells(cv, rows, cols, fills=lambda r, c: PALETTE["shade"] if s["board"][r][c] < 0 else None)
        draw_values(cv, [[v if v > 0 else 0 for v in row] for row in s["board"]])
        return cv

    def trace(self, s, sol):
        return [step("decision_point", f"({r},{c}) must hold a mine.", f"({r},{c})") for r, c in sol.coords]


# -- Tower of Hanoi -----------------------------------------------------------------------------


def simulate_hanoi(s, moves) -> Outcome:
    pegs = [list(p) for p in s["pegs"]]
    n = s["disks"]
    for i, (disk, dest) in enumerate(moves):
        if not 1 <= dest <= 3:
            return _violation("bad_peg", i)
        src = next((k for k in range(3) if pegs[k] and pegs[k][-1] == disk), None)
        if src is None:
            return _violation("not_on_top", i)
        if src == dest - 1:
            return _violation("same_peg", i)
        if pegs[dest - 1] and pegs[dest - 1][-1] < disk:
            return _violation("larger_on_smaller", i)
        pegs[src].pop()
        pegs[dest - 1].append(disk)
    return SUCCESS if pegs[2] == list(range(n, 0, -1)) else INCOMPLETE


def hanoi_recursive(n: int, src: int = 1, dst: int = 3, via: int = 2) -> list[tuple[int, int]]:
    if n == 0:
        return []
    return hanoi_recursive(n - 1, src, via, dst) + [(n, dst)] + hanoi_recursive(n - 1, via, dst, src)


def plan_hanoi(s) -> list[tuple[int, int]]:
    n = s["disks"]
    if s["pegs"][0] == list(range(n, 0, -1)):
        return hanoi_recursive(n)
    # state: tuple of peg index (0..2) per disk 1..n
    start = [0] * n
    for k, peg in enumerate(s["pegs"]):
        for d in peg:
            start[d - 1] = k
    start = tuple(start)
    goal = tuple([2] * n)
    prev = {start: None}
    q = deque([start])
    while q:
        cur = q.popleft()
        if cur == goal:
            break
        tops = {}
        for d in range(n, 0, -1):
            tops[cur[d - 1]] = d  # smallest disk ends up as the top
        for src, d in sorted(tops.items()):
            for dst in range(3):
                if dst == src or (dst in tops and tops[dst] < d):
                    continue
                nxt = cur[:d - 1] + (dst,) + cur[d:]
                if nxt not in prev:
                    prev[nxt] = (cur, (d, dst + 1))
                    q.append(nxt)
    out = []
    cur = goal
    while prev[cur] is not None:
        cur, mv = prev[cur]
        out.append(mv)
    return out[::-1]


@register_task
class Hanoi(TaskBase):
    name = "hanoi"
    title = "Tower of Hanoi"
    category = "Game"
    verify_mode = "simulate"
    levels = {k: {"disks": k + 2} for k in range(1, 6)}
    schema = (("disks", "json", "number of disks"),
              ("pegs", "json", "pegs 1..3, each listed bottom to top"))
    size_keys = ("disks",)
    rules = ("There are three pegs, numbered 1 to 3, and disks of sizes 1 (smallest) up to n. "
             "Move one disk at a time, always the top disk of a peg, and never put a disk on a "
             "smaller one. Finish with every disk on peg 3, largest at the bottom.")
    answer_format = "(disk,peg) pairs separated by spaces, where peg is the destination, e.g. (1,3) (2,2)."

    def generate(self, p, rng):
        n = p["disks"]
        where = [rng.below(3) for _ in range(n)]
        if all(w == 2 for w in where):
            return None
        pegs = [[d for d in range(n, 0, -1) if where[d - 1] == k] for k in range(3)]
        s = {"disks": n, "pegs": pegs}
        return s, G.CoordList(tuple(plan_hanoi(s)))

    def solve(self, s):
        return G.CoordList(tuple(plan_hanoi(s)))

    def check(self, s, truth, ans):
        _outcome_to_reject(simulate_hanoi(s, ans.coords))

    def describe(self, s):
        return "Pegs (bottom to top):\n" + "\n".join(f"Peg {k + 1}: {p}" for k, p in enumerate(s["pegs"]))

    def draw(self, s):
        n = s["disks"]
        w = 3 * (n + 2) * 16
        h = (n + 3) * 20
        cv = Canvas(2 * MARGIN + w, 2 * MARGIN + h)
        base = MARGIN + h
        for k, peg in enumerate(s["pegs"]):
            cx = MARGIN + (2 * k + 1) * w / 6
            cv.line(cx, base, cx, base - (n + 1) * 20, stroke=PALETTE["ink"], sw=THICK, cls="peg")
            cv.text(cx, base + 16, k + 1, size=14)
            for j, d in enumerate(peg):
                half = 8 + 8 * d
                cv.rect(cx - half, base - (j + 1) * 20, 2 * half, 18, fill=PALETTE["bar"],
                        stroke=PALETTE["ink"], cls=f"disk-{d}")
        cv.line(MARGIN, base, MARGIN + w, base, stroke=PALETTE["ink"], sw=THICK, cls="base")
        return cv

    def trace(self, s, sol):
        pegs = [list(p) for p in s["pegs"]]
        out = []
        for i, (d, dst) in enumerate(sol.coords, 1):
            src = next(k for k in range(3) if pegs[k] and pegs[k][-1] == d)
            pegs[src].pop()
            pegs[dst - 1].append(d)
            out.append(step("intermediate_state", f"Move {i}: disk {d} from peg {src + 1} to peg {dst}. "
                            f"Pegs: {pegs[0]} {pegs[1]} {pegs[2]}.", f"({d},{dst})"))
        return out


# -- dispatch ---------------------------------------------------------------------------------

SIMULATORS = {"maze": simulate_maze, "sokoban": simulate_sokoban, "nibbles": simulate_nibbles,
              "sliding_puzzle": simulate_sliding, "hanoi": simulate_hanoi}


def simulate_moves(task: str, state: dict, moves) -> Outcome:
    """Replay ``moves`` (names, or (disk, peg) pairs for Hanoi) from ``state``."""
    if task not in SIMULATORS:
        raise ValueError(f"no simulator for {task!r}")
    if isinstance(moves, (G.MoveSeq, G.CoordList)):
        moves = moves.moves if isinstance(moves, G.MoveSeq) else moves.coords
    return SIMULATORS[task](state, list(moves))


def plan(task: str, state: dict):
    """Planner output for a game state, as a move list."""
    if task == "maze":
        return plan_maze(state)
    if task == "sokoban":
        out = plan_sokoban(state, node_limit=500_000)
    elif task == "nibbles":
        out = plan_nibbles(state, budget=100_000)
    elif task == "sliding_puzzle":
        return plan_sliding(tuple(v for row in state["board"] for v in row))
    elif task == "hanoi":
        return plan_hanoi(state)
    else:
        raise ValueError(f"no planner for {task!r}")
    if out is None:
        raise RuntimeError("plan_failed")
    return out
