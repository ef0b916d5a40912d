"""Path, loop and network puzzles: Numbrix, Snake, Shingoki, Bridges and Kakuro."""
from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np

from .. import grammar as G
from ..csp import (Adjacent, AllDifferent, Connected, EdgeConnected, GridModel, LinearSum,
                   SearchLimit, TupleSet, iter_solutions, make_unique, mask_of, solve_csp)
from ..render.svg import (CELL, MARGIN, PALETTE, Canvas, cell_center, cell_xy, draw_cells,
                          draw_side_labels, draw_values, grid_canvas)
from .common import (KING, ORTHO, TaskBase, grid_adjacency, grid_shape, neighbors,
                     register_task, require, step)

NODE_LIMIT = 100_000


# -- Numbrix ------------------------------------------------------------------


def random_hamiltonian_path(n: int, rng, moves: int | None = None) -> list[tuple[int, int]]:
    """Random Hamiltonian path of the n x n grid by backbite moves from a serpentine."""
    path = [(r, c if r % 2 == 0 else n - 1 - c) for r in range(n) for c in range(n)]
    for _ in range(moves if moves is not None else 12 * n * n):
        if rng.chance(0.5):
            path.reverse()
        end = path[-1]
        opts = [q for q in neighbors(end[0], end[1], n, n) if q != path[-2]]
        q = rng.choice(opts)
        i = path.index(q)
        path[i + 1:] = reversed(path[i + 1:])
    return path


def numbrix_model(s) -> GridModel:
    n = s["n"]
    total = n * n
    nbr = [0] * total
    for i in range(total):
        for rr, cc in neighbors(i // n, i % n, n, n):
            nbr[i] |= 1 << (rr * n + cc)
    cells = mask_of(range(total))
    doms = [cells] * total
    givens = [(v, r * n + c) for r, row in enumerate(s["grid"]) for c, v in enumerate(row) if v]
    if givens:
        # checkerboard parity: number k sits on a square of colour fixed by any given
        v0, p0 = givens[0]
        col0 = (p0 // n + p0 % n) % 2
        even = mask_of(i for i in range(total) if (i // n + i % n) % 2 == col0)
        odd = cells & ~even
        doms = [even if (k + 1 - v0) % 2 == 0 else odd for k in range(total)]
    m = GridModel(n, n, doms)
    m.add(AllDifferent(range(total), exact=True))
    for k in range(total - 1):
        m.add(Adjacent(k, k + 1, nbr))
    for v, p in givens:
        m.fix(v - 1, p)
    return m


def numbrix_grid(flat, n):
    g = [[0] * n for _ in range(n)]
    for k, p in enumerate(flat):
        g[p // n][p % n] = k + 1
    return g


@register_task
class Numbrix(TaskBase):
    name = "numbrix"
    title = "Numbrix"
    category = "Puzzle"
    unique = True
    levels = {1: {"n": 4, "givens": 0.4}, 2: {"n": 5, "givens": 0.32}, 3: {"n": 6, "givens": 0.27},
              4: {"n": 7, "givens": 0.23}, 5: {"n": 8, "givens": 0.2}}
    schema = (("n", "json", "grid side"), ("grid", "matrix", "given numbers, 0 = empty"))
    size_keys = ("n",)
    rules = ("Write numbers into the empty cells so that the numbers 1, 2, 3, ... form one path "
             "in which consecutive numbers are in horizontally or vertically neighbouring cells. "
             "Each number is used once. In these grids the path visits every cell, so the "
             "largest number equals the number of cells.")
    answer_format = "the completed grid, one row per line, written like |1|2|3|."

    def model(self, s):
        return numbrix_model(s)

    def generate(self, p, rng):
        n = p["n"]
        path = random_hamiltonian_path(n, rng)
        flat = [r * n + c for r, c in path]
        pool = [(k + 1, flat[k]) for k in range(n * n)]

        def state(cs):
            g = [[0] * n for _ in range(n)]
            for v, q in cs:
                g[q // n][q % n] = v
            return {"n": n, "grid": g}

        target = int(p["givens"] * n * n)
        try:
            clues = make_unique(lambda cs: numbrix_model(state(cs)), pool, flat,
                                lambda cl, sol: sol[cl[0] - 1] == cl[1], rng,
                                initial=rng.sample(pool, target), stop=lambda cs: len(cs) <= target,
                                node_limit=NODE_LIMIT)
        except (SearchLimit, ValueError):
            return None
        return state(clues), G.GridOfDigits(tuple(map(tuple, numbrix_grid(flat, n))))

    def solve(self, s):
        flat = solve_csp(numbrix_model(s))
        return G.GridOfDigits(tuple(map(tuple, numbrix_grid(flat, s["n"]))))

    def check(self, s, truth, ans):
        n = s["n"]
        rows = [list(r) for r in ans.rows]
        grid_shape(rows, n, n)
        where = {}
        for r in range(n):
            for c in range(n):
                v = rows[r][c]
                require(v not in where, "rule_violation", f"{v} used twice")
                where[v] = (r, c)
        require(set(where) == set(range(1, n * n + 1)), "rule_violation", "numbers must be 1..n*n")
        for k in range(1, n * n):
            (r1, c1), (r2, c2) = where[k], where[k + 1]
            require(abs(r1 - r2) + abs(c1 - c2) == 1, "rule_violation", f"{k} and {k + 1} not adjacent")
        for r in range(n):
            for c in range(n):
                g = s["grid"][r][c]
                require(not g or rows[r][c] == g, "rule_violation", "given changed")

    def describe(self, s):
        return "Grid (0 = empty):\n" + "\n".join("|" + "|".join(map(str, r)) + "|" for r in s["grid"])

    def draw(self, s):
        n = s["n"]
        cv = grid_canvas(n, n)
        draw_cells(cv, n, n)
        draw_values(cv, s["grid"], size=18)
        return cv

    def trace(self, s, sol):
        n = s["n"]
        where = {v: (r, c) for r, row in enumerate(sol.rows) for c, v in enumerate(row)}
        return [step("intermediate_state", f"{k} at ({where[k][0]},{where[k][1]}).", f"{k}@{where[k]}")
                for k in range(1, n * n + 1)]


# -- Snake ------------------------------------------------------------------------------


def snake_touch_ok(path) -> bool:
    idx = {q: i for i, q in enumerate(path)}
    for i, (r, c) in enumerate(path):
        for dr, dc in KING:
            j = idx.get((r + dr, c + dc))
            if j is None or abs(i - j) == 1:
                continue
            if abs(i - j) == 2 and dr and dc:
                continue  # the two cells around a turn
            return False
    return True


@lru_cache(maxsize=None)
def _degree_tuples(k: int, deg: int):
    return np.array([(0,) + t for t in product((0, 1), repeat=k)] +
                    [(1,) + t for t in product((0, 1), repeat=k) if sum(t) == deg], dtype=np.int64)


_SNAKE_BLOCK = np.array([t for t in product((0, 1), repeat=4)
                         if sum(t) < 4 and not (t[0] and t[3] and not t[1] and not t[2])
                         and not (t[1] and t[2] and not t[0] and not t[3])], dtype=np.int64)


def snake_model(s) -> GridModel:
    n = s["n"]
    ends = {tuple(s["start"]), tuple(s["end"])}
    m = GridModel(n, n, [0b11] * (n * n))
    for r in range(n):
        for c in range(n):
            nb = [rr * n + cc for rr, cc in neighbors(r, c, n, n)]
            deg = 1 if (r, c) in ends else 2
            m.add(TupleSet([r * n + c] + nb, _degree_tuples(len(nb), deg), key=("deg", len(nb), deg)))
    for r in range(n - 1):
        for c in range(n - 1):
            # order: top-left, top-right, bottom-left, bottom-right
            m.add(TupleSet([r * n + c, r * n + c + 1, (r + 1) * n + c, (r + 1) * n + c + 1],
                           _SNAKE_BLOCK, key="snake-block"))
    for i in range(n):
        m.add(LinearSum([i * n + c for c in range(n)], s["row_counts"][i], s["row_counts"][i]))
        m.add(LinearSum([r * n + i for r in range(n)], s["col_counts"][i], s["col_counts"][i]))
    m.add(Connected(range(n * n), grid_adjacency(n, n), mark=1))
    for r, c in ends:
        m.fix(r * n + c, 1)
    return m


def trace_path(cells: set, start, end):
    path = [start]
    prev = None
    while path[-1] != end:
        nxt = [q for q in neighbors(*path[-1], 10 ** 6, 10 ** 6) if q in cells and q != prev]
        prev = path[-1]
        path.append(nxt[0])
    return path


@register_task
class Snake(TaskBase):
    name = "snake"
    title = "Snake"
    category = "Puzzle"
    levels = {k: {"n": k + 4} for k in range(1, 6)}
    schema = (("n", "json", "grid side"), ("start", "json", "S cell [row, col]"),
              ("end", "json", "E cell [row, col]"), ("row_counts", "json", "snake cells per row"),
              ("col_counts", "json", "snake cells per column"))
    size_keys = ("n",)
    rules = ("Draw a snake: a path of orthogonally connected cells from S to E that never crosses "
             "itself. The snake may not touch itself anywhere, not even diagonally, apart from "
             "the corner cells of its own turns. The numbers outside the grid give the count of "
             "snake cells in each row and column. Coordinates are (row,col), 0-based.")
    answer_format = "the snake's cells in order from S to E, e.g. (0,0) (0,1) (1,1)."

    def model(self, s):
        return snake_model(s)

    def generate(self, p, rng):
        n = p["n"]
        want = rng.randint(n + n // 2, 3 * n)
        start = (rng.below(n), rng.below(n))
        path = [start]
        on = {start}
        while len(path) < want:
            head = path[-1]
            opts = []
            for q in neighbors(head[0], head[1], n, n):
                if q in on:
                    continue
                bad = False
                for dr, dc in KING:
                    x = (q[0] + dr, q[1] + dc)
                    if x in on and x != head and not (len(path) > 1 and x == path[-2]):
                        bad = True
                        break
                if not bad:
                    opts.append(q)
            if not opts:
                break
            q = rng.choice(opts)
            path.append(q)
            on.add(q)
        if len(path) < n + 1 or not snake_touch_ok(path):
            return None
        s = {"n": n, "start": list(path[0]), "end": list(path[-1]),
             "row_counts": [sum(1 for r, _ in path if r == i) for i in range(n)],
             "col_counts": [sum(1 for _, c in path if c == i) for i in range(n)]}
        return s, G.CoordList(tuple(path))

    def solve(self, s):
        n = s["n"]
        flat = solve_csp(snake_model(s))
        cells = {(i // n, i % n) for i, v in enumerate(flat) if v}
        return G.CoordList(tuple(trace_path(cells, tuple(s["start"]), tuple(s["end"]))))

    def check(self, s, truth, ans):
        n = s["n"]
        path = list(ans.coords)
        require(len(path) >= 1, "incomplete")
        require(all(0 <= r < n and 0 <= c < n for r, c in path), "rule_violation", "cell outside the grid")
        require(path[0] == tuple(s["start"]), "rule_violation", "must start at S")
        require(len(set(path)) == len(path), "rule_violation", "snake crosses itself")
        for a, b in zip(path, path[1:]):
            require(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1, "rule_violation", "cells not adjacent")
        require(path[-1] == tuple(s["end"]), "incomplete", "must end at E")
        require(snake_touch_ok(path), "rule_violation", "snake touches itself")
        for i in range(n):
            require(sum(1 for r, _ in path if r == i) == s["row_counts"][i], "rule_violation", "row count")
            require(sum(1 for _, c in path if c == i) == s["col_counts"][i], "rule_violation", "column count")

    def describe(self, s):
        return (f"Grid size: {s['n']}x{s['n']}\nS at ({s['start'][0]},{s['start'][1]}), "
                f"E at ({s['end'][0]},{s['end'][1]})\n"
                f"Row counts: {', '.join(map(str, s['row_counts']))}\n"
                f"Column counts: {', '.join(map(str, s['col_counts']))}")

    def draw(self, s):
        n = s["n"]
        cv = grid_canvas(n, n, 0, 0, 1, 1)
        draw_cells(cv, n, n)
        for key, lbl in (("start", "S"), ("end", "E")):
            x, y = cell_center(*s[key])
            cv.text(x, y, lbl, size=22, fill=PALETTE["accent"], cls="marker")
        draw_side_labels(cv, s["row_counts"], s["col_counts"], n, n)
        return cv

    def trace(self, s, sol):
        return [step("intermediate_state", f"Step {i}: move to ({r},{c}).", f"({r},{c})")
                for i, (r, c) in enumerate(sol.coords)]


# -- Shingoki -------------------------------------------------------------------------


class LoopGrid:
    """Edge indexing for an n x n lattice of points."""

    def __init__(self, n: int):
        self.n = n
        self.edges: list[tuple[tuple[int, int], tuple[int, int]]] = []
        for r in range(n):
            for c in range(n - 1):
                self.edges.append(((r, c), (r, c + 1)))
        for r in range(n - 1):
            for c in range(n):
                self.edges.append(((r, c), (r + 1, c)))
        self.index = {e: i for i, e in enumerate(self.edges)}

    def edge(self, a, b):
        return self.index.get((min(a, b), max(a, b)))

    def arm(self, p, d):
        """Edge ids leaving point p in direction d, nearest first."""
        out = []
        r, c = p
        while True:
            q = (r + d[0], c + d[1])
            e = self.edge((r, c), q)
            if e is None:
                return out
            out.append(e)
            r, c = q

    def incident(self, p):
        return [e for e in (self.edge(p, (p[0] + dr, p[1] + dc)) for dr, dc in ORTHO) if e is not None]


ARM_DIRS = ((0, -1), (0, 1), (-1, 0), (1, 0))  # left, right, up, down


@lru_cache(maxsize=None)
def _arm_tuples(k: int):
    rows = []
    for t in product((0, 1), repeat=k):
        run = 0
        while run < k and t[run]:
            run += 1
        rows.append((run,) + t)
    return np.array(rows, dtype=np.int64)


@lru_cache(maxsize=None)
def _circle_tuples(n: int, color: str, value: int):
    rows = []
    for a in product(range(n), repeat=4):
        left, right, up, down = a
        h = (left > 0) + (right > 0)
        v = (up > 0) + (down > 0)
        if color == "white":
            ok = (h == 2 and v == 0) or (v == 2 and h == 0)
        else:
            ok = h == 1 and v == 1
        if ok and sum(a) == value:
            rows.append(a)
    return np.array(rows, dtype=np.int64).reshape(-1, 4)


@lru_cache(maxsize=None)
def _point_degree(k: int):
    return np.array([t for t in product((0, 1), repeat=k) if sum(t) in (0, 2)], dtype=np.int64)


def loop_arms(segs: set, p):
    """Straight run lengths (left, right, up, down) of a loop from point p."""
    out = []
    for d in ARM_DIRS:
        k, (r, c) = 0, p
        while ((r, c), (r + d[0], c + d[1])) in segs or ((r + d[0], c + d[1]), (r, c)) in segs:
            k += 1
            r, c = r + d[0], c + d[1]
        out.append(k)
    return out


def shingoki_model(s) -> GridModel:
    n = s["n"]
    lg = LoopGrid(n)
    ne = len(lg.edges)
    doms = [0b11] * ne
    m = GridModel(n, n, doms)
    for r in range(n):
        for c in range(n):
            inc = lg.incident((r, c))
            m.add(TupleSet(inc, _point_degree(len(inc)), key=("pdeg", len(inc))))
    for r, c, color, value in s["circles"]:
        arm_vars = []
        for d in ARM_DIRS:
            es = lg.arm((r, c), d)
            av = len(m.domains)
            m.domains.append(mask_of(range(len(es) + 1)))
            arm_vars.append(av)
            m.add(TupleSet([av] + es, _arm_tuples(len(es)), key=("arm", len(es))))
        m.add(TupleSet(arm_vars, _circle_tuples(n, color, value), key=("circle", n, color, value)))
    ends = [(a[0] * n + a[1], b[0] * n + b[1]) for a, b in lg.edges]
    m.add(EdgeConnected(range(ne), ends, n * n, required=[r * n + c for r, c, _, _ in s["circles"]]))
    return m


def random_loop(n: int, rng, frac: float) -> set:
    """Boundary of a random hole-free polyomino on the (n-1)^2 cells, as point segments."""
    cells_n = n - 1
    start = (rng.below(cells_n), rng.below(cells_n))
    poly = {start}
    target = max(2, int(frac * cells_n * cells_n))
    for _ in range(30 * cells_n * cells_n):
        if len(poly) >= target:
            break
        r, c = rng.choice(sorted(poly))
        q = rng.choice(list(neighbors(r, c, cells_n, cells_n)))
        if q in poly:
            continue
        segs = boundary(poly | {q})
        if simple_loop(segs):
            poly.add(q)
    return boundary(poly)


def boundary(poly) -> set:
    segs = set()
    for r, c in poly:
        for (a, b), nb in ((((r, c), (r, c + 1)), (r - 1, c)), (((r + 1, c), (r + 1, c + 1)), (r + 1, c)),
                           (((r, c), (r + 1, c)), (r, c - 1)), (((r, c + 1), (r + 1, c + 1)), (r, c + 1))):
            if nb not in poly:
                segs.add((a, b))
    return segs


def simple_loop(segs) -> bool:
    deg: dict = {}
    for a, b in segs:
        deg[a] = deg.get(a, 0) + 1
        deg[b] = deg.get(b, 0) + 1
    if not segs or any(d != 2 for d in deg.values()):
        return False
    adj: dict = {}
    for a, b in segs:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    start = next(iter(adj))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(adj)


@register_task
class Shingoki(TaskBase):
    name = "shingoki"
    title = "Shingoki"
    category = "Puzzle"
    levels = {k: {"n": k + 3, "circles": k + 3} for k in range(1, 6)}
    schema = (("n", "json", "points per side"),
              ("circles", "json", "circles [row, col, white|black, number] on grid points"))
    size_keys = ("n", "circles")
    rules = ("Draw one closed loop along the lines between neighbouring grid points, without "
             "branches or crossings. The loop goes straight through every white circle and turns "
             "at every black circle. A circle's number is the total length of the two straight "
             "segments that leave it. Points are (row,col) with (0,0) the top-left point.")
    answer_format = "the loop as unit segments separated by spaces, e.g. (0,0)-(0,1) (0,1)-(1,1)."

    def model(self, s):
        return shingoki_model(s)

    def generate(self, p, rng):
        n = p["n"]
        segs = random_loop(n, rng, 0.35 + 0.35 * rng.random())
        if not simple_loop(segs) or len(segs) < 6:
            return None
        pts = sorted({q for sg in segs for q in sg})
        circles = []
        for q in rng.sample(pts, min(p["circles"], len(pts))):
            arms = loop_arms(segs, q)
            h = (arms[0] > 0) + (arms[1] > 0)
            color = "white" if h in (0, 2) else "black"
            circles.append([q[0], q[1], color, sum(arms)])
        s = {"n": n, "circles": sorted(circles)}
        return s, G.SegmentList(tuple(sorted(segs)))

    def solve(self, s):
        n = s["n"]
        lg = LoopGrid(n)
        flat = solve_csp(shingoki_model(s), node_limit=2_000_000)
        segs = [lg.edges[i] for i in range(len(lg.edges)) if flat[i]]
        return G.SegmentList(tuple(sorted(segs)))

    def check(self, s, truth, ans):
        n = s["n"]
        segs = set(ans.segments)
        require(all(0 <= x < n for sg in segs for pt in sg for x in pt), "rule_violation", "point outside grid")
        require(simple_loop(segs), "rule_violation", "not a single closed loop")
        for r, c, color, value in s["circles"]:
            arms = loop_arms(segs, (r, c))
            h = (arms[0] > 0) + (arms[1] > 0)
            v = (arms[2] > 0) + (arms[3] > 0)
            require(h + v == 2, "rule_violation", f"loop misses circle ({r},{c})")
            require((h == 1) == (color == "black"), "rule_violation", f"circle ({r},{c}) wrong shape")
            require(sum(arms) == value, "rule_violation", f"circle ({r},{c}) wrong length")

    def describe(self, s):
        cs = "\n".join(f"({r},{c}) {color} {v}" for r, c, color, v in s["circles"])
        return f"Grid of {s['n']}x{s['n']} points. Circles (point, colour, number):\n{cs}"

    def draw(self, s):
        n = s["n"]
        cv = Canvas(2 * MARGIN + (n - 1) * CELL, 2 * MARGIN + (n - 1) * CELL)
        for i in range(n):
            cv.line(MARGIN, MARGIN + i * CELL, MARGIN + (n - 1) * CELL, MARGIN + i * CELL,
                    stroke=PALETTE["grid"], cls="lattice")
            cv.line(MARGIN + i * CELL, MARGIN, MARGIN + i * CELL, MARGIN + (n - 1) * CELL,
                    stroke=PALETTE["grid"], cls="lattice")
        for r, c, color, v in s["circles"]:
            x, y = MARGIN + c * CELL, MARGIN + r * CELL
            fill = PALETTE["ink"] if color == "black" else PALETTE["paper"]
            cv.circle(x, y, 14, fill=fill, stroke=PALETTE["ink"], sw=2, cls=color)
            cv.text(x, y, v, size=13, fill=PALETTE["paper"] if color == "black" else PALETTE["ink"])
        return cv

    def trace(self, s, sol):
        segs = set(sol.segments)
        out = []
        for r, c, color, v in s["circles"]:
            arms = loop_arms(segs, (r, c))
            out.append(step("key_calculation", f"Circle ({r},{c}) {color}: arms left {arms[0]}, "
                            f"right {arms[1]}, up {arms[2]}, down {arms[3]}, total {sum(arms)}.", str(sum(arms))))
        return out


# -- Bridges ---------------------------------------------------------------------------


def bridge_candidates(islands):
    """Island pairs in line with nothing between them, as (i, j, horizontal)."""
    pos = {tuple(p[:2]): i for i, p in enumerate(islands)}
    out = []
    for i, (x, y, _) in enumerate(islands):
        for dx, dy, horiz in ((1, 0, True), (0, 1, False)):
            k = 1
            while True:
                q = (x + dx * k, y + dy * k)
                if q in pos:
                    out.append((i, pos[q], horiz))
                    break
                if k > 64:
                    break
                k += 1
    return out


def crosses(islands, a, b) -> bool:
    (i1, j1, h1), (i2, j2, h2) = a, b
    if h1 == h2:
        return False
    if not h1:
        (i1, j1, h1), (i2, j2, h2) = b, a
    y = islands[i1][1]
    x1, x2 = sorted((islands[i1][0], islands[j1][0]))
    x = islands[i2][0]
    y1, y2 = sorted((islands[i2][1], islands[j2][1]))
    return x1 < x < x2 and y1 < y < y2


NOT_BOTH = np.array([(0, 0), (0, 1), (0, 2), (1, 0), (2, 0)])


def bridges_model(s):
    isl = s["islands"]
    cands = bridge_candidates(isl)
    m = GridModel(s["width"], s["height"], [0b111] * len(cands))
    for i, (_, _, need) in enumerate(isl):
        inc = [k for k, (a, b, _) in enumerate(cands) if i in (a, b)]
        m.add(LinearSum(inc, need, need))
    for a in range(len(cands)):
        for b in range(a + 1, len(cands)):
            if crosses(isl, cands[a], cands[b]):
                m.add(TupleSet([a, b], NOT_BOTH, key="not-both"))
    m.add(EdgeConnected(range(len(cands)), [(a, b) for a, b, _ in cands], len(isl),
                        required=range(len(isl))))
    return m, cands


@register_task
class Bridges(TaskBase):
    name = "bridges"
    title = "Bridges"
    category = "Puzzle"
    levels = {1: {"size": 5, "islands": 4}, 2: {"size": 6, "islands": 6}, 3: {"size": 7, "islands": 8},
              4: {"size": 8, "islands": 10}, 5: {"size": 9, "islands": 12}}
    schema = (("width", "json", "columns"), ("height", "json", "rows"),
              ("islands", "json", "islands [x, y, required bridges]"))
    size_keys = ("size", "islands")
    rules = ("Connect the numbered islands with horizontal or vertical bridges. An island's "
             "number is how many bridges end at it. Bridges run straight between two islands, "
             "never cross each other or pass over an island, at most two bridges join the same "
             "pair, and all islands must end up in one connected network. Coordinates are "
             "(x,y) with (0,0) at the top-left, x to the right and y downwards.")
    answer_format = "one bridge per line as (x1,y1)-(x2,y2):count."

    def model(self, s):
        return bridges_model(s)[0]

    def generate(self, p, rng):
        size = p["size"]
        occ: dict = {}
        start = (rng.below(size), rng.below(size))
        occ[start] = "I"
        islands = [start]
        bridges: dict = {}
        for _ in range(60 * p["islands"]):
            if len(islands) >= p["islands"]:
                break
            x, y = rng.choice(islands)
            dx, dy = rng.choice(ORTHO)
            length = rng.randint(2, size - 1)
            path = [(x + dx * k, y + dy * k) for k in range(1, length + 1)]
            if not all(0 <= a < size and 0 <= b < size for a, b in path):
                continue
            if any(q in occ for q in path):
                continue
            end = path[-1]
            if any(q in occ and occ[q] == "I" for q in neighbors(end[0], end[1], size, size)):
                continue
            for q in path[:-1]:
                occ[q] = "B"
            occ[end] = "I"
            islands.append(end)
            key = tuple(sorted(((x, y), end)))
            bridges[key] = rng.randint(1, 2)
        if len(islands) < p["islands"]:
            return None
        deg = {q: 0 for q in islands}
        for (a, b), k in bridges.items():
            deg[a] += k
            deg[b] += k
        s = {"width": size, "height": size,
             "islands": sorted([[x, y, deg[(x, y)]] for x, y in islands])}
        return s, G.KeyValueList(tuple(sorted(bridges.items())))

    def solve(self, s):
        m, cands = bridges_model(s)
        flat = solve_csp(m)
        isl = s["islands"]
        items = []
        for (a, b, _), k in zip(cands, flat):
            if k:
                pa, pb = tuple(isl[a][:2]), tuple(isl[b][:2])
                items.append(((min(pa, pb), max(pa, pb)), k))
        return G.KeyValueList(tuple(sorted(items)))

    def check(self, s, truth, ans):
        isl = s["islands"]
        pos = {tuple(p[:2]): i for i, p in enumerate(isl)}
        cands = {(min(a, b), max(a, b)): (a, b, h) for a, b, h in bridge_candidates(isl)}
        used = []
        deg = [0] * len(isl)
        for (pa, pb), k in ans.items:
            require(pa in pos and pb in pos, "rule_violation", "bridge end is not an island")
            i, j = pos[pa], pos[pb]
            key = (min(i, j), max(i, j))
            require(key in cands, "rule_violation", "islands not in open line of sight")
            require(1 <= k <= 2, "rule_violation", "1 or 2 bridges per pair")
            used.append(cands[key])
            deg[i] += k
            deg[j] += k
        for a in range(len(used)):
            for b in range(a + 1, len(used)):
                require(not crosses(isl, used[a], used[b]), "rule_violation", "bridges cross")
        require(deg == [p[2] for p in isl], "rule_violation", "island counts not met")
        adj = {i: set() for i in range(len(isl))}
        for a, b, _ in used:
            adj[a].add(b)
            adj[b].add(a)
        seen, stack = {0}, [0]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        require(len(seen) == len(isl), "rule_violation", "islands not connected")

    def describe(self, s):
        return (f"Grid {s['width']}x{s['height']}. Islands (x, y): required bridges\n" +
                "\n".join(f"({x},{y}): {k}" for x, y, k in s["islands"]))

    def draw(self, s):
        cv = Canvas(2 * MARGIN + s["width"] * CELL, 2 * MARGIN + s["height"] * CELL)
        for x, y, k in s["islands"]:
            cx, cy = cell_center(y, x)
            cv.circle(cx, cy, 18, fill=PALETTE["paper"], stroke=PALETTE["ink"], sw=2, cls="island")
            cv.text(cx, cy, k, size=18)
        return cv

    def trace(self, s, sol):
        return [step("decision_point", f"Bridge ({a[0]},{a[1]})-({b[0]},{b[1]}) x{k}.",
                     f"({a[0]},{a[1]})-({b[0]},{b[1]}):{k}") for (a, b), k in sol.items]


# -- Kakuro ------------------------------------------------------------------------------


def kakuro_runs(n, white: set):
    """(clue cell, cells) for every across and down run of length >= 2."""
    across, down = [], []
    for r in range(n):
        for c in range(n):
            if (r, c) in white:
                continue
            run = []
            k = c + 1
            while (r, k) in white:
                run.append((r, k))
                k += 1
            if len(run) >= 2:
                across.append(((r, c), run))
            run = []
            k = r + 1
            while (k, c) in white:
                run.append((k, c))
                k += 1
            if len(run) >= 2:
                down.append(((r, c), run))
    return across, down


MAX_RUN = 3  # longer runs make unique sum sets very rare
RIVALS = 10
EXTREME = mask_of((1, 2, 8, 9))


def kakuro_layout(n: int, black: float, rng) -> set:
    """White cells inside a black border; every white cell lies on an across
    run and a down run of length 2..MAX_RUN."""
    white = {(r, c) for r in range(1, n) for c in range(1, n) if not rng.chance(black)}
    while True:
        bad = {(r, c) for r, c in white
               if not ((r, c - 1) in white or (r, c + 1) in white)
               or not ((r - 1, c) in white or (r + 1, c) in white)}
        if bad:
            white -= bad
            continue
        across, down = kakuro_runs(n, white)
        long = [cells for _, cells in across + down if len(cells) > MAX_RUN]
        if not long:
            return white
        cells = rng.choice(long)
        white.discard(cells[rng.randint(1, len(cells) - 2)])


@lru_cache(maxsize=None)
def run_tuples(length: int, total: int):
    """All ordered runs of distinct digits 1..9 with the given sum."""
    from itertools import combinations, permutations
    rows = [p for c in combinations(range(1, 10), length) if sum(c) == total for p in permutations(c)]
    return np.array(rows, dtype=np.int64).reshape(-1, length)


def kakuro_model(s):
    n = s["n"]
    white = sorted(tuple(p) for p in s["white"])
    idx = {p: i for i, p in enumerate(white)}
    m = GridModel(n, n, [mask_of(range(1, 10))] * len(white))
    across, down = kakuro_runs(n, set(white))
    sums = {("a", r, c): v for r, c, v in s["across"]}
    sums.update({("d", r, c): v for r, c, v in s["down"]})
    for tag, runs in (("a", across), ("d", down)):
        for (r, c), cells in runs:
            scope = [idx[q] for q in cells]
            t = sums.get((tag, r, c))
            if t is None:
                m.add(AllDifferent(scope))
            else:
                m.add(TupleSet(scope, run_tuples(len(scope), t), key=("run", len(scope), t)))
    return m, white


@register_task
class Kakuro(TaskBase):
    name = "kakuro"
    title = "Kakuro"
    category = "Puzzle"
    unique = True
    levels = {k: {"n": k + 4, "black": 0.1} for k in range(1, 6)}
    schema = (("n", "json", "grid side including the clue border"),
              ("white", "json", "white cells [row, col]"),
              ("across", "json", "right clues [row, col, sum] in black cells"),
              ("down", "json", "down clues [row, col, sum] in black cells"))
    size_keys = ("n",)
    rules = ("Fill every white cell with a digit 1 to 9. A black cell may carry a right clue (the "
             "sum of the white run to its right) and a down clue (the sum of the white run below "
             "it). Digits may not repeat within a run. Coordinates are (row,column), 0-based from "
             "the top-left.")
    answer_format = "space-separated (row,column):value pairs for every white cell, e.g. (1,1):3 (1,2):5."

    def model(self, s):
        return kakuro_model(s)[0]

    def generate(self, p, rng):
        n = p["n"]
        white = kakuro_layout(n, p["black"], rng)
        if len(white) < max(4, (n - 1) ** 2 // 2):
            return None
        across, down = kakuro_runs(n, white)
        base = {"n": n, "white": sorted([list(q) for q in white]), "across": [], "down": []}
        order = sorted(white)
        idx = {q: i for i, q in enumerate(order)}
        runs_of: dict = {}
        for _, cells in across + down:
            for q in cells:
                runs_of.setdefault(q, []).append(cells)

        def with_sums(fill):
            val = dict(zip(order, fill))
            s = dict(base)
            s["across"] = [[r, c, sum(val[q] for q in cells)] for (r, c), cells in across]
            s["down"] = [[r, c, sum(val[q] for q in cells)] for (r, c), cells in down]
            return s

        def rivals(fill):
            out = []
            for sol in iter_solutions(kakuro_model(with_sums(fill))[0], node_limit=NODE_LIMIT):
                out.append(sol)
                if len(out) >= RIVALS:
                    break
            return out

        # hill-climb on the number of solutions: refill the runs through a
        # cell where a rival differs, keep the move unless it adds solutions
        try:
            fill = solve_csp(kakuro_model(base)[0], rng=rng, node_limit=NODE_LIMIT)
            if fill is None:
                return None
            sols = rivals(fill)
            for _ in range(120):
                if len(sols) == 1:
                    return with_sums(fill), G.KeyValueList(tuple(sorted(zip(order, fill))))
                other = rng.choice([x for x in sols if x != fill])
                q = rng.choice([order[i] for i in range(len(order)) if other[i] != fill[i]])
                free = {x for cells in runs_of[q] for x in cells}
                m = kakuro_model(base)[0]
                for x in order:
                    if x not in free:
                        m.fix(idx[x], fill[idx[x]])
                m.domains[idx[q]] &= ~(1 << fill[idx[q]])
                for x in free:
                    # lean towards 1, 2, 8, 9, which block the +1/-1 swaps
                    if rng.chance(0.3) and m.domains[idx[x]] & EXTREME:
                        m.domains[idx[x]] &= EXTREME
                f2 = solve_csp(m, rng=rng, node_limit=NODE_LIMIT)
                if f2 is None:
                    continue
                s2 = rivals(f2)
                if len(s2) <= len(sols):
                    fill, sols = f2, s2
        except SearchLimit:
            return None
        return None

    def solve(self, s):
        m, order = kakuro_model(s)
        flat = solve_csp(m)
        return G.KeyValueList(tuple(sorted(zip(order, flat))))

    def check(self, s, truth, ans):
        n = s["n"]
        white = {tuple(p) for p in s["white"]}
        val = dict(ans.items)
        require(set(val) <= white, "rule_violation", "value outside a white cell")
        require(set(val) == white, "incomplete", "white cells left empty")
        require(all(1 <= v <= 9 for v in val.values()), "rule_violation", "digits are 1..9")
        across, down = kakuro_runs(n, white)
        sums = {("a", r, c): v for r, c, v in s["across"]}
        sums.update({("d", r, c): v for r, c, v in s["down"]})
        for tag, runs in (("a", across), ("d", down)):
            for (r, c), cells in runs:
                vs = [val[q] for q in cells]
                require(len(set(vs)) == len(vs), "rule_violation", "repeated digit in a run")
                t = sums.get((tag, r, c))
                require(t is None or sum(vs) == t, "rule_violation", f"run at ({r},{c}) sums wrong")

    def describe(self, s):
        n = s["n"]
        white = {tuple(p) for p in s["white"]}
        grid = "\n".join("".join("." if (r, c) in white else "#" for c in range(n)) for r in range(n))
        a = ", ".join(f"({r},{c}) right {v}" for r, c, v in s["across"])
        d = ", ".join(f"({r},{c}) down {v}" for r, c, v in s["down"])
        return f"Layout (# = black, . = white):\n{grid}\nRight clues: {a}\nDown clues: {d}"

    def draw(self, s):
        n = s["n"]
        white = {tuple(p) for p in s["white"]}
        cv = grid_canvas(n, n)
        draw_cells(cv, n, n, fills=lambda r, c: None if (r, c) in white else "#555555")
        for r, c, v in s["across"]:
            x, y = cell_xy(r, c)
            cv.text(x + CELL - 12, y + 13, v, size=12, fill=PALETTE["paper"], cls="right-clue")
        for r, c, v in s["down"]:
            x, y = cell_xy(r, c)
            cv.text(x + 12, y + CELL - 12, v, size=12, fill=PALETTE["paper"], cls="down-clue")
        for r, c in white:
            pass
        for r, c in [(r, c) for r, c in sorted(white)]:
            x, y = cell_xy(r, c)
        # diagonals through clue cells
        for r, c in {(a, b) for a, b, _ in s["across"]} | {(a, b) for a, b, _ in s["down"]}:
            x, y = cell_xy(r, c)
            cv.line(x, y, x + CELL, y + CELL, stroke=PALETTE["paper"], cls="diag")
        return cv

    def trace(self, s, sol):
        return [step("intermediate_state", f"({r},{c}) = {v}.", f"({r},{c}):{v}") for (r, c), v in sol.items]
