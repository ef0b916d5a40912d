"""Shade-the-cells puzzles: Binairo, Nonogram, Hitori, Aquarium, Campsite and
Tapa.  Each model uses one 0/1 variable per cell."""
from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np

from .. import grammar as G
from ..csp import (Check, Connected, GridModel, LinearSum, SearchLimit, TupleSet, count_solutions,
                   make_unique, solve_csp)
from ..render.svg import (CELL, PALETTE, cell_center, draw_cells, draw_region_borders,
                          draw_side_labels, draw_values, grid_canvas)
from .common import (KING, TaskBase, connected, grid_adjacency, grid_shape, neighbors,
                     random_latin, random_partition, register_task, require, step)

NODE_LIMIT = 100_000
NAND = np.array([(0, 0), (0, 1), (1, 0)])
IMPLIES = np.array([(0, 0), (0, 1), (1, 1)])  # first -> second
EQUAL = np.array([(0, 0), (1, 1)])


def binary_model(h, w) -> GridModel:
    return GridModel(w, h, [0b11] * (h * w))


def cells_of(flat, w):
    return [(i // w, i % w) for i, v in enumerate(flat) if v]


def marks_grid(flat, h, w):
    return [list(flat[r * w:(r + 1) * w]) for r in range(h)]


def coord_set(ans, h, w, transpose=False, base=0):
    """Cells named by a CoordList as (row, col) pairs, validated in bounds."""
    out = set()
    for a, b in ans.coords:
        r, c = (b, a) if transpose else (a, b)
        r, c = r - base, c - base
        require(0 <= r < h and 0 <= c < w, "rule_violation", f"cell {(a, b)} outside the grid")
        out.add((r, c))
    require(len(out) == len(ans.coords), "rule_violation", "repeated cell")
    return out


def shade_canvas(h, w, filled, left=0, top=0, right=0, bottom=0, color=PALETTE["shade"]):
    cv = grid_canvas(h, w, left, top, right, bottom)
    draw_cells(cv, h, w, left, top, fills=lambda r, c: color if (r, c) in filled else None)
    return cv


# -- Binairo -------------------------------------------------------------------


@lru_cache(maxsize=None)
def binairo_lines(n: int):
    out = []
    for t in product((0, 1), repeat=n):
        if sum(t) * 2 != n:
            continue
        if any(t[i] == t[i + 1] == t[i + 2] for i in range(n - 2)):
            continue
        out.append(t)
    return np.array(out, dtype=np.int64)


def binairo_model(s) -> GridModel:
    n = s["n"]
    m = binary_model(n, n)
    lines = binairo_lines(n)
    rows = [[r * n + c for c in range(n)] for r in range(n)]
    cols = [[r * n + c for r in range(n)] for c in range(n)]
    for scope in rows + cols:
        m.add(TupleSet(scope, lines, key=("binairo", n)))
    for group in (rows, cols):
        for i in range(n):
            for j in range(i + 1, n):
                m.add(Check(group[i] + group[j], lambda t, n=n: t[:n] != t[n:]))
    for r in range(n):
        for c in range(n):
            v = s["grid"][r][c]
            if v >= 0:
                m.fix(r * n + c, v)
    return m


@register_task
class Binairo(TaskBase):
    name = "binairo"
    title = "Binairo"
    category = "Puzzle"
    unique = True
    levels = {1: {"n": 4, "keep": 0}, 2: {"n": 6, "keep": 14}, 3: {"n": 6, "keep": 0},
              4: {"n": 8, "keep": 26}, 5: {"n": 8, "keep": 0}}
    schema = (("n", "json", "grid side"), ("grid", "matrix", "0/1 givens, -1 = empty"))
    size_keys = ("n",)
    rules = ("Fill every empty cell of the NxN grid with 0 or 1. Each row and each column holds "
             "equally many 0s and 1s, no three equal digits may be consecutive in a row or "
             "column, and no two rows and no two columns may be identical.")
    answer_format = "the grid as rows of 0s and 1s separated by spaces, one row per line."

    def model(self, s):
        return binairo_model(s)

    def generate(self, p, rng):
        n = p["n"]
        blank = {"n": n, "grid": [[-1] * n for _ in range(n)]}
        flat = solve_csp(binairo_model(blank), rng=rng, node_limit=NODE_LIMIT)
        if flat is None:
            return None
        pool = [(r, c, flat[r * n + c]) for r in range(n) for c in range(n)]

        def state(cs):
            g = [[-1] * n for _ in range(n)]
            for r, c, v in cs:
                g[r][c] = v
            return {"n": n, "grid": g}

        try:
            clues = make_unique(lambda cs: binairo_model(state(cs)), pool, flat,
                                lambda cl, sol: sol[cl[0] * n + cl[1]] == cl[2], rng,
                                stop=lambda cs: len(cs) <= p["keep"], node_limit=NODE_LIMIT)
        except (SearchLimit, ValueError):
            return None
        return state(clues), G.GridOfDigits(tuple(map(tuple, marks_grid(flat, n, n))))

    def solve(self, s):
        n = s["n"]
        flat = solve_csp(binairo_model(s))
        return G.GridOfDigits(tuple(map(tuple, marks_grid(flat, n, n))))

    def check(self, s, truth, ans):
        n = s["n"]
        rows = [list(r) for r in ans.rows]
        grid_shape(rows, n, n)
        require(all(v in (0, 1) for r in rows for v in r), "rule_violation", "digits must be 0 or 1")
        cols = [[rows[r][c] for r in range(n)] for c in range(n)]
        for line in rows + cols:
            require(sum(line) * 2 == n, "rule_violation", "unbalanced line")
            require(not any(line[i] == line[i + 1] == line[i + 2] for i in range(n - 2)),
                    "rule_violation", "three in a row")
        require(len({tuple(r) for r in rows}) == n and len({tuple(c) for c in cols}) == n,
                "rule_violation", "repeated line")
        for r in range(n):
            for c in range(n):
                if s["grid"][r][c] >= 0:
                    require(rows[r][c] == s["grid"][r][c], "rule_violation", "given changed")

    def describe(self, s):
        body = "\n".join(" ".join("_" if v < 0 else str(v) for v in row) for row in s["grid"])
        return f"Grid ('_' = empty):\n{body}"

    def draw(self, s):
        n = s["n"]
        cv = grid_canvas(n, n)
        draw_cells(cv, n, n)
        draw_values(cv, s["grid"], blank=-1)
        return cv

    def trace(self, s, sol):
        return [step("intermediate_state", f"Row {r + 1}: {' '.join(map(str, row))} "
                     f"({row.count(0)} zeros, {row.count(1)} ones).", " ".join(map(str, row)))
                for r, row in enumerate(sol.rows)]


# -- Nonogram ------------------------------------------------------------------------


def runs(line) -> list[int]:
    out, k = [], 0
    for v in line:
        if v:
            k += 1
        elif k:
            out.append(k)
            k = 0
    if k:
        out.append(k)
    return out


@lru_cache(maxsize=None)
def nonogram_patterns(n: int) -> dict:
    by_clue: dict[tuple, list] = {}
    for t in product((0, 1), repeat=n):
        by_clue.setdefault(tuple(runs(t)), []).append(t)
    return {k: np.array(v, dtype=np.int64) for k, v in by_clue.items()}


def nonogram_model(s) -> GridModel:
    h, w = len(s["rows"]), len(s["cols"])
    m = binary_model(h, w)
    pr, pc = nonogram_patterns(w), nonogram_patterns(h)
    for r, clue in enumerate(s["rows"]):
        m.add(TupleSet([r * w + c for c in range(w)], pr[tuple(clue)], key=("nono", w, tuple(clue))))
    for c, clue in enumerate(s["cols"]):
        m.add(TupleSet([r * w + c for r in range(h)], pc[tuple(clue)], key=("nono", h, tuple(clue))))
    return m


@register_task
class Nonogram(TaskBase):
    name = "nonogram"
    title = "Nonogram"
    category = "Puzzle"
    unique = True
    levels = {1: {"n": 5}, 2: {"n": 6}, 3: {"n": 8}, 4: {"n": 10}, 5: {"n": 12}}
    schema = (("rows", "json", "block lengths of each row, top to bottom"),
              ("cols", "json", "block lengths of each column, left to right"))
    size_keys = ("n",)
    rules = ("Fill cells of the grid so that the filled blocks of every row and column match its "
             "clue: the clue lists the lengths of the consecutive filled blocks in order (left to "
             "right, or top to bottom), and blocks are separated by at least one empty cell.")
    answer_format = "the solved grid, one line per row, 'X' for filled and '.' for empty, no spaces."

    def model(self, s):
        return nonogram_model(s)

    def generate(self, p, rng):
        n = p["n"]
        density = 0.5 + 0.15 * rng.random()
        grid = [[1 if rng.chance(density) else 0 for _ in range(n)] for _ in range(n)]
        s = {"rows": [runs(r) for r in grid], "cols": [runs([grid[r][c] for r in range(n)]) for c in range(n)]}
        try:
            if count_solutions(nonogram_model(s), 2, node_limit=NODE_LIMIT) != 1:
                return None
        except SearchLimit:
            return None
        return s, G.GridOfMarks(tuple(tuple(bool(v) for v in r) for r in grid))

    def solve(self, s):
        h, w = len(s["rows"]), len(s["cols"])
        flat = solve_csp(nonogram_model(s))
        return G.GridOfMarks(tuple(tuple(bool(v) for v in r) for r in marks_grid(flat, h, w)))

    def check(self, s, truth, ans):
        h, w = len(s["rows"]), len(s["cols"])
        rows = [list(r) for r in ans.rows]
        grid_shape(rows, h, w)
        for r in range(h):
            require(runs(rows[r]) == s["rows"][r], "rule_violation", f"row {r}")
        for c in range(w):
            require(runs([rows[r][c] for r in range(h)]) == s["cols"][c], "rule_violation", f"column {c}")

    def describe(self, s):
        f = lambda cl: " ".join(map(str, cl)) or "0"
        return ("Row clues:\n" + "\n".join(f"Row {i + 1}: {f(c)}" for i, c in enumerate(s["rows"])) +
                "\nColumn clues:\n" + "\n".join(f"Column {i + 1}: {f(c)}" for i, c in enumerate(s["cols"])))

    def draw(self, s):
        h, w = len(s["rows"]), len(s["cols"])
        left = max(1, max(len(c) for c in s["rows"]))
        top = max(1, max(len(c) for c in s["cols"]))
        cv = grid_canvas(h, w, left, top)
        draw_cells(cv, h, w, left, top)
        for r, clue in enumerate(s["rows"]):
            clue = clue or [0]
            for j, v in enumerate(clue):
                x, y = cell_center(r, j - len(clue), left, top)
                cv.text(x, y, v, size=16, cls="clue")
        for c, clue in enumerate(s["cols"]):
            clue = clue or [0]
            for j, v in enumerate(clue):
                x, y = cell_center(j - len(clue), c, left, top)
                cv.text(x, y, v, size=16, cls="clue")
        return cv

    def trace(self, s, sol):
        return [step("intermediate_state", f"Row {r + 1} ({' '.join(map(str, s['rows'][r])) or '0'}): "
                     f"{''.join('X' if v else '.' for v in row)}", "".join("X" if v else "." for v in row))
                for r, row in enumerate(sol.rows)]


# -- Hitori ----------------------------------------------------------------------------


def hitori_model(s) -> GridModel:
    n = s["n"]
    g = s["grid"]
    m = binary_model(n, n)
    for line in [[(r, c) for c in range(n)] for r in range(n)] + [[(r, c) for r in range(n)] for c in range(n)]:
        groups: dict[int, list[int]] = {}
        for r, c in line:
            groups.setdefault(g[r][c], []).append(r * n + c)
        for cells in groups.values():
            if len(cells) > 1:
                m.add(LinearSum(cells, len(cells) - 1, len(cells)))
    for r in range(n):
        for c in range(n):
            for rr, cc in ((r, c + 1), (r + 1, c)):
                if rr < n and cc < n:
                    m.add(TupleSet([r * n + c, rr * n + cc], NAND, key="nand"))
    m.add(Connected(range(n * n), grid_adjacency(n, n), mark=0))
    return m


@register_task
class Hitori(TaskBase):
    name = "hitori"
    title = "Hitori"
    category = "Puzzle"
    unique = True
    levels = {k: {"n": k + 3} for k in range(1, 6)}
    schema = (("n", "json", "grid side"), ("grid", "matrix", "numbers"))
    size_keys = ("n",)
    rules = ("Shade some cells of the number grid. Unshaded numbers must not repeat within any row "
             "or column, shaded cells may not touch horizontally or vertically, and the unshaded "
             "cells must form one orthogonally connected area. Coordinates are (row, column), "
             "0-based from the top-left cell.")
    answer_format = "the set of shaded cells, e.g. {(0, 1), (2, 3)}."

    def model(self, s):
        return hitori_model(s)

    def generate(self, p, rng):
        n = p["n"]
        grid = random_latin(n, rng)
        shaded: set = set()
        target = int(n * n * (0.22 + 0.1 * rng.random()))
        for r, c in rng.shuffled([(r, c) for r in range(n) for c in range(n)]):
            if len(shaded) >= target:
                break
            if any(q in shaded for q in neighbors(r, c, n, n)):
                continue
            white = [(a, b) for a in range(n) for b in range(n) if (a, b) not in shaded and (a, b) != (r, c)]
            if connected(white):
                shaded.add((r, c))
        for r, c in sorted(shaded):
            opts = {grid[r][k] for k in range(n) if (r, k) not in shaded}
            opts |= {grid[k][c] for k in range(n) if (k, c) not in shaded}
            grid[r][c] = rng.choice(sorted(opts))
        s = {"n": n, "grid": grid}
        try:
            if count_solutions(hitori_model(s), 2, node_limit=NODE_LIMIT) != 1:
                return None
        except SearchLimit:
            return None
        return s, G.CoordList(tuple(sorted(shaded)))

    def solve(self, s):
        n = s["n"]
        flat = solve_csp(hitori_model(s))
        return G.CoordList(tuple(cells_of(flat, n)))

    def check(self, s, truth, ans):
        n = s["n"]
        g = s["grid"]
        shaded = coord_set(ans, n, n)
        for r, c in shaded:
            for q in neighbors(r, c, n, n):
                require(q not in shaded, "rule_violation", "adjacent shaded cells")
        for i in range(n):
            row = [g[i][c] for c in range(n) if (i, c) not in shaded]
            col = [g[r][i] for r in range(n) if (r, i) not in shaded]
            require(len(set(row)) == len(row) and len(set(col)) == len(col), "rule_violation",
                    "repeated unshaded number")
        white = [(r, c) for r in range(n) for c in range(n) if (r, c) not in shaded]
        require(connected(white), "rule_violation", "unshaded cells are split")

    def describe(self, s):
        return "Grid:\n" + "\n".join(" ".join(map(str, r)) for r in s["grid"])

    def draw(self, s):
        n = s["n"]
        cv = grid_canvas(n, n)
        draw_cells(cv, n, n)
        draw_values(cv, s["grid"], blank=None)
        return cv

    def trace(self, s, sol):
        return [step("decision_point", f"Shade ({r}, {c}): its {s['grid'][r][c]} repeats in its "
                     "row or column.", f"({r}, {c})") for r, c in sol.coords]


# -- Aquarium --------------------------------------------------------------------------


def aquarium_model(s) -> GridModel:
    n = s["n"]
    reg = s["regions"]
    m = binary_model(n, n)
    for r in range(n):
        for c in range(n):
            for rr, cc in ((r, c + 1), (r + 1, c)):
                if rr < n and cc < n and reg[r][c] == reg[rr][cc]:
                    # same level: equal across a row, filled above implies filled below
                    table, key = (EQUAL, "eq") if rr == r else (IMPLIES, "imp")
                    m.add(TupleSet([r * n + c, rr * n + cc], table, key=key))
    # cells of one region on consecutive rows that are not vertically adjacent
    by_reg: dict[int, dict[int, int]] = {}
    for r in range(n):
        for c in range(n):
            by_reg.setdefault(reg[r][c], {}).setdefault(r, r * n + c)
    for rows in by_reg.values():
        ks = sorted(rows)
        for a, b in zip(ks, ks[1:]):
            m.add(TupleSet([rows[a], rows[b]], IMPLIES, key="imp"))
    for i in range(n):
        m.add(LinearSum([i * n + c for c in range(n)], s["row_counts"][i], s["row_counts"][i]))
        m.add(LinearSum([r * n + i for r in range(n)], s["col_counts"][i], s["col_counts"][i]))
    return m


@register_task
class Aquarium(TaskBase):
    name = "aquarium"
    title = "Aquarium"
    category = "Puzzle"
    levels = {k: {"n": k + 3} for k in range(1, 6)}
    schema = (("n", "json", "grid side"), ("regions", "matrix", "region id per cell"),
              ("row_counts", "json", "filled cells per row, top to bottom"),
              ("col_counts", "json", "filled cells per column, left to right"))
    size_keys = ("n",)
    rules = ("Fill some cells of the grid with water. Each region (outlined by thick lines) is "
             "filled up to one common level from its bottom, so water never floats: a filled cell "
             "has every cell of its region in the same row and all rows below also filled. The "
             "numbers outside the grid give the filled cells per row and column. Coordinates are "
             "(x, y) with (0, 0) the top-left cell, x growing to the right and y downwards.")
    answer_format = "all water cells as [(x1, y1), (x2, y2), ...]."

    def model(self, s):
        return aquarium_model(s)

    def generate(self, p, rng):
        n = p["n"]
        reg = random_partition(n, n, rng, 2, n)
        rows_of: dict[int, list[int]] = {}
        for r in range(n):
            for c in range(n):
                rows_of.setdefault(reg[r][c], []).append(r)
        level = {}
        for k, rs in rows_of.items():
            opts = sorted(set(rs)) + [n]  # n = empty region
            level[k] = rng.choice(opts)
        filled = [[1 if r >= level[reg[r][c]] else 0 for c in range(n)] for r in range(n)]
        if not any(map(any, filled)):
            return None
        s = {"n": n, "regions": reg, "row_counts": [sum(r) for r in filled],
             "col_counts": [sum(filled[r][c] for r in range(n)) for c in range(n)]}
        return s, self._answer([(r, c) for r in range(n) for c in range(n) if filled[r][c]])

    def _answer(self, cells):
        return G.CoordList(tuple(sorted((c, r) for r, c in cells)))

    def solve(self, s):
        flat = solve_csp(aquarium_model(s))
        return self._answer(cells_of(flat, s["n"]))

    def check(self, s, truth, ans):
        n = s["n"]
        reg = s["regions"]
        wet = coord_set(ans, n, n, transpose=True)
        for r in range(n):
            require(sum((r, c) in wet for c in range(n)) == s["row_counts"][r], "rule_violation", f"row {r} count")
        for c in range(n):
            require(sum((r, c) in wet for r in range(n)) == s["col_counts"][c], "rule_violation", f"column {c} count")
        cells: dict[int, list] = {}
        for r in range(n):
            for c in range(n):
                cells.setdefault(reg[r][c], []).append((r, c))
        for cs in cells.values():
            top = min((r for r, c in cs if (r, c) in wet), default=n)
            require(all(((r, c) in wet) == (r >= top) for r, c in cs), "rule_violation",
                    "water level not uniform")

    def describe(self, s):
        return ("Regions (cells with the same id form one region):\n" +
                "\n".join(" ".join(map(str, r)) for r in s["regions"]) +
                f"\nRow counts (top to bottom): {s['row_counts']}"
                f"\nColumn counts (left to right): {s['col_counts']}")

    def draw(self, s):
        n = s["n"]
        cv = grid_canvas(n, n, 0, 0, 1, 1)
        draw_cells(cv, n, n)
        draw_region_borders(cv, s["regions"])
        draw_side_labels(cv, s["row_counts"], s["col_counts"], n, n)
        return cv

    def trace(self, s, sol):
        n = s["n"]
        wet = {(y, x) for x, y in sol.coords}
        out = []
        for r in range(n):
            cs = [f"({c}, {r})" for c in range(n) if (r, c) in wet]
            out.append(step("intermediate_state", f"Row y={r}: water in {', '.join(cs) or 'no cells'} "
                            f"({len(cs)} of {s['row_counts'][r]}).", str(len(cs))))
        return out


# -- Campsite ----------------------------------------------------------------------------


def campsite_model(s) -> GridModel:
    h, w = len(s["row_counts"]), len(s["col_counts"])
    trees = {tuple(t) for t in s["trees"]}
    m = binary_model(h, w)
    for r in range(h):
        for c in range(w):
            if (r, c) in trees or not any(q in trees for q in neighbors(r, c, h, w)):
                m.fix(r * w + c, 0)
            for dr, dc in ((0, 1), (1, -1), (1, 0), (1, 1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w:
                    m.add(TupleSet([r * w + c, rr * w + cc], NAND, key="nand"))
    for r in range(h):
        m.add(LinearSum([r * w + c for c in range(w)], s["row_counts"][r], s["row_counts"][r]))
    for c in range(w):
        m.add(LinearSum([r * w + c for r in range(h)], s["col_counts"][c], s["col_counts"][c]))
    return m


@register_task
class Campsite(TaskBase):
    name = "campsite"
    title = "Campsite"
    category = "Puzzle"
    levels = {k: {"n": k + 4} for k in range(1, 6)}
    schema = (("trees", "json", "tree cells [row, col], 0-based"),
              ("row_counts", "json", "tents per row"), ("col_counts", "json", "tents per column"))
    size_keys = ("n",)
    rules = ("Place tents on empty cells of the grid. Every tent must share a side with at least "
             "one tree, no two tents may touch, not even diagonally, and each row and column must "
             "hold the number of tents given outside the grid. Answer with 1-based [row, column] "
             "pairs, [1, 1] being the top-left cell.")
    answer_format = "a list of [row, column] pairs, e.g. [[1, 3], [3, 1]]."

    def model(self, s):
        return campsite_model(s)

    def generate(self, p, rng):
        n = p["n"]
        tents: set = set()
        trees: set = set()
        want = max(2, n * n // 6)
        for r, c in rng.shuffled([(r, c) for r in range(n) for c in range(n)]):
            if len(tents) >= want:
                break
            if (r, c) in trees or any(q in tents for q in neighbors(r, c, n, n, KING)):
                continue
            spots = [q for q in neighbors(r, c, n, n) if q not in tents]
            if not spots:
                continue
            have = [q for q in spots if q in trees]
            if not have or rng.chance(0.7):
                free = [q for q in spots if q not in trees]
                if not free:
                    continue
                trees.add(rng.choice(free))
            tents.add((r, c))
        s = {"trees": sorted([list(t) for t in trees]),
             "row_counts": [sum(1 for r, _ in tents if r == i) for i in range(n)],
             "col_counts": [sum(1 for _, c in tents if c == i) for i in range(n)]}
        return s, self._answer(tents)

    def _answer(self, tents):
        return G.CoordList(tuple(sorted((r + 1, c + 1) for r, c in tents)))

    def solve(self, s):
        flat = solve_csp(campsite_model(s))
        return self._answer(cells_of(flat, len(s["col_counts"])))

    def check(self, s, truth, ans):
        h, w = len(s["row_counts"]), len(s["col_counts"])
        trees = {tuple(t) for t in s["trees"]}
        tents = coord_set(ans, h, w, base=1)
        for r, c in tents:
            require((r, c) not in trees, "rule_violation", "tent on a tree")
            require(any(q in trees for q in neighbors(r, c, h, w)), "rule_violation", "tent without tree")
            require(not any(q in tents for q in neighbors(r, c, h, w, KING)), "rule_violation", "tents touch")
        for i in range(h):
            require(sum(1 for r, _ in tents if r == i) == s["row_counts"][i], "rule_violation", "row count")
        for i in range(w):
            require(sum(1 for _, c in tents if c == i) == s["col_counts"][i], "rule_violation", "column count")

    def describe(self, s):
        h, w = len(s["row_counts"]), len(s["col_counts"])
        trees = {tuple(t) for t in s["trees"]}
        body = "\n".join("".join("T" if (r, c) in trees else "." for c in range(w)) for r in range(h))
        return (f"Grid ({h}x{w}, T = tree, . = empty):\n{body}\n"
                f"Tents per row: {s['row_counts']}\nTents per column: {s['col_counts']}")

    def draw(self, s):
        h, w = len(s["row_counts"]), len(s["col_counts"])
        cv = grid_canvas(h, w, 0, 0, 1, 1)
        draw_cells(cv, h, w)
        for r, c in s["trees"]:
            x, y = cell_center(r, c)
            cv.circle(x, y, CELL // 3, fill=PALETTE["tree"], stroke=PALETTE["ink"], cls="tree")
        draw_side_labels(cv, s["row_counts"], s["col_counts"], h, w)
        return cv

    def trace(self, s, sol):
        return [step("decision_point", f"Tent at [{r}, {c}], next to a tree and clear of other tents.",
                     f"[{r}, {c}]") for r, c in sol.coords]


# -- Tapa ----------------------------------------------------------------------------------

RING = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def ring_groups(bits_) -> list[int]:
    """Lengths of black groups around a clue; ``None`` marks off-grid slots."""
    if all(b == 1 for b in bits_):
        return [8]
    # rotate so the scan starts just after a non-black slot
    k = next(i for i, b in enumerate(bits_) if b != 1)
    seq = bits_[k + 1:] + bits_[:k + 1]
    out, run = [], 0
    for b in seq:
        if b == 1:
            run += 1
        elif run:
            out.append(run)
            run = 0
    if run:
        out.append(run)
    return out


@lru_cache(maxsize=None)
def tapa_patterns(present: tuple, clue: int):
    """0/1 tuples over the in-grid ring slots whose black cells form one group of ``clue``."""
    k = sum(present)
    out = []
    for t in product((0, 1), repeat=k):
        it = iter(t)
        full = [next(it) if p else None for p in present]
        g = ring_groups(full)
        if (clue == 0 and not g) or g == [clue]:
            out.append(t)
    return np.array(out, dtype=np.int64).reshape(-1, k)


def tapa_model(s) -> GridModel:
    n = s["n"]
    m = binary_model(n, n)
    for r, c, v in s["clues"]:
        m.fix(r * n + c, 0)
        present = tuple(in_b(r + dr, c + dc, n) for dr, dc in RING)
        scope = [(r + dr) * n + c + dc for dr, dc in RING if in_b(r + dr, c + dc, n)]
        m.add(TupleSet(scope, tapa_patterns(present, v), key=("tapa", present, v)))
    block = np.array([t for t in product((0, 1), repeat=4) if sum(t) < 4])
    for r in range(n - 1):
        for c in range(n - 1):
            m.add(TupleSet([r * n + c, r * n + c + 1, (r + 1) * n + c, (r + 1) * n + c + 1], block,
                           key="no2x2"))
    m.add(Connected(range(n * n), grid_adjacency(n, n), mark=1))
    return m


def in_b(r, c, n):
    return 0 <= r < n and 0 <= c < n


@register_task
class Tapa(TaskBase):
    name = "tapa"
    title = "Tapa"
    category = "Puzzle"
    levels = {k: {"n": k + 3, "clues": k + 3} for k in range(1, 6)}
    schema = (("n", "json", "grid side"), ("clues", "json", "clue cells [row, col, number]"))
    size_keys = ("n", "clues")
    rules = ("Colour some cells of the grid black. All black cells must form one orthogonally "
             "connected group and no 2x2 square may be entirely black. Clue cells stay white; "
             "the number in a clue cell is the size of the single connected run of black cells "
             "among its eight neighbours. Coordinates are (row, column), 0-based from the "
             "top-left.")
    answer_format = "the black cells as (row,column) pairs separated by commas, e.g. (0,1), (1,2)."

    def model(self, s):
        return tapa_model(s)

    def generate(self, p, rng):
        n = p["n"]
        black = {(rng.below(n), rng.below(n))}
        target = int(n * n * (0.4 + 0.1 * rng.random()))
        for _ in range(20 * n * n):
            if len(black) >= target:
                break
            r, c = rng.choice(sorted(black))
            q = rng.choice(list(neighbors(r, c, n, n)))
            if q in black or self._makes_block(black | {q}, q, n):
                continue
            black.add(q)
        cands = []
        for r in range(n):
            for c in range(n):
                if (r, c) in black:
                    continue
                full = [((r + dr, c + dc) in black) * 1 if in_b(r + dr, c + dc, n) else None
                        for dr, dc in RING]
                g = ring_groups(full)
                if len(g) == 1:
                    cands.append((r, c, g[0]))
        if len(cands) < p["clues"]:
            return None
        clues = sorted(rng.sample(cands, p["clues"]))
        s = {"n": n, "clues": [list(c) for c in clues]}
        return s, G.CoordList(tuple(sorted(black)))

    @staticmethod
    def _makes_block(black, q, n):
        r, c = q
        for dr in (-1, 0):
            for dc in (-1, 0):
                sq = [(r + dr + i, c + dc + j) for i in (0, 1) for j in (0, 1)]
                if all(x in black for x in sq):
                    return True
        return False

    def solve(self, s):
        flat = solve_csp(tapa_model(s))
        return G.CoordList(tuple(cells_of(flat, s["n"])))

    def check(self, s, truth, ans):
        n = s["n"]
        black = coord_set(ans, n, n)
        for r, c, v in s["clues"]:
            require((r, c) not in black, "rule_violation", "clue cell shaded")
            full = [((r + dr, c + dc) in black) * 1 if in_b(r + dr, c + dc, n) else None for dr, dc in RING]
            g = ring_groups(full)
            require(g == ([v] if v else []), "rule_violation", f"clue at ({r},{c})")
        for r in range(n - 1):
            for c in range(n - 1):
                require(not all(q in black for q in ((r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1))),
                        "rule_violation", "2x2 black block")
        require(connected(black), "rule_violation", "black cells are split")

    def describe(self, s):
        n = s["n"]
        g = [["."] * n for _ in range(n)]
        for r, c, v in s["clues"]:
            g[r][c] = str(v)
        return f"Grid ({n}x{n}, digits are clues, . = unknown):\n" + "\n".join(" ".join(r) for r in g)

    def draw(self, s):
        n = s["n"]
        cv = grid_canvas(n, n)
        draw_cells(cv, n, n)
        for r, c, v in s["clues"]:
            x, y = cell_center(r, c)
            cv.text(x, y, v, size=22, cls="clue")
        return cv

    def trace(self, s, sol):
        black = set(sol.coords)
        steps = []
        for r, c, v in s["clues"]:
            around = [(r + dr, c + dc) for dr, dc in RING if (r + dr, c + dc) in black]
            steps.append(step("key_calculation", f"Clue {v} at ({r},{c}): black neighbours "
                              f"{', '.join(f'({a},{b})' for a, b in around) or 'none'}.", str(len(around))))
        return steps
