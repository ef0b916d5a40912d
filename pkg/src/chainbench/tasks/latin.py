"""Latin-square puzzles: Sudoku, Futoshiki, Skyscrapers, Calcudoku, Eulero
and the binary-weighted Kukurasu."""
from __future__ import annotations

import string
from functools import lru_cache, reduce
from itertools import permutations

import numpy as np

from .. import grammar as G
from ..csp import (AllDifferent, GridModel, LinearSum, Less, SearchLimit, Table, TupleSet,
                   count_solutions, make_unique, mask_of, solve_csp)
from ..render.svg import (PALETTE, cell_center, cell_xy, draw_cells,
                          draw_region_borders, draw_side_labels, draw_values, grid_canvas)
from .common import TaskBase, grid_shape, random_latin, random_partition, register_task, require, step

NODE_LIMIT = 100_000


def latin_model(n: int, base: int = 1) -> GridModel:
    m = GridModel(n, n, [mask_of(range(base, base + n))] * (n * n))
    for i in range(n):
        m.add(AllDifferent([i * n + c for c in range(n)], exact=True))
        m.add(AllDifferent([r * n + i for r in range(n)], exact=True))
    return m


def as_rows(flat, n):
    return [list(flat[r * n:(r + 1) * n]) for r in range(n)]


def check_latin(rows, n, symbols=None):
    grid_shape(rows, n, n)
    symbols = set(range(1, n + 1)) if symbols is None else symbols
    for r in range(n):
        require(set(rows[r]) == symbols and len(rows[r]) == n, "rule_violation", f"row {r}")
    for c in range(n):
        col = [rows[r][c] for r in range(n)]
        require(set(col) == symbols, "rule_violation", f"column {c}")


def check_givens(rows, givens):
    for r, row in enumerate(givens):
        for c, v in enumerate(row):
            if v:
                require(rows[r][c] == v, "rule_violation", f"given at ({r},{c}) changed")


def row_steps(rows, label="Row"):
    return [step("intermediate_state", f"{label} {r + 1}: {' '.join(map(str, row))}.",
                 " ".join(map(str, row))) for r, row in enumerate(rows)]


class LatinTask(TaskBase):
    category = "Puzzle"
    unique = True

    def solve(self, s):
        sol = solve_csp(self.model(s))
        if sol is None:
            raise ValueError("unsatisfiable instance")
        n = self._n(s)
        return G.GridOfDigits(tuple(tuple(r) for r in as_rows(sol, n)))

    def _n(self, s):
        return s["n"]

    def trace(self, s, sol):
        return row_steps(sol.rows)


# -- Sudoku -----------------------------------------------------------------------


def sudoku_model(grid) -> GridModel:
    m = latin_model(9)
    for b in range(9):
        r0, c0 = 3 * (b // 3), 3 * (b % 3)
        m.add(AllDifferent([(r0 + i) * 9 + c0 + j for i in range(3) for j in range(3)], exact=True))
    for r in range(9):
        for c in range(9):
            if grid[r][c]:
                m.fix(r * 9 + c, grid[r][c])
    return m


@register_task
class Sudoku(LatinTask):
    name = "sudoku"
    title = "Sudoku"
    levels = {1: {"holes": 32}, 2: {"holes": 40}, 3: {"holes": 46}, 4: {"holes": 51}, 5: {"holes": 55}}
    schema = (("grid", "matrix", "9x9 digits, 0 = empty"),)
    size_keys = ("holes",)
    rules = ("Fill the 9x9 grid so that every row, every column and every 3x3 box contains each "
             "digit 1 to 9 exactly once. Cells holding 0 are empty; the other digits are fixed.")
    answer_format = "the 81 digits of the solved grid in row-major order, separated by spaces."

    def _n(self, s):
        return 9

    def model(self, s):
        return sudoku_model(s["grid"])

    def generate(self, p, rng):
        full = solve_csp(sudoku_model([[0] * 9] * 9), rng=rng)
        grid = as_rows(full, 9)
        holes = 0
        for idx in rng.shuffled(range(81)):
            if holes >= p["holes"]:
                break
            r, c = divmod(idx, 9)
            v = grid[r][c]
            grid[r][c] = 0
            if count_solutions(sudoku_model(grid), 2, node_limit=NODE_LIMIT) == 1:
                holes += 1
            else:
                grid[r][c] = v
        if holes < p["holes"]:
            return None
        return {"grid": grid}, G.GridOfDigits(tuple(tuple(r) for r in as_rows(full, 9)))

    def check(self, s, truth, ans):
        rows = [list(r) for r in ans.rows]
        require(sum(len(r) for r in rows) == 81, "incomplete")
        check_latin(rows, 9)
        for b in range(9):
            r0, c0 = 3 * (b // 3), 3 * (b % 3)
            box = {rows[r0 + i][c0 + j] for i in range(3) for j in range(3)}
            require(len(box) == 9, "rule_violation", f"box {b}")
        check_givens(rows, s["grid"])

    def describe(self, s):
        return "Grid:\n" + "\n".join(" ".join(map(str, r)) for r in s["grid"])

    def draw(self, s):
        cv = grid_canvas(9, 9)
        draw_cells(cv, 9, 9)
        boxes = [[3 * (r // 3) + c // 3 for c in range(9)] for r in range(9)]
        draw_region_borders(cv, boxes)
        draw_values(cv, s["grid"])
        return cv


# -- Futoshiki ----------------------------------------------------------------------


def futoshiki_model(s) -> GridModel:
    n = s["n"]
    m = latin_model(n)
    for (r1, c1), (r2, c2) in s["less"]:
        m.add(Less(r1 * n + c1, r2 * n + c2))
    for r in range(n):
        for c in range(n):
            if s["givens"][r][c]:
                m.fix(r * n + c, s["givens"][r][c])
    return m


def _clue_state(n, clues):
    givens = [[0] * n for _ in range(n)]
    less = []
    for cl in clues:
        if cl[0] == "g":
            givens[cl[1]][cl[2]] = cl[3]
        else:
            less.append([list(cl[1]), list(cl[2])])
    return {"n": n, "givens": givens, "less": sorted(less)}


@register_task
class Futoshiki(LatinTask):
    name = "futoshiki"
    title = "Futoshiki"
    levels = {k: {"n": k + 3} for k in range(1, 6)}
    schema = (("n", "json", "grid side"), ("givens", "matrix", "fixed digits, 0 = empty"),
              ("less", "json", "pairs [[r1,c1],[r2,c2]]: cell 1 is smaller than cell 2"))
    size_keys = ("n",)
    rules = ("Fill the NxN grid with numbers 1 to N so that no number repeats in any row or "
             "column. Some cells are prefilled. Every inequality sign between two neighbouring "
             "cells must hold.")
    answer_format = "a 2D list of integers, e.g. [[1, 2], [2, 1]]."

    def model(self, s):
        return futoshiki_model(s)

    def generate(self, p, rng):
        n = p["n"]
        hidden = random_latin(n, rng)
        flat = [v for row in hidden for v in row]
        pool = []
        for r in range(n):
            for c in range(n):
                pool.append(("g", r, c, hidden[r][c]))
                for r2, c2 in ((r, c + 1), (r + 1, c)):
                    if r2 < n and c2 < n:
                        a, b = (r, c), (r2, c2)
                        pool.append(("lt", a, b) if hidden[r][c] < hidden[r2][c2] else ("lt", b, a))

        def holds(cl, sol):
            if cl[0] == "g":
                return sol[cl[1] * n + cl[2]] == cl[3]
            (r1, c1), (r2, c2) = cl[1], cl[2]
            return sol[r1 * n + c1] < sol[r2 * n + c2]

        try:
            clues = make_unique(lambda cs: futoshiki_model(_clue_state(n, cs)), pool, flat, holds,
                                rng, node_limit=NODE_LIMIT)
        except (SearchLimit, ValueError):
            return None
        return _clue_state(n, clues), G.GridOfDigits(tuple(map(tuple, hidden)))

    def check(self, s, truth, ans):
        rows = [list(r) for r in ans.rows]
        n = s["n"]
        check_latin(rows, n)
        check_givens(rows, s["givens"])
        for (r1, c1), (r2, c2) in s["less"]:
            require(rows[r1][c1] < rows[r2][c2], "rule_violation", "inequality broken")

    def describe(self, s):
        lines = [f"Grid size: {s['n']}x{s['n']} (0 = empty):"]
        lines += [" ".join(map(str, r)) for r in s["givens"]]
        if s["less"]:
            lines.append("Inequalities: " + ", ".join(f"({a[0]},{a[1]}) < ({b[0]},{b[1]})"
                                                      for a, b in s["less"]))
        return "\n".join(lines)

    def draw(self, s):
        n = s["n"]
        cv = grid_canvas(n, n)
        draw_cells(cv, n, n)
        draw_values(cv, s["givens"])
        for (r1, c1), (r2, c2) in s["less"]:
            x1, y1 = cell_center(r1, c1)
            x2, y2 = cell_center(r2, c2)
            mx, my = (x1 + x2) // 2, (y1 + y2) // 2
            if r1 == r2:
                sym = "<" if c1 < c2 else ">"
            else:
                sym = "^" if r1 < r2 else "v"
            cv.text(mx, my, sym, size=18, fill=PALETTE["accent"], cls="sign")
        return cv


# -- Skyscrapers --------------------------------------------------------------------


def visible(line) -> int:
    top, k = 0, 0
    for h in line:
        if h > top:
            top, k = h, k + 1
    return k


@lru_cache(maxsize=None)
def visibility_tuples(n: int, k: int):
    return np.array([p for p in permutations(range(1, n + 1)) if visible(p) == k], dtype=np.int64)


def sky_lines(n):
    """(side, index) -> cell indices in viewing order."""
    out = {}
    for i in range(n):
        out[("top", i)] = [r * n + i for r in range(n)]
        out[("bottom", i)] = [r * n + i for r in reversed(range(n))]
        out[("left", i)] = [i * n + c for c in range(n)]
        out[("right", i)] = [i * n + c for c in reversed(range(n))]
    return out


def sky_model(s) -> GridModel:
    n = s["n"]
    m = latin_model(n)
    for (side, i), scope in sky_lines(n).items():
        k = s[side][i]
        if k:
            m.add(TupleSet(scope, visibility_tuples(n, k), key=("visible", n, k)))
    for r in range(n):
        for c in range(n):
            if s["givens"][r][c]:
                m.fix(r * n + c, s["givens"][r][c])
    return m


@register_task
class Skyscrapers(LatinTask):
    name = "skyscrapers"
    title = "Skyscrapers"
    levels = {k: {"n": k + 2} for k in range(1, 6)}
    schema = (("n", "json", "grid side"), ("top", "json", "clues above columns, 0 = none"),
              ("bottom", "json", "clues below columns"), ("left", "json", "clues left of rows"),
              ("right", "json", "clues right of rows"), ("givens", "matrix", "fixed heights, 0 = empty"))
    size_keys = ("n",)
    rules = ("Place a skyscraper of height 1 to N in every cell of the NxN grid so that each row "
             "and column holds every height once. A number outside the grid tells how many "
             "buildings are seen from that side, since taller buildings hide shorter ones behind "
             "them.")
    answer_format = "a 2D list, e.g. [[1, 2, 3], [3, 1, 2], [2, 3, 1]]."

    def model(self, s):
        return sky_model(s)

    def generate(self, p, rng):
        n = p["n"]
        hidden = random_latin(n, rng)
        flat = [v for row in hidden for v in row]
        lines = sky_lines(n)
        sides = [("s", side, i, visible([flat[x] for x in scope])) for (side, i), scope in lines.items()]
        pool = [("g", r, c, hidden[r][c]) for r in range(n) for c in range(n)]

        def state(cs):
            s = {"n": n, "top": [0] * n, "bottom": [0] * n, "left": [0] * n, "right": [0] * n,
                 "givens": [[0] * n for _ in range(n)]}
            for cl in cs:
                if cl[0] == "s":
                    s[cl[1]][cl[2]] = cl[3]
                else:
                    s["givens"][cl[1]][cl[2]] = cl[3]
            return s

        def holds(cl, sol):
            if cl[0] == "g":
                return sol[cl[1] * n + cl[2]] == cl[3]
            return visible([sol[x] for x in lines[(cl[1], cl[2])]]) == cl[3]

        try:
            clues = make_unique(lambda cs: sky_model(state(cs)), pool, flat, holds, rng,
                                initial=sides, node_limit=NODE_LIMIT)
        except (SearchLimit, ValueError):
            return None
        return state(clues), G.GridOfDigits(tuple(map(tuple, hidden)))

    def check(self, s, truth, ans):
        rows = [list(r) for r in ans.rows]
        n = s["n"]
        check_latin(rows, n)
        check_givens(rows, s["givens"])
        flat = [v for r in rows for v in r]
        for (side, i), scope in sky_lines(n).items():
            k = s[side][i]
            if k:
                require(visible([flat[x] for x in scope]) == k, "rule_violation", f"{side} clue {i}")

    def describe(self, s):
        f = lambda xs: " ".join(str(x) if x else "-" for x in xs)
        lines = [f"Top: {f(s['top'])}", f"Bottom: {f(s['bottom'])}",
                 f"Left: {f(s['left'])}", f"Right: {f(s['right'])}"]
        if any(any(r) for r in s["givens"]):
            lines.append("Prefilled cells (0 = empty):")
            lines += [" ".join(map(str, r)) for r in s["givens"]]
        return "Clues ('-' = no clue):\n" + "\n".join(lines)

    def draw(self, s):
        n = s["n"]
        cv = grid_canvas(n, n, 1, 1, 1, 1)
        draw_cells(cv, n, n, 1, 1)
        draw_values(cv, s["givens"], 1, 1)
        blank = lambda xs: [x if x else "" for x in xs]
        draw_side_labels(cv, blank(s["right"]), blank(s["bottom"]), n, n, 1, 1)
        draw_side_labels(cv, blank(s["left"]), blank(s["top"]), n, n, 1, 1, right_side=False,
                         bottom_side=False)
        return cv


# -- Calcudoku ------------------------------------------------------------------------


def cage_value(op, vals):
    if op == "=":
        return vals[0]
    if op == "+":
        return sum(vals)
    if op == "×":
        return reduce(lambda a, b: a * b, vals, 1)
    if op == "-":
        return abs(vals[0] - vals[1])
    hi, lo = max(vals), min(vals)
    return hi // lo if hi % lo == 0 else None


def calcudoku_model(s) -> GridModel:
    n = s["n"]
    m = latin_model(n)
    for cage in s["cages"]:
        scope = [r * n + c for r, c in cage["cells"]]
        op, t = cage["op"], cage["target"]
        if op == "=":
            m.fix(scope[0], t)
        else:
            m.add(Table(scope, lambda tup, op=op, t=t: cage_value(op, tup) == t))
    return m


@register_task
class Calcudoku(LatinTask):
    name = "calcudoku"
    title = "Calcudoku"
    levels = {1: {"n": 3, "max_cage": 2}, 2: {"n": 4, "max_cage": 3}, 3: {"n": 5, "max_cage": 3},
              4: {"n": 6, "max_cage": 3}, 5: {"n": 6, "max_cage": 4}}
    schema = (("n", "json", "grid side"),
              ("cages", "json", "cages: cells [[r,c],...], op in + - × ÷ =, target"))
    size_keys = ("n", "max_cage")
    rules = ("Fill the NxN grid with 1 to N so that each number appears once in every row and "
             "column. The grid is split into cages; combining the numbers of a cage with its "
             "operation must give the cage's target. For - and ÷ cages take the larger number "
             "first.")
    answer_format = "a 2D list, e.g. [[1, 2, 3], [3, 1, 2], [2, 3, 1]]."

    def model(self, s):
        return calcudoku_model(s)

    def generate(self, p, rng):
        n = p["n"]
        hidden = random_latin(n, rng)
        for _ in range(8):
            region = random_partition(n, n, rng, 1, p["max_cage"])
            groups = {}
            for r in range(n):
                for c in range(n):
                    groups.setdefault(region[r][c], []).append([r, c])
            cages = []
            for _, cells in sorted(groups.items()):
                vals = [hidden[r][c] for r, c in cells]
                if len(cells) == 1:
                    op = "="
                elif len(cells) == 2:
                    ops = ["+", "×", "-"] + (["÷"] if max(vals) % min(vals) == 0 else [])
                    op = rng.choice(ops)
                else:
                    op = rng.choice(["+", "×"])
                cages.append({"cells": cells, "op": op, "target": cage_value(op, vals)})
            s = {"n": n, "cages": cages}
            try:
                if count_solutions(calcudoku_model(s), 2, node_limit=NODE_LIMIT) == 1:
                    return s, G.GridOfDigits(tuple(map(tuple, hidden)))
            except SearchLimit:
                pass
        return None

    def check(self, s, truth, ans):
        rows = [list(r) for r in ans.rows]
        check_latin(rows, s["n"])
        for cage in s["cages"]:
            vals = [rows[r][c] for r, c in cage["cells"]]
            require(cage_value(cage["op"], vals) == cage["target"], "rule_violation", "cage target missed")

    def describe(self, s):
        lines = []
        for cage in s["cages"]:
            cells = " ".join(f"({r},{c})" for r, c in cage["cells"])
            lines.append(f"{cage['target']}{cage['op'] if cage['op'] != '=' else ''}: {cells}")
        return f"Grid size {s['n']}x{s['n']}. Cages (target and operation: cells):\n" + "\n".join(lines)

    def draw(self, s):
        n = s["n"]
        cv = grid_canvas(n, n)
        draw_cells(cv, n, n)
        region = [[0] * n for _ in range(n)]
        for i, cage in enumerate(s["cages"]):
            for r, c in cage["cells"]:
                region[r][c] = i
            r, c = min(map(tuple, cage["cells"]))
            x, y = cell_xy(r, c)
            label = f"{cage['target']}{cage['op'] if cage['op'] != '=' else ''}"
            cv.text(x + 4, y + 10, label, size=12, anchor="start", cls="cage")
        draw_region_borders(cv, region)
        return cv


# -- Eulero (Graeco-Latin squares) ---------------------------------------------------


def eulero_model(s) -> GridModel:
    n = s["n"]
    univ = mask_of(range(n * n))
    m = GridModel(n, n, [univ] * (n * n))
    for i in range(n):
        for scope in ([i * n + c for c in range(n)], [r * n + i for r in range(n)]):
            m.add(AllDifferent(scope, key=lambda v, n=n: v // n, exact=True, universe=univ))
            m.add(AllDifferent(scope, key=lambda v, n=n: v % n, exact=True, universe=univ))
    m.add(AllDifferent(range(n * n), exact=True))
    for r in range(n):
        for c in range(n):
            cell = s["grid"][r][c]
            if cell:
                m.fix(r * n + c, pair_code(cell, n))
    return m


def pair_code(cell: str, n: int) -> int:
    return (ord(cell[0]) - 65) * n + int(cell[1:]) - 1


def code_pair(v: int, n: int) -> tuple[str, int]:
    return string.ascii_uppercase[v // n], v % n + 1


@register_task
class Eulero(LatinTask):
    name = "eulero"
    title = "Eulero"
    levels = {1: {"n": 3, "keep": 3}, 2: {"n": 4, "keep": 8}, 3: {"n": 4, "keep": 0},
              4: {"n": 5, "keep": 12}, 5: {"n": 5, "keep": 0}}
    schema = (("n", "json", "grid side"), ("grid", "matrix", "prefilled pairs like A1, '' = empty"))
    size_keys = ("n",)
    rules = ("Complete the NxN grid with letter-number pairs such as A1. Letters are the first N "
             "of the alphabet and numbers run from 1 to N. Every letter and every number appears "
             "once in each row and each column, and no pair occurs twice in the grid.")
    answer_format = ("one line per row, pairs separated by | without spaces, e.g.\n"
                     "A1|B2|C3\nB3|C1|A2\nC2|A3|B1")

    def model(self, s):
        return eulero_model(s)

    def solve(self, s):
        n = s["n"]
        sol = solve_csp(eulero_model(s))
        if sol is None:
            raise ValueError("unsatisfiable instance")
        return G.GridOfPairs(tuple(tuple(code_pair(v, n) for v in row) for row in as_rows(sol, n)))

    def generate(self, p, rng):
        n = p["n"]
        empty = {"n": n, "grid": [[""] * n for _ in range(n)]}
        flat = solve_csp(eulero_model(empty), rng=rng, node_limit=NODE_LIMIT)
        if flat is None:
            return None
        pool = [(r, c, flat[r * n + c]) for r in range(n) for c in range(n)]

        def state(cs):
            g = [[""] * n for _ in range(n)]
            for r, c, v in cs:
                a, b = code_pair(v, n)
                g[r][c] = f"{a}{b}"
            return {"n": n, "grid": g}

        try:
            clues = make_unique(lambda cs: eulero_model(state(cs)), pool, flat,
                                lambda cl, sol: sol[cl[0] * n + cl[1]] == cl[2], rng,
                                stop=lambda cs: len(cs) <= p["keep"], node_limit=NODE_LIMIT)
        except (SearchLimit, ValueError):
            return None
        sol = G.GridOfPairs(tuple(tuple(code_pair(v, n) for v in row) for row in as_rows(flat, n)))
        return state(clues), sol

    def check(self, s, truth, ans):
        n = s["n"]
        rows = [list(r) for r in ans.rows]
        grid_shape(rows, n, n)
        letters = set(string.ascii_uppercase[:n])
        require(all(a in letters and 1 <= b <= n for row in rows for a, b in row), "rule_violation",
                "symbol out of range")
        check_latin([[a for a, _ in row] for row in rows], n, letters)
        check_latin([[b for _, b in row] for row in rows], n)
        require(len({p for row in rows for p in row}) == n * n, "rule_violation", "repeated pair")
        for r in range(n):
            for c in range(n):
                g = s["grid"][r][c]
                if g:
                    require(f"{rows[r][c][0]}{rows[r][c][1]}" == g, "rule_violation", "given changed")

    def describe(self, s):
        body = "\n".join(" ".join(x or ".." for x in row) for row in s["grid"])
        return f"Current grid ('..' = empty):\n{body}"

    def draw(self, s):
        n = s["n"]
        cv = grid_canvas(n, n)
        draw_cells(cv, n, n)
        draw_values(cv, s["grid"], blank="")
        return cv

    def trace(self, s, sol):
        return [step("intermediate_state", f"Row {r + 1}: {'|'.join(f'{a}{b}' for a, b in row)}.",
                     "|".join(f"{a}{b}" for a, b in row)) for r, row in enumerate(sol.rows)]


# -- Kukurasu ----------------------------------------------------------------------


def kukurasu_model(s) -> GridModel:
    n = s["n"]
    m = GridModel(n, n, [0b11] * (n * n))
    w = list(range(1, n + 1))
    for i in range(n):
        m.add(LinearSum([i * n + c for c in range(n)], s["rows"][i], s["rows"][i], w))
        m.add(LinearSum([r * n + i for r in range(n)], s["cols"][i], s["cols"][i], w))
    return m


def kukurasu_clues(grid):
    n = len(grid)
    rows = [sum(c + 1 for c in range(n) if grid[r][c]) for r in range(n)]
    cols = [sum(r + 1 for r in range(n) if grid[r][c]) for c in range(n)]
    return rows, cols


@register_task
class Kukurasu(LatinTask):
    name = "kukurasu"
    title = "Kukurasu"
    levels = {k: {"n": k + 2} for k in range(1, 6)}
    schema = (("n", "json", "grid side"), ("rows", "json", "clue right of each row"),
              ("cols", "json", "clue below each column"))
    size_keys = ("n",)
    rules = ("Shade some cells of the NxN grid black. In each row, the column positions (1 to N) "
             "of its black cells must add up to the number at the right of the row. In each "
             "column, the row positions (1 to N) of its black cells must add up to the number "
             "below the column.")
    answer_format = "a 2D list with 1 for black and 0 for white, e.g. [[1, 0, 0], [0, 1, 1], [0, 0, 1]]."

    def model(self, s):
        return kukurasu_model(s)

    def generate(self, p, rng):
        n = p["n"]
        density = 0.3 + 0.4 * rng.random()
        grid = [[1 if rng.chance(density) else 0 for _ in range(n)] for _ in range(n)]
        rows, cols = kukurasu_clues(grid)
        s = {"n": n, "rows": rows, "cols": cols}
        if count_solutions(kukurasu_model(s), 2, node_limit=NODE_LIMIT) != 1:
            return None
        return s, G.GridOfDigits(tuple(map(tuple, grid)))

    def check(self, s, truth, ans):
        n = s["n"]
        rows = [list(r) for r in ans.rows]
        grid_shape(rows, n, n)
        require(all(v in (0, 1) for r in rows for v in r), "rule_violation", "cells must be 0 or 1")
        rs, cs = kukurasu_clues(rows)
        require(rs == s["rows"] and cs == s["cols"], "rule_violation", "weighted sums differ")

    def describe(self, s):
        return (f"Row clues (top to bottom): {s['rows']}\n"
                f"Column clues (left to right): {s['cols']}")

    def draw(self, s):
        n = s["n"]
        cv = grid_canvas(n, n, 0, 0, 1, 1)
        draw_cells(cv, n, n)
        draw_side_labels(cv, s["rows"], s["cols"], n, n)
        return cv

    def trace(self, s, sol):
        steps = []
        for r, row in enumerate(sol.rows):
            cols = [c + 1 for c, v in enumerate(row) if v]
            expr = " + ".join(map(str, cols)) or "0"
            steps.append(step("key_calculation", f"Row {r + 1}: black in columns {cols}, {expr} = "
                              f"{s['rows'][r]}.", " ".join(map(str, row))))
        return steps
