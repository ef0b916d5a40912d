"""Word puzzles: Word Ladder and Word Search, over the shipped dictionary."""
from __future__ import annotations

import hashlib
import string
from collections import deque
from functools import lru_cache
from importlib import resources

from .. import grammar as G
from ..render.svg import CELL, MARGIN, PALETTE, Canvas, draw_cells, grid_canvas, draw_values
from .common import TaskBase, register_task, require, step

DIRS8 = {"N": (-1, 0), "NE": (-1, 1), "E": (0, 1), "SE": (1, 1),
         "S": (1, 0), "SW": (1, -1), "W": (0, -1), "NW": (-1, -1)}


@lru_cache(maxsize=1)
def dictionary() -> frozenset:
    """Lower-case words of the embedded list (version-pinned by its hash)."""
    text = resources.files("chainbench").joinpath("data", "words.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.split() if w.strip())


def dictionary_hash() -> str:
    data = resources.files("chainbench").joinpath("data", "words.txt").read_bytes()
    return hashlib.sha256(data).hexdigest()


@lru_cache(maxsize=None)
def words_of_length(n: int) -> tuple[str, ...]:
    return tuple(sorted(w for w in dictionary() if len(w) == n and w.isalpha()))


@lru_cache(maxsize=None)
def _buckets(n: int) -> dict:
    out: dict = {}
    for w in words_of_length(n):
        for i in range(n):
            out.setdefault(w[:i] + "_" + w[i + 1:], []).append(w)
    return out


def ladder_neighbors(w: str):
    b = _buckets(len(w))
    for i in range(len(w)):
        for v in b.get(w[:i] + "_" + w[i + 1:], ()):
            if v != w:
                yield v


def one_letter_apart(a: str, b: str) -> bool:
    return len(a) == len(b) and sum(x != y for x, y in zip(a, b)) == 1


def ladder_distances(start: str) -> dict:
    dist = {start: 0}
    q = deque([start])
    while q:
        w = q.popleft()
        for v in ladder_neighbors(w):
            if v not in dist:
                dist[v] = dist[w] + 1
                q.append(v)
    return dist


def solve_word_ladder(start: str, end: str) -> list[str]:
    """Shortest chain by breadth-first search; raises ValueError (no_chain) if none."""
    if start == end:
        return [start]
    prev = {start: None}
    q = deque([start])
    while q:
        w = q.popleft()
        if w == end:
            break
        for v in sorted(ladder_neighbors(w)):
            if v not in prev:
                prev[v] = w
                q.append(v)
    if end not in prev:
        raise ValueError("no_chain")
    out = [end]
    while prev[out[-1]] is not None:
        out.append(prev[out[-1]])
    return out[::-1]


@register_task
class WordLadder(TaskBase):
    name = "word_ladder"
    title = "Word Ladder"
    category = "Puzzle"
    levels = {1: {"length": 3, "dist": (3, 4)}, 2: {"length": 4, "dist": (3, 4)},
              3: {"length": 4, "dist": (5, 6)}, 4: {"length": 5, "dist": (5, 6)},
              5: {"length": 5, "dist": (7, 9)}}
    schema = (("start", "json", "first word"), ("end", "json", "last word"))
    size_keys = ("length", "dist")
    rules = ("Turn the first word into the last word. Each step changes exactly one letter in "
             "place, and every word along the way, including both ends, must be an English word "
             "from the puzzle's dictionary.")
    answer_format = 'the whole chain from first to last word as a list of strings, e.g. ["hug", "bug", "beg"].'

    def generate(self, p, rng):
        pool = words_of_length(p["length"])
        start = rng.choice(pool)
        dist = ladder_distances(start)
        lo, hi = p["dist"]
        ends = sorted(w for w, d in dist.items() if lo <= d <= hi)
        if not ends:
            return None
        end = rng.choice(ends)
        return {"start": start, "end": end}, G.NodeList(tuple(solve_word_ladder(start, end)))

    def solve(self, s):
        return G.NodeList(tuple(solve_word_ladder(s["start"], s["end"])))

    def check(self, s, truth, ans):
        chain = [str(w).lower() for w in ans.items]
        require(len(chain) >= 1, "incomplete")
        require(chain[0] == s["start"], "rule_violation", "chain must begin with the first word")
        words = dictionary()
        for w in chain:
            require(w in words, "rule_violation", f"{w!r} is not in the dictionary")
        for a, b in zip(chain, chain[1:]):
            require(one_letter_apart(a, b), "rule_violation", f"{a} -> {b} changes more than one letter")
        require(chain[-1] == s["end"], "incomplete", "chain does not reach the last word")

    def describe(self, s):
        return f"First word: {s['start']}\nLast word: {s['end']}"

    def draw(self, s):
        cv = Canvas(2 * MARGIN + 6 * CELL, 2 * MARGIN + 2 * CELL)
        cv.text(MARGIN + 1.5 * CELL, MARGIN + CELL, s["start"], size=26, cls="start")
        cv.text(MARGIN + 3 * CELL, MARGIN + CELL, "→", size=26)
        cv.text(MARGIN + 4.5 * CELL, MARGIN + CELL, s["end"], size=26, cls="end")
        return cv

    def trace(self, s, sol):
        out = []
        for a, b in zip(sol.items, sol.items[1:]):
            i = next(k for k in range(len(a)) if a[k] != b[k])
            out.append(step("intermediate_state", f"{a} -> {b}: position {i + 1} becomes '{b[i]}'.", b))
        return out


# -- Word Search --------------------------------------------------------------------------


def scan_word(grid: list[str], word: str) -> list[tuple[str, tuple[int, int]]]:
    """Every (direction, (x, y)) occurrence of ``word``; x = column, y = row, 1-based."""
    rows, cols = len(grid), len(grid[0])
    hits = []
    for r in range(rows):
        for c in range(cols):
            if grid[r][c] != word[0]:
                continue
            for name, (dr, dc) in DIRS8.items():
                rr, cc = r + dr * (len(word) - 1), c + dc * (len(word) - 1)
                if not (0 <= rr < rows and 0 <= cc < cols):
                    continue
                if all(grid[r + dr * k][c + dc * k] == word[k] for k in range(len(word))):
                    hits.append((name, (c + 1, r + 1)))
    return hits


@register_task
class Wordsearch(TaskBase):
    name = "wordsearch"
    title = "Word Search"
    category = "Puzzle"
    unique = True
    levels = {k: {"n": 5 + k, "words": k, "max_len": min(6, 4 + k)} for k in range(1, 6)}
    schema = (("grid", "json", "rows of letters, top to bottom"), ("words", "json", "words to find"))
    size_keys = ("n", "words")
    rules = ("Find each listed word in the letter grid. Words run in a straight line horizontally, "
             "vertically or diagonally, forwards or backwards. Report each word's first letter "
             "as (x, y), where x is the column counted from 1 at the left and y is the row "
             "counted from 1 at the top, together with its direction: N (up), S (down), E "
             "(right), W (left), NE, NW, SE or SW.")
    answer_format = "one line per word written as WORD DIRECTION @ (x, y), e.g. CAT SE @ (2, 1)."

    def generate(self, p, rng):
        n = p["n"]
        pool = [w.upper() for k in range(3, p["max_len"] + 1) for w in words_of_length(k) if w != w[::-1]]
        words: list[str] = []
        while len(words) < p["words"]:
            w = rng.choice(pool)
            if any(w in v or v in w or w[::-1] in v or v in w[::-1] for v in words):
                continue
            words.append(w)
        grid = [[""] * n for _ in range(n)]
        placed = {}
        for w in words:
            spots = []
            for name, (dr, dc) in DIRS8.items():
                for r in range(n):
                    for c in range(n):
                        rr, cc = r + dr * (len(w) - 1), c + dc * (len(w) - 1)
                        if not (0 <= rr < n and 0 <= cc < n):
                            continue
                        if all(grid[r + dr * k][c + dc * k] in ("", w[k]) for k in range(len(w))):
                            spots.append((name, r, c))
            if not spots:
                return None
            name, r, c = rng.choice(spots)
            dr, dc = DIRS8[name]
            for k in range(len(w)):
                grid[r + dr * k][c + dc * k] = w[k]
            placed[w] = (name, (c + 1, r + 1))
        for _ in range(20):
            filled = ["".join(ch or rng.choice(string.ascii_uppercase) for ch in row) for row in grid]
            if all(scan_word(filled, w) == [placed[w]] for w in words):
                s = {"grid": filled, "words": sorted(words)}
                return s, G.WordPlacements(tuple(sorted((w, *placed[w]) for w in words)))
        return None

    def solve(self, s):
        out = []
        for w in s["words"]:
            hits = scan_word(s["grid"], w)
            if len(hits) != 1:
                raise ValueError(f"{w} occurs {len(hits)} times")
            out.append((w, *hits[0]))
        return G.WordPlacements(tuple(sorted(out)))

    def check(self, s, truth, ans):
        found = {}
        for word, d, (x, y) in ans.items:
            require(word.upper() in s["words"], "rule_violation", f"{word} is not a listed word")
            require((d, (x, y)) in scan_word(s["grid"], word.upper()), "wrong_value",
                    f"{word} is not at ({x}, {y}) going {d}")
            found[word.upper()] = True
        require(set(found) == set(s["words"]), "incomplete", "not every word was located")

    def describe(self, s):
        return "Grid:\n" + "\n".join(" ".join(row) for row in s["grid"]) + "\nWords: " + ", ".join(s["words"])

    def draw(self, s):
        n = len(s["grid"])
        cv = grid_canvas(n, n, 0, 0, 0, 1)
        draw_cells(cv, n, n)
        draw_values(cv, [list(row) for row in s["grid"]], blank="")
        cv.text(MARGIN, MARGIN + n * CELL + CELL // 2, "Words: " + ", ".join(s["words"]),
                size=16, anchor="start", fill=PALETTE["ink"], cls="words")
        return cv

    def trace(self, s, sol):
        return [step("decision_point", f"{w} starts at ({x}, {y}) and runs {d}.", f"{w} {d} @ ({x}, {y})")
                for w, d, (x, y) in sol.items]
