"""Algorithm tasks: seven bar-series problems, 24 Points and CryptoMath."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product

from .. import grammar as G
from ..render.svg import PALETTE, Canvas, draw_bars
from .common import TaskBase, register_task, require, step


def series_levels() -> dict:
    return {k: {"length": 6 + 3 * k, "max_height": 4 + 2 * k} for k in range(1, 6)}


# -- reference algorithms ----------------------------------------------------


def trap_water(h: list[int]) -> int:
    i, j = 0, len(h) - 1
    lmax = rmax = total = 0
    while i < j:
        if h[i] <= h[j]:
            lmax = max(lmax, h[i])
            total += lmax - h[i]
            i += 1
        else:
            rmax = max(rmax, h[j])
            total += rmax - h[j]
            j -= 1
    return total


def max_profit(p: list[int]) -> int:
    return sum(max(0, b - a) for a, b in zip(p, p[1:]))


def max_container(h: list[int]) -> int:
    i, j = 0, len(h) - 1
    best = 0
    while i < j:
        best = max(best, (j - i) * min(h[i], h[j]))
        if h[i] <= h[j]:
            i += 1
        else:
            j -= 1
    return best


def h_index(c: list[int]) -> int:
    s = sorted(c, reverse=True)
    h = 0
    for i, v in enumerate(s):
        if v >= i + 1:
            h = i + 1
    return h


def largest_rectangle(h: list[int]) -> int:
    stack: list[int] = []
    best = 0
    for i, v in enumerate(list(h) + [0]):
        while stack and h[stack[-1]] >= v:
            top = stack.pop()
            left = stack[-1] + 1 if stack else 0
            best = max(best, h[top] * (i - left))
        stack.append(i)
    return best


def lis_length(a: list[int]) -> int:
    best = [1] * len(a)
    for i in range(len(a)):
        for j in range(i):
            if a[j] < a[i]:
                best[i] = max(best[i], best[j] + 1)
    return max(best, default=0)


def hills_valleys(a: list[int]) -> int:
    flat = [x for i, x in enumerate(a) if i == 0 or x != a[i - 1]]
    n = 0
    for i in range(1, len(flat) - 1):
        if flat[i - 1] < flat[i] > flat[i + 1] or flat[i - 1] > flat[i] < flat[i + 1]:
            n += 1
    return n


class SeriesTask(TaskBase):
    category = "Algorithm"
    verify_mode = "exact_match"
    levels = series_levels()
    schema = (("values", "json", "bar heights from left to right"),)
    size_keys = ("length", "max_height")
    answer_format = "a single integer."
    fn = staticmethod(lambda v: 0)
    nonzero = False

    def generate(self, p, rng):
        vals = [rng.randint(0, p["max_height"]) for _ in range(p["length"])]
        ans = self.fn(vals)
        if self.nonzero and ans == 0:
            return None
        return {"values": vals}, G.Scalar(Fraction(ans))

    def solve(self, s):
        return G.Scalar(Fraction(self.fn(s["values"])))

    def check(self, s, truth, ans):
        require(ans.value == truth.value, "wrong_value")

    def describe(self, s):
        return f"The bars from left to right have heights: {', '.join(map(str, s['values']))}."

    def draw(self, s):
        return draw_bars(list(s["values"]))

    def trace(self, s, sol):
        return [step("key_calculation", f"Applying the standard scan to the {len(s['values'])} bars "
                     f"gives {G.normalize(self.name, sol)}.", G.normalize(self.name, sol))]


@register_task
class TrappingRainWater(SeriesTask):
    name = "trapping_rain_water"
    title = "Trapping Rain Water"
    fn = staticmethod(trap_water)
    nonzero = True
    rules = ("Bars of width 1 stand side by side with no gaps. After rain, water collects above "
             "bars that are lower than the tallest bars on both sides. Compute the total units of "
             "water held.")

    def trace(self, s, sol):
        h = s["values"]
        steps = []
        for i, v in enumerate(h):
            lm, rm = max(h[:i + 1]), max(h[i:])
            w = min(lm, rm) - v
            steps.append(step("key_calculation" if w else "note",
                              f"Bar {i}: height {v}, left max {lm}, right max {rm}, water {w}.",
                              str(w) if w else None))
        return steps


@register_task
class BuySellStock(SeriesTask):
    name = "buy_sell_stock"
    title = "Best Time to Buy and Sell Stock"
    fn = staticmethod(max_profit)
    rules = ("Each bar is the stock price on one day. You may trade as often as you like but hold "
             "at most one share at any time. Report the largest total profit (0 if no profit is "
             "possible).")

    def trace(self, s, sol):
        p = s["values"]
        return [step("key_calculation", f"Day {i} to day {i + 1}: price rises {b - a}, take it.", str(b - a))
                for i, (a, b) in enumerate(zip(p, p[1:])) if b > a]


@register_task
class ContainerMostWater(SeriesTask):
    name = "container_most_water"
    title = "Container With Most Water"
    fn = staticmethod(max_container)
    nonzero = True
    rules = ("Bars stand side by side, one unit apart. Choose two bars as the walls of a container "
             "whose floor is the x-axis; it holds (distance between the bars) times (the shorter "
             "height). Report the largest amount any container can hold.")


@register_task
class HIndex(SeriesTask):
    name = "h_index"
    title = "H-Index"
    fn = staticmethod(h_index)
    rules = ("Each bar is the citation count of one paper. The h-index is the largest h such that "
             "at least h papers have at least h citations each. Report the h-index.")

    def trace(self, s, sol):
        srt = sorted(s["values"], reverse=True)
        return [step("key_calculation", f"Sorted descending: {srt}. Position {i + 1} has {v} "
                     f"citations, {'≥' if v >= i + 1 else '<'} {i + 1}.", str(i + 1) if v >= i + 1 else None)
                for i, v in enumerate(srt)]


@register_task
class LargestRectangle(SeriesTask):
    name = "largest_rectangle"
    title = "Largest Rectangle in Histogram"
    fn = staticmethod(largest_rectangle)
    nonzero = True
    rules = ("A histogram consists of bars of width 1 packed side by side. Report the area of the "
             "largest axis-aligned rectangle that fits entirely inside the histogram.")


@register_task
class LIS(SeriesTask):
    name = "lis"
    title = "Longest Increasing Subsequence"
    fn = staticmethod(lis_length)
    rules = ("Pick bars from left to right so that each picked bar is strictly taller than the "
             "previous one. Report the length of the longest such selection.")


@register_task
class HillsValleys(SeriesTask):
    name = "hills_valleys"
    title = "Hills and Valleys"
    fn = staticmethod(hills_valleys)
    rules = ("A hill is a flat or raised stretch whose neighbours on both sides are lower; a valley "
             "is a flat or sunken stretch whose neighbours on both sides are higher. Adjacent bars "
             "of equal height belong to the same hill or valley. Count hills plus valleys.")


# -- 24 points -------------------------------------------------------------------

OPS = ("+", "-", "×", "÷")


def _apply(op, x, y):
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "×":
        return x * y
    return None if y == 0 else x / y


def _shapes(a, b, c, d, o1, o2, o3):
    # the five binary trees over four ordered leaves
    yield (o3, (o2, (o1, a, b), c), d)
    yield (o3, (o1, a, (o2, b, c)), d)
    yield (o2, (o1, a, b), (o3, c, d))
    yield (o1, a, (o3, (o2, b, c), d))
    yield (o1, a, (o2, b, (o3, c, d)))


def _value(t):
    if isinstance(t, int):
        return Fraction(t)
    x, y = _value(t[1]), _value(t[2])
    if x is None or y is None:
        return None
    return _apply(t[0], x, y)


def _fvalue(t):
    if isinstance(t, int):
        return float(t)
    x, y = _fvalue(t[1]), _fvalue(t[2])
    if x is None or y is None:
        return None
    op = t[0]
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "×":
        return x * y
    return None if y == 0 else x / y


@lru_cache(maxsize=4096)
def _solutions(nums: tuple, target: int) -> tuple:
    out = []
    for perm in sorted(set(permutations(nums))):
        for ops in product(OPS, repeat=3):
            for t in _shapes(*perm, *ops):
                f = _fvalue(t)
                # floats only screen candidates; the exact check decides
                if f is not None and abs(f - target) < 1e-6 and _value(t) == target:
                    out.append(t)
    return tuple(out)


def solutions_24(nums, target=24) -> list:
    """All (permutation, operators, shape) trees hitting the target exactly."""
    return list(_solutions(tuple(sorted(nums)), target))


def solve_24(nums):
    sols = _solutions(tuple(sorted(nums)), 24)
    return G.Expression(sols[0]) if sols else None


@register_task
class Points24(TaskBase):
    name = "points24"
    title = "24 Points"
    category = "Algorithm"
    verify_mode = "constraint_check"
    # fewer witness trees means a harder multiset
    levels = {
        1: {"max_number": 6, "min_solutions": 40, "max_solutions": 10_000},
        2: {"max_number": 9, "min_solutions": 16, "max_solutions": 10_000},
        3: {"max_number": 13, "min_solutions": 8, "max_solutions": 80},
        4: {"max_number": 13, "min_solutions": 1, "max_solutions": 24},
        5: {"max_number": 13, "min_solutions": 1, "max_solutions": 8},
    }
    schema = (("numbers", "json", "the four numbers"),)
    size_keys = ("max_number",)
    rules = ("Use each of the four given numbers exactly once, combined with +, -, ×, ÷ and "
             "parentheses, to make exactly 24. Intermediate results may be fractions.")
    answer_format = "an expression containing only numbers, operators and parentheses, e.g. (9 - 3) × 8 ÷ 2."

    def generate(self, p, rng):
        nums = sorted(rng.randint(1, p["max_number"]) for _ in range(4))
        sols = solutions_24(nums)
        if not p["min_solutions"] <= len(sols) <= p["max_solutions"]:
            return None
        return {"numbers": nums}, G.Expression(sols[0])

    def solve(self, s):
        e = solve_24(s["numbers"])
        if e is None:
            raise ValueError("no 24 expression exists")
        return e

    def check(self, s, truth, ans):
        ev = G.eval_expression(ans, s["numbers"])
        require(ev.usage_ok, "rule_violation", "numbers not used exactly once")
        require(ev.error is None, "rule_violation", "division by zero")
        require(ev.value == 24, "wrong_value")

    def describe(self, s):
        return f"Numbers: {', '.join(map(str, s['numbers']))}."

    def draw(self, s):
        cv = Canvas(4 * 96 + 64, 160)
        for i, v in enumerate(s["numbers"]):
            x = 32 + i * 96
            cv.rect(x + 8, 24, 80, 112, fill=PALETTE["paper"], stroke=PALETTE["ink"], sw=3, cls="card")
            cv.text(x + 48, 80, v, size=36)
        return cv

    def trace(self, s, sol):
        steps = []

        def walk(t):
            if isinstance(t, int):
                return Fraction(t)
            x, y = walk(t[1]), walk(t[2])
            v = _apply(t[0], x, y)
            steps.append(step("key_calculation", f"{G.render_expression(t)} = {G._fmt_scalar(v)}",
                              G._fmt_scalar(v)))
            return v

        walk(sol.tree)
        return steps


# -- cryptomath ------------------------------------------------------------------


def _word_value(word, assign):
    v = 0
    for ch in word:
        v = v * 10 + assign[ch]
    return v


def _combine(op, a, b):
    return a + b if op == "+" else a - b if op == "-" else a * b


def crypto_solutions(words, op, result, limit=2):
    """Column-wise backtracking from the least significant digit."""
    allw = list(words) + [result]
    width = max(map(len, allw))
    order: list[str] = []
    stages: list[int] = []
    for k in range(1, width + 1):
        for w in allw:
            if len(w) >= k and w[-k] not in order:
                order.append(w[-k])
        stages.append(len(order))
    leading = {w[0] for w in allw if len(w) > 1}
    # stage boundary -> modulus check
    check_at = {}
    for k, n in enumerate(stages, start=1):
        check_at.setdefault(n, []).append(k)
    out: list[dict] = []
    assign: dict[str, int] = {}
    used = [False] * 10

    def low(word, k):
        return _word_value(word[-k:], assign) if k else 0

    def ok_mod(k):
        m = 10 ** k
        a, b = low(words[0], k), low(words[1], k)
        return (_combine(op, a, b) - low(result, k)) % m == 0

    def rec(i):
        if len(out) >= limit:
            return
        for k in check_at.get(i, ()):
            if not ok_mod(k):
                return
        if i == len(order):
            vals = [_word_value(w, assign) for w in allw]
            if _combine(op, vals[0], vals[1]) == vals[2]:
                out.append(dict(assign))
            return
        ch = order[i]
        for d in range(10):
            if used[d] or (d == 0 and ch in leading):
                continue
            used[d] = True
            assign[ch] = d
            rec(i + 1)
            used[d] = False
            del assign[ch]

    rec(0)
    return out


CRYPTO_LEVELS = {
    1: {"ops": "+", "digits": (2, 2)},
    2: {"ops": "+", "digits": (3, 2)},
    3: {"ops": "+-", "digits": (3, 3)},
    4: {"ops": "+-", "digits": (4, 3)},
    5: {"ops": "+-×", "digits": (4, 4)},
}


@register_task
class CryptoMath(TaskBase):
    name = "cryptomath"
    title = "CryptoMath"
    category = "Algorithm"
    verify_mode = "constraint_check"
    levels = {k: {"ops": v["ops"], "digits_a": v["digits"][0], "digits_b": v["digits"][1]}
              for k, v in CRYPTO_LEVELS.items()}
    schema = (("words", "json", "operand words"), ("op", "json", "operator"),
              ("result", "json", "result word"))
    size_keys = ("digits_a", "digits_b")
    rules = ("Each letter stands for a different digit 0-9 and different letters stand for "
             "different digits. No word with more than one letter starts with 0. Find the digit "
             "of every letter so that the equation holds.")
    answer_format = 'a list of "letter"=digit pairs, e.g. ["A"=5, "B"=3, "C"=9].'

    def generate(self, p, rng):
        op = rng.choice(p["ops"])
        da, db = p["digits_a"], p["digits_b"]
        if op == "×":
            db = min(db, 2)
        # drawing digits from a small pool repeats letters, which makes a
        # unique solution far more likely than uniform digits
        pool = rng.sample("0123456789", rng.randint(3, 6))

        def number(n):
            while True:
                s = "".join(rng.choice(pool) for _ in range(n))
                if s[0] != "0":
                    return int(s)

        a, b = number(da), number(db)
        if op == "-" and a <= b:
            a, b = b, a
        c = _combine(op, a, b)
        if c <= 0 or (op == "-" and len(str(c)) < 2):
            return None
        digits = sorted(set(str(a) + str(b) + str(c)))
        if len(digits) < 4:
            return None
        letters = rng.sample("ABCDEFGHIJKLMNOPQRSTUVWXYZ", len(digits))
        tr = {d: l for d, l in zip(digits, letters)}
        words = ["".join(tr[ch] for ch in str(a)), "".join(tr[ch] for ch in str(b))]
        result = "".join(tr[ch] for ch in str(c))
        sols = crypto_solutions(words, op, result, limit=2)
        if len(sols) != 1:
            return None
        return {"words": words, "op": op, "result": result}, self._answer(sols[0])

    @staticmethod
    def _answer(assign):
        return G.KeyValueList(tuple(sorted(assign.items())))

    def solve(self, s):
        sols = crypto_solutions(s["words"], s["op"], s["result"], limit=1)
        if not sols:
            raise ValueError("unsatisfiable cryptarithm")
        return self._answer(sols[0])

    def check(self, s, truth, ans):
        letters = set("".join(s["words"]) + s["result"])
        assign = dict(ans.items)
        require(set(assign) >= letters, "incomplete", "letters missing")
        require(set(assign) == letters, "rule_violation", "unknown letter")
        require(len(set(assign.values())) == len(assign), "rule_violation", "digit reused")
        for w in list(s["words"]) + [s["result"]]:
            require(len(w) == 1 or assign[w[0]] != 0, "rule_violation", "leading zero")
        a, b = (_word_value(w, assign) for w in s["words"])
        require(_combine(s["op"], a, b) == _word_value(s["result"], assign), "wrong_value")

    def equation(self, s):
        return f"{s['words'][0]} {s['op']} {s['words'][1]} = {s['result']}"

    def describe(self, s):
        return f"Equation: {self.equation(s)}"

    def draw(self, s):
        words = [s["words"][0], s["op"] + " " + s["words"][1], "= " + s["result"]]
        width = max(map(len, words))
        cv = Canvas(64 + width * 28, 64 + len(words) * 48)
        for i, w in enumerate(words):
            cv.text(32 + width * 28, 56 + i * 48, w, size=32, anchor="end")
        cv.line(32, 56 + 24 + 0, 32 + width * 28, 56 + 24, sw=2)
        return cv

    def trace(self, s, sol):
        assign = dict(sol.items)
        allw = list(s["words"]) + [s["result"]]
        width = max(map(len, allw))
        steps = []
        for k in range(1, width + 1):
            cols = [w[-k] for w in allw if len(w) >= k]
            fixed = ", ".join(f"{ch}={assign[ch]}" for ch in dict.fromkeys(cols))
            steps.append(step("key_calculation", f"Column {k} from the right uses {', '.join(cols)}; "
                              f"consistent digits: {fixed}.", fixed))
        return steps
