from __future__ import annotations

import itertools
import random

import pytest

from chainbench import grammar as G
from chainbench.core import generate_instance, instance_from_state, verify_answer
from chainbench.tasks.sequences import (crypto_solutions, h_index, hills_valleys, largest_rectangle,
                                        lis_length, max_container, max_profit, solutions_24,
                                        solve_24, trap_water)
from oracles import (brute_container, brute_hills_valleys, brute_hindex, brute_lis,
                     brute_rectangle, brute_stock, brute_trap)
from paper_cases import POINTS24_ANSWER, POINTS24_NUMBERS

PAIRS = [
    (trap_water, brute_trap),
    (max_profit, brute_stock),
    (max_container, brute_container),
    (h_index, brute_hindex),
    (largest_rectangle, brute_rectangle),
    (lis_length, brute_lis),
    (hills_valleys, brute_hills_valleys),
]


def test_worked_values():
    assert trap_water([3, 0, 2, 0, 4]) == 7
    assert h_index([0, 0, 0]) == 0
    assert largest_rectangle([2, 1, 4, 5, 1, 3, 3]) == 8
    assert max_profit([1, 5, 3, 6]) == 7
    assert hills_valleys([2, 4, 1, 1, 6, 5]) == 3


@pytest.mark.parametrize("fast,slow", PAIRS, ids=[f.__name__ for f, _ in PAIRS])
def test_array_solver_matches_brute_force(fast, slow):
    rng = random.Random(fast.__name__)
    for _ in range(200):
        lo = 1 if fast in (max_container, largest_rectangle) else 0
        series = [rng.randint(lo, 12) for _ in range(rng.randint(2, 12))]
        assert fast(series) == slow(series), series


@pytest.mark.parametrize("task", ["trapping_rain_water", "buy_sell_stock", "container_most_water",
                                  "h_index", "largest_rectangle", "lis", "hills_valleys"])
def test_generated_series_answers(task):
    for level in range(1, 6):
        inst = generate_instance(task, level, 2)
        truth = int(inst.ground_truth)
        assert verify_answer(inst, str(truth)).accepted
        assert verify_answer(inst, str(truth + 1)).reason == "wrong_value"


# -- 24 points -----------------------------------------------------------------------------


def test_points24_examples():
    inst = instance_from_state("points24", {"numbers": POINTS24_NUMBERS})
    assert verify_answer(inst, POINTS24_ANSWER).accepted
    assert solutions_24([1, 1, 1, 1]) == []
    assert solve_24([6, 6, 6, 6]) is not None
    assert verify_answer(instance_from_state("points24", {"numbers": [6, 6, 6, 6]}), "6+6+6+6").accepted


def _brute_24(nums):
    """Search over pairwise merges with Fractions: does any combination reach 24?"""
    from fractions import Fraction

    def go(vals):
        if len(vals) == 1:
            return vals[0] == 24
        for i, j in itertools.permutations(range(len(vals)), 2):
            rest = [vals[k] for k in range(len(vals)) if k not in (i, j)]
            a, b = vals[i], vals[j]
            outs = [a + b, a - b, a * b] + ([a / b] if b else [])
            if any(go(rest + [x]) for x in outs):
                return True
        return False

    return go([Fraction(x) for x in nums])


def test_points24_existence_matches_search():
    rng = random.Random(24)
    for _ in range(150):
        nums = [rng.randint(1, 13) for _ in range(4)]
        sol = solve_24(nums)
        assert (sol is not None) == _brute_24(nums), nums
        if sol is not None:
            assert G.eval_expression(sol, nums).value == 24


# -- cryptomath ----------------------------------------------------------------------------


def _brute_crypto(words, op, result, limit=3):
    letters = sorted(set("".join(words) + result))
    leading = {w[0] for w in list(words) + [result] if len(w) > 1}
    out = []
    for digits in itertools.permutations(range(10), len(letters)):
        a = dict(zip(letters, digits))
        if any(a[ch] == 0 for ch in leading):
            continue
        val = lambda w: int("".join(str(a[ch]) for ch in w))
        x, y, z = val(words[0]), val(words[1]), val(result)
        if (x + y if op == "+" else x - y if op == "-" else x * y) == z:
            out.append(a)
            if len(out) >= limit:
                break
    return out


def test_degenerate_cryptomath_is_not_unique():
    assert len(crypto_solutions(["A", "A"], "+", "B", limit=10)) > 1


@pytest.mark.parametrize("level", [1, 2, 3])
def test_cryptomath_matches_injection_search(level):
    for seed in range(8):
        s = generate_instance("cryptomath", level, seed).initial_state
        mine = crypto_solutions(s["words"], s["op"], s["result"], limit=3)
        brute = _brute_crypto(s["words"], s["op"], s["result"], limit=3)
        assert len(mine) == len(brute) == 1
        assert mine[0] == brute[0]
