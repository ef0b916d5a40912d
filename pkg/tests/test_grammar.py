from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from chainbench import grammar as G
from chainbench.core import all_tasks, generate_instance


def test_move_sequence():
    p = G.parse("nibbles", "up right down left up")
    assert p.moves == ("up", "right", "down", "left", "up")
    assert G.normalize("nibbles", G.MoveSeq(("up", "right"))) == "up right"


def test_expression_tree():
    e = G.parse("points24", "(1 + 7) × (9 - 6)")
    assert G.eval_expression(e, [1, 7, 9, 6]) == G.ExprEval(Fraction(24), True)


def test_operator_folding():
    a = G.normalize("points24", G.parse("points24", "6 ÷ (1 - 3 / 4)"))
    b = G.normalize("points24", G.parse("points24", "6 / (1 − 3 ÷ 4)"))
    assert a == b
    c = G.normalize("points24", G.parse("points24", "(1+7)*(9-6)"))
    assert c == G.normalize("points24", G.parse("points24", "(1 + 7) x (9 - 6)"))


def test_usage_violation():
    r = G.eval_expression(G.parse("points24", "1 + 1"), [1, 7, 9, 6])
    assert r.value == 2 and not r.usage_ok


def test_division_by_zero():
    r = G.eval_expression(G.parse("points24", "1 / (7 - 7)"), [1, 7, 7])
    assert r.value is None and r.error == "division_by_zero"


def test_coord_list():
    p = G.parse("aquarium", "[(0, 4), (1, 4), (1, 3), (2, 3)]")
    assert len(p.coords) == 4
    assert G.normalize("aquarium", G.parse("aquarium", "[( 0 ,4 ),(1,  4)]")) == \
        G.normalize("aquarium", G.parse("aquarium", "[(0, 4), (1, 4)]"))


def test_last_block_wins():
    text = "I first thought up up.\nFinal answer: left right\n...no wait.\nFinal answer: down down"
    assert G.parse("maze", text).moves == ("down", "down")


def test_parse_error_has_offset():
    with pytest.raises(G.ParseError) as err:
        G.parse("sudoku", "no digits here")
    assert err.value.offset >= 0


# -- exact rational evaluation against an independent evaluator ---------------------------


def _oracle_values(nums):
    """Every value reachable from ``nums`` with + - × ÷, computed with Fractions."""
    if len(nums) == 1:
        return {Fraction(nums[0])}
    out = set()
    for k in range(1, len(nums)):
        for left in itertools.combinations(range(len(nums)), k):
            a = [nums[i] for i in left]
            b = [nums[i] for i in range(len(nums)) if i not in left]
            for x in _oracle_values(a):
                for y in _oracle_values(b):
                    out |= {x + y, x - y, x * y}
                    if y:
                        out.add(x / y)
    return out


def _random_expr(draw_ops, nums):
    if len(nums) == 1:
        return str(nums[0])
    k = len(nums) // 2
    return f"({_random_expr(draw_ops, nums[:k])} {draw_ops.pop()} {_random_expr(draw_ops, nums[k:])})"


@settings(max_examples=200, deadline=None)
@given(nums=st.lists(st.integers(1, 13), min_size=2, max_size=4),
       ops=st.lists(st.sampled_from(["+", "-", "×", "÷"]), min_size=3, max_size=3))
def test_expression_value_is_exact(nums, ops):
    text = _random_expr(list(ops), nums)
    r = G.eval_expression(G.parse("points24", text), nums)
    assert r.usage_ok
    if r.value is not None:
        assert r.value in _oracle_values(nums)
        # Python's own Fraction arithmetic gives the same number
        py = text.replace("×", "*").replace("÷", "/")
        import re
        py = re.sub(r"(\d+)", r"Fraction(\1)", py)
        try:
            assert r.value == eval(py, {"Fraction": Fraction})
        except ZeroDivisionError:
            pytest.fail("evaluator produced a value where the oracle divides by zero")


def test_nested_division_example():
    r = G.eval_expression(G.parse("points24", "6 ÷ (1 − 7 ÷ 9)"), [6, 1, 7, 9])
    assert r.value == Fraction(27)


# -- round trip of canonical forms -------------------------------------------------------


@pytest.mark.parametrize("task", [s.name for s in all_tasks()])
def test_normalize_is_a_fixed_point(task):
    for level in (1, 4):
        truth = generate_instance(task, level, 11).ground_truth
        again = G.normalize(task, G.parse(task, truth))
        assert again == truth
        wrapped = f"Some reasoning first.\n\nFinal answer: {truth}"
        assert G.normalize(task, G.parse(task, wrapped)) == truth


@settings(max_examples=100, deadline=None)
@given(moves=st.lists(st.sampled_from(["up", "down", "left", "right"]), min_size=1, max_size=30))
def test_moves_round_trip(moves):
    text = G.normalize("maze", G.MoveSeq(tuple(moves)))
    assert G.parse("maze", text).moves == tuple(moves)


@settings(max_examples=100, deadline=None)
@given(rows=st.lists(st.lists(st.integers(1, 9), min_size=9, max_size=9), min_size=9, max_size=9))
def test_digit_grid_round_trip(rows):
    text = G.normalize("sudoku", G.GridOfDigits(tuple(tuple(r) for r in rows)))
    assert [list(r) for r in G.parse("sudoku", text).rows] == rows


def test_grammar_registry_covers_catalog():
    assert {s.grammar for s in all_tasks()} <= set(G.GRAMMARS)
