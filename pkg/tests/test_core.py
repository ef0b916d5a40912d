from __future__ import annotations

import json

import pytest
from hypothesis import given, settings, strategies as st

from chainbench.core import (CATEGORIES, TaskInstance, all_tasks, generate_instance, get_task,
                             instance_from_state, verify_answer)
from chainbench.rng import instance_seed, seeded_stream
from paper_cases import NIBBLES_ANSWER, NIBBLES_STATE, POINTS24_ANSWER, POINTS24_NUMBERS

TASKS = [s.name for s in all_tasks()]


def test_catalog_is_closed():
    counts = {c: 0 for c in CATEGORIES}
    for s in all_tasks():
        counts[s.category] += 1
    assert counts == {"Algorithm": 9, "Graph": 8, "Puzzle": 19, "Game": 6}
    assert len(set(TASKS)) == 42


def test_unknown_task():
    with pytest.raises(KeyError):
        get_task("no_such_task")


@pytest.mark.parametrize("level", [0, 6])
def test_level_out_of_range(level):
    with pytest.raises(ValueError):
        generate_instance("sudoku", level, 1)


@pytest.mark.parametrize("level,size,apples", [(1, 6, 1), (5, 10, 5)])
def test_nibbles_level_table(level, size, apples):
    for seed in range(3):
        s = generate_instance("nibbles", level, seed).initial_state
        assert (s["rows"], s["cols"]) == (size, size)
        assert len(s["apples"]) == apples


def test_generation_is_deterministic():
    a = generate_instance("sudoku", 1, 12345)
    b = generate_instance("sudoku", 1, 12345)
    assert json.dumps(a.to_record()) == json.dumps(b.to_record())


@pytest.mark.parametrize("task", TASKS)
def test_every_task_self_verifies(task):
    for level in (1, 3):
        inst = generate_instance(task, level, 77)
        assert verify_answer(inst, inst.ground_truth).accepted
        again = TaskInstance.from_record(json.loads(json.dumps(inst.to_record())))
        assert again == inst


@pytest.mark.parametrize("task", TASKS)
def test_empty_answer_is_parse_error(task):
    inst = generate_instance(task, 1, 3)
    v = verify_answer(inst, "")
    assert not v.accepted and v.reason == "parse_error"


def test_nibbles_worked_example():
    inst = instance_from_state("nibbles", NIBBLES_STATE)
    assert verify_answer(inst, NIBBLES_ANSWER).accepted
    assert not verify_answer(inst, "left").accepted


def test_points24_worked_example():
    inst = instance_from_state("points24", {"numbers": POINTS24_NUMBERS})
    assert verify_answer(inst, POINTS24_ANSWER).accepted
    assert verify_answer(inst, "1 + 1").reason in ("rule_violation", "wrong_value")


@pytest.mark.parametrize("task", TASKS)
@settings(max_examples=25, deadline=None)
@given(junk=st.text(max_size=60))
def test_verifier_is_total(task, junk):
    inst = generate_instance(task, 1, 5)
    v = verify_answer(inst, junk)
    assert v.reward in (0, 1)


# -- rng ----------------------------------------------------------------------------------


def test_stream_reproducible():
    a = seeded_stream(42, "gen")
    b = seeded_stream(42, "gen")
    assert [a.next_u64() for _ in range(1000)] == [b.next_u64() for _ in range(1000)]


def test_labels_separate_streams():
    differ = sum(seeded_stream(s, "gen").next_u64() != seeded_stream(s, "render").next_u64()
                 for s in range(1000))
    assert differ >= 990


def test_uniform_chi_square():
    rs = seeded_stream(2024, "chi")
    n, draws = 10, 100_000
    counts = [0] * n
    for _ in range(draws):
        counts[rs.below(n)] += 1
    exp = draws / n
    chi2 = sum((c - exp) ** 2 / exp for c in counts)
    assert chi2 < 27.877  # 0.999 quantile of chi-square with 9 degrees of freedom


def test_stream_helpers():
    rs = seeded_stream(1, "x")
    assert all(3 <= rs.randint(3, 5) <= 5 for _ in range(200))
    assert sorted(rs.shuffled(range(10))) == list(range(10))
    pick = rs.sample(list(range(20)), 5)
    assert len(set(pick)) == 5
    assert rs.split("a").next_u64() != rs.split("b").next_u64()


def test_instance_seeds_distinct():
    seeds = {instance_seed(t, lv, i, 0) for t in TASKS for lv in range(1, 6) for i in range(6)}
    assert len(seeds) == 42 * 30
