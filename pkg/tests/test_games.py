from __future__ import annotations

import logging
import random
from collections import deque

import pytest

from chainbench import grammar as G
from chainbench.core import all_tasks, generate_instance, instance_from_state, verify_answer
from chainbench.rng import seeded_stream
from chainbench.tasks.games import (deduce_minesweeper, hanoi_recursive, plan, plan_maze,
                                    plan_sliding, random_board15, simulate_hanoi, simulate_maze,
                                    simulate_moves, simulate_sliding, solvable15)
from chainbench.tasks.words import dictionary, scan_word, solve_word_ladder, words_of_length
from oracles import bfs_maze_distance, bfs_sliding_distance, brute_mines, inversion_parity_solvable
from paper_cases import LADDER_ANSWER, LADDER_STATE, NIBBLES_ANSWER, NIBBLES_STATE

SIMULATE_TASKS = [s.name for s in all_tasks() if s.verify_mode == "simulate"]
GOAL = tuple(list(range(1, 16)) + [0])


def test_nibbles_worked_example():
    out = simulate_moves("nibbles", NIBBLES_STATE, NIBBLES_ANSWER.split())
    assert out.ok


def test_empty_plan_on_solved_state():
    solved = {"board": [[1, 2, 3, 4], [5, 6, 7, 8], [9, 10, 11, 12], [13, 14, 15, 0]]}
    assert simulate_sliding(solved, []).ok
    assert plan_sliding(GOAL) == []
    maze = {"rows": 1, "cols": 2, "start": [0, 0], "end": [0, 0], "right": [[0, 0]], "down": [[0, 0]]}
    assert simulate_maze(maze, []).ok


def test_maze_wall_violation_reports_step():
    maze = {"rows": 1, "cols": 3, "start": [0, 0], "end": [0, 2],
            "right": [[0, 1, 0]], "down": [[0, 0, 0]]}
    out = simulate_maze(maze, ["right", "right"])
    assert (out.status, out.kind, out.step) == ("violation", "wall", 1)


def test_hanoi_three_disks():
    moves = hanoi_recursive(3)
    assert len(moves) == 7
    state = {"disks": 3, "pegs": [[3, 2, 1], [], []]}
    assert simulate_hanoi(state, moves).ok
    assert plan("hanoi", state) == moves


def _random_maze(rng, rows, cols):
    return {"rows": rows, "cols": cols, "start": [0, 0], "end": [rows - 1, cols - 1],
            "right": [[int(rng.random() < 0.35) for _ in range(cols)] for _ in range(rows)],
            "down": [[int(rng.random() < 0.35) for _ in range(cols)] for _ in range(rows)]}


def test_maze_plan_is_shortest():
    rng = random.Random(66)
    done = 0
    while done < 100:
        m = _random_maze(rng, 6, 6)
        d = bfs_maze_distance(m)
        if d < 0:
            continue
        path = plan_maze(m)
        assert len(path) == d and simulate_maze(m, path).ok
        done += 1
    for level in range(1, 6):
        inst = generate_instance("maze", level, 4)
        assert len(G.parse("maze", inst.ground_truth).moves) == bfs_maze_distance(inst.initial_state)


def test_sliding_plan_is_shortest():
    rng = seeded_stream(15, "slide-test")
    for _ in range(40):
        board = random_board15(rng, rng.randint(0, 12))
        path = plan_sliding(board)
        assert len(path) == bfs_sliding_distance(board)
        s = {"board": [list(board[i:i + 4]) for i in range(0, 16, 4)]}
        assert simulate_sliding(s, path).ok


def test_sliding_parity_on_many_boards():
    rng = random.Random(1515)
    for _ in range(10_000):
        b = list(range(16))
        rng.shuffle(b)
        assert solvable15(tuple(b)) == inversion_parity_solvable(tuple(b))
    rs = seeded_stream(7, "walks")
    for _ in range(500):
        assert solvable15(random_board15(rs, rs.randint(0, 60)))


def test_minesweeper_forced_cells():
    # a zero clue clears all of its covered neighbours
    board = [[0, -1], [-1, -1]]
    assert deduce_minesweeper(board).coords == ()
    # a corner 1 with a single covered neighbour forces that neighbour
    board = [[1, -1], [1, 1]]
    assert set(deduce_minesweeper(board).coords) == {(0, 1)}


def test_minesweeper_matches_enumeration():
    for seed in range(40):
        s = generate_instance("minesweeper", 1, seed).initial_state
        assert (s["rows"], s["cols"]) == (5, 5)
        mine = set(deduce_minesweeper(s["board"]).coords)
        assert mine == brute_mines(s["board"])


def _bfs_ladder(start, end):
    pool = [w for w in dictionary() if len(w) == len(start)]
    dist = {start: 0}
    q = deque([start])
    while q:
        w = q.popleft()
        if w == end:
            return dist[w]
        for v in pool:
            if v not in dist and sum(a != b for a, b in zip(v, w)) == 1:
                dist[v] = dist[w] + 1
                q.append(v)
    return None


def test_word_ladder():
    inst = instance_from_state("word_ladder", LADDER_STATE)
    assert verify_answer(inst, LADDER_ANSWER).accepted
    assert not verify_answer(inst, '["how", "met"]').accepted
    assert solve_word_ladder("cat", "cat") == ["cat"]
    rng = random.Random(3)
    pool = words_of_length(3)
    checked = 0
    while checked < 30:
        a, b = rng.sample(pool, 2)
        d = _bfs_ladder(a, b)
        if d is None:
            continue
        assert len(solve_word_ladder(a, b)) - 1 == d
        checked += 1


def _independent_scan(grid, word):
    rows, cols = len(grid), len(grid[0])
    n = 0
    for r in range(rows):
        for c in range(cols):
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if (dr, dc) == (0, 0):
                        continue
                    cells = [(r + dr * k, c + dc * k) for k in range(len(word))]
                    if all(0 <= y < rows and 0 <= x < cols for y, x in cells) and \
                            "".join(grid[y][x] for y, x in cells) == word:
                        n += 1
    return n


def test_wordsearch_words_occur_once():
    for level in range(1, 6):
        for seed in range(5):
            s = generate_instance("wordsearch", level, seed).initial_state
            for w in s["words"]:
                assert _independent_scan(s["grid"], w) == 1
                assert len(scan_word(s["grid"], w)) == 1


@pytest.mark.parametrize("task", ["maze", "sokoban", "nibbles", "sliding_puzzle", "hanoi"])
def test_plans_replay(task):
    for level in (1, 3, 5):
        inst = generate_instance(task, level, 8)
        moves = G.parse(task, inst.ground_truth)
        assert simulate_moves(task, inst.initial_state, moves).ok


def random_junk(rng: random.Random) -> str:
    raw = bytes(rng.randrange(256) for _ in range(rng.randint(0, 80)))
    return raw.decode("utf-8", errors="replace")


@pytest.mark.parametrize("task", SIMULATE_TASKS)
def test_simulate_verifiers_survive_junk(task, caplog):
    inst = generate_instance(task, 2, 9)
    rng = random.Random(task)
    with caplog.at_level(logging.ERROR, logger="chainbench"):
        for _ in range(1000):
            assert not verify_answer(inst, random_junk(rng)).accepted
    assert not [r for r in caplog.records if r.levelno >= logging.ERROR]
