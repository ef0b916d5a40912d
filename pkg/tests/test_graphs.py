from __future__ import annotations

import random
from collections import Counter

import pytest

from chainbench.core import generate_instance, verify_answer
from chainbench.tasks.graphs import (dijkstra, find_isomorphism, kahn, max_flow, solve_eulerian,
                                     solve_hamiltonian)
from oracles import (brute_euler, brute_hamilton, brute_isomorphic, brute_min_cut,
                     brute_shortest, is_topological)


def _connected(n, edges):
    adj = {v: set() for v in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen, stack = {0}, [0]
    while stack:
        for y in adj[stack.pop()]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == n


def _random_multigraph(rng, n, m):
    while True:
        edges = []
        for _ in range(m):
            u, v = rng.sample(range(n), 2)
            edges.append((u, v))
        if _connected(n, edges):
            return edges


def _walk_ok(edges, walk, closed):
    used = Counter(tuple(sorted(e)) for e in edges)
    steps = Counter(tuple(sorted(p)) for p in zip(walk, walk[1:]))
    return steps == used and (not closed or walk[0] == walk[-1])


def test_euler_small_cases():
    assert _walk_ok([(0, 1), (1, 2), (2, 0)], solve_eulerian(3, [(0, 1), (1, 2), (2, 0)], "cycle"), True)
    assert solve_eulerian(3, [(0, 1), (1, 2)], "path") == [0, 1, 2]
    assert solve_eulerian(3, [(0, 1), (1, 2)], "cycle") is None


def test_euler_matches_exhaustive_search():
    rng = random.Random(5)
    for _ in range(150):
        n = rng.randint(2, 8)
        m = rng.randint(n - 1, n + 4)
        edges = _random_multigraph(rng, n, m)
        for kind, closed in (("cycle", True), ("path", False)):
            walk = solve_eulerian(n, edges, kind)
            assert (walk is not None) == brute_euler(n, edges, closed), (n, edges, kind)
            if walk is not None:
                assert _walk_ok(edges, walk, closed)


def _ham_ok(n, edges, path, closed):
    adj = {tuple(sorted(e)) for e in edges}
    pairs = list(zip(path, path[1:])) + ([(path[-1], path[0])] if closed else [])
    return sorted(path) == list(range(n)) and all(tuple(sorted(p)) in adj for p in pairs)


def test_hamilton_small_cases():
    k4 = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    assert _ham_ok(4, k4, solve_hamiltonian(4, k4, "cycle"), True)
    star = [(0, 1), (0, 2), (0, 3)]
    assert solve_hamiltonian(4, star, "cycle") is None


def test_hamilton_matches_permutation_search():
    rng = random.Random(11)
    for trial in range(120):
        n = rng.randint(3, 9 if trial % 10 == 0 else 7)
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        edges = rng.sample(pairs, rng.randint(n - 1, min(len(pairs), 2 * n)))
        for kind, closed in (("cycle", True), ("path", False)):
            path = solve_hamiltonian(n, edges, kind)
            assert (path is not None) == brute_hamilton(n, edges, closed), (n, edges, kind)
            if path is not None:
                assert _ham_ok(n, edges, path, closed)


def _layered_dag(rng, n):
    layers = [[0]] + [[] for _ in range(3)] + [[n - 1]]
    for v in range(1, n - 1):
        layers[rng.randint(1, 3)].append(v)
    layers = [l for l in layers if l]
    edges = []
    for a, b in zip(layers, layers[1:]):
        for u in a:
            for v in b:
                if rng.random() < 0.6:
                    edges.append((u, v, rng.randint(1, 9)))
    return edges


def test_max_flow_small_cases():
    assert max_flow(2, [(0, 1, 7)], 0, 1)[0] == 7
    assert max_flow(4, [(0, 1, 1), (1, 3, 1), (0, 2, 1), (2, 3, 1)], 0, 3)[0] == 2


def test_max_flow_equals_min_cut():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(3, 8)
        edges = _layered_dag(rng, n)
        value, paths = max_flow(n, edges, 0, n - 1)
        assert value == brute_min_cut(n, edges, 0, n - 1)
        assert sum(b for _, b in paths) == value


def test_shortest_distance_matches_enumeration():
    assert dijkstra(2, [(0, 1, 7)], 0)[0][1] == 7
    assert dijkstra(3, [(0, 1, 2)], 0)[0][0] == 0
    rng = random.Random(8)
    for _ in range(100):
        n = rng.randint(2, 8)
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        edges = [(u, v, rng.randint(1, 9)) for u, v in rng.sample(pairs, rng.randint(1, len(pairs)))]
        dist = dijkstra(n, edges, 0)[0]
        for t in range(n):
            assert dist[t] == brute_shortest(n, edges, 0, t)


def test_topological_order():
    assert kahn(3, [(0, 1), (1, 2)]) == [0, 1, 2]
    with pytest.raises(ValueError):
        kahn(2, [(0, 1), (1, 0)])
    rng = random.Random(4)
    for _ in range(100):
        n = rng.randint(2, 9)
        perm = rng.sample(range(n), n)
        edges = [(perm[i], perm[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.3]
        assert is_topological(n, edges, kahn(n, edges))


def test_isomorphism_matches_bijection_search():
    rng = random.Random(6)
    for trial in range(150):
        n = rng.randint(2, 7)
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        m = rng.randint(0, len(pairs))
        e1 = rng.sample(pairs, m)
        if trial % 2:
            p = rng.sample(range(n), n)
            e2 = [(p[u], p[v]) for u, v in e1]
        else:
            e2 = rng.sample(pairs, m)
        mp = find_isomorphism(n, e1, e2)
        assert (mp is not None) == brute_isomorphic(n, e1, e2)
        if mp is not None:
            assert {frozenset((mp[u], mp[v])) for u, v in e1} == {frozenset(e) for e in e2}
    assert find_isomorphism(3, [(0, 1), (1, 2)], [(0, 1), (0, 2)]) is not None
    assert find_isomorphism(4, [(0, 1), (1, 2), (2, 3)], [(0, 1), (0, 2), (0, 3)]) is None


@pytest.mark.parametrize("task", ["eulerian_cycle", "eulerian_path", "hamiltonian_cycle",
                                  "hamiltonian_path", "topological_sort"])
def test_simulate_verifiers_reject_truncated_answers(task):
    for seed in range(10):
        inst = generate_instance(task, 2, seed)
        nodes = inst.ground_truth.strip("[]").split(", ")
        broken = "[" + ", ".join(nodes[:-2]) + "]"  # loses at least one edge or vertex
        assert not verify_answer(inst, broken).accepted


def test_euler_ignores_isolated_vertices():
    edges = [(1, 2), (2, 3), (3, 1)]
    walk = solve_eulerian(4, edges, "cycle")
    assert walk is not None and _walk_ok(edges, walk, True)
    assert solve_eulerian(4, [(1, 2)], "path") in ([1, 2], [2, 1])
    assert solve_eulerian(5, [(0, 1), (2, 3)], "path") is None
