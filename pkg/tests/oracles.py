"""Independent brute-force oracles used by the test-suite.

Nothing here calls into the solvers under test.  The CSP oracle is plain
chronological backtracking over a fixed variable order, without any domain
propagation: a partial assignment is abandoned only when a constraint whose
scope is complete fails its own full-assignment ``check``, or when a simple
partial test written here (repeated value, sum out of reach, no matching
tuple) already rules it out.
"""
from __future__ import annotations

import itertools
from collections import deque

import numpy as np

from chainbench.csp import bits
from chainbench.csp.constraints import (Adjacent, AllDifferent, Less, LinearSum, Table,
                                        TupleSet)


def _partial_ok(c, val, assigned) -> bool:
    done = [v for v in c.scope if assigned[v]]
    if isinstance(c, AllDifferent):
        keys = [c.key(val[v]) if c.key else val[v] for v in done]
        return len(keys) == len(set(keys))
    if isinstance(c, LinearSum):
        lo = hi = 0
        for v, w in zip(c.scope, c.weights):
            if assigned[v]:
                lo += w * val[v]
                hi += w * val[v]
            else:
                opts = [w * x for x in c._dom_values[v]]
                lo += min(opts)
                hi += max(opts)
        return hi >= c.lo and lo <= c.hi
    if isinstance(c, TupleSet):
        t = c.tuples
        mask = np.ones(len(t), dtype=bool)
        for k, v in enumerate(c.scope):
            if assigned[v]:
                mask &= t[:, k] == val[v]
        return bool(mask.any())
    return True


class BruteCSP:
    def __init__(self, model):
        self.m = model
        self.n = len(model.domains)
        self.doms = [list(bits(d)) for d in model.domains]
        for c in model.constraints:
            if isinstance(c, LinearSum):
                c._dom_values = {v: self.doms[v] for v in c.scope}
        # static order: fewest values first, then index
        self.order = sorted(range(self.n), key=lambda v: (len(self.doms[v]), v))
        pos = {v: i for i, v in enumerate(self.order)}
        self.watch = [[] for _ in range(self.n)]   # constraints to test after assigning var
        for c in model.constraints:
            last = max(pos[v] for v in c.scope) if c.scope else 0
            for v in c.scope:
                self.watch[v].append((c, pos[v] == last))

    def solutions(self, limit: int):
        val = [0] * self.n
        assigned = [False] * self.n
        out = []

        def rec(i):
            if len(out) >= limit:
                return
            if i == self.n:
                out.append(list(val))
                return
            v = self.order[i]
            for x in self.doms[v]:
                val[v] = x
                assigned[v] = True
                ok = True
                for c, complete in self.watch[v]:
                    if complete:
                        if not c.check(val):
                            ok = False
                            break
                    elif not _partial_ok(c, val, assigned):
                        ok = False
                        break
                if ok:
                    rec(i + 1)
                assigned[v] = False
                if len(out) >= limit:
                    return

        rec(0)
        return out


def brute_solutions(model, limit: int = 3):
    return BruteCSP(model).solutions(limit)


# -- graph oracles --------------------------------------------------------------------------


def brute_euler(n, edges, closed: bool) -> bool:
    """Existence of an Eulerian trail/circuit by exhaustive search over edge orderings.

    Orderings are built edge by edge; a prefix is dropped as soon as its next
    edge does not touch the current end (all other orderings are tried).
    """
    m = len(edges)
    if m == 0:
        return False
    used = [False] * m

    def extend(cur, start, k):
        if k == m:
            return not closed or cur == start
        for i, (u, v) in enumerate(edges):
            if not used[i] and cur in (u, v):
                used[i] = True
                if extend(v if cur == u else u, start, k + 1):
                    return True
                used[i] = False
        return False

    return any(extend(s, s, 0) for s in range(n))


def brute_hamilton(n, edges, closed: bool) -> bool:
    adj = {(min(u, v), max(u, v)) for u, v in edges}
    for perm in itertools.permutations(range(n)):
        if closed and perm[0] != 0:
            break
        pairs = list(zip(perm, perm[1:])) + ([(perm[-1], perm[0])] if closed and n > 2 else [])
        if all((min(a, b), max(a, b)) in adj for a, b in pairs):
            return True
    return False


def brute_min_cut(n, edges, s, t) -> int:
    best = None
    others = [v for v in range(n) if v not in (s, t)]
    for mask in range(1 << len(others)):
        side = {s} | {others[i] for i in range(len(others)) if mask >> i & 1}
        cap = sum(c for u, v, c in edges if u in side and v not in side)
        best = cap if best is None else min(best, cap)
    return best


def brute_shortest(n, edges, s, t):
    """Minimum over all simple s-t paths (undirected weighted edges)."""
    adj = {v: [] for v in range(n)}
    for u, v, w in edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    best = None

    def dfs(u, seen, d):
        nonlocal best
        if u == t:
            best = d if best is None else min(best, d)
            return
        for v, w in adj[u]:
            if v not in seen:
                seen.add(v)
                dfs(v, seen, d + w)
                seen.remove(v)

    dfs(s, {s}, 0)
    return best


def brute_isomorphic(n, e1, e2) -> bool:
    a = {frozenset(e) for e in e1}
    b = {frozenset(e) for e in e2}
    if len(a) != len(b):
        return False
    for p in itertools.permutations(range(n)):
        if {frozenset((p[u], p[v])) for u, v in map(tuple, a)} == b:
            return True
    return False


def is_topological(n, edges, order) -> bool:
    pos = {v: i for i, v in enumerate(order)}
    return sorted(order) == list(range(n)) and all(pos[u] < pos[v] for u, v in edges)


# -- array oracles --------------------------------------------------------------------------


def brute_trap(h):
    return sum(max(0, min(max(h[:i + 1]), max(h[i:])) - h[i]) for i in range(len(h)))


def brute_rectangle(h):
    return max((min(h[i:j + 1]) * (j - i + 1) for i in range(len(h)) for j in range(i, len(h))), default=0)


def brute_stock(p):
    """Unlimited transactions, at most one share held: max over all buy/sell subsets by DP-free search."""
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def go(i, holding):
        if i == len(p):
            return 0 if not holding else float("-inf")
        best = go(i + 1, holding)
        if holding:
            best = max(best, p[i] + go(i + 1, False))
        else:
            best = max(best, -p[i] + go(i + 1, True))
        return best

    return go(0, False)


def brute_container(h):
    return max((min(h[i], h[j]) * (j - i) for i in range(len(h)) for j in range(i + 1, len(h))), default=0)


def brute_hindex(c):
    return max(h for h in range(len(c) + 1) if sum(x >= h for x in c) >= h)


def brute_lis(a):
    best = 0
    for mask in range(1 << len(a)):
        sub = [a[i] for i in range(len(a)) if mask >> i & 1]
        if all(x < y for x, y in zip(sub, sub[1:])):
            best = max(best, len(sub))
    return best


def brute_hills_valleys(a):
    """Hills and valleys counted over maximal plateaus with strictly different neighbours on both sides."""
    runs = [k for k, _ in itertools.groupby(a)]
    return sum(1 for i in range(1, len(runs) - 1)
               if (runs[i] > runs[i - 1] and runs[i] > runs[i + 1])
               or (runs[i] < runs[i - 1] and runs[i] < runs[i + 1]))


# -- search oracles -------------------------------------------------------------------------


def bfs_maze_distance(s) -> int:
    """Independent BFS over the maze wall matrices."""
    rows, cols = s["rows"], s["cols"]
    right, down = s["right"], s["down"]

    def moves(r, c):
        if c + 1 < cols and not right[r][c]:
            yield r, c + 1
        if c > 0 and not right[r][c - 1]:
            yield r, c - 1
        if r + 1 < rows and not down[r][c]:
            yield r + 1, c
        if r > 0 and not down[r - 1][c]:
            yield r - 1, c

    start, end = tuple(s["start"]), tuple(s["end"])
    dist = {start: 0}
    q = deque([start])
    while q:
        u = q.popleft()
        if u == end:
            return dist[u]
        for v in moves(*u):
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return -1


def bfs_sliding_distance(board, limit: int = 2_000_000) -> int:
    """Plain BFS over 4x4 boards (only for shallow scrambles)."""
    goal = tuple(list(range(1, 16)) + [0])
    start = tuple(board)
    if start == goal:
        return 0
    dist = {start: 0}
    q = deque([start])
    while q:
        b = q.popleft()
        z = b.index(0)
        r, c = divmod(z, 4)
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < 4 and 0 <= cc < 4:
                nb = list(b)
                nb[z], nb[rr * 4 + cc] = nb[rr * 4 + cc], 0
                nb = tuple(nb)
                if nb not in dist:
                    dist[nb] = dist[b] + 1
                    if nb == goal:
                        return dist[nb]
                    if len(dist) > limit:
                        raise RuntimeError("BFS budget exceeded")
                    q.append(nb)
    return -1


def inversion_parity_solvable(board) -> bool:
    """Textbook 4x4 criterion: inversions + blank row counted from the bottom is odd."""
    tiles = [v for v in board if v]
    inv = sum(1 for i in range(len(tiles)) for j in range(i + 1, len(tiles)) if tiles[i] > tiles[j])
    blank_row_from_bottom = 4 - board.index(0) // 4
    return (inv + blank_row_from_bottom) % 2 == 1


def brute_mines(board):
    """Cells that are mines in every consistent assignment (2^covered enumeration)."""
    rows, cols = len(board), len(board[0])
    covered = [(r, c) for r in range(rows) for c in range(cols) if board[r][c] < 0]
    always = None
    for mask in range(1 << len(covered)):
        mines = {covered[i] for i in range(len(covered)) if mask >> i & 1}
        ok = True
        for r in range(rows):
            for c in range(cols):
                if board[r][c] >= 0:
                    k = sum((r + dr, c + dc) in mines for dr in (-1, 0, 1) for dc in (-1, 0, 1))
                    if k != board[r][c]:
                        ok = False
                        break
            if not ok:
                break
        if ok:
            always = set(mines) if always is None else always & mines
    return always
