"""Constraint library for the grid-puzzle models.

Every class implements ``check`` (full assignment) and ``propagate`` (prune a
partial assignment).  Puzzle-specific rules are expressed with the generic
``Table`` constraint plus a few specialised propagators where enumeration
would be too slow.
"""
from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from .engine import Constraint, bits, values_of


def _single(d: int) -> bool:
    return d & (d - 1) == 0


class AllDifferent(Constraint):
    """Pairwise distinct values, optionally distinct under ``key``.

    With ``exact=True`` every class present in the union of domains must be
    used, which enables hidden-single deductions (Latin squares, Sudoku).
    ``universe`` is the mask of all values the scope may ever take; it is
    required when a key is given.
    """

    def __init__(self, scope: Sequence[int], key: Optional[Callable[[int], object]] = None,
                 exact: bool = False, universe: int = 0):
        self.scope = tuple(scope)
        self.key = key
        self.exact = exact
        self._cls: dict[int, int] = {}
        if key is not None:
            if not universe:
                raise ValueError("keyed AllDifferent needs a value universe")
            groups: dict[object, int] = {}
            for v in bits(universe):
                groups[key(v)] = groups.get(key(v), 0) | (1 << v)
            for v in bits(universe):
                self._cls[v] = groups[key(v)]

    def _class_mask(self, v: int) -> int:
        return self._cls[v] if self.key is not None else 1 << v

    def check(self, values):
        ks = [values[v] if self.key is None else self.key(values[v]) for v in self.scope]
        return len(set(ks)) == len(ks)

    def propagate(self, dom):
        if self.key is None:
            return self._propagate_plain(dom)
        scope = self.scope
        done = 0
        queue = [v for v in scope if _single(dom[v])]
        while queue:
            v = queue.pop()
            cm = self._class_mask(dom[v].bit_length() - 1)
            if done & cm:
                return False
            done |= cm
            for w in scope:
                if w != v and dom[w] & cm:
                    d = dom[w] & ~cm
                    if d == 0:
                        return False
                    dom[w] = d
                    if _single(d):
                        queue.append(w)
        if self.exact:
            return self._hidden_singles(dom)
        return True

    def _propagate_plain(self, dom):
        # bitmask rounds: strip every assigned value from the other variables
        scope = self.scope
        fixed = 0
        while True:
            new = 0
            for v in scope:
                d = dom[v]
                if d & (d - 1) == 0:
                    if fixed & d:
                        continue
                    if new & d:
                        return False
                    new |= d
            if not new:
                break
            fixed |= new
            for v in scope:
                d = dom[v]
                if d & (d - 1) and d & fixed:
                    d &= ~fixed
                    if not d:
                        return False
                    dom[v] = d
        if not self.exact:
            return True
        once = twice = 0
        for v in scope:
            d = dom[v]
            twice |= once & d
            once |= d
        if once.bit_count() < len(scope):
            return False
        if once.bit_count() > len(scope):
            return True
        lone = once & ~twice
        if not lone:
            return True
        changed = False
        for v in scope:
            d = dom[v]
            h = d & lone
            if h and h != d:
                if h & (h - 1):
                    return False
                dom[v] = h
                changed = True
        if changed:
            return self._propagate_plain(dom)
        return True

    def _hidden_singles(self, dom):
        union = 0
        for v in self.scope:
            union |= dom[v]
        classes = []
        seen = 0
        for x in bits(union):
            if not seen >> x & 1:
                cm = self._class_mask(x)
                classes.append(cm & union)
                seen |= cm
        if len(classes) < len(self.scope):
            return False
        if len(classes) > len(self.scope):
            return True
        for cm in classes:
            holder = -1
            for v in self.scope:
                if dom[v] & cm:
                    if holder >= 0:
                        holder = -2
                        break
                    holder = v
            if holder == -1:
                return False
            if holder >= 0 and dom[holder] & ~cm:
                dom[holder] &= cm
        return True


class LinearSum(Constraint):
    """lo <= sum(w_i * x_i) <= hi with nonnegative weights (bounds consistency)."""

    def __init__(self, scope: Sequence[int], lo: int, hi: int,
                 weights: Optional[Sequence[int]] = None):
        self.scope = tuple(scope)
        self.weights = tuple(weights) if weights is not None else (1,) * len(self.scope)
        if len(self.weights) != len(self.scope) or any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative and match the scope")
        self.lo = lo
        self.hi = hi

    def check(self, values):
        s = sum(w * values[v] for v, w in zip(self.scope, self.weights))
        return self.lo <= s <= self.hi

    def propagate(self, dom):
        scope, ws = self.scope, self.weights
        while True:
            mins = [(dom[v] & -dom[v]).bit_length() - 1 for v in scope]
            maxs = [dom[v].bit_length() - 1 for v in scope]
            smin = sum(w * m for w, m in zip(ws, mins))
            smax = sum(w * m for w, m in zip(ws, maxs))
            if smin > self.hi or smax < self.lo:
                return False
            changed = False
            for i, v in enumerate(scope):
                w = ws[i]
                if w == 0:
                    continue
                rest_min = smin - w * mins[i]
                rest_max = smax - w * maxs[i]
                d = dom[v]
                nd = d
                for x in bits(d):
                    if w * x + rest_min > self.hi or w * x + rest_max < self.lo:
                        nd &= ~(1 << x)
                if nd != d:
                    if nd == 0:
                        return False
                    dom[v] = nd
                    changed = True
            if not changed:
                return True


class Less(Constraint):
    """x[a] < x[b] (an inequality sign between two cells)."""

    def __init__(self, a: int, b: int):
        self.scope = (a, b)

    def check(self, values):
        return values[self.scope[0]] < values[self.scope[1]]

    def propagate(self, dom):
        a, b = self.scope
        hi_b = dom[b].bit_length() - 1
        da = dom[a] & ((1 << hi_b) - 1)
        if da == 0:
            return False
        lo_a = (da & -da).bit_length() - 1
        db = dom[b] & ~((1 << (lo_a + 1)) - 1)
        if db == 0:
            return False
        dom[a], dom[b] = da, db
        return True


class Table(Constraint):
    """Generalised arc consistency for an arbitrary predicate over a small scope.

    Supporting tuples are enumerated depth-first over the current domains;
    ``distinct`` skips tuples with repeated values and ``total`` prunes by
    partial sums.  Results are cached per domain signature.  When the domain
    product exceeds ``max_tuples`` the constraint only checks full scopes.
    """

    def __init__(self, scope: Sequence[int], pred: Callable[[tuple], bool],
                 distinct: bool = False, total: Optional[int] = None,
                 max_tuples: int = 50_000):
        self.scope = tuple(scope)
        self.pred = pred
        self.distinct = distinct
        self.total = total
        self.max_tuples = max_tuples
        self._cache: dict[tuple, Optional[tuple]] = {}

    def _ok(self, tup) -> bool:
        if self.distinct and len(set(tup)) != len(tup):
            return False
        if self.total is not None and sum(tup) != self.total:
            return False
        return self.pred(tup)

    def check(self, values):
        return self._ok(tuple(values[v] for v in self.scope))

    def _supports(self, doms: tuple) -> Optional[tuple]:
        n = len(doms)
        vals = [list(bits(d)) for d in doms]
        support = [0] * n
        cur = [0] * n
        total = self.total
        distinct = self.distinct
        pred = self.pred
        if total is not None:
            suf_min = [0] * (n + 1)
            suf_max = [0] * (n + 1)
            for i in range(n - 1, -1, -1):
                suf_min[i] = suf_min[i + 1] + vals[i][0]
                suf_max[i] = suf_max[i + 1] + vals[i][-1]

        def dfs(i, used, acc):
            if i == n:
                tup = tuple(cur)
                if pred(tup):
                    for j, x in enumerate(tup):
                        support[j] |= 1 << x
                return
            for x in vals[i]:
                if distinct and used >> x & 1:
                    continue
                if total is not None:
                    a = acc + x
                    if a + suf_min[i + 1] > total or a + suf_max[i + 1] < total:
                        continue
                else:
                    a = acc
                cur[i] = x
                dfs(i + 1, used | (1 << x), a)

        dfs(0, 0, 0)
        if not any(support):
            return None
        return tuple(support)

    def propagate(self, dom):
        doms = tuple(dom[v] for v in self.scope)
        size = 1
        for d in doms:
            size *= d.bit_count()
            if size > self.max_tuples:
                return True
        if doms in self._cache:
            sup = self._cache[doms]
        else:
            sup = self._supports(doms)
            if len(self._cache) > 200_000:
                self._cache.clear()
            self._cache[doms] = sup
        if sup is None:
            return False
        for v, s in zip(self.scope, sup):
            dom[v] &= s
        return True


class TupleSet(Constraint):
    """Extensional constraint: the scope must equal one of the listed tuples.

    Tuples live in an integer array so support filtering is vectorised; use
    it when the allowed tuples can be listed once and shared across models.
    """

    _shared: dict[tuple, Optional[tuple]] = {}

    def __init__(self, scope: Sequence[int], tuples, key=None):
        self.scope = tuple(scope)
        self.key = key
        self.tuples = np.asarray(tuples, dtype=np.int64).reshape(-1, len(self.scope))
        if self.tuples.size and self.tuples.max() > 62:
            raise ValueError("TupleSet values must be below 63")
        # with a key, supports are shared by every TupleSet built from the same list
        self._cache = TupleSet._shared if key is not None else {}

    def check(self, values):
        row = np.array([values[v] for v in self.scope], dtype=np.int64)
        return bool((self.tuples == row).all(axis=1).any())

    def propagate(self, dom):
        doms = tuple(dom[v] for v in self.scope)
        ck = (self.key, doms)
        sup = self._cache.get(ck, False)
        if sup is False:
            t = self.tuples
            keep = np.ones(len(t), dtype=bool)
            for j, d in enumerate(doms):
                keep &= ((np.int64(d) >> t[:, j]) & 1).astype(bool)
            if not keep.any():
                sup = None
            else:
                rows = t[keep]
                sup = tuple(int(np.bitwise_or.reduce(np.left_shift(1, rows[:, j])))
                            for j in range(len(doms)))
            if len(self._cache) > 100_000:
                self._cache.clear()
            self._cache[ck] = sup
        if sup is None:
            return False
        for v, s in zip(self.scope, sup):
            dom[v] &= s
        return True


class Adjacent(Constraint):
    """Two position variables must hold neighbouring cells."""

    def __init__(self, a: int, b: int, nbr: Sequence[int]):
        self.scope = (a, b)
        self.nbr = nbr

    def check(self, values):
        return bool(self.nbr[values[self.scope[0]]] >> values[self.scope[1]] & 1)

    def propagate(self, dom):
        a, b = self.scope
        nbr = self.nbr
        for x, y in ((a, b), (b, a)):
            dy = dom[y]
            keep = 0
            for p in bits(dom[x]):
                if nbr[p] & dy:
                    keep |= 1 << p
            if keep == 0:
                return False
            dom[x] = keep
        return True


class Connected(Constraint):
    """Cells whose value equals ``mark`` form one orthogonally connected group.

    ``cells`` lists variable ids; ``adj[i]`` lists positions (into ``cells``)
    adjacent to position i.
    """

    def __init__(self, cells: Sequence[int], adj: Sequence[Sequence[int]], mark: int = 1):
        self.scope = tuple(cells)
        self.adj = adj
        self.mark = mark

    def check(self, values):
        on = [i for i, v in enumerate(self.scope) if values[v] == self.mark]
        if not on:
            return True
        onset = set(on)
        seen = {on[0]}
        stack = [on[0]]
        while stack:
            i = stack.pop()
            for j in self.adj[i]:
                if j in onset and j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == len(on)

    def propagate(self, dom):
        bit = 1 << self.mark
        scope = self.scope
        sure = [i for i, v in enumerate(scope) if dom[v] == bit]
        if not sure:
            return True
        seen = {sure[0]}
        stack = [sure[0]]
        while stack:
            i = stack.pop()
            for j in self.adj[i]:
                if j not in seen and dom[scope[j]] & bit:
                    seen.add(j)
                    stack.append(j)
        if any(i not in seen for i in sure):
            return False
        for i, v in enumerate(scope):
            if i not in seen and dom[v] & bit:
                dom[v] &= ~bit
                if dom[v] == 0:
                    return False
        return True


class EdgeConnected(Constraint):
    """Edges with a nonzero value connect the ``required`` nodes plus every
    endpoint of a used edge into one component."""

    def __init__(self, edge_vars: Sequence[int], ends: Sequence[tuple[int, int]],
                 n_nodes: int, required: Sequence[int] = ()):
        self.scope = tuple(edge_vars)
        self.ends = tuple(ends)
        self.n = n_nodes
        self.required = tuple(required)

    def _component(self, start, usable):
        adj = [[] for _ in range(self.n)]
        for (a, b), ok in zip(self.ends, usable):
            if ok:
                adj[a].append(b)
                adj[b].append(a)
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    def _needed(self, used):
        need = set(self.required)
        for (a, b), u in zip(self.ends, used):
            if u:
                need.add(a)
                need.add(b)
        return need

    def check(self, values):
        used = [values[v] > 0 for v in self.scope]
        need = self._needed(used)
        if not need:
            return True
        comp = self._component(next(iter(sorted(need))), used)
        return need <= comp

    def propagate(self, dom):
        sure = [not dom[v] & 1 for v in self.scope]
        possible = [dom[v] != 1 for v in self.scope]
        need = self._needed(sure)
        if not need:
            return True
        comp = self._component(min(need), possible)
        return need <= comp


class Check(Constraint):
    """Check-only constraint: evaluated once every scope variable is fixed."""

    def __init__(self, scope: Sequence[int], fn: Callable[[tuple], bool]):
        self.scope = tuple(scope)
        self.fn = fn

    def check(self, values):
        return self.fn(tuple(values[v] for v in self.scope))

    def propagate(self, dom):
        if all(_single(dom[v]) for v in self.scope):
            return self.fn(tuple(dom[v].bit_length() - 1 for v in self.scope))
        return True


__all__ = [
    "AllDifferent", "LinearSum", "Table", "Adjacent", "Connected", "EdgeConnected",
    "Check", "values_of",
]
