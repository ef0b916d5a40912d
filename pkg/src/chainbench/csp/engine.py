"""Finite-domain backtracking search with constraint propagation.

Domains are integer bitmasks: value ``v`` is possible for a variable iff bit
``v`` of its mask is set.  Variable order is most-constrained-first with the
lowest index breaking ties; values are tried in ascending order unless a
random stream is supplied (used by generators to draw random solutions).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from ..rng import Stream


class SearchLimit(RuntimeError):
    pass


class Constraint:
    """Base class.  ``propagate`` narrows ``dom`` in place and returns False
    on a wipe-out; ``check`` tests a complete assignment."""

    scope: tuple[int, ...] = ()

    def propagate(self, dom: list[int]) -> bool:
        if all(dom[v] & (dom[v] - 1) == 0 for v in self.scope):
            return self.check(values_of(dom))
        return True

    def check(self, values: Sequence[int]) -> bool:
        raise NotImplementedError


def values_of(dom: Sequence[int]) -> list[int]:
    return [d.bit_length() - 1 for d in dom]


def mask_of(values) -> int:
    m = 0
    for v in values:
        m |= 1 << v
    return m


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass
class GridModel:
    width: int
    height: int
    domains: list[int]
    constraints: list[Constraint] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.domains)
        for c in self.constraints:
            if any(not 0 <= v < n for v in c.scope):
                raise ValueError(f"{type(c).__name__} references a variable out of range")

    def add(self, c: Constraint) -> Constraint:
        if any(not 0 <= v < len(self.domains) for v in c.scope):
            raise ValueError(f"{type(c).__name__} references a variable out of range")
        self.constraints.append(c)
        return c

    def fix(self, var: int, value: int) -> None:
        self.domains[var] &= 1 << value

    def is_satisfied(self, values: Sequence[int]) -> bool:
        if any(not (d >> v) & 1 for d, v in zip(self.domains, values)):
            return False
        return all(c.check(values) for c in self.constraints)


@dataclass
class SearchStats:
    nodes: int = 0
    backtracks: int = 0
    propagations: int = 0


class _Search:
    def __init__(self, model: GridModel, rng: Optional[Stream], stats: SearchStats,
                 node_limit: Optional[int]):
        self.model = model
        self.cons = model.constraints
        self.rng = rng
        self.stats = stats
        self.node_limit = node_limit
        self.watch: list[list[int]] = [[] for _ in model.domains]
        for ci, c in enumerate(self.cons):
            for v in c.scope:
                self.watch[v].append(ci)

    def propagate(self, dom: list[int], queue: Sequence[int]) -> bool:
        cons = self.cons
        watch = self.watch
        in_q = [False] * len(cons)
        dq = deque()
        for ci in queue:
            if not in_q[ci]:
                in_q[ci] = True
                dq.append(ci)
        stats = self.stats
        while dq:
            ci = dq.popleft()
            in_q[ci] = False
            c = cons[ci]
            scope = c.scope
            before = [dom[v] for v in scope]
            stats.propagations += 1
            if not c.propagate(dom):
                return False
            for v, b in zip(scope, before):
                d = dom[v]
                if d != b:
                    if d == 0:
                        return False
                    for cj in watch[v]:
                        if not in_q[cj]:
                            in_q[cj] = True
                            dq.append(cj)
        return True

    def run(self) -> Iterator[list[int]]:
        dom = list(self.model.domains)
        if any(d == 0 for d in dom):
            return
        if not self.propagate(dom, range(len(self.cons))):
            return
        yield from self._dfs(dom)

    def _dfs(self, dom: list[int]) -> Iterator[list[int]]:
        stats = self.stats
        stats.nodes += 1
        if self.node_limit is not None and stats.nodes > self.node_limit:
            raise SearchLimit(f"node limit {self.node_limit} exceeded")
        best = -1
        best_size = 1 << 30
        for i, d in enumerate(dom):
            if d & (d - 1):
                s = d.bit_count()
                if s < best_size:
                    best_size = s
                    best = i
                    if s == 2:
                        break
        if best < 0:
            vals = values_of(dom)
            if all(c.check(vals) for c in self.cons):
                yield vals
            else:
                stats.backtracks += 1
            return
        choices = list(bits(dom[best]))
        if self.rng is not None:
            self.rng.shuffle(choices)
        for v in choices:
            nd = dom.copy()
            nd[best] = 1 << v
            if self.propagate(nd, self.watch[best]):
                yield from self._dfs(nd)
            else:
                stats.backtracks += 1


def iter_solutions(model: GridModel, rng: Optional[Stream] = None,
                   stats: Optional[SearchStats] = None,
                   node_limit: Optional[int] = None) -> Iterator[list[int]]:
    return _Search(model, rng, stats or SearchStats(), node_limit).run()


def solve_csp(model: GridModel, rng: Optional[Stream] = None,
              stats: Optional[SearchStats] = None,
              node_limit: Optional[int] = None) -> Optional[list[int]]:
    """First solution in search order, or None when unsatisfiable."""
    for sol in iter_solutions(model, rng, stats, node_limit):
        return sol
    return None


def count_solutions(model: GridModel, limit: int,
                    stats: Optional[SearchStats] = None,
                    node_limit: Optional[int] = None) -> int:
    """Number of solutions, saturating at ``limit``."""
    if limit < 1:
        raise ValueError("limit must be positive")
    n = 0
    for _ in iter_solutions(model, None, stats, node_limit):
        n += 1
        if n >= limit:
            break
    return n
