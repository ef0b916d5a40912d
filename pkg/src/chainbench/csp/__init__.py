"""Finite-domain constraint solving for the grid puzzles."""
from __future__ import annotations

from typing import Callable, Hashable, Optional, Sequence

from ..rng import Stream
from .constraints import (AllDifferent, Adjacent, Check, Connected, EdgeConnected,
                          Less, LinearSum, Table, TupleSet)
from .engine import (Constraint, GridModel, SearchLimit, SearchStats, bits, count_solutions,
                     iter_solutions, mask_of, solve_csp, values_of)

__all__ = [
    "AllDifferent", "Adjacent", "Check", "Connected", "EdgeConnected", "Less", "LinearSum", "Table", "TupleSet",
    "Constraint", "GridModel", "SearchLimit", "SearchStats", "bits", "count_solutions",
    "iter_solutions", "mask_of", "solve_csp", "values_of", "first_solutions", "make_unique",
]


def first_solutions(model: GridModel, k: int = 2, node_limit: Optional[int] = None) -> list[list[int]]:
    out = []
    for sol in iter_solutions(model, node_limit=node_limit):
        out.append(sol)
        if len(out) >= k:
            break
    return out


def make_unique(build: Callable[[list], GridModel], pool: Sequence[Hashable],
                hidden: Sequence[int], holds: Callable[[Hashable, Sequence[int]], bool],
                stream: Stream, initial: Sequence[Hashable] = (),
                removable: bool = True, stop: Optional[Callable[[list], bool]] = None,
                node_limit: Optional[int] = 200_000) -> list:
    """Grow a clue set until ``hidden`` is the only solution, then greedily
    drop clues in random order while uniqueness survives.

    ``pool`` holds every clue consistent with ``hidden``.  Each round adds a
    random clue that the competing solution violates.  The removal pass ends
    early once ``stop(clues)`` is true.  Raises ``SearchLimit`` when a count
    blows the node budget (callers treat it as a rejected attempt).
    """
    hidden = list(hidden)
    clues = list(initial)
    have = set(clues)
    while True:
        sols = first_solutions(build(clues), 2, node_limit)
        if not sols:
            raise ValueError("clue set excludes the hidden solution")
        if len(sols) == 1:
            if sols[0] != hidden:
                raise ValueError("unique solution differs from the hidden one")
            break
        other = sols[0] if sols[0] != hidden else sols[1]
        cands = [c for c in pool if c not in have and not holds(c, other)]
        if not cands:
            raise ValueError("clue pool cannot separate two solutions")
        c = stream.choice(cands)
        clues.append(c)
        have.add(c)
    if not removable:
        return clues
    for c in stream.shuffled(clues):
        if stop is not None and stop(clues):
            break
        trial = [x for x in clues if x != c]
        if count_solutions(build(trial), 2, node_limit=node_limit) == 1:
            clues = trial
    return clues
