"""Exact best-first branch-and-bound.

Nodes fix, position by position in canonical order, whether a candidate
joins the calibration subset. A node is complete once the subset holds K1
items; the rest of the list is then the K - K1 best-scored items outside the
subset, which is optimal for that subset.

Upper bound of an open node (depth d, subset C, m = K1 - |C| slots left):

    relevance:  sum(scores of C) + best K - |C| scores outside C
    divergence: each final q(c) lies in [lo_c, hi_c] with
                lo_c = sum over C / K1, hi_c = lo_c + m * max_{i >= d} spread_i(c) / K1,
                and since p and q both sum to one,
                TV >= 2 * max(sum (p - hi)+, sum (lo - p)+)

Categories the target needs but no remaining candidate carries fall out of
the first sum, so the bound is never looser than the availability argument.

The search stays best-first. Every DIVE_EVERY-th popped node (and each of the
first DIVE_EVERY) is also completed greedily from its open positions as a
candidate incumbent.
Nodes whose bound only ties the incumbent are kept open, so among equal
objectives the larger relevance, then the smaller id set, wins.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import time
from typing import List, Optional, Tuple

import numpy as np

from ..data.models import id_key
from ..errors import SolverBudgetExceeded
from .greedy import greedy_calibrated
from .problem import (
    OBJECTIVE_TOL,
    Evaluated,
    RerankProblem,
    RerankSolution,
    SolveStatus,
    SolverBudget,
    canonical_completion,
    evaluate,
    is_better,
    to_solution,
)

logger = logging.getLogger(__name__)

DIVE_EVERY = 16


class _Bounds:
    def __init__(self, problem: RerankProblem) -> None:
        a = problem.arrays
        self.problem = problem
        self.scores = a.scores
        self.spreads = a.spreads
        self.target = a.target
        n, m = a.spreads.shape
        # suffix_max[d] = per-category max spread over positions >= d
        self.suffix_max = np.zeros((n + 1, m))
        for d in range(n - 1, -1, -1):
            self.suffix_max[d] = np.maximum(self.suffix_max[d + 1], a.spreads[d])

    def relevance(self, calib: Tuple[int, ...]) -> float:
        p = self.problem
        chosen = set(calib)
        need = p.K - len(chosen)
        rest = [float(self.scores[i]) for i in range(p.n) if i not in chosen][:need]
        return float(sum(float(self.scores[i]) for i in calib) + sum(rest))

    def tv_lower(self, depth: int, calib: Tuple[int, ...]) -> float:
        p = self.problem
        K1 = p.K1
        lo = self.spreads[list(calib)].sum(axis=0) / K1 if calib else np.zeros_like(self.target)
        hi = lo + (K1 - len(calib)) * self.suffix_max[depth] / K1
        short = np.clip(self.target - hi, 0.0, None).sum()
        over = np.clip(lo - self.target, 0.0, None).sum()
        return float(2.0 * max(short, over))

    def upper(self, depth: int, calib: Tuple[int, ...]) -> Tuple[float, float]:
        """(objective bound, relevance bound) of a node."""
        rel = self.relevance(calib)
        ub = rel
        if self.problem.lambda1 > 0:
            ub -= self.problem.lambda1 * self.tv_lower(depth, calib)
        return ub, rel

    def dive(self, depth: int, calib: Tuple[int, ...]) -> Tuple[int, ...]:
        """Fill the open calibration slots greedily from positions >= depth."""
        p = self.problem
        chosen = list(calib)
        base = self.spreads[chosen].sum(axis=0) if chosen else np.zeros_like(self.target)
        free = np.arange(depth, p.n)
        while len(chosen) < p.K1:
            q = (base + self.spreads[free]) / (len(chosen) + 1)
            gain = self.scores[free] - p.lambda1 * np.abs(self.target - q).sum(axis=1)
            k = int(np.argmax(gain))  # first maximum: canonical order settles ties
            pick = int(free[k])
            chosen.append(pick)
            base = base + self.spreads[pick]
            free = np.delete(free, k)
        return tuple(sorted(chosen))


def _cannot_win(ub: float, rel_ub: float, incumbent: Evaluated) -> bool:
    """Node can at best tie the incumbent's objective and already loses on relevance."""
    return ub <= incumbent.objective + OBJECTIVE_TOL and rel_ub < incumbent.relevance - OBJECTIVE_TOL


def _relevance_only(problem: RerankProblem) -> Evaluated:
    # lambda1 == 0: the canonical top K; the calibration slots go to its smallest ids
    selected = tuple(range(problem.K))
    ids = problem.arrays.item_ids
    calib = sorted(selected, key=lambda i: id_key(ids[i]))[: problem.K1]
    return evaluate(problem, selected, calib)


def solve_branch_and_bound(
    problem: RerankProblem,
    budget: Optional[SolverBudget] = None,
    seed_with_greedy: bool = True,
    dive: bool = True,
) -> RerankSolution:
    budget = budget or SolverBudget()
    n, K1 = problem.n, problem.K1

    if K1 == 0:
        ev = evaluate(problem, canonical_completion(problem, ()), ())
        return to_solution(problem, ev, SolveStatus.OPTIMAL, nodes_explored=1)
    if problem.lambda1 == 0:
        return to_solution(problem, _relevance_only(problem), SolveStatus.OPTIMAL, nodes_explored=1)

    incumbent: Optional[Evaluated] = None
    if seed_with_greedy:
        g = greedy_calibrated(problem)
        pos = {item: i for i, item in enumerate(problem.arrays.item_ids)}
        g_calib = tuple(sorted(pos[i] for i in g.calibration_subset))
        g_sel = tuple(sorted(pos[i] for i in g.selected))
        for ev in (evaluate(problem, g_sel, g_calib), evaluate(problem, canonical_completion(problem, g_calib), g_calib)):
            if is_better(problem, ev, incumbent):
                incumbent = ev

    bounds = _Bounds(problem)
    seq = itertools.count()
    root_ub, root_rel = bounds.upper(0, ())
    heap: List[Tuple[float, int, int, Tuple[int, ...], float]] = [(-root_ub, next(seq), 0, (), root_rel)]
    nodes = 0
    started = time.perf_counter()

    def consider_leaf(calib: Tuple[int, ...]) -> None:
        nonlocal incumbent
        ev = evaluate(problem, canonical_completion(problem, calib), calib)
        if is_better(problem, ev, incumbent):
            incumbent = ev

    exhausted = False
    while heap:
        neg_ub, _, _, _, rel_ub = heap[0]
        if incumbent is not None:
            # nodes that only tie the incumbent stay open so the tie-break is settled at the leaves
            if -neg_ub < incumbent.objective - OBJECTIVE_TOL:
                break
            if _cannot_win(-neg_ub, rel_ub, incumbent):
                heapq.heappop(heap)
                continue
        if nodes >= budget.max_nodes or time.perf_counter() - started >= budget.max_seconds:
            exhausted = True
            break
        _, _, depth, calib, _ = heapq.heappop(heap)
        nodes += 1
        if dive and (nodes <= DIVE_EVERY or nodes % DIVE_EVERY == 0):
            consider_leaf(bounds.dive(depth, calib))
        # include position `depth`, then exclude it
        for child in (calib + (depth,), calib):
            if len(child) == K1:
                consider_leaf(child)
                continue
            if len(child) + (n - depth - 1) < K1:
                continue
            ub, rel = bounds.upper(depth + 1, child)
            if incumbent is None or not (ub < incumbent.objective - OBJECTIVE_TOL or _cannot_win(ub, rel, incumbent)):
                heapq.heappush(heap, (-ub, next(seq), depth + 1, child, rel))

    if incumbent is None:
        raise SolverBudgetExceeded(f"user {problem.user_id}: budget exhausted before any feasible solution")
    if exhausted:
        gap = max(0.0, -heap[0][0] - incumbent.objective)
        logger.debug(f"user {problem.user_id}: budget exhausted after {nodes} nodes, gap {gap:.3g}")
        return to_solution(problem, incumbent, SolveStatus.FEASIBLE_WITH_GAP, bound_gap=gap, nodes_explored=nodes)
    return to_solution(problem, incumbent, SolveStatus.OPTIMAL, nodes_explored=nodes)
