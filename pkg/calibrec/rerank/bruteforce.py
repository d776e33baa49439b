"""Exhaustive reference solver. Only for small instances."""
from __future__ import annotations

import logging
from itertools import combinations
from math import comb
from typing import Optional

from ..errors import InstanceTooLarge
from .problem import Evaluated, RerankProblem, RerankSolution, SolveStatus, divergence_of, evaluate, is_better, to_solution

logger = logging.getLogger(__name__)

MAX_ENUMERATION = 10_000_000


def enumeration_size(problem: RerankProblem) -> int:
    return comb(problem.n, problem.K) * comb(problem.K, problem.K1)


def solve_exact_bruteforce(problem: RerankProblem) -> RerankSolution:
    size = enumeration_size(problem)
    if size > MAX_ENUMERATION:
        raise InstanceTooLarge(
            f"user {problem.user_id}: {size} (selection, calibration) pairs exceed {MAX_ENUMERATION}; "
            "use the branch-and-bound solver"
        )
    n, K, K1 = problem.n, problem.K, problem.K1
    best: Optional[Evaluated] = None
    for calib in combinations(range(n), K1):
        div = divergence_of(problem, calib)
        taken = set(calib)
        rest = [i for i in range(n) if i not in taken]
        for others in combinations(rest, K - K1):
            ev = evaluate(problem, calib + others, calib, divergence=div)
            if is_better(problem, ev, best):
                best = ev
    assert best is not None
    return to_solution(problem, best, SolveStatus.OPTIMAL, nodes_explored=size)
