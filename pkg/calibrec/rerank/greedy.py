"""Greedy calibrated baseline.

Builds the list one item at a time, maximizing the objective of the partial
list. The first K1 picks fill the calibration slots; their divergence is
measured against the partial subset. No optimality certificate.
"""
from __future__ import annotations

from typing import List, Optional, Tuple

from ..data.models import id_key
from .problem import OBJECTIVE_TOL, RerankProblem, RerankSolution, SolveStatus, evaluate, partial_divergence, to_solution


def _greedy_positions(problem: RerankProblem) -> Tuple[List[int], List[int]]:
    a = problem.arrays
    lam = problem.lambda1
    chosen: List[int] = []
    calib: List[int] = []
    for t in range(problem.K):
        in_calib = t < problem.K1
        best: Optional[Tuple[float, int]] = None
        for i in range(problem.n):
            if i in chosen:
                continue
            gain = float(a.scores[i])
            if in_calib and lam > 0:
                gain -= lam * partial_divergence(problem, calib + [i])
            if best is None or gain > best[0] + OBJECTIVE_TOL:
                best = (gain, i)
            elif gain >= best[0] - OBJECTIVE_TOL and id_key(a.item_ids[i]) < id_key(a.item_ids[best[1]]):
                best = (gain, i)
        assert best is not None
        chosen.append(best[1])
        if in_calib:
            calib.append(best[1])
    return chosen, calib


def greedy_calibrated(problem: RerankProblem) -> RerankSolution:
    chosen, calib = _greedy_positions(problem)
    return to_solution(problem, evaluate(problem, chosen, calib), SolveStatus.HEURISTIC)
