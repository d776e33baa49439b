"""Per-user re-ranking problem, solution record and the shared evaluator.

Select K of N candidates maximizing

    sum(scores of selected) - lambda1 * TV(target, q(calibration subset))

where the calibration subset holds K1 of the selected items and q is the
uniform-weight category distribution of that subset. The remaining K - K1
slots carry relevance only.

Candidates are kept in canonical order (score descending, id ascending) and
solvers work on positions in that order. Every solver scores a selection
through `relevance_of` / `divergence_of` so objectives agree bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from functools import cached_property
from typing import FrozenSet, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..calibration.distributions import CategoryDistribution, item_category_spread
from ..data.models import Item, id_key
from ..scoring.candidates import CandidateList

OBJECTIVE_TOL = 1e-12


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE_WITH_GAP = "feasible_with_gap"
    HEURISTIC = "heuristic"


@dataclass(frozen=True)
class Candidate:
    item_id: str
    score: float
    spread: Mapping[str, float]


@dataclass(frozen=True)
class SolverBudget:
    max_nodes: int = 5000
    max_seconds: float = 10.0

    def __post_init__(self) -> None:
        if self.max_nodes < 1 or not self.max_seconds > 0:
            raise ValueError(f"solver budget must be positive, got {self.max_nodes} nodes / {self.max_seconds}s")


@dataclass(frozen=True)
class ProblemArrays:
    item_ids: Tuple[str, ...]
    scores: np.ndarray  # (n,)
    spreads: np.ndarray  # (n, m) over `categories`
    target: np.ndarray  # (m,)
    categories: Tuple[str, ...]


@dataclass(frozen=True)
class RerankProblem:
    user_id: str
    candidates: Tuple[Candidate, ...]
    target: CategoryDistribution
    K: int
    K1: int
    lambda1: float
    short: bool = False

    def __post_init__(self) -> None:
        n = len(self.candidates)
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.K > n:
            raise ValueError(f"K={self.K} exceeds the {n} candidates of user {self.user_id}")
        if not 0 <= self.K1 <= self.K:
            raise ValueError(f"K1={self.K1} outside [0, {self.K}]")
        if self.lambda1 < 0:
            raise ValueError(f"lambda1 must be non-negative, got {self.lambda1}")
        ids = [c.item_id for c in self.candidates]
        if len(set(ids)) != n:
            raise ValueError(f"duplicate candidates for user {self.user_id}")
        ordered = tuple(sorted(self.candidates, key=lambda c: (-c.score, id_key(c.item_id))))
        object.__setattr__(self, "candidates", ordered)

    @property
    def n(self) -> int:
        return len(self.candidates)

    @cached_property
    def arrays(self) -> ProblemArrays:
        cats = set(self.target.probs)
        for c in self.candidates:
            cats.update(c.spread)
        categories = tuple(sorted(cats))
        col = {c: j for j, c in enumerate(categories)}
        spreads = np.zeros((self.n, len(categories)))
        for r, cand in enumerate(self.candidates):
            for c, v in cand.spread.items():
                spreads[r, col[c]] = v
        return ProblemArrays(
            item_ids=tuple(c.item_id for c in self.candidates),
            scores=np.array([c.score for c in self.candidates], dtype=float),
            spreads=spreads,
            target=np.array([self.target.get(c) for c in categories], dtype=float),
            categories=categories,
        )


@dataclass(frozen=True)
class RerankSolution:
    user_id: str
    selected: Tuple[str, ...]  # ranked: score descending, id ascending
    scores: Tuple[float, ...]
    calibration_subset: FrozenSet[str]
    objective: float
    relevance_part: float
    divergence_part: float
    status: SolveStatus
    lambda1: float = 0.0
    K1: int = 0
    bound_gap: float = 0.0
    nodes_explored: int = 0
    short: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if not self.calibration_subset <= set(self.selected):
            raise ValueError(f"calibration subset of user {self.user_id} is not part of the selection")
        if len(self.calibration_subset) != self.K1:
            raise ValueError(f"calibration subset has {len(self.calibration_subset)} items, expected {self.K1}")
        if self.bound_gap < 0:
            raise ValueError("bound_gap must be non-negative")

    @property
    def K(self) -> int:
        return len(self.selected)


def round_half_up(x: float) -> int:
    return int(Decimal(str(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def calibration_slots(weight: float, K: int) -> int:
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"confidence weight must be in [0, 1], got {weight}")
    return round_half_up(Decimal(str(weight)) * K)


def build_problem(
    user_id: str,
    candidates: CandidateList,
    profile_dist: CategoryDistribution,
    K: int,
    weight: float,
    lambda1_global: float,
    n_users: int,
    catalog: Mapping[str, Item],
    allow_short: bool = False,
) -> RerankProblem:
    """K1 = round-half-up(weight * K); per-user lambda1 = lambda1_global / n_users.

    With `allow_short`, a pool smaller than K is solved with K_u = |pool|.
    """
    if n_users < 1:
        raise ValueError(f"n_users must be >= 1, got {n_users}")
    if lambda1_global < 0:
        raise ValueError(f"lambda1 must be non-negative, got {lambda1_global}")
    k_u = K
    if K > len(candidates):
        if not allow_short:
            raise ValueError(f"K={K} exceeds the {len(candidates)} candidates of user {user_id}")
        k_u = len(candidates)
    cands = tuple(
        Candidate(item_id=i, score=float(s), spread=item_category_spread(catalog[i]).probs)
        for i, s in candidates.candidates
    )
    return RerankProblem(
        user_id=user_id,
        candidates=cands,
        target=profile_dist,
        K=k_u,
        K1=calibration_slots(weight, k_u),
        lambda1=lambda1_global / n_users,
        short=k_u < K,
    )


def relevance_of(problem: RerankProblem, selected: Sequence[int]) -> float:
    s = problem.arrays.scores
    return math.fsum(float(s[i]) for i in sorted(selected))


def divergence_of(problem: RerankProblem, calib: Sequence[int]) -> float:
    """TV between the target and the uniform mix of the calibration items."""
    if problem.K1 == 0:
        return 0.0
    a = problem.arrays
    q = a.spreads[sorted(calib)].sum(axis=0) / problem.K1
    return float(np.abs(a.target - q).sum())


def partial_divergence(problem: RerankProblem, calib: Sequence[int]) -> float:
    """Same as divergence_of but normalized by the current subset size."""
    if not calib:
        return 0.0
    a = problem.arrays
    q = a.spreads[sorted(calib)].sum(axis=0) / len(calib)
    return float(np.abs(a.target - q).sum())


def selection_key(problem: RerankProblem, positions: Sequence[int]) -> tuple:
    ids = problem.arrays.item_ids
    return tuple(sorted(id_key(ids[i]) for i in positions))


@dataclass(frozen=True)
class Evaluated:
    objective: float
    relevance: float
    divergence: float
    selected: Tuple[int, ...]
    calib: Tuple[int, ...]


def evaluate(problem: RerankProblem, selected: Sequence[int], calib: Sequence[int], divergence: Optional[float] = None) -> Evaluated:
    rel = relevance_of(problem, selected)
    div = divergence_of(problem, calib) if divergence is None else divergence
    return Evaluated(
        objective=rel - problem.lambda1 * div,
        relevance=rel,
        divergence=div,
        selected=tuple(sorted(selected)),
        calib=tuple(sorted(calib)),
    )


def is_better(problem: RerankProblem, a: Evaluated, b: Optional[Evaluated]) -> bool:
    """Objective first (within OBJECTIVE_TOL), then relevance, then smaller id sets."""
    if b is None:
        return True
    if a.objective > b.objective + OBJECTIVE_TOL:
        return True
    if a.objective < b.objective - OBJECTIVE_TOL:
        return False
    if a.relevance > b.relevance + OBJECTIVE_TOL:
        return True
    if a.relevance < b.relevance - OBJECTIVE_TOL:
        return False
    ka, kb = selection_key(problem, a.selected), selection_key(problem, b.selected)
    if ka != kb:
        return ka < kb
    return selection_key(problem, a.calib) < selection_key(problem, b.calib)


def canonical_completion(problem: RerankProblem, calib: Sequence[int]) -> Tuple[int, ...]:
    """calib plus the K - K1 best-scored positions outside it."""
    chosen = set(calib)
    need = problem.K - len(chosen)
    rest = [i for i in range(problem.n) if i not in chosen][:need]
    return tuple(sorted(chosen.union(rest)))


def to_solution(
    problem: RerankProblem,
    ev: Evaluated,
    status: SolveStatus,
    bound_gap: float = 0.0,
    nodes_explored: int = 0,
) -> RerankSolution:
    a = problem.arrays
    return RerankSolution(
        user_id=problem.user_id,
        selected=tuple(a.item_ids[i] for i in ev.selected),
        scores=tuple(float(a.scores[i]) for i in ev.selected),
        calibration_subset=frozenset(a.item_ids[i] for i in ev.calib),
        objective=ev.objective,
        relevance_part=ev.relevance,
        divergence_part=ev.divergence,
        status=status,
        lambda1=problem.lambda1,
        K1=problem.K1,
        bound_gap=max(0.0, bound_gap),
        nodes_explored=nodes_explored,
        short=problem.short,
    )


def top_k_passthrough(problem: RerankProblem) -> RerankSolution:
    """Baseline top-K; lambda1 is forced to 0, calibration slots are the top K1."""
    p = replace(problem, lambda1=0.0)
    sel = tuple(range(p.K))
    return to_solution(p, evaluate(p, sel, sel[: p.K1]), SolveStatus.OPTIMAL)
