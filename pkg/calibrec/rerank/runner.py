"""Run an engine over many per-user problems and export the result.

Engines
- none:   baseline top-K (lambda1 forced to 0)
- greedy: greedy calibrated baseline
- cl:     exact solver, every user fully calibrated (K1 == K)
- ccl:    exact solver, K1 from the user's confidence weight
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

try:
    from tqdm import tqdm  # type: ignore
    _HAS_TQDM = True
except Exception:
    _HAS_TQDM = False

from ..data.models import id_key
from ..errors import ConfigError, DataError, RerankError
from .bnb import solve_branch_and_bound
from .greedy import greedy_calibrated
from .problem import RerankProblem, RerankSolution, SolveStatus, SolverBudget, top_k_passthrough

logger = logging.getLogger(__name__)

ENGINES = ("none", "greedy", "cl", "ccl")
SOLUTION_COLUMNS = ["userId", "itemId", "rank", "score", "inCalibrationSubset", "engine"]


def _solve(engine: str, problem: RerankProblem, budget: SolverBudget) -> RerankSolution:
    if engine == "none":
        return top_k_passthrough(problem)
    if engine == "greedy":
        return greedy_calibrated(problem)
    if engine == "cl" and problem.K1 != problem.K:
        raise ValueError(f"engine cl needs K1 == K, got K1={problem.K1}, K={problem.K}")
    return solve_branch_and_bound(problem, budget)


def _solve_one(args: Tuple[str, RerankProblem, SolverBudget]) -> Tuple[str, Optional[RerankSolution], Optional[Exception]]:
    # errors travel back as values; attribution happens in the parent process
    engine, problem, budget = args
    try:
        return problem.user_id, _solve(engine, problem, budget), None
    except Exception as e:
        return problem.user_id, None, e


def rerank_all(
    problems: Sequence[RerankProblem],
    engine: str,
    budget: Optional[SolverBudget] = None,
    workers: int = 1,
    progress: bool = False,
) -> Dict[str, RerankSolution]:
    if engine not in ENGINES:
        raise ConfigError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    budget = budget or SolverBudget()
    jobs = [(engine, p, budget) for p in problems]

    use_bar = progress and _HAS_TQDM
    bar = tqdm(total=len(jobs), desc=f"rerank[{engine}]", unit="user") if use_bar else None
    results: Dict[str, RerankSolution] = {}
    try:
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                stream: Iterable = pool.map(_solve_one, jobs, chunksize=max(1, len(jobs) // (4 * workers)))
                _collect(stream, results, bar)
        else:
            _collect(map(_solve_one, jobs), results, bar)
    finally:
        if bar is not None:
            bar.close()

    gaps = [s for s in results.values() if s.status is SolveStatus.FEASIBLE_WITH_GAP]
    if gaps:
        worst = max(gaps, key=lambda s: s.bound_gap)
        logger.warning(
            f"[{engine}] budget exhausted for {len(gaps)} users; largest bound gap {worst.bound_gap:.6g} (user {worst.user_id})"
        )
    return dict(sorted(results.items(), key=lambda kv: id_key(kv[0])))


def _collect(stream: Iterable, results: Dict[str, RerankSolution], bar) -> None:
    for user, out, err in stream:
        if err is not None:
            raise RerankError(user, err) from err
        results[user] = out
        if bar is not None:
            bar.update(1)


def solutions_frame(solutions: Mapping[str, RerankSolution], engine: str) -> pd.DataFrame:
    rows = []
    for user in sorted(solutions, key=id_key):
        s = solutions[user]
        for rank, (item, score) in enumerate(zip(s.selected, s.scores), start=1):
            rows.append((user, item, rank, repr(float(score)), int(item in s.calibration_subset), engine))
    return pd.DataFrame(rows, columns=SOLUTION_COLUMNS)


def export_solutions(solutions: Mapping[str, RerankSolution], engine: str, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    solutions_frame(solutions, engine).to_csv(p, index=False, lineterminator="\n")
    return p


def read_solutions(path: str | Path) -> Dict[str, List[str]]:
    """Ranked item lists per user from a solution export."""
    p = Path(path)
    if not p.exists():
        raise DataError("file not found", str(p))
    df = pd.read_csv(p, dtype=str, keep_default_na=False)
    missing = [c for c in SOLUTION_COLUMNS if c not in df.columns]
    if missing:
        raise DataError(f"missing columns {missing}", str(p), 1)
    rank = pd.to_numeric(df["rank"], errors="coerce")
    if rank.isna().any():
        pos = int(rank.isna().to_numpy().nonzero()[0][0])
        raise DataError(f"non-numeric rank {df['rank'].iloc[pos]!r}", str(p), pos + 2)
    df = df.assign(rank=rank.astype(int)).sort_values(["userId", "rank"], kind="mergesort")
    out: Dict[str, List[str]] = {}
    for user, group in df.groupby("userId", sort=False):
        out[str(user)] = group["itemId"].tolist()
    return dict(sorted(out.items(), key=lambda kv: id_key(kv[0])))

