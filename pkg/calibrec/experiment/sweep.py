"""lambda1 selection by the nDCG / MC ratio."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import pandas as pd

from ..evaluate.report import ALL, evaluate
from ..rerank.problem import RerankSolution
from .context import ExperimentContext, run_engine

logger = logging.getLogger(__name__)

MC_FLOOR = 1e-6
SWEEP_COLUMNS = ["lambda1", "ndcg", "mc", "ratio"]


@dataclass
class SweepResult:
    engine: str
    chosen: float
    table: pd.DataFrame
    solutions: Dict[str, RerankSolution]  # at the chosen lambda1


def choose_lambda(table: pd.DataFrame) -> float:
    """Largest ratio; ties go to the smaller lambda1."""
    if table.empty:
        raise ValueError("empty sweep table")
    best = table["ratio"].max()
    return float(table.loc[table["ratio"] == best, "lambda1"].min())


def chosen_at_upper_edge(table: pd.DataFrame, chosen: float) -> bool:
    """True when a multi-point sweep settled on its largest lambda1."""
    return len(table) > 1 and chosen == float(table["lambda1"].max())


def lambda_sweep(
    ctx: ExperimentContext,
    grid: Sequence[float],
    engine: str = "ccl",
    divergence: Optional[str] = None,
) -> SweepResult:
    if not grid:
        raise ValueError("lambda grid must be non-empty")
    divergence = divergence or ctx.config.sweep_divergence
    metric = "js" if divergence == "js" else "hellinger"
    rows = []
    kept: Dict[float, Dict[str, RerankSolution]] = {}
    for lam in sorted(set(float(x) for x in grid)):
        sols = run_engine(ctx, engine, lam)
        report = evaluate(
            {engine: sols},
            ctx.split,
            ctx.groups,
            ctx.catalog,
            rank_weighting=ctx.rank_weighting,
            K=ctx.config.K,
            profiles=ctx.profiles,
        )
        ndcg = report.value(engine, ALL, "ndcg")
        mc = report.value(engine, ALL, metric)
        rows.append({"lambda1": lam, "ndcg": ndcg, "mc": mc, "ratio": ndcg / max(mc, MC_FLOOR)})
        kept[lam] = sols
        logger.info(f"[sweep:{engine}] lambda1={lam:g} ndcg={ndcg:.5f} {metric}={mc:.5f}")
    table = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    chosen = choose_lambda(table)
    logger.info(f"[sweep:{engine}] chose lambda1={chosen:g}")
    if chosen_at_upper_edge(table, chosen):
        logger.warning(
            f"[sweep:{engine}] lambda1={chosen:g} is the largest grid value; the ratio may keep rising beyond the grid"
        )
    return SweepResult(engine=engine, chosen=chosen, table=table, solutions=kept[chosen])
