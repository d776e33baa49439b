"""Tables behind the figures; plotting is left to the reader's tool of choice.

oracle_miscalibration.csv  group,js,hellinger,n_users
group_coverage.csv         engine,group,catalog_coverage
relative_improvement.csv   engine,group,metric,baseline,value,relative_improvement
group_diversity.csv        engine,group,diversity
"""
from __future__ import annotations

import math
from typing import Dict, Optional

import pandas as pd

from ..evaluate.report import REPORT_GROUPS, EvalReport

BASELINE = "none"
IMPROVED_ENGINES = ("cl", "ccl")
IMPROVEMENT_METRICS = ("ndcg", "js", "diversity", "catalog_coverage")
LOWER_IS_BETTER = frozenset({"js", "hellinger"})


def _relative(metric: str, base: float, value: float) -> float:
    if base == 0 or math.isnan(base) or math.isnan(value):
        return math.nan
    if metric in LOWER_IS_BETTER:
        return (base - value) / base
    return (value - base) / base


def _per_group(report: EvalReport, metric: str) -> pd.DataFrame:
    rows = [
        (e, g, report.values[(e, g, metric)])
        for e in report.engines
        for g in REPORT_GROUPS
        if (e, g, metric) in report.values
    ]
    return pd.DataFrame(rows, columns=["engine", "group", metric])


def improvement_frame(report: EvalReport) -> pd.DataFrame:
    cols = ["engine", "group", "metric", "baseline", "value", "relative_improvement"]
    rows = []
    if BASELINE in report.engines:
        for e in IMPROVED_ENGINES:
            if e not in report.engines:
                continue
            for g in REPORT_GROUPS:
                for m in IMPROVEMENT_METRICS:
                    if (e, g, m) not in report.values:
                        continue
                    base, value = report.values[(BASELINE, g, m)], report.values[(e, g, m)]
                    rows.append((e, g, m, base, value, _relative(m, base, value)))
    return pd.DataFrame(rows, columns=cols)


def emit_figures_data(report: EvalReport, oracle: Optional[pd.DataFrame] = None) -> Dict[str, pd.DataFrame]:
    """figure file name -> table."""
    out: Dict[str, pd.DataFrame] = {}
    if oracle is not None:
        out["oracle_miscalibration.csv"] = oracle
    out["group_coverage.csv"] = _per_group(report, "catalog_coverage")
    out["relative_improvement.csv"] = improvement_frame(report)
    out["group_diversity.csv"] = _per_group(report, "diversity")
    return out
