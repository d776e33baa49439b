"""Per-engine, per-group evaluation report.

Groups are `all` plus the activity groups. Accuracy, divergence and
diversity values are user averages within a group; catalog coverage is
computed on the union of the group's lists.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import pandas as pd
from tabulate import tabulate

from ..calibration.confidence import GROUPS, UserGroupAssignment
from ..calibration.distributions import RankWeighting, hellinger_distance, js_divergence, list_distribution, profile_distribution
from ..data.models import Item, SplitDataset, UserProfile, id_key
from ..data.profiles import build_profiles
from .metrics import catalog_coverage, intra_list_diversity, ndcg_at_k, precision_at_k, recall_at_k
from .significance import paired_t_test

logger = logging.getLogger(__name__)

ALL = "all"
REPORT_GROUPS = (ALL,) + GROUPS
METRICS = ("precision", "recall", "ndcg", "catalog_coverage", "diversity", "js", "hellinger")
USER_METRICS = ("precision", "recall", "ndcg", "diversity", "js", "hellinger")
SIGNIFICANCE_METRICS = ("precision", "recall", "ndcg")
DEFAULT_COMPARISONS = (("ccl", "none"), ("ccl", "cl"))
REPORT_COLUMNS = ["engine", "group", "metric", "value"]


@dataclass
class EvalReport:
    K: int
    engines: Tuple[str, ...]
    values: Dict[Tuple[str, str, str], float]
    n_users: Dict[str, int]
    significance: List[dict] = field(default_factory=list)
    lambdas: Dict[str, float] = field(default_factory=dict)
    per_user: Optional[pd.DataFrame] = field(default=None, repr=False)

    def value(self, engine: str, group: str, metric: str) -> float:
        return self.values[(engine, group, metric)]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            (e, g, m, self.values[(e, g, m)])
            for e in self.engines
            for g in REPORT_GROUPS
            for m in METRICS
            if (e, g, m) in self.values
        ]
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    def to_json(self) -> dict:
        metrics: Dict[str, Dict[str, Dict[str, float]]] = {}
        for (e, g, m), v in self.values.items():
            metrics.setdefault(e, {}).setdefault(g, {})[m] = v
        return {
            "version": 1,
            "K": self.K,
            "engines": list(self.engines),
            "n_users": dict(self.n_users),
            "lambda1": dict(self.lambdas),
            "metrics": metrics,
            "significance": list(self.significance),
        }

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")

    def summary_table(self, group: str = ALL) -> str:
        rows = []
        for e in self.engines:
            row = [e] + [self.values.get((e, group, m), math.nan) for m in METRICS]
            rows.append(row)
        return tabulate(rows, headers=["engine", *METRICS], floatfmt=".4f")


def _ranked(value) -> Tuple[str, ...]:
    return tuple(getattr(value, "selected", value))


def evaluate(
    solutions: Mapping[str, Mapping[str, object]],
    split: SplitDataset,
    groups: UserGroupAssignment,
    catalog: Mapping[str, Item],
    rank_weighting: Optional[RankWeighting] = None,
    K: int = 20,
    profiles: Optional[Mapping[str, UserProfile]] = None,
    alpha: float = 0.05,
    comparisons: Sequence[Tuple[str, str]] = DEFAULT_COMPARISONS,
    lambdas: Optional[Mapping[str, float]] = None,
) -> EvalReport:
    """`solutions` maps engine -> user -> ranked list (or RerankSolution)."""
    if not solutions:
        raise ValueError("nothing to evaluate")
    rank_weighting = rank_weighting or RankWeighting()
    profiles = profiles if profiles is not None else build_profiles(split)
    engines = tuple(solutions)
    user_sets = {e: frozenset(solutions[e]) for e in engines}
    reference = user_sets[engines[0]]
    for e in engines[1:]:
        if user_sets[e] != reference:
            raise ValueError(f"engine {e} was evaluated on a different user set than {engines[0]}")
    users = sorted(reference, key=id_key)
    test = {u: {x.item_id for x in xs} for u, xs in split.test_by_user().items()}

    rows = []
    for e in engines:
        for u in users:
            ranked = _ranked(solutions[e][u])
            relevant = test.get(u, set())
            if not relevant:
                raise ValueError(f"user {u} has no test items")
            p = profile_distribution(profiles[u], catalog)
            q = list_distribution(ranked, catalog, rank_weighting)
            rows.append({
                "engine": e,
                "userId": u,
                "group": groups.groups.get(u, ""),
                "precision": precision_at_k(ranked, relevant, K),
                "recall": recall_at_k(ranked, relevant, K),
                "ndcg": ndcg_at_k(ranked, relevant, K),
                "diversity": intra_list_diversity(ranked, catalog) if len(ranked) >= 2 else math.nan,
                "js": js_divergence(p, q),
                "hellinger": hellinger_distance(p, q),
            })
    per_user = pd.DataFrame(rows, columns=["engine", "userId", "group", *USER_METRICS])

    values: Dict[Tuple[str, str, str], float] = {}
    n_users: Dict[str, int] = {}
    for g in REPORT_GROUPS:
        members = users if g == ALL else [u for u in users if groups.groups.get(u) == g]
        n_users[g] = len(members)
        if not members:
            continue
        keep = set(members)
        for e in engines:
            frame = per_user[(per_user["engine"] == e) & per_user["userId"].isin(keep)]
            for m in USER_METRICS:
                col = frame[m].dropna()
                values[(e, g, m)] = math.fsum(col.tolist()) / len(col) if len(col) else math.nan
            lists = {u: _ranked(solutions[e][u]) for u in members}
            values[(e, g, "catalog_coverage")] = catalog_coverage(lists, len(catalog))

    significance = []
    for target, ref in comparisons:
        if target not in engines or ref not in engines or len(users) < 2:
            continue
        a = per_user[per_user["engine"] == target].set_index("userId").loc[users]
        b = per_user[per_user["engine"] == ref].set_index("userId").loc[users]
        for m in SIGNIFICANCE_METRICS:
            res = paired_t_test(a[m].to_numpy(), b[m].to_numpy(), alpha)
            significance.append({
                "engine": target,
                "reference": ref,
                "metric": m,
                "t": res.t,
                "p": res.p,
                "significant": bool(res.significant),
            })

    logger.info(f"Evaluated {len(engines)} engines on {len(users)} users")
    return EvalReport(
        K=K,
        engines=engines,
        values=values,
        n_users=n_users,
        significance=significance,
        lambdas=dict(lambdas or {}),
        per_user=per_user,
    )
