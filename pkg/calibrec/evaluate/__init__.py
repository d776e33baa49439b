from .metrics import catalog_coverage, intra_list_diversity, ndcg_at_k, precision_at_k, recall_at_k
from .report import ALL, METRICS, REPORT_GROUPS, EvalReport, evaluate
from .significance import TTestResult, paired_t_test

__all__ = [
    "ALL",
    "EvalReport",
    "METRICS",
    "REPORT_GROUPS",
    "TTestResult",
    "catalog_coverage",
    "evaluate",
    "intra_list_diversity",
    "ndcg_at_k",
    "paired_t_test",
    "precision_at_k",
    "recall_at_k",
]
