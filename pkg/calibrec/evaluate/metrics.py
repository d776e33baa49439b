"""Top-K accuracy and beyond-accuracy metrics. Relevance is binary: an item is
relevant iff it is in the user's test set."""
from __future__ import annotations

import math
from itertools import combinations
from typing import AbstractSet, Mapping, Sequence

import numpy as np

from ..data.models import Item


def _hits(recommended: Sequence[str], relevant: AbstractSet[str], k: int) -> int:
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    return sum(1 for i in recommended[:k] if i in relevant)


def precision_at_k(recommended: Sequence[str], relevant: AbstractSet[str], k: int) -> float:
    if not recommended:
        raise ValueError("empty recommendation list")
    return _hits(recommended, relevant, k) / k


def recall_at_k(recommended: Sequence[str], relevant: AbstractSet[str], k: int) -> float:
    if not relevant:
        raise ValueError("recall needs a non-empty relevant set")
    return _hits(recommended, relevant, k) / len(relevant)


def ndcg_at_k(recommended: Sequence[str], relevant: AbstractSet[str], k: int) -> float:
    if not relevant:
        raise ValueError("nDCG needs a non-empty relevant set")
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    discounts = 1.0 / np.log2(np.arange(2, k + 2))
    gains = np.array([1.0 if i in relevant else 0.0 for i in recommended[:k]])
    dcg = float(np.dot(gains, discounts[: gains.size]))
    idcg = float(discounts[: min(k, len(relevant))].sum())
    return dcg / idcg


def catalog_coverage(lists: Mapping[str, Sequence[str]], catalog_size: int) -> float:
    """Percentage of the catalog recommended to at least one of the given users."""
    if catalog_size < 1:
        raise ValueError(f"catalog_size must be >= 1, got {catalog_size}")
    seen = set()
    for items in lists.values():
        seen.update(items)
    return 100.0 * len(seen) / catalog_size


def _jaccard(a: AbstractSet[str], b: AbstractSet[str]) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 1.0


def intra_list_diversity(items: Sequence[str], catalog: Mapping[str, Item]) -> float:
    """Mean pairwise 1 - Jaccard of genre sets."""
    if len(items) < 2:
        raise ValueError("diversity needs at least two items")
    cats = [catalog[i].categories for i in items]
    dissim = [1.0 - _jaccard(a, b) for a, b in combinations(cats, 2)]
    return math.fsum(dissim) / len(dissim)
