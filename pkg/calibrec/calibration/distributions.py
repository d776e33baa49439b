"""Category distributions p(c|u), q(c|u) and the divergences between them.

Multi-category items spread unit mass uniformly over their categories, so
both distributions are weighted averages of per-item spreads and always sum
to one. Divergences run over the union of supports; a category missing from
one side has probability 0 there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np
from scipy.special import rel_entr

from ..data.models import Item, UserProfile
from ..errors import ConfigError

SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CategoryDistribution:
    probs: Mapping[str, float]

    def __post_init__(self) -> None:
        if not self.probs:
            raise ValueError("empty category distribution")
        for c, v in self.probs.items():
            if v < 0:
                raise ValueError(f"negative probability {v} for category {c!r}")
        total = math.fsum(self.probs.values())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "probs", dict(sorted(self.probs.items())))

    @classmethod
    def from_weights(cls, weights: Mapping[str, float]) -> "CategoryDistribution":
        total = math.fsum(weights.values())
        if not total > 0:
            raise ValueError("weights must have positive mass")
        return cls({c: w / total for c, w in weights.items() if w > 0})

    def get(self, category: str) -> float:
        return self.probs.get(category, 0.0)


@dataclass(frozen=True)
class RankWeighting:
    """uniform: w_r = 1; logarithmic: w_r = 1 / log2(r + 1), r 1-based."""

    scheme: str = "uniform"

    def __post_init__(self) -> None:
        if self.scheme not in ("uniform", "logarithmic"):
            raise ConfigError(f"unknown rank weighting {self.scheme!r}; expected 'uniform' or 'logarithmic'")

    def weight(self, rank: int) -> float:
        if rank < 1:
            raise ValueError(f"ranks are 1-based, got {rank}")
        if self.scheme == "uniform":
            return 1.0
        return 1.0 / math.log2(rank + 1)


def item_category_spread(item: Item) -> CategoryDistribution:
    share = 1.0 / len(item.categories)
    return CategoryDistribution({c: share for c in item.categories})


def _weighted_spread(pairs: Iterable[Tuple[Item, float]]) -> CategoryDistribution:
    acc: Dict[str, float] = {}
    total = 0.0
    for item, w in pairs:
        share = w / len(item.categories)
        for c in item.categories:
            acc[c] = acc.get(c, 0.0) + share
        total += w
    if not total > 0:
        raise ValueError("no mass to distribute")
    return CategoryDistribution({c: v / total for c, v in acc.items()})


def profile_distribution(profile: UserProfile, catalog: Mapping[str, Item]) -> CategoryDistribution:
    pairs = []
    for e in profile.entries:
        item = catalog.get(e.item_id)
        if item is None:
            raise KeyError(f"profile item {e.item_id} of user {profile.user_id} is not in the catalog")
        pairs.append((item, e.weight))
    return _weighted_spread(pairs)


def list_distribution(
    items: Sequence[str],
    catalog: Mapping[str, Item],
    rank_weighting: RankWeighting | None = None,
) -> CategoryDistribution:
    if not items:
        raise ValueError("cannot build a distribution from an empty list")
    rank_weighting = rank_weighting or RankWeighting()
    pairs = []
    for rank, item_id in enumerate(items, start=1):
        item = catalog.get(item_id)
        if item is None:
            raise KeyError(f"list item {item_id} is not in the catalog")
        pairs.append((item, rank_weighting.weight(rank)))
    return _weighted_spread(pairs)


def aligned(p: CategoryDistribution, q: CategoryDistribution) -> Tuple[np.ndarray, np.ndarray]:
    cats = sorted(set(p.probs) | set(q.probs))
    return (
        np.array([p.get(c) for c in cats], dtype=float),
        np.array([q.get(c) for c in cats], dtype=float),
    )


def js_divergence(p: CategoryDistribution, q: CategoryDistribution) -> float:
    """Jensen-Shannon divergence in bits, so the range is [0, 1]."""
    pv, qv = aligned(p, q)
    m = 0.5 * (pv + qv)
    js = 0.5 * np.sum(rel_entr(pv, m)) + 0.5 * np.sum(rel_entr(qv, m))
    return float(min(max(js / np.log(2.0), 0.0), 1.0))


def hellinger_distance(p: CategoryDistribution, q: CategoryDistribution) -> float:
    pv, qv = aligned(p, q)
    h = np.linalg.norm(np.sqrt(pv) - np.sqrt(qv)) / np.sqrt(2.0)
    return float(min(max(h, 0.0), 1.0))


def total_variation(p: CategoryDistribution, q: CategoryDistribution) -> float:
    """Full l1 distance (range [0, 2], not halved)."""
    pv, qv = aligned(p, q)
    return float(np.abs(pv - qv).sum())


def miscalibration(per_user_divergences: Mapping[str, float]) -> float:
    if not per_user_divergences:
        raise ValueError("miscalibration needs at least one user")
    return math.fsum(per_user_divergences.values()) / len(per_user_divergences)


DIVERGENCES: Dict[str, Callable[[CategoryDistribution, CategoryDistribution], float]] = {
    "js": js_divergence,
    "hellinger": hellinger_distance,
    "tv": total_variation,
}


def get_divergence(name: str) -> Callable[[CategoryDistribution, CategoryDistribution], float]:
    try:
        return DIVERGENCES[name.lower()]
    except KeyError:
        raise ConfigError(f"unknown divergence {name!r}; expected one of {sorted(DIVERGENCES)}")
