"""Weighted user profiles built from the train side of a split.

Items excluded at ingest (no categories) never enter a profile. Recency
ranks are computed over the remaining items, 0 = most recent.
"""
from __future__ import annotations

import logging
import sys
from dataclasses import dataclass
from typing import Dict, Mapping

from ..errors import ConfigError
from .models import ProfileEntry, SplitDataset, UserProfile, id_key

logger = logging.getLogger(__name__)

RECENCY_SCHEMES = ("uniform", "exponential")


@dataclass(frozen=True)
class RecencyWeighting:
    scheme: str = "uniform"
    half_life: float = 10.0  # in rank units, exponential only

    def __post_init__(self) -> None:
        if self.scheme not in RECENCY_SCHEMES:
            raise ConfigError(f"unknown recency scheme {self.scheme!r}; expected one of {RECENCY_SCHEMES}")
        if self.scheme == "exponential" and not self.half_life > 0:
            raise ConfigError(f"half_life must be positive, got {self.half_life}")

    def weight(self, recency_rank: int) -> float:
        if self.scheme == "uniform":
            return 1.0
        # floor at the smallest normal double so very old items keep a positive weight
        return max(2.0 ** (-recency_rank / self.half_life), sys.float_info.min)


def build_profiles(split: SplitDataset, recency: RecencyWeighting | None = None) -> Dict[str, UserProfile]:
    recency = recency or RecencyWeighting()
    catalog = split.items
    profiles: Dict[str, UserProfile] = {}
    skipped = 0
    for user, rows in split.train_by_user().items():
        kept = [x for x in rows if x.item_id in catalog]
        if not kept:
            skipped += 1
            continue
        kept.sort(key=lambda x: (x.timestamp, id_key(x.item_id)))
        n = len(kept)
        entries = tuple(
            ProfileEntry(item_id=x.item_id, weight=recency.weight(n - 1 - pos), timestamp=x.timestamp)
            for pos, x in enumerate(kept)
        )
        profiles[user] = UserProfile(user_id=user, entries=entries)
    if skipped:
        logger.info(f"{skipped} users have no categorized train items and get no profile")
    return dict(sorted(profiles.items(), key=lambda kv: id_key(kv[0])))


def profile_sizes(profiles: Mapping[str, UserProfile]) -> Dict[str, int]:
    return {u: len(p) for u, p in profiles.items()}
