"""Per-user temporal train/test split.

Each user's interactions are ordered by (timestamp, item id); the earliest
ceil(train_fraction * n_u) go to train and the rest to test. Users left with
an empty side are dropped and reported on the result.
"""
from __future__ import annotations

import logging
import math
from decimal import Decimal
from typing import Dict, Iterable, List, Mapping

from .models import Interaction, Item, SplitDataset, id_key

logger = logging.getLogger(__name__)


def train_size(n: int, train_fraction: float) -> int:
    # Decimal keeps 0.7 * 10 at exactly 7
    return int(math.ceil(Decimal(str(train_fraction)) * n))


def temporal_split(
    interactions: Iterable[Interaction],
    train_fraction: float,
    items: Mapping[str, Item] | None = None,
) -> SplitDataset:
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")

    by_user: Dict[str, List[Interaction]] = {}
    seen: set[tuple[str, str, int]] = set()
    duplicates = 0
    for x in interactions:
        key = (x.user_id, x.item_id, x.timestamp)
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        by_user.setdefault(x.user_id, []).append(x)
    if duplicates:
        logger.warning(f"Collapsed {duplicates} duplicate (user, item, timestamp) rows")

    train: List[Interaction] = []
    test: List[Interaction] = []
    dropped: List[str] = []
    for user in sorted(by_user, key=id_key):
        rows = sorted(by_user[user], key=lambda x: (x.timestamp, id_key(x.item_id)))
        cut = train_size(len(rows), train_fraction)
        if cut <= 0 or cut >= len(rows):
            dropped.append(user)
            continue
        train.extend(rows[:cut])
        test.extend(rows[cut:])

    if dropped:
        logger.info(f"Dropped {len(dropped)} users with an empty train or test side")
    return SplitDataset(
        train=tuple(train),
        test=tuple(test),
        items=dict(items or {}),
        dropped_users=tuple(dropped),
    )
