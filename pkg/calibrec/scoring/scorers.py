"""Relevance scorers standing in for trained recommenders.

A scorer answers `score(user, item)` (None when it has no opinion) and
`scores_for(user)` (every item it can score for that user). Scorers are
immutable after construction apart from a per-user memo.
"""
from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Dict, Mapping, Optional, Protocol

import numpy as np
import pandas as pd
import scipy.sparse as sp
from sklearn.metrics.pairwise import cosine_similarity

from ..data.models import SplitDataset, id_key
from ..errors import DataError

logger = logging.getLogger(__name__)

SCORE_COLUMNS = ["userId", "itemId", "score"]


class Scorer(Protocol):
    name: str

    def score(self, user_id: str, item_id: str) -> Optional[float]: ...

    def scores_for(self, user_id: str) -> Dict[str, float]: ...


def _universe(split: SplitDataset) -> list[str]:
    items = set(split.items) if split.items else {x.item_id for x in split.train}
    return sorted(items, key=id_key)


class PopularityScorer:
    name = "popularity"

    def __init__(self, counts: Mapping[str, int], items: list[str]) -> None:
        self._items = items
        self._scores = {i: float(counts.get(i, 0)) for i in items}

    def score(self, user_id: str, item_id: str) -> Optional[float]:
        return self._scores.get(item_id)

    def scores_for(self, user_id: str) -> Dict[str, float]:
        return dict(self._scores)


def most_popular_scores(split: SplitDataset) -> PopularityScorer:
    if not split.train:
        raise ValueError("popularity scorer needs a non-empty train set")
    counts: Dict[str, int] = {}
    for x in split.train:
        counts[x.item_id] = counts.get(x.item_id, 0) + 1
    return PopularityScorer(counts, _universe(split))


class ItemKNNScorer:
    """Item-item cosine over binary 'rated' vectors.

    score(u, i) = sum of the k largest sim(i, j) over items j in u's train profile.
    """

    name = "itemknn"

    def __init__(self, split: SplitDataset, k_neighbors: int) -> None:
        if k_neighbors < 1:
            raise ValueError(f"k_neighbors must be >= 1, got {k_neighbors}")
        self.k_neighbors = int(k_neighbors)
        self._items = _universe(split)
        self._item_index = {i: n for n, i in enumerate(self._items)}
        users = split.users()
        user_index = {u: n for n, u in enumerate(users)}

        pairs = {(self._item_index[x.item_id], user_index[x.user_id]) for x in split.train if x.item_id in self._item_index}
        rows = np.fromiter((r for r, _ in pairs), dtype=np.int64, count=len(pairs))
        cols = np.fromiter((c for _, c in pairs), dtype=np.int64, count=len(pairs))
        self._matrix = sp.csr_matrix(
            (np.ones(len(pairs)), (rows, cols)), shape=(len(self._items), len(users))
        )
        self._profiles: Dict[str, np.ndarray] = {}
        for u, xs in split.train_by_user().items():
            idx = sorted({self._item_index[x.item_id] for x in xs if x.item_id in self._item_index})
            self._profiles[u] = np.asarray(idx, dtype=np.int64)
        self._memo: Dict[str, Dict[str, float]] = {}
        logger.info(f"Item-KNN index: {len(self._items)} items x {len(users)} users, k={self.k_neighbors}")

    def similarity(self, item_a: str, item_b: str) -> float:
        a, b = self._item_index[item_a], self._item_index[item_b]
        return float(cosine_similarity(self._matrix[a], self._matrix[b])[0, 0])

    def scores_for(self, user_id: str) -> Dict[str, float]:
        if user_id in self._memo:
            return dict(self._memo[user_id])
        profile = self._profiles.get(user_id)
        if profile is None or profile.size == 0:
            return {}
        sims = cosine_similarity(self._matrix, self._matrix[profile])
        k = min(self.k_neighbors, sims.shape[1])
        top = np.sort(sims, axis=1)[:, -k:].sum(axis=1)
        out = {item: float(v) for item, v in zip(self._items, top)}
        self._memo[user_id] = out
        return dict(out)

    def score(self, user_id: str, item_id: str) -> Optional[float]:
        return self.scores_for(user_id).get(item_id)


def item_knn_scores(split: SplitDataset, k_neighbors: int) -> ItemKNNScorer:
    if not split.train:
        raise ValueError("item-KNN scorer needs a non-empty train set")
    return ItemKNNScorer(split, k_neighbors)


class ImportedScorer:
    name = "imported"

    def __init__(self, scores: Mapping[str, Mapping[str, float]]) -> None:
        self._scores = {u: dict(v) for u, v in scores.items()}

    def score(self, user_id: str, item_id: str) -> Optional[float]:
        return self._scores.get(user_id, {}).get(item_id)

    def scores_for(self, user_id: str) -> Dict[str, float]:
        return dict(self._scores.get(user_id, {}))


def _parse_score(raw: str) -> Optional[float]:
    try:
        v = float(raw)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def import_scores(path: str | Path) -> ImportedScorer:
    """Read `userId,itemId,score[,rank]`; the rank column is ignored."""
    p = Path(path)
    if not p.exists():
        raise DataError("file not found", str(p))
    try:
        df = pd.read_csv(p, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataError("empty file (missing header)", str(p))
    missing = [c for c in SCORE_COLUMNS if c not in df.columns]
    if missing:
        raise DataError(f"missing columns {missing}; expected header {','.join(SCORE_COLUMNS)}", str(p), 1)

    scores: Dict[str, Dict[str, float]] = {}
    for pos, (u, i, raw) in enumerate(zip(df["userId"], df["itemId"], df["score"])):
        line = pos + 2
        u, i = u.strip(), i.strip()
        if not u or not i:
            raise DataError("missing userId or itemId", str(p), line)
        v = _parse_score(raw.strip())
        if v is None:
            raise DataError(f"non-numeric score {raw!r}", str(p), line)
        row = scores.setdefault(u, {})
        if i in row:
            raise DataError(f"duplicate score for user {u}, item {i}", str(p), line)
        row[i] = v
    logger.info(f"Imported {len(df)} scores for {len(scores)} users from {p}")
    return ImportedScorer(scores)
