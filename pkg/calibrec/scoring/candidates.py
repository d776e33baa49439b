"""Top-N candidate pools, the input of every re-ranking engine."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Tuple

import pandas as pd

from ..data.models import SplitDataset, id_key
from .scorers import Scorer

logger = logging.getLogger(__name__)

CANDIDATE_COLUMNS = ["userId", "itemId", "score", "rank"]


@dataclass(frozen=True)
class CandidateList:
    user_id: str
    candidates: Tuple[Tuple[str, float], ...]
    short: bool = False  # fewer than N scoreable items

    def __post_init__(self) -> None:
        ids = [i for i, _ in self.candidates]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate candidate items for user {self.user_id}")
        keys = [(-s, id_key(i)) for i, s in self.candidates]
        if keys != sorted(keys):
            raise ValueError(f"candidates for user {self.user_id} are not sorted by score")

    def __len__(self) -> int:
        return len(self.candidates)

    @property
    def item_ids(self) -> Tuple[str, ...]:
        return tuple(i for i, _ in self.candidates)

    def top(self, k: int) -> Tuple[str, ...]:
        return self.item_ids[:k]


def top_n_candidates(scorer: Scorer, split: SplitDataset, n: int) -> Dict[str, CandidateList]:
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    catalog = split.items
    train = split.train_by_user()
    out: Dict[str, CandidateList] = {}
    empty, short = [], 0
    for user in split.users():
        seen = {x.item_id for x in train.get(user, ())}
        scored = [
            (i, s)
            for i, s in scorer.scores_for(user).items()
            if i not in seen and (not catalog or i in catalog) and s is not None and math.isfinite(s)
        ]
        if not scored:
            empty.append(user)
            continue
        scored.sort(key=lambda t: (-t[1], id_key(t[0])))
        pool = tuple(scored[:n])
        flagged = len(pool) < n
        short += flagged
        out[user] = CandidateList(user_id=user, candidates=pool, short=flagged)
    if empty:
        logger.warning(f"{len(empty)} users have no scoreable items and are excluded from re-ranking")
    if short:
        logger.info(f"{short} users have fewer than N={n} candidates")
    return out


def candidates_frame(candidates: Mapping[str, CandidateList]) -> pd.DataFrame:
    rows = []
    for user in sorted(candidates, key=id_key):
        for rank, (item, score) in enumerate(candidates[user].candidates, start=1):
            rows.append((user, item, repr(float(score)), rank))
    return pd.DataFrame(rows, columns=CANDIDATE_COLUMNS)


def export_scores(candidates: Mapping[str, CandidateList], path: str | Path) -> Path:
    """Write the candidate export; `import_scores` reads it back."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    candidates_frame(candidates).to_csv(p, index=False, lineterminator="\n")
    return p
