"""Seeded synthetic MovieLens-format dataset for smoke runs and tests.

Users prefer one or two genres and differ widely in activity, so the
activity groups and the calibration effect are both visible at desk scale.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import NamedTuple

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

GENRES = ("Action", "Comedy", "Drama", "Horror", "Romance", "Sci-Fi", "Thriller", "Animation")
NO_GENRES = "(no genres listed)"


class FixturePaths(NamedTuple):
    ratings: Path
    items: Path


def write_fixture(
    out_dir: str | Path,
    seed: int = 7,
    n_users: int = 50,
    n_items: int = 150,
    n_uncategorized: int = 3,
    min_ratings: int = 8,
    max_ratings: int = 60,
) -> FixturePaths:
    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_genres = len(GENRES)

    item_genres = []
    for i in range(n_items):
        if i >= n_items - n_uncategorized:
            item_genres.append(frozenset())
            continue
        k = int(rng.integers(1, 4))
        item_genres.append(frozenset(GENRES[j] for j in rng.choice(n_genres, size=k, replace=False)))
    popularity = 1.0 / np.arange(1, n_items + 1) ** 0.8
    popularity = popularity[rng.permutation(n_items)]

    movies = pd.DataFrame({
        "movieId": [str(i + 1) for i in range(n_items)],
        "title": [f"Movie {i + 1} ({1980 + i % 40})" for i in range(n_items)],
        "genres": ["|".join(sorted(g)) if g else NO_GENRES for g in item_genres],
    })

    rows = []
    ts = 946684800  # 2000-01-01
    for u in range(n_users):
        favorites = {GENRES[j] for j in rng.choice(n_genres, size=int(rng.integers(1, 3)), replace=False)}
        boost = np.array([4.0 if g & favorites else 1.0 for g in item_genres])
        prob = popularity * boost
        prob /= prob.sum()
        n = int(rng.integers(min_ratings, max_ratings + 1))
        items = rng.choice(n_items, size=n, replace=False, p=prob)
        stamps = np.sort(rng.integers(0, 10_000_000, size=n))
        ratings = rng.integers(1, 6, size=n)
        for i, t, r in zip(items, stamps, ratings):
            rows.append((str(u + 1), str(int(i) + 1), float(r), ts + int(t)))
    ratings = pd.DataFrame(rows, columns=["userId", "movieId", "rating", "timestamp"])

    paths = FixturePaths(ratings=out / "ratings.csv", items=out / "movies.csv")
    ratings.to_csv(paths.ratings, index=False, lineterminator="\n")
    movies.to_csv(paths.items, index=False, lineterminator="\n")
    logger.info(f"Wrote fixture: {len(ratings)} ratings, {n_users} users, {n_items} items under {out}")
    return paths
