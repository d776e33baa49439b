"""Ratings and item-category loaders.

Formats
- MovieLens "small" CSV (header row):
    ratings: userId,itemId,rating,timestamp   (`movieId` accepted for itemId)
    items:   movieId,title,genres             (genres pipe-separated)
- MovieLens 1M `.dat` (no header, `::` separated, latin-1):
    ratings.dat: UserID::MovieID::Rating::Timestamp
    movies.dat:  MovieID::Title::Genres

Errors name the file and 1-based line number of the offending row.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, NamedTuple

import pandas as pd

from ..errors import DataError
from .models import Catalog, ExclusionReport, Interaction, Item, id_key

logger = logging.getLogger(__name__)

NO_GENRES = "(no genres listed)"
RATING_COLUMNS = ["userId", "itemId", "rating", "timestamp"]
ITEM_COLUMNS = ["movieId", "title", "genres"]


class CatalogLoad(NamedTuple):
    items: Catalog
    exclusions: ExclusionReport


def _is_dat(path: Path) -> bool:
    return path.suffix.lower() == ".dat"


def _read_table(path: Path, columns: List[str]) -> tuple[pd.DataFrame, int]:
    """Return (frame of strings, line offset of the first data row)."""
    if not path.exists():
        raise DataError("file not found", str(path))
    try:
        if _is_dat(path):
            df = pd.read_csv(
                path,
                sep="::",
                engine="python",
                header=None,
                names=columns,
                dtype=str,
                keep_default_na=False,
                encoding="latin-1",
            )
            return df, 1
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataError("empty file (missing header)", str(path))
    except pd.errors.ParserError as e:
        raise DataError(f"malformed row: {e}", str(path))
    return df, 2


def load_interactions(path: str | Path) -> List[Interaction]:
    p = Path(path)
    df, offset = _read_table(p, RATING_COLUMNS)
    if not _is_dat(p):
        if "movieId" in df.columns and "itemId" not in df.columns:
            df = df.rename(columns={"movieId": "itemId"})
        missing = [c for c in RATING_COLUMNS if c not in df.columns]
        if missing:
            raise DataError(f"missing columns {missing}; expected header {','.join(RATING_COLUMNS)}", str(p), 1)
    if df.empty:
        return []

    df = df[RATING_COLUMNS].apply(lambda s: s.str.strip())
    rating = pd.to_numeric(df["rating"], errors="coerce")
    ts = pd.to_numeric(df["timestamp"], errors="coerce")
    malformed = df["userId"].eq("") | df["itemId"].eq("") | rating.isna() | ts.isna() | (ts % 1 != 0)
    if malformed.any():
        pos = int(malformed.to_numpy().nonzero()[0][0])
        raise DataError(f"malformed row {','.join(map(str, df.iloc[pos].tolist()))!r}", str(p), pos + offset)
    out_of_range = (rating < 1) | (rating > 5)
    if out_of_range.any():
        pos = int(out_of_range.to_numpy().nonzero()[0][0])
        raise DataError(f"rating {df['rating'].iloc[pos]} outside [1, 5]", str(p), pos + offset)
    negative = ts < 0
    if negative.any():
        pos = int(negative.to_numpy().nonzero()[0][0])
        raise DataError(f"negative timestamp {df['timestamp'].iloc[pos]}", str(p), pos + offset)

    out = [
        Interaction(user_id=u, item_id=i, rating=float(r), timestamp=int(t))
        for u, i, r, t in zip(df["userId"], df["itemId"], rating, ts)
    ]
    logger.info(f"Loaded {len(out)} interactions from {p}")
    return out


def load_item_categories(path: str | Path) -> CatalogLoad:
    p = Path(path)
    df, offset = _read_table(p, ITEM_COLUMNS)
    if not _is_dat(p):
        missing = [c for c in ITEM_COLUMNS if c not in df.columns]
        if missing:
            raise DataError(f"missing columns {missing}; expected header {','.join(ITEM_COLUMNS)}", str(p), 1)

    items: Dict[str, Item] = {}
    excluded: Dict[str, str] = {}
    seen: set[str] = set()
    for pos, (item_id, title, genres) in enumerate(zip(df["movieId"], df["title"], df["genres"])):
        item_id = str(item_id).strip()
        if not item_id:
            raise DataError("missing item id", str(p), pos + offset)
        if item_id in seen:
            raise DataError(f"duplicate item id {item_id}", str(p), pos + offset)
        seen.add(item_id)
        raw = str(genres).strip()
        labels = frozenset(g.strip() for g in raw.split("|") if g.strip()) if raw != NO_GENRES else frozenset()
        if not labels:
            excluded[item_id] = "no categories" if not raw else raw
            continue
        items[item_id] = Item(item_id=item_id, categories=labels, title=str(title))

    if excluded:
        logger.warning(f"Excluded {len(excluded)} items without categories from {p}")
    logger.info(f"Loaded {len(items)} items from {p}")
    return CatalogLoad(items=items, exclusions=ExclusionReport(excluded))


def format_exclusion_report(report: ExclusionReport) -> str:
    """Render `exclusions.txt`: one `itemId<TAB>reason` line per excluded item."""
    lines = [f"{item_id}\t{report.excluded[item_id]}" for item_id in sorted(report.excluded, key=id_key)]
    return "\n".join(lines) + ("\n" if lines else "")
