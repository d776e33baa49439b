"""Domain records shared by every stage.

Ids are opaque strings. Any ordering that needs to be deterministic goes
through `id_key`, which sorts all-digit ids numerically ("2" < "10") and
everything else lexicographically after them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Mapping, Tuple


def id_key(value: str) -> tuple:
    s = str(value)
    if s.isdigit():
        return (0, int(s), s)
    return (1, 0, s)


@dataclass(frozen=True, slots=True)
class Interaction:
    user_id: str
    item_id: str
    rating: float
    timestamp: int

    def __post_init__(self) -> None:
        if not 1.0 <= self.rating <= 5.0:
            raise ValueError(f"rating {self.rating} outside [1, 5]")
        if self.timestamp < 0:
            raise ValueError(f"negative timestamp {self.timestamp}")


@dataclass(frozen=True, slots=True)
class Item:
    item_id: str
    categories: FrozenSet[str]
    title: str = ""

    def __post_init__(self) -> None:
        if not self.categories:
            raise ValueError(f"item {self.item_id} has no categories")


@dataclass(frozen=True, slots=True)
class ProfileEntry:
    item_id: str
    weight: float
    timestamp: int


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    entries: Tuple[ProfileEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError(f"profile for user {self.user_id} is empty")
        for e in self.entries:
            if not e.weight > 0:
                raise ValueError(f"non-positive weight for item {e.item_id} in profile {self.user_id}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def item_ids(self) -> Tuple[str, ...]:
        return tuple(e.item_id for e in self.entries)


@dataclass(frozen=True)
class ExclusionReport:
    """item_id -> reason for items dropped at ingest."""

    excluded: Mapping[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.excluded)

    def __contains__(self, item_id: object) -> bool:
        return item_id in self.excluded


Catalog = Dict[str, Item]


@dataclass(frozen=True)
class SplitDataset:
    train: Tuple[Interaction, ...]
    test: Tuple[Interaction, ...]
    items: Mapping[str, Item]
    dropped_users: Tuple[str, ...] = ()

    def users(self) -> Tuple[str, ...]:
        return tuple(sorted({x.user_id for x in self.train}, key=id_key))

    def train_by_user(self) -> Dict[str, list[Interaction]]:
        out: Dict[str, list[Interaction]] = {}
        for x in self.train:
            out.setdefault(x.user_id, []).append(x)
        return out

    def test_by_user(self) -> Dict[str, list[Interaction]]:
        out: Dict[str, list[Interaction]] = {}
        for x in self.test:
            out.setdefault(x.user_id, []).append(x)
        return out
