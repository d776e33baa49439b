from .ingest import CatalogLoad, format_exclusion_report, load_interactions, load_item_categories
from .models import (
    Catalog,
    ExclusionReport,
    Interaction,
    Item,
    ProfileEntry,
    SplitDataset,
    UserProfile,
    id_key,
)
from .profiles import RecencyWeighting, build_profiles, profile_sizes
from .split import temporal_split

__all__ = [
    "Catalog",
    "CatalogLoad",
    "ExclusionReport",
    "Interaction",
    "Item",
    "ProfileEntry",
    "RecencyWeighting",
    "SplitDataset",
    "UserProfile",
    "build_profiles",
    "format_exclusion_report",
    "id_key",
    "load_interactions",
    "load_item_categories",
    "profile_sizes",
    "temporal_split",
]
