from .candidates import CandidateList, candidates_frame, export_scores, top_n_candidates
from .scorers import (
    ImportedScorer,
    ItemKNNScorer,
    PopularityScorer,
    Scorer,
    import_scores,
    item_knn_scores,
    most_popular_scores,
)

__all__ = [
    "CandidateList",
    "ImportedScorer",
    "ItemKNNScorer",
    "PopularityScorer",
    "Scorer",
    "candidates_frame",
    "export_scores",
    "import_scores",
    "item_knn_scores",
    "most_popular_scores",
    "top_n_candidates",
]
