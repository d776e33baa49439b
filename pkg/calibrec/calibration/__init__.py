from .confidence import (
    ACTIVE,
    GROUPS,
    INACTIVE,
    SEMI_ACTIVE,
    UNIFORM_PRIOR,
    BetaPosterior,
    ConfidenceWeights,
    UserGroupAssignment,
    assign_user_groups,
    beta_posterior_from_counts,
    confidence_weight,
    oracle_frame,
    oracle_miscalibration,
    prob_greater,
)
from .distributions import (
    DIVERGENCES,
    CategoryDistribution,
    RankWeighting,
    get_divergence,
    hellinger_distance,
    item_category_spread,
    js_divergence,
    list_distribution,
    miscalibration,
    profile_distribution,
    total_variation,
)

__all__ = [
    "ACTIVE",
    "BetaPosterior",
    "CategoryDistribution",
    "ConfidenceWeights",
    "DIVERGENCES",
    "GROUPS",
    "INACTIVE",
    "RankWeighting",
    "SEMI_ACTIVE",
    "UNIFORM_PRIOR",
    "UserGroupAssignment",
    "assign_user_groups",
    "beta_posterior_from_counts",
    "confidence_weight",
    "get_divergence",
    "hellinger_distance",
    "item_category_spread",
    "js_divergence",
    "list_distribution",
    "miscalibration",
    "oracle_frame",
    "oracle_miscalibration",
    "prob_greater",
    "profile_distribution",
    "total_variation",
]
