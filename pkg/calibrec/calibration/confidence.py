"""Per-user calibration confidence, activity groups and the Beta analysis.

W(u) = min(|I_u| / mean_v |I_v|, 1): users with at least an average-size
profile are calibrated fully, smaller profiles proportionally less.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Dict, Mapping, Optional

import pandas as pd
from scipy import integrate, stats

from ..data.models import SplitDataset, id_key
from .distributions import get_divergence, list_distribution, miscalibration

logger = logging.getLogger(__name__)

ACTIVE = "active"
SEMI_ACTIVE = "semi-active"
INACTIVE = "inactive"
GROUPS = (ACTIVE, SEMI_ACTIVE, INACTIVE)
GROUP_SHARE = 0.2
MIN_GROUP_USERS = 5


@dataclass(frozen=True)
class ConfidenceWeights:
    weights: Mapping[str, float]
    mean_profile_size: float

    def __getitem__(self, user_id: str) -> float:
        return self.weights[user_id]


@dataclass(frozen=True)
class UserGroupAssignment:
    groups: Mapping[str, str]

    def members(self, group: str) -> tuple[str, ...]:
        return tuple(sorted((u for u, g in self.groups.items() if g == group), key=id_key))

    def counts(self) -> Dict[str, int]:
        return {g: len(self.members(g)) for g in GROUPS}


@dataclass(frozen=True)
class BetaPosterior:
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"Beta parameters must be positive, got ({self.alpha}, {self.beta})")

    def dist(self):
        return stats.beta(self.alpha, self.beta)


UNIFORM_PRIOR = BetaPosterior(1.0, 1.0)


def confidence_weight(profile_sizes: Mapping[str, int]) -> ConfidenceWeights:
    if not profile_sizes:
        raise ValueError("confidence_weight needs at least one user")
    for u, n in profile_sizes.items():
        if n < 1:
            raise ValueError(f"profile size of user {u} must be >= 1, got {n}")
    mean = math.fsum(profile_sizes.values()) / len(profile_sizes)
    weights = {u: min(max(n / mean, 0.0), 1.0) for u, n in profile_sizes.items()}
    return ConfidenceWeights(weights=weights, mean_profile_size=mean)


def assign_user_groups(profile_sizes: Mapping[str, int]) -> UserGroupAssignment:
    n = len(profile_sizes)
    if n < MIN_GROUP_USERS:
        raise ValueError(f"need at least {MIN_GROUP_USERS} users for 20/60/20 groups, got {n}")
    ordered = sorted(profile_sizes, key=lambda u: (-profile_sizes[u], id_key(u)))
    cut = int(math.floor(GROUP_SHARE * n))
    groups: Dict[str, str] = {}
    for pos, u in enumerate(ordered):
        if pos < cut:
            groups[u] = ACTIVE
        elif pos >= n - cut:
            groups[u] = INACTIVE
        else:
            groups[u] = SEMI_ACTIVE
    return UserGroupAssignment(groups=groups)


def beta_posterior_from_counts(successes: int, failures: int, prior: BetaPosterior = UNIFORM_PRIOR) -> BetaPosterior:
    if successes < 0 or failures < 0:
        raise ValueError("counts must be non-negative")
    return BetaPosterior(prior.alpha + successes, prior.beta + failures)


def _mode(p: BetaPosterior) -> Optional[float]:
    if p.alpha > 1 and p.beta > 1:
        return (p.alpha - 1) / (p.alpha + p.beta - 2)
    return None


def prob_greater(a: BetaPosterior, b: BetaPosterior) -> float:
    """P(X > Y) for independent X ~ a, Y ~ b, as the integral of f_a * F_b."""
    da, db = a.dist(), b.dist()
    # integrate over the bulk of a; the clipped tails hold < 2e-12 of its mass
    lo, hi = float(da.ppf(1e-12)), float(da.ppf(1.0 - 1e-12))
    # break at the peak of f_a and the median of b, where the integrand turns
    points = sorted({x for x in (_mode(a), float(db.median())) if x is not None and lo < x < hi})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, err = integrate.quad(
            lambda x: da.pdf(x) * db.cdf(x), lo, hi, epsabs=1e-10, epsrel=1e-10, limit=200, points=points or None
        )
    if caught:
        logger.debug(f"prob_greater{(a.alpha, a.beta, b.alpha, b.beta)}: quadrature error estimate {err:.2g}")
    return float(min(max(value, 0.0), 1.0))


def _oracle_divergences(split: SplitDataset, users, divergence: str) -> Dict[str, float]:
    fn = get_divergence(divergence)
    catalog = split.items
    train, test = split.train_by_user(), split.test_by_user()
    out: Dict[str, float] = {}
    for u in users:
        tr = [x.item_id for x in train.get(u, ()) if x.item_id in catalog]
        te = [x.item_id for x in test.get(u, ()) if x.item_id in catalog]
        if not tr or not te:
            continue
        out[u] = fn(list_distribution(tr, catalog), list_distribution(te, catalog))
    return out


def oracle_miscalibration(split: SplitDataset, groups: UserGroupAssignment, divergence: str = "js") -> Dict[str, float]:
    """Miscalibration of the test set used as a recommender, per activity group."""
    out: Dict[str, float] = {}
    for g in GROUPS:
        per_user = _oracle_divergences(split, groups.members(g), divergence)
        if per_user:
            out[g] = miscalibration(per_user)
    return out


def oracle_frame(split: SplitDataset, groups: UserGroupAssignment) -> pd.DataFrame:
    """Rows `group,js,hellinger,n_users` in active -> inactive order."""
    rows = []
    for g in GROUPS:
        members = groups.members(g)
        js = _oracle_divergences(split, members, "js")
        if not js:
            continue
        h = _oracle_divergences(split, members, "hellinger")
        rows.append({"group": g, "js": miscalibration(js), "hellinger": miscalibration(h), "n_users": len(js)})
    logger.info(f"Oracle miscalibration computed for {sum(r['n_users'] for r in rows)} users")
    return pd.DataFrame(rows, columns=["group", "js", "hellinger", "n_users"])


__all__ = [
    "ACTIVE",
    "BetaPosterior",
    "ConfidenceWeights",
    "GROUPS",
    "INACTIVE",
    "SEMI_ACTIVE",
    "UNIFORM_PRIOR",
    "UserGroupAssignment",
    "assign_user_groups",
    "beta_posterior_from_counts",
    "confidence_weight",
    "oracle_frame",
    "oracle_miscalibration",
    "prob_greater",
]
