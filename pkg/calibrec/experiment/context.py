"""Shared pipeline state: everything every engine consumes identically.

ingest -> split -> profiles -> score -> candidates -> confidence. Engines
then only differ in how problems are built from this context and which
solver runs.
"""
from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional

from ..calibration.confidence import ConfidenceWeights, UserGroupAssignment, assign_user_groups, confidence_weight
from ..calibration.distributions import CategoryDistribution, RankWeighting, profile_distribution
from ..config import ExperimentConfig
from ..data.ingest import load_interactions, load_item_categories
from ..data.models import Catalog, ExclusionReport, SplitDataset, UserProfile, id_key
from ..data.profiles import RecencyWeighting, build_profiles, profile_sizes
from ..data.split import temporal_split
from ..errors import CalibrecError, StageError
from ..rerank.problem import RerankProblem, RerankSolution, SolverBudget, build_problem
from ..rerank.runner import rerank_all
from ..scoring.candidates import CandidateList, top_n_candidates
from ..scoring.scorers import Scorer, import_scores, item_knn_scores, most_popular_scores

logger = logging.getLogger(__name__)


@contextmanager
def stage(name: str) -> Iterator[None]:
    logger.info(f"[{name}] start")
    try:
        yield
    except StageError:
        raise
    except (CalibrecError, ValueError, KeyError, OSError) as e:
        raise StageError(name, e) from e
    logger.info(f"[{name}] done")


@dataclass
class ExperimentContext:
    config: ExperimentConfig
    catalog: Catalog
    exclusions: ExclusionReport
    split: SplitDataset
    profiles: Dict[str, UserProfile]
    targets: Dict[str, CategoryDistribution]
    users: List[str]  # evaluated and re-ranked users
    weights: ConfidenceWeights
    groups: UserGroupAssignment
    rank_weighting: RankWeighting
    candidates: Optional[Dict[str, CandidateList]] = None

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def budget(self) -> SolverBudget:
        return SolverBudget(max_nodes=self.config.max_nodes, max_seconds=self.config.max_seconds)


def make_scorer(config: ExperimentConfig, split: SplitDataset) -> Scorer:
    if config.scorer == "popularity":
        return most_popular_scores(split)
    if config.scorer == "import":
        return import_scores(config.scores_path)
    return item_knn_scores(split, config.k_neighbors)


def prepare_context(config: ExperimentConfig, with_candidates: bool = True) -> ExperimentContext:
    with stage("ingest"):
        interactions = load_interactions(config.ratings_path)
        catalog, exclusions = load_item_categories(config.items_path)
    with stage("split"):
        split = temporal_split(interactions, config.train_fraction, items=catalog)
        profiles = build_profiles(split, RecencyWeighting(config.recency, config.recency_half_life))
        rank_weighting = RankWeighting(config.rank_weighting)

    candidates = None
    eligible = set(profiles)
    if with_candidates:
        with stage("score"):
            scorer = make_scorer(config, split)
            candidates = top_n_candidates(scorer, split, config.N)
        eligible &= set(candidates)

    with stage("confidence"):
        test_users = {x.user_id for x in split.test}
        users = sorted(eligible & test_users, key=id_key)
        if not users:
            raise ValueError("no user has a profile, test items and candidates")
        sizes = {u: n for u, n in profile_sizes(profiles).items() if u in set(users)}
        weights = confidence_weight(sizes)
        groups = assign_user_groups(sizes)
        targets = {u: profile_distribution(profiles[u], catalog) for u in users}
    logger.info(
        f"Context ready: {len(users)} users, {len(catalog)} items, mean profile size {weights.mean_profile_size:.2f}"
    )
    return ExperimentContext(
        config=config,
        catalog=catalog,
        exclusions=exclusions,
        split=split,
        profiles=profiles,
        targets=targets,
        users=users,
        weights=weights,
        groups=groups,
        rank_weighting=rank_weighting,
        candidates=candidates,
    )


def engine_weight(ctx: ExperimentContext, engine: str, user: str) -> float:
    if engine == "ccl":
        return ctx.weights[user]
    if engine == "cl":
        return 1.0
    if engine == "greedy":
        return ctx.config.greedy_weight
    return 0.0


def build_problems(ctx: ExperimentContext, engine: str, lambda1: float) -> List[RerankProblem]:
    if ctx.candidates is None:
        raise ValueError("context was prepared without candidates")
    lam = 0.0 if engine == "none" else lambda1
    return [
        build_problem(
            u,
            ctx.candidates[u],
            ctx.targets[u],
            ctx.config.K,
            engine_weight(ctx, engine, u),
            lam,
            ctx.n_users,
            ctx.catalog,
            allow_short=True,
        )
        for u in ctx.users
    ]


def run_engine(ctx: ExperimentContext, engine: str, lambda1: float) -> Dict[str, RerankSolution]:
    with stage(f"rerank:{engine}"):
        problems = build_problems(ctx, engine, lambda1)
        return rerank_all(
            problems,
            engine,
            ctx.budget,
            workers=ctx.config.workers,
            progress=ctx.config.progress,
        )
