from __future__ import annotations

from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
import pytest

from calibrec.calibration.distributions import CategoryDistribution, item_category_spread
from calibrec.config import ExperimentConfig
from calibrec.data.models import Item
from calibrec.experiment.fixtures import write_fixture
from calibrec.rerank.problem import Candidate, RerankProblem


def _catalog(genres: Mapping[str, str]) -> Dict[str, Item]:
    return {i: Item(item_id=i, categories=frozenset(g.split("|"))) for i, g in genres.items()}


def _problem(
    items: Iterable[Tuple[str, float, str]],
    target: Mapping[str, float],
    K: int,
    K1: int,
    lambda1: float,
    user_id: str = "u",
) -> RerankProblem:
    cands = []
    for item_id, score, genres in items:
        item = Item(item_id=item_id, categories=frozenset(genres.split("|")))
        cands.append(Candidate(item_id, float(score), item_category_spread(item).probs))
    return RerankProblem(
        user_id=user_id,
        candidates=tuple(cands),
        target=CategoryDistribution(dict(target)),
        K=K,
        K1=K1,
        lambda1=lambda1,
    )


def _random_problem(
    rng: np.random.Generator,
    n_max: int = 12,
    k_max: int = 5,
    lam_max: float = 5.0,
    rational_target: bool = False,
    full_calibration: bool = False,
    score_levels: Optional[Sequence[float]] = None,
) -> RerankProblem:
    m = int(rng.integers(2, 6))
    cats = [f"c{j}" for j in range(m)]
    n = int(rng.integers(2, n_max + 1))
    K = int(rng.integers(1, min(k_max, n) + 1))
    K1 = K if full_calibration else int(rng.integers(0, K + 1))
    cands = []
    for i in range(n):
        k = int(rng.integers(1, min(3, m) + 1))
        genres = rng.choice(cats, size=k, replace=False).tolist()
        item = Item(item_id=str(i + 1), categories=frozenset(genres))
        score = float(rng.choice(score_levels)) if score_levels is not None else float(rng.random())
        cands.append(Candidate(item.item_id, score, item_category_spread(item).probs))
    if rational_target:
        counts = rng.integers(0, 4, size=m)
        counts[int(rng.integers(0, m))] += 1
        target = CategoryDistribution.from_weights({c: float(v) for c, v in zip(cats, counts)})
    else:
        target = CategoryDistribution.from_weights({c: float(v) for c, v in zip(cats, rng.dirichlet(np.ones(m)))})
    return RerankProblem(
        user_id="u",
        candidates=tuple(cands),
        target=target,
        K=K,
        K1=K1,
        lambda1=float(rng.uniform(0.0, lam_max)),
    )


@pytest.fixture
def make_catalog():
    return _catalog


@pytest.fixture
def make_problem():
    return _problem


@pytest.fixture
def random_problem():
    return _random_problem


@pytest.fixture(scope="session")
def fixture_data(tmp_path_factory):
    """Seeded 50-user MovieLens-format dataset shared by the end-to-end tests."""
    return write_fixture(tmp_path_factory.mktemp("fixture"), seed=7, n_users=50)


@pytest.fixture
def small_config(fixture_data):
    def build(output_dir, **overrides) -> ExperimentConfig:
        values = dict(
            ratings_path=str(fixture_data.ratings),
            items_path=str(fixture_data.items),
            N=30,
            K=5,
            k_neighbors=20,
            lambda_grid=(0.0, 1000.0),
            max_nodes=300,
            max_seconds=60.0,
            output_dir=str(output_dir),
        )
        values.update(overrides)
        return ExperimentConfig(**values)

    return build
