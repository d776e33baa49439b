from __future__ import annotations

import math

import numpy as np
import pytest

from calibrec.data.models import Interaction, SplitDataset
from calibrec.data.split import temporal_split
from calibrec.errors import DataError
from calibrec.scoring.candidates import CandidateList, export_scores, top_n_candidates
from calibrec.scoring.scorers import ImportedScorer, import_scores, item_knn_scores, most_popular_scores


@pytest.fixture
def tiny_split(make_catalog):
    # item vectors over users (u1, u2, u3): 1 -> 111, 2 -> 110, 3 -> 001
    catalog = make_catalog({"1": "A", "2": "B", "3": "A|B", "4": "C"})
    train = [
        Interaction("u1", "1", 4.0, 1),
        Interaction("u1", "2", 4.0, 2),
        Interaction("u2", "1", 4.0, 1),
        Interaction("u2", "2", 4.0, 2),
        Interaction("u3", "1", 4.0, 1),
        Interaction("u3", "3", 4.0, 2),
    ]
    test = [Interaction("u1", "3", 4.0, 9), Interaction("u3", "2", 4.0, 9)]
    return SplitDataset(train=tuple(train), test=tuple(test), items=catalog)


class TestPopularity:
    def test_counts_and_unseen_items(self, tiny_split):
        scorer = most_popular_scores(tiny_split)
        assert scorer.score("u1", "1") == 3.0
        assert scorer.score("u1", "2") == 2.0
        assert scorer.score("u1", "4") == 0.0

    def test_empty_train(self, make_catalog):
        with pytest.raises(ValueError):
            most_popular_scores(SplitDataset(train=(), test=(), items=make_catalog({"1": "A"})))


class TestItemKNN:
    def test_cosine_similarity(self, tiny_split):
        scorer = item_knn_scores(tiny_split, k_neighbors=50)
        assert scorer.similarity("1", "2") == pytest.approx(2 / math.sqrt(6))
        assert scorer.similarity("2", "3") == pytest.approx(0.0)
        assert scorer.similarity("1", "3") == pytest.approx(1 / math.sqrt(3))

    def test_scores_sum_top_k_neighbours(self, tiny_split):
        scorer = item_knn_scores(tiny_split, k_neighbors=50)
        # u3's profile is {1, 3}
        assert scorer.score("u3", "2") == pytest.approx(2 / math.sqrt(6))
        assert scorer.score("u1", "3") == pytest.approx(1 / math.sqrt(3))
        one = item_knn_scores(tiny_split, k_neighbors=1)
        assert one.score("u1", "1") == pytest.approx(1.0)

    def test_unrated_item_scores_zero(self, tiny_split):
        assert item_knn_scores(tiny_split, 5).score("u1", "4") == pytest.approx(0.0)

    def test_invalid_k(self, tiny_split):
        with pytest.raises(ValueError):
            item_knn_scores(tiny_split, k_neighbors=0)


class TestCandidates:
    def test_pool_excludes_seen_items_and_is_sorted(self, tiny_split):
        pools = top_n_candidates(item_knn_scores(tiny_split, 50), tiny_split, n=2)
        assert pools["u3"].item_ids == ("2", "4")
        assert pools["u1"].item_ids == ("3", "4")
        assert not pools["u3"].short

    def test_short_pool_is_flagged(self, tiny_split):
        pools = top_n_candidates(most_popular_scores(tiny_split), tiny_split, n=5)
        assert len(pools["u1"]) == 2
        assert pools["u1"].short

    def test_ties_break_on_item_id(self, tiny_split):
        scorer = ImportedScorer({"u1": {"4": 1.0, "3": 1.0}})
        pools = top_n_candidates(scorer, tiny_split, n=2)
        assert pools["u1"].item_ids == ("3", "4")

    def test_users_without_scores_are_dropped(self, tiny_split):
        pools = top_n_candidates(ImportedScorer({"u1": {"3": 0.5}}), tiny_split, n=3)
        assert set(pools) == {"u1"}

    def test_unsorted_list_rejected(self):
        with pytest.raises(ValueError):
            CandidateList("u", (("1", 0.1), ("2", 0.9)))

    def test_top(self):
        pool = CandidateList("u", (("5", 0.9), ("1", 0.5), ("2", 0.5)))
        assert pool.top(2) == ("5", "1")

    def test_no_train_item_is_ever_a_candidate(self, make_catalog):
        rng = np.random.default_rng(61)
        catalog = make_catalog({str(i): "A|B" if i % 2 else "C" for i in range(25)})
        for _ in range(30):
            rows = []
            for u in range(1, 9):
                items = rng.choice(25, size=int(rng.integers(2, 12)), replace=False)
                rows.extend(Interaction(f"u{u}", str(int(i)), 4.0, t) for t, i in enumerate(items))
            split = temporal_split(rows, 0.8, items=catalog)
            seen = {u: {x.item_id for x in xs} for u, xs in split.train_by_user().items()}
            n = int(rng.integers(1, 20))
            for scorer in (most_popular_scores(split), item_knn_scores(split, int(rng.integers(1, 10)))):
                for u, pool in top_n_candidates(scorer, split, n).items():
                    assert not set(pool.item_ids) & seen[u]
                    assert len(pool) <= n
                    assert set(pool.item_ids) <= set(catalog)


class TestScoreImport:
    def test_export_then_import(self, tiny_split, tmp_path):
        pools = top_n_candidates(item_knn_scores(tiny_split, 50), tiny_split, n=2)
        path = export_scores(pools, tmp_path / "scores.csv")
        imported = import_scores(path)
        again = top_n_candidates(imported, tiny_split, n=2)
        assert again == pools

    def test_duplicate_pair(self, tmp_path):
        p = tmp_path / "scores.csv"
        p.write_text("userId,itemId,score\nu1,3,0.5\nu1,3,0.7\n")
        with pytest.raises(DataError, match="duplicate") as exc:
            import_scores(p)
        assert exc.value.line == 3

    @pytest.mark.parametrize("raw", ["abc", "inf", "nan"])
    def test_bad_score(self, tmp_path, raw):
        p = tmp_path / "scores.csv"
        p.write_text(f"userId,itemId,score\nu1,3,{raw}\n")
        with pytest.raises(DataError) as exc:
            import_scores(p)
        assert exc.value.line == 2

    def test_missing_header_column(self, tmp_path):
        p = tmp_path / "scores.csv"
        p.write_text("userId,itemId\nu1,3\n")
        with pytest.raises(DataError):
            import_scores(p)
