from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from scipy.integrate import IntegrationWarning

from calibrec.calibration.confidence import (
    ACTIVE,
    INACTIVE,
    SEMI_ACTIVE,
    BetaPosterior,
    assign_user_groups,
    beta_posterior_from_counts,
    confidence_weight,
    oracle_frame,
    oracle_miscalibration,
    prob_greater,
)
from calibrec.calibration.distributions import (
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
from calibrec.data.models import Interaction, ProfileEntry, SplitDataset, UserProfile
from calibrec.errors import ConfigError


def dist(**probs) -> CategoryDistribution:
    return CategoryDistribution(probs)


class TestCategoryDistribution:
    def test_rejects_bad_mass(self):
        with pytest.raises(ValueError):
            dist(A=0.6, B=0.6)
        with pytest.raises(ValueError):
            dist(A=1.2, B=-0.2)
        with pytest.raises(ValueError):
            CategoryDistribution({})

    def test_missing_category_is_zero(self):
        assert dist(A=1.0).get("B") == 0.0

    def test_item_spread_is_uniform(self, make_catalog):
        item = make_catalog({"1": "A|B|C"})["1"]
        assert item_category_spread(item).probs == pytest.approx({"A": 1 / 3, "B": 1 / 3, "C": 1 / 3})


class TestProfileAndListDistributions:
    def test_profile_weights_spreads(self, make_catalog):
        catalog = make_catalog({"1": "A|B", "2": "A"})
        profile = UserProfile("u", (ProfileEntry("1", 1.0, 0), ProfileEntry("2", 3.0, 1)))
        p = profile_distribution(profile, catalog)
        assert p.probs == pytest.approx({"A": (0.5 + 3.0) / 4, "B": 0.5 / 4})

    def test_uniform_list(self, make_catalog):
        catalog = make_catalog({"x": "A|B", "a": "A"})
        q = list_distribution(["x", "a"], catalog)
        assert q.probs == pytest.approx({"A": 0.75, "B": 0.25})

    def test_logarithmic_rank_weights(self, make_catalog):
        catalog = make_catalog({"1": "A", "2": "B"})
        q = list_distribution(["1", "2"], catalog, RankWeighting("logarithmic"))
        w2 = 1.0 / math.log2(3)
        assert q.get("A") == pytest.approx(1.0 / (1.0 + w2))
        assert q.get("B") == pytest.approx(w2 / (1.0 + w2))

    def test_empty_list(self, make_catalog):
        with pytest.raises(ValueError):
            list_distribution([], make_catalog({"1": "A"}))

    def test_unknown_rank_weighting(self):
        with pytest.raises(ConfigError):
            RankWeighting("linear")

    def test_ranks_are_one_based(self):
        with pytest.raises(ValueError):
            RankWeighting().weight(0)

    def test_uniform_list_matches_unit_weight_profile(self, make_catalog):
        rng = np.random.default_rng(8)
        cats = list("ABCDE")
        spec = {}
        for i in range(40):
            k = int(rng.integers(1, 4))
            spec[str(i)] = "|".join(rng.choice(cats, size=k, replace=False).tolist())
        catalog = make_catalog(spec)
        for _ in range(50):
            n = int(rng.integers(1, 15))
            items = [str(x) for x in rng.choice(40, size=n, replace=False)]
            profile = UserProfile("u", tuple(ProfileEntry(i, 1.0, t) for t, i in enumerate(items)))
            q = list_distribution(items, catalog)
            p = profile_distribution(profile, catalog)
            assert set(q.probs) == set(p.probs)
            assert q.probs == pytest.approx(p.probs, abs=1e-12)


class TestDivergences:
    def test_js_hand_value(self):
        assert js_divergence(dist(A=0.5, B=0.5), dist(A=1.0)) == pytest.approx(0.31128, abs=1e-4)

    def test_hellinger_hand_value(self):
        assert hellinger_distance(dist(A=0.5, B=0.5), dist(A=1.0)) == pytest.approx(0.5412, abs=1e-4)

    def test_total_variation_is_full_l1(self):
        assert total_variation(dist(A=0.7, B=0.3), dist(A=0.5, B=0.5)) == pytest.approx(0.4, abs=1e-15)

    def test_disjoint_supports_hit_the_upper_bounds(self):
        p, q = dist(A=1.0), dist(B=1.0)
        assert js_divergence(p, q) == pytest.approx(1.0)
        assert hellinger_distance(p, q) == pytest.approx(1.0)
        assert total_variation(p, q) == pytest.approx(2.0)

    def test_identical_distributions(self):
        p = dist(A=0.2, B=0.3, C=0.5)
        for name in ("js", "hellinger", "tv"):
            assert get_divergence(name)(p, p) == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_and_bounded_on_random_pairs(self):
        rng = np.random.default_rng(3)
        cats = list("ABCDE")
        for _ in range(100):
            p = CategoryDistribution.from_weights(dict(zip(cats, rng.dirichlet(np.ones(5)))))
            q = CategoryDistribution.from_weights(dict(zip(cats, rng.dirichlet(np.ones(5)))))
            for fn, hi in ((js_divergence, 1.0), (hellinger_distance, 1.0), (total_variation, 2.0)):
                assert fn(p, q) == pytest.approx(fn(q, p), abs=1e-12)
                assert 0.0 <= fn(p, q) <= hi

    def test_hellinger_squared_is_at_most_half_the_l1(self):
        rng = np.random.default_rng(17)
        cats = list("ABCDEF")
        for _ in range(200):
            m = int(rng.integers(2, 7))
            p = CategoryDistribution.from_weights(dict(zip(cats[:m], rng.dirichlet(np.ones(m)))))
            q = CategoryDistribution.from_weights(dict(zip(cats[:m], rng.dirichlet(np.ones(m) * 0.3))))
            assert hellinger_distance(p, q) ** 2 <= 0.5 * total_variation(p, q) + 1e-12

    def test_zero_exactly_on_equal_distributions(self):
        rng = np.random.default_rng(23)
        cats = list("ABCD")
        for _ in range(100):
            p = CategoryDistribution.from_weights(dict(zip(cats, rng.dirichlet(np.ones(4)))))
            q = CategoryDistribution.from_weights(dict(zip(cats, rng.dirichlet(np.ones(4)))))
            for fn in (js_divergence, hellinger_distance, total_variation):
                assert fn(p, p) == pytest.approx(0.0, abs=1e-12)
                assert fn(p, q) > 0.0

    def test_unknown_divergence(self):
        with pytest.raises(ConfigError):
            get_divergence("kl")

    def test_miscalibration_is_the_user_mean(self):
        assert miscalibration({"1": 0.2, "2": 0.4}) == pytest.approx(0.3)
        with pytest.raises(ValueError):
            miscalibration({})


class TestConfidenceWeight:
    def test_formula(self):
        w = confidence_weight({"a": 10, "b": 20, "c": 30})
        assert w.mean_profile_size == 20
        assert dict(w.weights) == {"a": 0.5, "b": 1.0, "c": 1.0}

    def test_scale_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            sizes = {str(i): int(v) for i, v in enumerate(rng.integers(1, 200, size=int(rng.integers(5, 40))))}
            scale = int(rng.integers(2, 10))
            w1 = confidence_weight(sizes)
            w2 = confidence_weight({u: n * scale for u, n in sizes.items()})
            for u in sizes:
                assert w2[u] == pytest.approx(w1[u], abs=1e-12)
            assert assign_user_groups(sizes) == assign_user_groups({u: n * scale for u, n in sizes.items()})

    def test_rejects_empty_profiles(self):
        with pytest.raises(ValueError):
            confidence_weight({"a": 0})
        with pytest.raises(ValueError):
            confidence_weight({})

    def test_weight_grows_with_profile_size(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            sizes = {str(i): int(v) for i, v in enumerate(rng.integers(1, 300, size=int(rng.integers(2, 40))))}
            w = confidence_weight(sizes)
            ordered = sorted(sizes, key=sizes.get)
            for smaller, larger in zip(ordered, ordered[1:]):
                assert w[smaller] <= w[larger] + 1e-12


class TestUserGroups:
    def test_partition_of_ten(self):
        groups = assign_user_groups({str(i): i for i in range(1, 11)})
        assert groups.counts() == {ACTIVE: 2, SEMI_ACTIVE: 6, INACTIVE: 2}
        assert groups.members(ACTIVE) == ("9", "10")
        assert groups.members(INACTIVE) == ("1", "2")

    def test_partition_of_five(self):
        groups = assign_user_groups({str(i): i for i in range(1, 6)})
        assert groups.counts() == {ACTIVE: 1, SEMI_ACTIVE: 3, INACTIVE: 1}

    def test_equal_sizes_break_on_user_id(self):
        groups = assign_user_groups({str(i): 3 for i in range(1, 6)})
        assert groups.members(ACTIVE) == ("1",)
        assert groups.members(INACTIVE) == ("5",)

    def test_too_few_users(self):
        with pytest.raises(ValueError):
            assign_user_groups({"1": 3, "2": 4})


class TestBetaAnalysis:
    def test_posterior_from_counts(self):
        assert beta_posterior_from_counts(90, 10) == BetaPosterior(91.0, 11.0)

    def test_prob_greater_of_identical_posteriors(self):
        x = BetaPosterior(91, 11)
        assert prob_greater(x, x) == pytest.approx(0.5, abs=1e-6)

    def test_prob_greater_against_monte_carlo(self):
        a, b = BetaPosterior(91, 11), BetaPosterior(10, 2)
        rng = np.random.default_rng(2024)
        wins, total = 0, 0
        for _ in range(10):
            xs = rng.beta(a.alpha, a.beta, size=1_000_000)
            ys = rng.beta(b.alpha, b.beta, size=1_000_000)
            wins += int(np.count_nonzero(xs > ys))
            total += xs.size
        assert prob_greater(a, b) == pytest.approx(wins / total, abs=1e-3)

    def test_complementary(self):
        a, b = BetaPosterior(5, 3), BetaPosterior(2, 7)
        assert prob_greater(a, b) + prob_greater(b, a) == pytest.approx(1.0, abs=1e-6)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            BetaPosterior(0.0, 1.0)
        with pytest.raises(ValueError):
            beta_posterior_from_counts(-1, 3)

    def test_extreme_posteriors(self):
        strong, weak = BetaPosterior(1000, 1), BetaPosterior(1, 1000)
        with warnings.catch_warnings():
            warnings.simplefilter("error", IntegrationWarning)
            assert prob_greater(strong, weak) == pytest.approx(1.0, abs=1e-6)
            assert prob_greater(weak, strong) == pytest.approx(0.0, abs=1e-6)
            assert prob_greater(BetaPosterior(2, 50), BetaPosterior(50, 2)) == pytest.approx(0.0, abs=1e-6)


def _oracle_population(make_catalog):
    """Active users' test matches their train mix, inactive users' test is all off-profile."""
    catalog = make_catalog({**{f"a{i}": "A" for i in range(30)}, **{f"b{i}": "B" for i in range(30)}})
    train, test = [], []

    def add(user, tr, te):
        train.extend(Interaction(user, i, 4.0, t) for t, i in enumerate(tr))
        test.extend(Interaction(user, i, 4.0, 100 + t) for t, i in enumerate(te))

    for u in ("1", "2"):  # active
        add(u, [f"a{i}" for i in range(10)] + [f"b{i}" for i in range(10)], ["a20", "b20"])
    for u in ("3", "4", "5", "6", "7", "8"):  # semi-active
        add(u, [f"a{i}" for i in range(5)] + [f"b{i}" for i in range(5)], ["a20", "a21"])
    for u in ("9", "10"):  # inactive
        add(u, [f"a{i}" for i in range(4)], ["b20", "b21"])
    split = SplitDataset(train=tuple(train), test=tuple(test), items=catalog)
    sizes = {}
    for x in split.train:
        sizes[x.user_id] = sizes.get(x.user_id, 0) + 1
    return split, assign_user_groups(sizes)


class TestOracleMiscalibration:
    def test_group_ordering(self, make_catalog):
        split, groups = _oracle_population(make_catalog)
        mc = oracle_miscalibration(split, groups)
        assert mc[INACTIVE] > mc[SEMI_ACTIVE] > mc[ACTIVE]
        assert mc[ACTIVE] == pytest.approx(0.0, abs=1e-12)
        assert mc[INACTIVE] == pytest.approx(1.0)

    def test_frame_schema(self, make_catalog):
        split, groups = _oracle_population(make_catalog)
        frame = oracle_frame(split, groups)
        assert list(frame.columns) == ["group", "js", "hellinger", "n_users"]
        assert frame["group"].tolist() == [ACTIVE, SEMI_ACTIVE, INACTIVE]
        assert frame["n_users"].tolist() == [2, 6, 2]
