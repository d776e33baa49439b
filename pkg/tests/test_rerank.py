from __future__ import annotations

import time
from itertools import combinations

import numpy as np
import pytest

from calibrec.calibration.distributions import CategoryDistribution
from calibrec.errors import ConfigError, InstanceTooLarge, RerankError, SolverBudgetExceeded
from calibrec.rerank import (
    SolveStatus,
    SolverBudget,
    build_problem,
    calibration_slots,
    divergence_of,
    greedy_calibrated,
    read_solutions,
    rerank_all,
    solve_branch_and_bound,
    solve_exact_bruteforce,
)
from calibrec.rerank.problem import Candidate, RerankProblem, round_half_up, top_k_passthrough
from calibrec.rerank.runner import export_solutions, solutions_frame
from calibrec.scoring.candidates import CandidateList

BIG_BUDGET = SolverBudget(max_nodes=1_000_000, max_seconds=120.0)

# two relevant A items, two weak B items; the target wants half of each
SMALL = [("i1", 0.9, "A"), ("i2", 0.8, "A"), ("i3", 0.2, "B"), ("i4", 0.1, "B")]
HALF = {"A": 0.5, "B": 0.5}


class TestCalibrationSlots:
    @pytest.mark.parametrize(
        "weight,K,expected",
        [(0.5, 5, 3), (0.25, 10, 3), (1.0, 20, 20), (0.0, 20, 0), (0.3, 5, 2), (0.7, 5, 4)],
    )
    def test_round_half_up(self, weight, K, expected):
        assert calibration_slots(weight, K) == expected

    def test_round_half_up_plain(self):
        assert round_half_up(2.5) == 3
        assert round_half_up(2.4999) == 2

    def test_weight_out_of_range(self):
        with pytest.raises(ValueError):
            calibration_slots(1.5, 10)


class TestBuildProblem:
    def test_lambda_is_divided_by_user_count(self, make_catalog):
        catalog = make_catalog({"1": "A", "2": "B", "3": "A"})
        pool = CandidateList("u", (("1", 0.9), ("2", 0.5), ("3", 0.1)))
        p = build_problem("u", pool, CategoryDistribution(HALF), K=2, weight=1.0, lambda1_global=10.0, n_users=4, catalog=catalog)
        assert p.lambda1 == pytest.approx(2.5)
        assert (p.K, p.K1) == (2, 2)

    def test_short_pool(self, make_catalog):
        catalog = make_catalog({"1": "A", "2": "B", "3": "A"})
        pool = CandidateList("u", (("1", 0.9), ("2", 0.5), ("3", 0.1)), short=True)
        with pytest.raises(ValueError):
            build_problem("u", pool, CategoryDistribution(HALF), 5, 0.5, 1.0, 1, catalog)
        p = build_problem("u", pool, CategoryDistribution(HALF), 5, 0.5, 1.0, 1, catalog, allow_short=True)
        assert (p.K, p.K1, p.short) == (3, 2, True)

    def test_candidates_are_canonically_ordered(self, make_problem):
        p = make_problem([("b", 0.5, "A"), ("10", 0.5, "A"), ("2", 0.9, "B")], HALF, K=2, K1=1, lambda1=0.0)
        assert p.arrays.item_ids == ("2", "10", "b")

    def test_invalid_shapes(self, make_problem):
        with pytest.raises(ValueError):
            make_problem(SMALL, HALF, K=5, K1=2, lambda1=1.0)
        with pytest.raises(ValueError):
            make_problem(SMALL, HALF, K=2, K1=3, lambda1=1.0)
        with pytest.raises(ValueError):
            make_problem(SMALL, HALF, K=2, K1=2, lambda1=-1.0)


class TestExactSolvers:
    def test_calibration_beats_relevance_at_high_lambda(self, make_problem):
        p = make_problem(SMALL, HALF, K=2, K1=2, lambda1=10.0)
        for sol in (solve_exact_bruteforce(p), solve_branch_and_bound(p)):
            assert set(sol.selected) == {"i1", "i3"}
            assert sol.objective == pytest.approx(1.1)
            assert sol.divergence_part == pytest.approx(0.0)
            assert sol.status is SolveStatus.OPTIMAL

    def test_lambda_zero_returns_top_k(self, make_problem):
        p = make_problem(SMALL, HALF, K=2, K1=2, lambda1=0.0)
        for sol in (solve_exact_bruteforce(p), solve_branch_and_bound(p), greedy_calibrated(p)):
            assert sol.selected == ("i1", "i2")
            assert sol.objective == pytest.approx(1.7)

    def test_no_calibration_slots(self, make_problem):
        p = make_problem(SMALL, HALF, K=3, K1=0, lambda1=100.0)
        sol = solve_branch_and_bound(p)
        assert sol.selected == ("i1", "i2", "i3")
        assert sol.calibration_subset == frozenset()
        assert sol.nodes_explored == 1

    def test_selected_is_ranked_by_score(self, make_problem):
        p = make_problem(SMALL, HALF, K=3, K1=2, lambda1=10.0)
        sol = solve_branch_and_bound(p)
        assert list(sol.scores) == sorted(sol.scores, reverse=True)
        assert sol.calibration_subset <= set(sol.selected)
        assert len(sol.calibration_subset) == 2

    def test_branch_and_bound_matches_bruteforce(self, random_problem):
        rng = np.random.default_rng(20240611)
        started = time.perf_counter()
        for _ in range(200):
            p = random_problem(rng)
            exact = solve_exact_bruteforce(p)
            bnb = solve_branch_and_bound(p, BIG_BUDGET)
            assert bnb.status is SolveStatus.OPTIMAL
            assert bnb.objective == pytest.approx(exact.objective, abs=1e-9)
            assert set(bnb.selected) == set(exact.selected)
            assert bnb.divergence_part == pytest.approx(exact.divergence_part, abs=1e-9)
        assert time.perf_counter() - started < 60.0

    def test_tied_scores_keep_the_tie_break(self, random_problem):
        rng = np.random.default_rng(31337)
        for _ in range(400):
            p = random_problem(rng, n_max=10, score_levels=(0.25, 0.5, 0.75, 1.0))
            exact = solve_exact_bruteforce(p)
            bnb = solve_branch_and_bound(p, BIG_BUDGET)
            assert bnb.status is SolveStatus.OPTIMAL
            assert bnb.objective == pytest.approx(exact.objective, abs=1e-9)
            assert set(bnb.selected) == set(exact.selected)
            assert bnb.calibration_subset == exact.calibration_subset

    def test_dives_improve_on_greedy_within_small_budget(self, make_problem):
        items = [("a", 0.9, "A"), ("c", 0.85, "A"), ("d", 0.8, "A"), ("b", 0.7, "B"), ("x", 0.5, "A|B")]
        p = make_problem(items, HALF, K=2, K1=2, lambda1=1.0)
        assert greedy_calibrated(p).objective == pytest.approx(0.9)
        plain = solve_branch_and_bound(p, SolverBudget(max_nodes=2), dive=False)
        assert plain.objective == pytest.approx(0.9)
        dived = solve_branch_and_bound(p, SolverBudget(max_nodes=2))
        assert set(dived.selected) == {"a", "b"}
        assert dived.objective == pytest.approx(1.6)

    def test_full_calibration_limit(self, random_problem):
        rng = np.random.default_rng(99)
        for _ in range(60):
            p = random_problem(rng, n_max=9, k_max=4, rational_target=True, full_calibration=True)
            p = type(p)(p.user_id, p.candidates, p.target, p.K, p.K1, 1e6)
            best_tv = min(divergence_of(p, c) for c in combinations(range(p.n), p.K1))
            sol = solve_branch_and_bound(p, BIG_BUDGET)
            assert sol.divergence_part == pytest.approx(best_tv, abs=1e-9)

    def test_divergence_never_grows_with_lambda(self, random_problem):
        rng = np.random.default_rng(5)
        for _ in range(40):
            p = random_problem(rng, n_max=10, k_max=4)
            previous = None
            for lam in (0.0, 0.5, 2.0, 8.0, 50.0):
                q = type(p)(p.user_id, p.candidates, p.target, p.K, p.K1, lam)
                sol = solve_branch_and_bound(q, BIG_BUDGET)
                if previous is not None:
                    assert sol.divergence_part <= previous + 1e-9
                previous = sol.divergence_part

    def test_bruteforce_guard(self, random_problem):
        rng = np.random.default_rng(1)
        p = random_problem(rng)
        big = RerankProblem(
            "u",
            tuple(Candidate(str(i), float(s), {"A": 0.5, "B": 0.5}) for i, s in enumerate(rng.random(60))),
            p.target,
            K=20,
            K1=10,
            lambda1=1.0,
        )
        with pytest.raises(InstanceTooLarge):
            solve_exact_bruteforce(big)


class TestBudget:
    def test_gap_brackets_the_optimum(self, random_problem):
        rng = np.random.default_rng(42)
        exhausted = 0
        for _ in range(50):
            p = random_problem(rng, n_max=12, k_max=5, lam_max=5.0)
            p = type(p)(p.user_id, p.candidates, p.target, p.K, p.K, max(p.lambda1, 1.0))
            exact = solve_exact_bruteforce(p)
            sol = solve_branch_and_bound(p, SolverBudget(max_nodes=1, max_seconds=60.0))
            assert sol.objective <= exact.objective + 1e-9
            if sol.status is SolveStatus.FEASIBLE_WITH_GAP:
                exhausted += 1
                assert sol.objective + sol.bound_gap >= exact.objective - 1e-9
            else:
                assert sol.objective == pytest.approx(exact.objective, abs=1e-9)
        assert exhausted > 0

    def test_no_incumbent_raises(self, make_problem):
        p = make_problem(SMALL, HALF, K=3, K1=2, lambda1=10.0)
        with pytest.raises(SolverBudgetExceeded):
            solve_branch_and_bound(p, SolverBudget(max_nodes=1), seed_with_greedy=False, dive=False)

    def test_invalid_budget(self):
        with pytest.raises(ValueError):
            SolverBudget(max_nodes=0)


class TestGreedy:
    def test_greedy_is_suboptimal_on_witness(self, make_problem):
        # greedy grabs the two-genre item first and cannot recover
        p = make_problem([("x", 0.5, "A|B"), ("a", 0.9, "A"), ("b", 0.9, "B")], HALF, K=2, K1=2, lambda1=1.0)
        greedy = greedy_calibrated(p)
        exact = solve_exact_bruteforce(p)
        assert set(greedy.selected) == {"x", "a"}
        assert greedy.objective == pytest.approx(0.9)
        assert exact.objective == pytest.approx(1.8)
        assert exact.objective - greedy.objective >= 1e-6
        assert greedy.status is SolveStatus.HEURISTIC

    def test_greedy_never_beats_exact(self, random_problem):
        rng = np.random.default_rng(8)
        for _ in range(50):
            p = random_problem(rng, n_max=9, k_max=4)
            assert greedy_calibrated(p).objective <= solve_exact_bruteforce(p).objective + 1e-9


class TestRunner:
    def _problems(self, make_problem):
        return [
            make_problem(SMALL, HALF, K=2, K1=2, lambda1=10.0, user_id="2"),
            make_problem(SMALL, HALF, K=2, K1=1, lambda1=10.0, user_id="10"),
            make_problem(SMALL, HALF, K=3, K1=2, lambda1=0.5, user_id="1"),
        ]

    def test_results_are_keyed_and_sorted(self, make_problem):
        out = rerank_all(self._problems(make_problem), "ccl")
        assert list(out) == ["1", "2", "10"]
        assert set(out["2"].selected) == {"i1", "i3"}

    def test_none_engine_is_top_k(self, make_problem):
        out = rerank_all(self._problems(make_problem), "none")
        assert out["2"].selected == ("i1", "i2")
        assert out["2"].lambda1 == 0.0
        assert out["2"].calibration_subset == frozenset({"i1", "i2"})

    def test_process_pool_matches_serial(self, make_problem):
        problems = self._problems(make_problem)
        assert rerank_all(problems, "ccl", workers=2) == rerank_all(problems, "ccl", workers=1)

    def test_cl_requires_full_calibration(self, make_problem):
        with pytest.raises(RerankError) as exc:
            rerank_all(self._problems(make_problem), "cl")
        assert exc.value.user_id == "10"

    def test_unknown_engine(self, make_problem):
        with pytest.raises(ConfigError):
            rerank_all(self._problems(make_problem), "magic")

    def test_export_and_read_back(self, make_problem, tmp_path):
        out = rerank_all(self._problems(make_problem), "ccl")
        frame = solutions_frame(out, "ccl")
        assert list(frame.columns) == ["userId", "itemId", "rank", "score", "inCalibrationSubset", "engine"]
        assert frame["inCalibrationSubset"].isin([0, 1]).all()
        path = export_solutions(out, "ccl", tmp_path / "ccl.csv")
        lists = read_solutions(path)
        assert lists == {u: list(s.selected) for u, s in out.items()}

    def test_passthrough_forces_lambda_zero(self, make_problem):
        p = make_problem(SMALL, HALF, K=2, K1=1, lambda1=10.0)
        sol = top_k_passthrough(p)
        assert sol.selected == ("i1", "i2")
        assert sol.objective == pytest.approx(1.7)
