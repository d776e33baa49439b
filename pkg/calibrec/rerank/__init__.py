from .bnb import solve_branch_and_bound
from .bruteforce import MAX_ENUMERATION, enumeration_size, solve_exact_bruteforce
from .greedy import greedy_calibrated
from .problem import (
    Candidate,
    RerankProblem,
    RerankSolution,
    SolveStatus,
    SolverBudget,
    build_problem,
    calibration_slots,
    divergence_of,
    relevance_of,
    top_k_passthrough,
)
from .runner import ENGINES, export_solutions, read_solutions, rerank_all, solutions_frame

__all__ = [
    "Candidate",
    "ENGINES",
    "MAX_ENUMERATION",
    "RerankProblem",
    "RerankSolution",
    "SolveStatus",
    "SolverBudget",
    "build_problem",
    "calibration_slots",
    "divergence_of",
    "enumeration_size",
    "export_solutions",
    "greedy_calibrated",
    "read_solutions",
    "relevance_of",
    "rerank_all",
    "solutions_frame",
    "solve_branch_and_bound",
    "solve_exact_bruteforce",
    "top_k_passthrough",
]
