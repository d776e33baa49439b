from .context import ExperimentContext, build_problems, prepare_context, run_engine
from .figures import emit_figures_data
from .fixtures import write_fixture
from .pipeline import ExperimentResult, evaluate_exports, run_experiment, run_oracle, run_sweep
from .sweep import SweepResult, choose_lambda, chosen_at_upper_edge, lambda_sweep

__all__ = [
    "ExperimentContext",
    "ExperimentResult",
    "SweepResult",
    "build_problems",
    "choose_lambda",
    "chosen_at_upper_edge",
    "emit_figures_data",
    "evaluate_exports",
    "lambda_sweep",
    "prepare_context",
    "run_engine",
    "run_experiment",
    "run_oracle",
    "run_sweep",
    "write_fixture",
]
