"""End-to-end experiment runs and their artifacts."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence

from ..calibration.confidence import oracle_frame
from ..config import ExperimentConfig, dump_config
from ..data.ingest import format_exclusion_report
from ..errors import SolverBudgetExceeded
from ..evaluate.report import EvalReport, evaluate
from ..rerank.problem import RerankSolution, SolveStatus
from ..rerank.runner import read_solutions, solutions_frame
from ..scoring.candidates import candidates_frame
from ..storage import ArtifactStore
from .context import ExperimentContext, prepare_context, run_engine, stage
from .figures import emit_figures_data
from .run_log import EngineStats, RunFileLogger, new_run_id
from .sweep import SweepResult, lambda_sweep

logger = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    report: EvalReport
    output_dir: Path
    lambdas: Dict[str, float]
    solutions: Dict[str, Dict[str, RerankSolution]] = field(repr=False, default_factory=dict)
    run_log: Optional[Path] = None

    @property
    def budget_exhausted(self) -> Dict[str, int]:
        return {
            e: sum(1 for s in sols.values() if s.status is SolveStatus.FEASIBLE_WITH_GAP)
            for e, sols in self.solutions.items()
        }


def _save_sweep(store: ArtifactStore, sweep: SweepResult) -> None:
    store.save_frame(f"sweeps/{sweep.engine}.csv", sweep.table)


def solve_engine(ctx: ExperimentContext, engine: str, store: Optional[ArtifactStore] = None) -> tuple[float, Dict[str, RerankSolution]]:
    """Resolve lambda1 for the engine (fixed or swept) and solve every user."""
    if engine == "none":
        return 0.0, run_engine(ctx, engine, 0.0)
    if ctx.config.lambda1 is not None:
        return ctx.config.lambda1, run_engine(ctx, engine, ctx.config.lambda1)
    sweep = lambda_sweep(ctx, ctx.config.lambda_grid, engine=engine)
    if store is not None:
        _save_sweep(store, sweep)
    return sweep.chosen, sweep.solutions


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    config.validate()
    ctx = prepare_context(config)
    store = ArtifactStore(config.output_dir)
    run_id = new_run_id()
    run_logger = RunFileLogger(root=Path(config.output_dir), run_id=run_id, command="run")
    logger.info(f"Run ID: {run_id}; run log: {run_logger.path}")
    dump_config(config, Path(config.output_dir) / "logs" / f"config-{run_id}.yaml")

    store.save_text("exclusions.txt", format_exclusion_report(ctx.exclusions))
    store.save_frame("candidates.csv", candidates_frame({u: ctx.candidates[u] for u in ctx.users}))

    lambdas: Dict[str, float] = {}
    solutions: Dict[str, Dict[str, RerankSolution]] = {}
    for engine in config.engines:
        started = time.perf_counter()
        lam, sols = solve_engine(ctx, engine, store)
        lambdas[engine], solutions[engine] = lam, sols
        store.save_frame(f"solutions/{engine}.csv", solutions_frame(sols, engine))
        run_logger.write_engine(engine, EngineStats.from_solutions(sols, time.perf_counter() - started, lam))

    with stage("evaluate"):
        report = evaluate(
            solutions,
            ctx.split,
            ctx.groups,
            ctx.catalog,
            rank_weighting=ctx.rank_weighting,
            K=config.K,
            profiles=ctx.profiles,
            alpha=config.alpha,
            lambdas=lambdas,
        )
        store.save_json("report.json", report.to_json())
        store.save_text("report.csv", report.to_csv())
        for name, frame in emit_figures_data(report, oracle_frame(ctx.split, ctx.groups)).items():
            store.save_frame(f"figures/{name}", frame)
    store.write_manifest()

    result = ExperimentResult(
        report=report, output_dir=Path(config.output_dir), lambdas=lambdas, solutions=solutions, run_log=run_logger.path
    )
    exhausted = {e: n for e, n in result.budget_exhausted.items() if n}
    if exhausted:
        logger.warning(f"Solver budget exhausted (users per engine): {exhausted}")
        if config.strict:
            raise SolverBudgetExceeded(f"budget exhausted in strict mode: {exhausted}")
    return result


def run_sweep(config: ExperimentConfig, engines: Sequence[str] = ("ccl",)) -> Dict[str, SweepResult]:
    config.validate()
    ctx = prepare_context(config)
    store = ArtifactStore(config.output_dir)
    out: Dict[str, SweepResult] = {}
    for engine in engines:
        sweep = lambda_sweep(ctx, config.lambda_grid, engine=engine)
        _save_sweep(store, sweep)
        out[engine] = sweep
    store.write_manifest()
    return out


def run_oracle(config: ExperimentConfig):
    """Test-as-oracle miscalibration per activity group."""
    config.validate()
    ctx = prepare_context(config, with_candidates=False)
    with stage("oracle"):
        frame = oracle_frame(ctx.split, ctx.groups)
    store = ArtifactStore(config.output_dir)
    store.save_frame("figures/oracle_miscalibration.csv", frame)
    store.write_manifest()
    return frame


def evaluate_exports(config: ExperimentConfig, solutions_dir: str | Path) -> EvalReport:
    """Re-evaluate `solutions/<engine>.csv` files without re-solving."""
    config.validate()
    ctx = prepare_context(config)
    d = Path(solutions_dir)
    lists: Dict[str, Dict[str, list]] = {}
    with stage("metrics"):
        for engine in config.engines:
            path = d / f"{engine}.csv"
            if path.exists():
                lists[engine] = read_solutions(path)
        if not lists:
            raise FileNotFoundError(f"no solution files for engines {list(config.engines)} under {d}")
        report = evaluate(
            lists,
            ctx.split,
            ctx.groups,
            ctx.catalog,
            rank_weighting=ctx.rank_weighting,
            K=config.K,
            profiles=ctx.profiles,
            alpha=config.alpha,
        )
    store = ArtifactStore(config.output_dir)
    store.save_json("metrics/report.json", report.to_json())
    store.save_text("metrics/report.csv", report.to_csv())
    store.write_manifest()
    return report
