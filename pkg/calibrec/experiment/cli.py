from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..config import ENGINE_NAMES, ExperimentConfig, load_config
from ..errors import CalibrecError
from ..logging_setup import configure_logging

logger = logging.getLogger(__name__)

# flag dest -> ExperimentConfig field
_FLAG_FIELDS = (
    "ratings_path", "items_path", "train_fraction", "N", "K", "scorer", "k_neighbors", "scores_path",
    "engines", "rank_weighting", "recency", "recency_half_life", "greedy_weight", "lambda1", "lambda_grid",
    "sweep_divergence", "max_nodes", "max_seconds", "strict", "workers", "alpha", "output_dir", "seed",
    "progress", "log_level", "log_json",
)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    ap = _Parser(add_help=False)
    ap.add_argument("--config", help="YAML config file (flags override its values)")
    ap.add_argument("--ratings", dest="ratings_path", help="Ratings file (.csv or MovieLens-1M .dat)")
    ap.add_argument("--items", dest="items_path", help="Item/genre file (.csv or .dat)")
    ap.add_argument("--train-fraction", dest="train_fraction", type=float, help="Per-user temporal train share (default 0.8)")
    ap.add_argument("--n-candidates", dest="N", type=int, help="Candidate pool size N (default 100)")
    ap.add_argument("--k", dest="K", type=int, help="List length K (default 20)")
    ap.add_argument("--scorer", choices=["popularity", "itemknn", "import"], help="Relevance scorer (default itemknn)")
    ap.add_argument("--k-neighbors", dest="k_neighbors", type=int, help="Item-KNN neighbors (default 50)")
    ap.add_argument("--scores", dest="scores_path", help="Score file for --scorer import")
    ap.add_argument("--engines", help=f"Comma-separated subset of {','.join(ENGINE_NAMES)}")
    ap.add_argument("--rank-weighting", dest="rank_weighting", choices=["uniform", "logarithmic"], help="Evaluation-time rank weights")
    ap.add_argument("--recency", choices=["uniform", "exponential"], help="Profile recency weights")
    ap.add_argument("--recency-half-life", dest="recency_half_life", type=float, help="Half-life in ranks (exponential)")
    ap.add_argument("--greedy-weight", dest="greedy_weight", type=float, help="Calibration weight for the greedy engine")
    ap.add_argument("--lambda1", type=float, help="Fixed lambda1 (skip the sweep)")
    ap.add_argument("--lambda-grid", dest="lambda_grid", help="Comma-separated lambda1 grid")
    ap.add_argument("--sweep-divergence", dest="sweep_divergence", choices=["js", "hellinger"], help="MC used in nDCG/MC")
    ap.add_argument("--max-nodes", dest="max_nodes", type=int, help="Branch-and-bound node budget per user")
    ap.add_argument("--max-seconds", dest="max_seconds", type=float, help="Branch-and-bound time budget per user")
    ap.add_argument("--strict", action="store_const", const=True, default=None, help="Exit 3 if any user exhausts the budget")
    ap.add_argument("--workers", type=int, help="Process pool size for re-ranking")
    ap.add_argument("--alpha", type=float, help="Significance level (default 0.05)")
    ap.add_argument("--output", dest="output_dir", help="Output directory")
    ap.add_argument("--seed", type=int, help="Seed for synthetic data")
    ap.add_argument("--progress", action="store_const", const=True, default=None, help="Show progress bars")
    ap.add_argument("--log-level", dest="log_level", help="Logging level (default INFO)")
    ap.add_argument("--log-json", dest="log_json", action="store_const", const=True, default=None, help="JSON log lines")
    return ap


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = _Parser("calibrec", description="Confidence-aware calibrated re-ranking experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="Full pipeline for every configured engine")
    sw = sub.add_parser("sweep", parents=[common], help="lambda1 sweep (nDCG / MC)")
    sw.add_argument("--sweep-engines", default="ccl", help="Engines to sweep (default ccl)")
    sub.add_parser("oracle", parents=[common], help="Test-as-oracle miscalibration per user group")
    mt = sub.add_parser("metrics", parents=[common], help="Evaluate exported solution files")
    mt.add_argument("--solutions", required=True, help="Directory with <engine>.csv solution exports")
    fx = sub.add_parser("fixture", parents=[common], help="Write the synthetic MovieLens-format fixture")
    fx.add_argument("--users", type=int, default=50, help="Number of users (default 50)")
    return ap


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: getattr(args, k, None) for k in _FLAG_FIELDS}


def _dispatch(args: argparse.Namespace, config: ExperimentConfig) -> int:
    # imported here so `calibrec --help` stays fast
    from .fixtures import write_fixture
    from .pipeline import evaluate_exports, run_experiment, run_oracle, run_sweep

    if args.command == "fixture":
        paths = write_fixture(config.output_dir, seed=config.seed, n_users=args.users)
        print(f"Ratings: {paths.ratings}")
        print(f"Items:   {paths.items}")
        return 0

    if args.command == "run":
        result = run_experiment(config)
        print(result.report.summary_table())
        for engine, lam in result.lambdas.items():
            print(f"lambda1[{engine}] = {lam:g}")
        print(f"Outputs: {Path(config.output_dir).resolve()}")
        print(f"Run log: {result.run_log}")
        return 0

    if args.command == "sweep":
        engines = [e.strip() for e in args.sweep_engines.split(",") if e.strip()]
        for engine, res in run_sweep(config, engines).items():
            print(f"[{engine}] chosen lambda1 = {res.chosen:g}")
            print(res.table.to_string(index=False))
        return 0

    if args.command == "oracle":
        frame = run_oracle(config)
        print(frame.to_string(index=False))
        return 0

    if args.command == "metrics":
        report = evaluate_exports(config, args.solutions)
        print(report.summary_table())
        return 0
    return 1


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = load_config(args.config, _overrides(args))
    except CalibrecError as e:
        configure_logging()
        logger.error(str(e))
        return e.exit_code
    configure_logging(config.log_level, config.log_json)

    try:
        return _dispatch(args, config)
    except CalibrecError as e:
        logger.error(str(e))
        return e.exit_code
    except KeyboardInterrupt:
        print("Interrupted.")
        return 130


if __name__ == '__main__':
    raise SystemExit(main())
