from __future__ import annotations

import datetime as _dt
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Optional

from ..rerank.problem import RerankSolution, SolveStatus


def _now_iso() -> str:
    now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0)
    return now.isoformat().replace("+00:00", "Z")


def new_run_id() -> str:
    # Compact UTC timestamp suitable for filenames
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%SZ")


@dataclass
class EngineStats:
    users: int = 0
    optimal: int = 0
    feasible_with_gap: int = 0
    heuristic: int = 0
    short_pools: int = 0
    max_bound_gap: float = 0.0
    total_nodes: int = 0
    seconds: float = 0.0
    lambda1: Optional[float] = None

    @classmethod
    def from_solutions(cls, solutions: Mapping[str, RerankSolution], seconds: float, lambda1: Optional[float]) -> "EngineStats":
        s = cls(seconds=round(seconds, 3), lambda1=lambda1)
        for sol in solutions.values():
            s.users += 1
            if sol.status is SolveStatus.OPTIMAL:
                s.optimal += 1
            elif sol.status is SolveStatus.FEASIBLE_WITH_GAP:
                s.feasible_with_gap += 1
                s.max_bound_gap = max(s.max_bound_gap, sol.bound_gap)
            else:
                s.heuristic += 1
            s.short_pools += int(sol.short)
            s.total_nodes += sol.nodes_explored
        return s


TOTAL_KEYS = ("users_solved", "budget_exhausted", "total_nodes", "engines_done")


class RunFileLogger:
    """Per-run, per-engine logger that writes a single JSON file.

    File schema:
    {
      "version": 1,
      "run_id": "...",
      "root": "/abs/path/to/output",
      "command": "run",
      "started_at": "ISO",
      "updated_at": "ISO",
      "totals": {"users_solved":0,"budget_exhausted":0,"total_nodes":0,"engines_done":0},
      "engines": {
        "ccl": {"users":..., "optimal":..., "feasible_with_gap":..., "max_bound_gap":..., "lambda1":..., "last_updated": "ISO"}
      }
    }

    Carries timestamps, so it stays out of the artifact manifest.
    """

    def __init__(self, root: Path, run_id: str, command: str) -> None:
        self.root = Path(root)
        self.run_id = run_id
        self.command = command
        self.path = self.root / "logs" / f"run-{run_id}.json"
        self._ensure_file()

    def _ensure_file(self) -> None:
        if self.path.exists():
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "version": 1,
            "run_id": self.run_id,
            "root": str(self.root.resolve()),
            "command": self.command,
            "started_at": _now_iso(),
            "updated_at": _now_iso(),
            "totals": {k: 0 for k in TOTAL_KEYS},
            "engines": {},
        }
        self.path.write_text(json.dumps(payload, indent=2))

    def _load(self) -> dict:
        try:
            return json.loads(self.path.read_text())
        except Exception:
            return {}

    def _save(self, data: dict) -> None:
        data["updated_at"] = _now_iso()
        self.path.write_text(json.dumps(data, indent=2))

    def write_engine(self, engine: str, stats: EngineStats) -> None:
        """Idempotent per-engine update with additive totals.

        If the engine already exists, its previous contribution is subtracted
        from totals before the new one is added.
        """
        data = self._load()
        if not data:
            self._ensure_file()
            data = self._load()
        engines = data.setdefault("engines", {})
        totals = data.setdefault("totals", {k: 0 for k in TOTAL_KEYS})

        prev = engines.get(engine)
        if prev:
            totals["users_solved"] -= int(prev.get("users", 0))
            totals["budget_exhausted"] -= int(prev.get("feasible_with_gap", 0))
            totals["total_nodes"] -= int(prev.get("total_nodes", 0))
        else:
            totals["engines_done"] += 1

        totals["users_solved"] += stats.users
        totals["budget_exhausted"] += stats.feasible_with_gap
        totals["total_nodes"] += stats.total_nodes

        entry = asdict(stats)
        entry["last_updated"] = _now_iso()
        engines[engine] = entry
        self._save(data)

