"""Artifact storage.

Everything an experiment writes goes through ArtifactStore so each file gets a
sha256 in `manifest.json`. Two runs with identical config can be compared by
diffing manifests.

Layout under the output root:
  report.json, report.csv
  solutions/<engine>.csv
  candidates.csv
  sweeps/<engine>.csv
  figures/*.csv
  exclusions.txt
  manifest.json
  logs/run-<run_id>.json   (not in the manifest; carries timestamps)
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

import pandas as pd

MANIFEST_NAME = "manifest.json"


@dataclass
class SaveResult:
    path: Path
    size: int
    sha256: str


class ArtifactStore:
    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self._saved: Dict[str, SaveResult] = {}

    def _write_bytes(self, relpath: str | Path, data: bytes) -> SaveResult:
        path = self.root / relpath
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        res = SaveResult(path=path, size=len(data), sha256=hashlib.sha256(data).hexdigest())
        self._saved[Path(relpath).as_posix()] = res
        return res

    def save_text(self, relpath: str | Path, text: str) -> SaveResult:
        return self._write_bytes(relpath, text.encode("utf-8"))

    def save_json(self, relpath: str | Path, payload: dict) -> SaveResult:
        return self.save_text(relpath, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def save_frame(self, relpath: str | Path, df: pd.DataFrame) -> SaveResult:
        # lineterminator pinned so output is identical across platforms
        return self.save_text(relpath, df.to_csv(index=False, lineterminator="\n"))

    def write_manifest(self) -> SaveResult:
        """Merge this store's files into `manifest.json` (entries from earlier commands are kept)."""
        files = dict((self.read_manifest() or {}).get("files", {}))
        for rel, res in self._saved.items():
            if rel != MANIFEST_NAME:
                files[rel] = {"sha256": res.sha256, "size": res.size}
        return self.save_json(MANIFEST_NAME, {"version": 1, "files": dict(sorted(files.items()))})

    def read_manifest(self) -> Optional[dict]:
        p = self.root / MANIFEST_NAME
        if not p.exists():
            return None
        try:
            return json.loads(p.read_text())
        except Exception:
            return None
