"""
Calibrated recommendation re-ranking (confidence-aware), modular and desk-scale.

Layout
- config.py: experiment knobs (defaults < CALIBREC_* env < YAML file < CLI flags)
- errors.py: exception hierarchy mapped to CLI exit codes
- logging_setup.py: plain or JSON-lines logging
- storage.py: local artifact store with sha256 manifest
- data/: ratings + item-category ingest, temporal split, weighted profiles
- calibration/: category distributions, divergences, confidence weights, Beta analysis
- scoring/: popularity / item-KNN / imported scorers and top-N candidate pools
- rerank/: problem construction, brute-force oracle, branch-and-bound, greedy baseline
- evaluate/: accuracy + beyond-accuracy metrics, paired t-tests, report
- experiment/: pipeline, lambda sweep, figure tables, run log, CLI

Note: ids are strings everywhere; tie-breaks use data.models.id_key.
"""

__version__ = "0.1.0"
