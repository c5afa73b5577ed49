"""moocmetrics: learning analytics for MOOC interaction logs.

Pipeline: raw log text -> parsed records -> classified events -> append-only
store -> indicators / cohorts / clusters / battery statuses -> CSV, JSON and
de-identified exports, all reachable through the CLI and the HTTP service.
"""

__version__ = "0.1.0"
