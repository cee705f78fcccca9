"""Frozen tolerances and decision thresholds.

The empirical constants were calibrated once on the independence model at
n = 10_000 over 100 seeds (see tests/test_characterize.py) and are not tuned
per dataset.
"""
import os

# exact-mode decisions
EXACT_TOL = 1e-9
COMONOTONE_TOL = 1e-10

# empirical-mode decisions: flag iff statistic <= C / sqrt(n)
INDEPENDENCE_C = 2.5
UNCORRELATED_C = 3.0
CONCORDANCE_C = 3.0
UNIFORMITY_C = 1.95

GRID_LEVELS = 20
BLOCK_TOL = 1e-9

TRUNCATION_TAIL_MAX = 1e-9
MASS_TOL = 1e-6
LAW_MASS_TOL = 1e-12

DEFAULT_SEED = 42
EX3_5_ATOMS = 40
SQUARE_PIECES = 64


def thread_cap() -> int:
    """Worker cap from ``DEPMARK_THREADS`` (defaults to the CPU count)."""
    raw = os.environ.get("DEPMARK_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1
