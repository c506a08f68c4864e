"""Shared test configuration.

Pin BLAS thread counts before numpy is imported anywhere so that every
matrix reduction runs with a fixed thread layout; results are then
bit-reproducible no matter how the suite is scheduled.
"""

import os
import sys

for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")


def pytest_terminal_summary(terminalreporter):
    """Repeat the one-line acceptance verdicts after the test summary."""
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance gates")
        for line in results:
            terminalreporter.write_line(line)
