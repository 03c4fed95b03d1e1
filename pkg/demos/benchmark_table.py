"""Exact risks of the three benchmark problems against Sobol counting.

Each problem has a closed-form failure risk (an ellipsoid volume, an
arcsine band, a union of balls). Counting defects over a 200000-point
Sobol design using the true response must land within Monte Carlo noise of
the exact value; this is the sanity check that the geometry formulas and
the defect rules describe the same sets.
"""

from riskfield.cli import main as cli_main

if __name__ == "__main__":
    raise SystemExit(cli_main(["benchmarks"]))
