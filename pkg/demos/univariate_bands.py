"""Credible bands on a five-point design, Student field versus Gaussian.

Both models share the same generalized-least-squares location, but the
Student field inflates the predictive scale by the mean-estimation term
and by 1/(n-2) instead of 1/n, and its 90% quantile multiplier at three
degrees of freedom is 2.35 instead of 1.64. The band it produces strictly
contains the Gaussian one everywhere off the data and collapses to a point
on each observation. Run this script to print both bands side by side and
write them to band.csv for plotting.
"""

import numpy as np

from riskfield.cli import write_table
from riskfield.kernels import KernelSpec, TrainingSet
from riskfield.mle import gaussian_mle_constants
from riskfield.posterior import (
    condition_gaussian,
    condition_student,
    credible_band,
)


def main() -> None:
    x = np.array([[-4.0], [-3.0], [-1.0], [0.0], [2.0]])
    y = np.array([-2.0, 0.0, 1.0, 2.0, -1.0])
    train = TrainingSet(x, y, np.array([[-4.0, 2.0]]))
    spec = KernelSpec(gamma=2.0, length_scales=(0.1,))

    student = condition_student(train, spec)
    mu, variance = gaussian_mle_constants(train, spec)
    gauss = condition_gaussian(train, spec, mu, variance)
    print(f"Student posterior: {student.dof} degrees of freedom")
    print(f"Gaussian constants: mean {mu:.4f}, variance {variance:.4f}")

    grid = np.linspace(-4.0, 2.0, 121)[:, None]
    location, _ = student.predict_many(grid)
    s_lo, s_hi = credible_band(student, grid, 0.9)
    g_lo, g_hi = credible_band(gauss, grid, 0.9)

    print(f"\n{'x':>7} {'location':>9} {'student 90%':>22} {'gaussian 90%':>22}")
    for i in range(0, 121, 10):
        print(
            f"{grid[i, 0]:>7.2f} {location[i]:>9.4f} "
            f"[{s_lo[i]:>9.4f}, {s_hi[i]:>9.4f}] "
            f"[{g_lo[i]:>9.4f}, {g_hi[i]:>9.4f}]"
        )

    rows = [
        [float(g), float(lc), float(a), float(b), float(c), float(d)]
        for g, lc, a, b, c, d in zip(grid[:, 0], location, s_lo, s_hi, g_lo, g_hi)
    ]
    write_table(
        "band.csv",
        ["x", "location", "student_lo", "student_hi", "gauss_lo", "gauss_hi"],
        rows,
    )
    print("\nwrote band.csv")


if __name__ == "__main__":
    main()
