"""Failure risk of the quadric benchmark from 80 surrogate evaluations.

The pipeline: sample a design, evaluate the true response there, calibrate
the kernel by maximum likelihood, condition the Student field, turn every
factor point into a membership probability (its posterior chance of being
defective), and summarize the resulting risk distribution as a beta
mixture. The exact risk is known in closed form for this problem, so the
final interval can be checked against the truth.
"""

import numpy as np

from riskfield.benchmarks import reference_problems
from riskfield.kernels import TrainingSet
from riskfield.mle import SearchConfig, calibrate
from riskfield.posterior import condition_student
from riskfield.risk import (
    UniformBoxSampler,
    beta_mixture_stats,
    risk_distribution_mc,
)

SEED = 11
DESIGN_SIZE = 80
MEMBERSHIPS = 1000


def main() -> None:
    problem = reference_problems()[0]
    response, fail = problem.risk_task()
    exact = problem.theoretical_risk()
    print(f"problem: {problem.name}, D = {problem.dimension}, r_t = {exact:.6f}")

    points = UniformBoxSampler(problem.box, SEED).sample(DESIGN_SIZE)
    train = TrainingSet(points, response(points), problem.box)
    result = calibrate(train, "student", SearchConfig(seed=SEED))
    print(
        f"calibrated: gamma = {result.spec.gamma:.4f}, "
        f"length scales = {np.round(result.spec.length_scales, 3)}"
    )

    posterior = condition_student(train, result.spec)
    sampler = UniformBoxSampler(problem.box, SEED + 1)
    dist = risk_distribution_mc(posterior, fail, sampler, MEMBERSHIPS)
    print(
        f"memberships: {dist.size} points, "
        f"{int(np.sum(dist.values > 0.5))} more likely defective than not"
    )

    summary = beta_mixture_stats(dist, levels=(0.9,), draws=20_000, seed=SEED)
    lo, hi = summary.interval(0.9)
    print(f"risk mean: {summary.mean:.6f}")
    print(f"90% interval: [{lo:.6f}, {hi:.6f}]")
    print(f"covers the exact risk: {lo <= exact <= hi}")


if __name__ == "__main__":
    main()
