"""Entropy-driven enrichment: spend new evaluations where the field is vague.

Starting from a small design, each round proposes a batch of points at
maxima of the posterior differential entropy (equivalently, of the
predictive scale), evaluates the true response there, refits, and
re-estimates the risk. The 90% interval narrows as the budget grows; the
loop stops at the width target or after the round limit.
"""

import numpy as np

from riskfield.adaptive import AscentConfig, enrichment_loop
from riskfield.benchmarks import reference_problems
from riskfield.mle import SearchConfig

SEED = 5


def main() -> None:
    problem = reference_problems()[0]
    exact = problem.theoretical_risk()
    print(f"problem: {problem.name}, r_t = {exact:.6f}")

    result = enrichment_loop(
        problem,
        initial=30,
        rounds=6,
        batch=10,
        width_target=0.05,
        seed=SEED,
        search=SearchConfig(seed=SEED),
        ascent=AscentConfig(starts=16, max_iterations=80),
        memberships=600,
        mixture_draws=10_000,
    )

    print(f"\n{'round':>5} {'n':>4} {'mean':>8} {'90% interval':>20} {'width':>7}")
    for record in result.records:
        print(
            f"{record.round_index:>5} {record.size:>4} {record.mean:>8.4f} "
            f"[{record.lo90:>8.4f}, {record.hi90:>8.4f}] {record.width:>7.4f}"
        )

    lo, hi = result.summary.interval(0.9)
    print(f"\nfinal design: {result.train.size} evaluations")
    print(f"final interval: [{lo:.4f}, {hi:.4f}], covers r_t: {lo <= exact <= hi}")
    print(f"new points added: {result.train.size - 30}")
    print(
        "largest remaining entropy: "
        f"{max(r.max_entropy for r in result.records):.3f}"
    )
    assert np.isfinite(result.summary.mean)


if __name__ == "__main__":
    main()
