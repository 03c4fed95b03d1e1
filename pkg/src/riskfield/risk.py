"""Failure-risk machinery.

The membership function M(x) = P(Y_x > m) grades each factor point by its
posterior probability of landing out of specification. Its push-forward
under the factor distribution P is summarized three ways:

* the alpha-level risk R(alpha) = P(M > alpha), estimated by n(alpha)/M
  over an M-point sample and represented exactly as a step tail function,
* the risk probability distribution: the beta mixture
  integral over alpha of Beta(n(alpha)+1, M-n(alpha)+1), summarized by its
  closed-form mean, a sampled std, and smallest credible intervals,
* a brute-force baseline: Beta(k+1, M-k+1) from k defectives observed in M
  true-function evaluations at Sobol points.

Step tails also support the threshold-transport operator L_eta
(composition of a CDF with the generalized inverse); with uniform eta the
operator is an exact involution on the step representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import betaincinv

from .errors import InvalidParametersError, MonotonicityViolationError
from .posterior import predict, student_cdf_upper, upper_tail_many
from .sobol import scale_to_box, sobol_points


@dataclass(frozen=True, eq=False)
class FailureSpec:
    """Out-of-specification event Y > threshold (upper orientation only)."""

    threshold: float

    def __post_init__(self):
        if not math.isfinite(self.threshold):
            raise InvalidParametersError("failure threshold must be finite")


@dataclass(frozen=True, eq=False)
class UniformBoxSampler:
    """Uniform factor distribution P over a box; draws are seed-reproducible."""

    box: np.ndarray
    seed: int = 0

    def sample(self, count: int) -> np.ndarray:
        box = np.atleast_2d(np.asarray(self.box, dtype=float))
        rng = np.random.default_rng(self.seed)
        return rng.uniform(box[:, 0], box[:, 1], size=(count, box.shape[0]))

    def describe(self) -> str:
        return f"uniform-box seed={self.seed}"


def membership(posterior, x: np.ndarray, fail: FailureSpec) -> float:
    """Grade of membership of x in the fuzzy failure set."""
    return student_cdf_upper(predict(posterior, x), fail.threshold)


def membership_many(posterior, x: np.ndarray, fail: FailureSpec) -> np.ndarray:
    locations, scales = posterior.predict_many(x)
    return upper_tail_many(locations, scales, posterior.dof, fail.threshold)


@dataclass(frozen=True, eq=False)
class MembershipSample:
    """Membership values over an M-point factor sample, with provenance."""

    values: np.ndarray
    descriptor: str = ""

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if v.size < 1:
            raise InvalidParametersError("at least one membership value is required")
        if np.any(v < 0.0) or np.any(v > 1.0):
            raise InvalidParametersError("membership values must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size


class RiskDistribution:
    """Empirical distribution of membership values over a factor sample.

    Holds the sorted values, the default alpha grid (distinct values plus
    {0, 1}), and the derived beta-mixture representation of the risk.
    """

    def __init__(self, sample: MembershipSample):
        self.sample = sample
        self.size = sample.size
        self.values = np.sort(sample.values)
        self.alpha_grid = np.unique(np.concatenate([[0.0], self.values, [1.0]]))

    def count_above(self, alpha) -> np.ndarray:
        """n(alpha) = number of membership values strictly above alpha."""
        a = np.asarray(alpha, dtype=float)
        return self.size - np.searchsorted(self.values, a, side="right")

    def tail(self) -> "StepTail":
        """R(alpha) = n(alpha)/M as an exact step function on [0, 1]."""
        levels = self.alpha_grid[(self.alpha_grid > 0.0) & (self.alpha_grid < 1.0)]
        knots = np.concatenate([[0.0], levels, [1.0]])
        heights = self.count_above(knots[:-1]) / self.size
        return StepTail(knots, heights)


def alpha_level_risk(dist: RiskDistribution, alpha: float) -> float:
    """MC estimate n(alpha)/M of the alpha-level risk P(M > alpha)."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParametersError(f"alpha must be in [0, 1], got {alpha}")
    return float(dist.count_above(alpha)) / dist.size


def risk_distribution_mc(
    posterior, fail: FailureSpec, sampler, count: int
) -> RiskDistribution:
    """Memberships at ``count`` points drawn from the factor distribution."""
    if count < 1:
        raise InvalidParametersError("the factor sample must contain at least 1 point")
    points = sampler.sample(count)
    values = membership_many(posterior, points, fail)
    descriptor = f"{sampler.describe()} M={count}"
    return RiskDistribution(MembershipSample(values, descriptor))


class StepTail:
    """Right-continuous non-increasing step function F on [0, 1], F(1) = 0.

    F(t) = values[i] on [knots[i], knots[i+1]); stored canonically (strictly
    increasing knots from 0 to 1, strictly decreasing values), so the
    generalized inverse is a pure array reversal and inverting twice
    reproduces the original arrays bit for bit.
    """

    def __init__(self, knots: np.ndarray, values: np.ndarray):
        k = np.atleast_1d(np.asarray(knots, dtype=float))
        v = np.atleast_1d(np.asarray(values, dtype=float))
        if k.size != v.size + 1:
            raise MonotonicityViolationError(
                f"{k.size} knots require {k.size - 1} interval values, got {v.size}"
            )
        if k[0] != 0.0 or k[-1] != 1.0:
            raise MonotonicityViolationError("knots must start at 0 and end at 1")
        if np.any(np.diff(k) < 0.0):
            raise MonotonicityViolationError("knots must be non-decreasing")
        if np.any(v < 0.0) or np.any(v > 1.0):
            raise MonotonicityViolationError("tail values must lie in [0, 1]")
        # Drop empty intervals, then merge equal adjacent values.
        keep = np.diff(k) > 0.0
        k = np.concatenate([k[:-1][keep], [1.0]])
        v = v[keep]
        if v.size and np.any(np.diff(v) > 0.0):
            raise MonotonicityViolationError("tail values must be non-increasing")
        first = np.ones(v.size, dtype=bool)
        first[1:] = v[1:] != v[:-1]
        self.knots = np.concatenate([k[:-1][first], [1.0]])
        self.values = v[first]

    def __call__(self, t) -> np.ndarray:
        """Evaluate F; right-continuous, with F(1) = 0."""
        tq = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.knots, tq, side="right") - 1
        idx = np.clip(idx, 0, self.values.size - 1)
        out = self.values[idx]
        return np.where(tq >= 1.0, 0.0, out)

    def generalized_inverse(self) -> "StepTail":
        """G(t) = sup{alpha in [0, 1] : F(alpha) > t}.

        For the canonical representation the inverse's knots are the
        reversed values (padded with 0 and 1) and its values are the
        reversed knots; no arithmetic touches the stored floats.
        """
        inv_knots = np.concatenate([[0.0], self.values[::-1], [1.0]])
        inv_values = self.knots[::-1]
        return StepTail(inv_knots, inv_values)


def apply_L_eta(tail: StepTail, eta_cdf: Callable | None = None) -> StepTail:
    """Transport a tail through the operator L_eta: K composed with F^{-1}.

    ``eta_cdf=None`` means uniform eta (K is the identity), for which the
    operator is an involution on step tails.
    """
    inverse = tail.generalized_inverse()
    if eta_cdf is None:
        return inverse
    mapped = np.asarray(eta_cdf(inverse.values), dtype=float)
    return StepTail(inverse.knots, mapped)


def first_moment(tail: StepTail) -> float:
    """Exact integral of the step function over [0, 1]."""
    widths = np.diff(tail.knots)
    return math.fsum([float(v) * float(w) for v, w in zip(tail.values, widths)])


@dataclass(frozen=True)
class BetaMixtureSummary:
    """Summary of the risk beta mixture.

    ``mean`` is the closed-form mixture mean (M * mean(memberships) + 1) /
    (M + 2); ``sample_mean``, ``std`` and the smallest credible intervals
    come from seeded Monte-Carlo draws of the mixture.
    """

    mean: float
    sample_mean: float
    std: float
    intervals: dict[float, tuple[float, float]] = field(default_factory=dict)
    draws: int = 0
    sample_size: int = 0

    def interval(self, level: float = 0.9) -> tuple[float, float]:
        return self.intervals[level]


def _smallest_interval(sorted_draws: np.ndarray, level: float) -> tuple[float, float]:
    n = sorted_draws.size
    window = max(1, math.ceil(level * n))
    if window >= n:
        return float(sorted_draws[0]), float(sorted_draws[-1])
    widths = sorted_draws[window - 1 :] - sorted_draws[: n - window + 1]
    start = int(np.argmin(widths))
    return float(sorted_draws[start]), float(sorted_draws[start + window - 1])


def beta_mixture_stats(
    dist: RiskDistribution,
    levels: tuple[float, ...] = (0.9,),
    draws: int = 20_000,
    seed: int = 0,
) -> BetaMixtureSummary:
    """Mean, std and smallest credible intervals of the risk mixture.

    The mixture is integral over alpha ~ uniform[0,1] of the beta posterior
    Beta(n(alpha)+1, M-n(alpha)+1). Its mean is computed in closed form
    (exactly (sum(memberships)+1)/(M+2), never 0 even with no observed
    failures); dispersion and intervals are estimated from ``draws``
    two-stage samples.
    """
    if draws < 1:
        raise InvalidParametersError("draws must be positive")
    for level in levels:
        if not 0.0 < level < 1.0:
            raise InvalidParametersError(f"interval level must be in (0, 1), got {level}")
    m_count = dist.size
    mean = (math.fsum(dist.values) + 1.0) / (m_count + 2.0)
    rng = np.random.default_rng(seed)
    alphas = rng.uniform(size=draws)
    above = dist.count_above(alphas)
    samples = rng.beta(above + 1.0, m_count - above + 1.0)
    samples.sort()
    intervals = {float(level): _smallest_interval(samples, level) for level in levels}
    return BetaMixtureSummary(
        mean=mean,
        sample_mean=float(np.mean(samples)),
        std=float(np.std(samples, ddof=1)) if draws > 1 else 0.0,
        intervals=intervals,
        draws=draws,
        sample_size=m_count,
    )


@dataclass(frozen=True)
class BetaSummary:
    """Closed-form Beta(k+1, M-k+1) posterior summary of a defective count."""

    sample_size: int
    defectives: int
    mean: float
    std: float
    intervals: dict[float, tuple[float, float]] = field(default_factory=dict)

    def interval(self, level: float = 0.9) -> tuple[float, float]:
        return self.intervals[level]


def _smallest_beta_interval(a: float, b: float, level: float) -> tuple[float, float]:
    """Shortest interval of mass ``level`` under Beta(a, b), by quantile scan."""

    def width(t: float) -> float:
        return float(betaincinv(a, b, t + level) - betaincinv(a, b, t))

    result = minimize_scalar(width, bounds=(0.0, 1.0 - level), method="bounded")
    t_best = float(result.x)
    # The objective is flat near the optimum; a coarse scan guards against
    # a local trap when the density is multimodal at the boundaries.
    for t in np.linspace(0.0, 1.0 - level, 21):
        if width(float(t)) < width(t_best):
            t_best = float(t)
    lo = float(betaincinv(a, b, t_best))
    hi = float(betaincinv(a, b, t_best + level))
    return lo, hi


def beta_count_summary(
    sample_size: int, defectives: int, levels: tuple[float, ...] = (0.9,)
) -> BetaSummary:
    """Beta posterior for a binomial defective count (uniform prior)."""
    if not 0 <= defectives <= sample_size:
        raise InvalidParametersError(
            f"defective count {defectives} outside [0, {sample_size}]"
        )
    a = defectives + 1.0
    b = sample_size - defectives + 1.0
    mean = a / (a + b)
    std = math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1.0)))
    intervals = {
        float(level): _smallest_beta_interval(a, b, float(level)) for level in levels
    }
    return BetaSummary(
        sample_size=sample_size,
        defectives=defectives,
        mean=mean,
        std=std,
        intervals=intervals,
    )


def bmc_baseline(
    problem, count: int, levels: tuple[float, ...] = (0.9,)
) -> BetaSummary:
    """Brute-force baseline: defective count over the first Sobol points.

    Evaluates the true benchmark response at ``count`` Sobol points mapped
    into the factor box and summarizes the Beta(k+1, M-k+1) posterior of
    the defective fraction. Deterministic.
    """
    if count < 1:
        raise InvalidParametersError("the Sobol sample must contain at least 1 point")
    points = scale_to_box(sobol_points(problem.dimension, count), problem.box)
    defectives = int(np.count_nonzero(problem.defective(points)))
    return beta_count_summary(count, defectives, levels)
